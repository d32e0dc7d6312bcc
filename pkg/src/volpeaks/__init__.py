"""Interactive direct volume renderer driven by peak-based transfer functions
and two-handed controller input."""

from .controllers import Button, ControllerSample, Device
from .geometry import Camera, ClipPlane, VolumeTransform
from .interaction import EditMode, Gains, InteractionContext, Session
from .net import (
    DEFAULT_PORT,
    PACKET_SIZE,
    ProtocolError,
    UdpReceiver,
    decode_packet,
    encode_sample,
)
from .render import FrameBuffer, RenderSettings, frame_volume, render_frame
from .service import (
    ServiceConfig,
    VolumeService,
    create_app,
    replay_trace,
    serve,
)
from .simulate import ScriptedTrajectory, run_simulator
from .transfer import (
    LookupTable,
    Peak,
    TransferFunction,
    TransferFunctionError,
    TransferFunctionFormatError,
)
from .volume import (
    Volume,
    VolumeFormatError,
    VolumeMeta,
    generate_phantom,
    load_volume,
    write_volume,
)

__version__ = "1.0.0"

__all__ = [
    "Button",
    "Camera",
    "ClipPlane",
    "ControllerSample",
    "DEFAULT_PORT",
    "Device",
    "EditMode",
    "FrameBuffer",
    "Gains",
    "InteractionContext",
    "LookupTable",
    "PACKET_SIZE",
    "Peak",
    "ProtocolError",
    "RenderSettings",
    "ScriptedTrajectory",
    "ServiceConfig",
    "Session",
    "TransferFunction",
    "TransferFunctionError",
    "TransferFunctionFormatError",
    "UdpReceiver",
    "Volume",
    "VolumeFormatError",
    "VolumeMeta",
    "VolumeService",
    "VolumeTransform",
    "create_app",
    "decode_packet",
    "encode_sample",
    "frame_volume",
    "generate_phantom",
    "load_volume",
    "render_frame",
    "replay_trace",
    "run_simulator",
    "serve",
    "write_volume",
]
