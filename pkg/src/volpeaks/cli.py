"""Command-line entry points: serve, render, simulate, phantom.

Exit codes: 0 success, 2 a required file is missing, 3 a file exists but its
content is invalid, 1 anything else.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .geometry import Camera, ClipPlane, VolumeTransform, rotation_x, rotation_y, mat_mul
from .net import DEFAULT_PORT
from .render import (
    DEFAULT_EARLY_TERMINATION,
    RenderSettings,
    frame_volume,
    render_frame,
)
from .simulate import ScriptedTrajectory, TrajectoryFormatError, run_simulator
from .transfer import TransferFunction, TransferFunctionFormatError
from .volume import VolumeFormatError, generate_phantom, load_volume, write_volume

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING_FILE = 2
EXIT_BAD_CONTENT = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volpeaks",
        description="Interactive volume renderer with peak-based transfer functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate the three-shell test volume")
    p.add_argument("--dims", type=int, nargs=3, default=[64, 64, 64],
                   metavar=("NX", "NY", "NZ"))
    p.add_argument("--spacing", type=float, nargs=3, default=[1.0, 1.0, 1.0],
                   metavar=("SX", "SY", "SZ"))
    p.add_argument("--output", required=True,
                   help="meta file path; raw data is written next to it")

    p = sub.add_parser("render", help="render one frame offline")
    p.add_argument("--volume", required=True, help="volume meta file")
    p.add_argument("--tf", required=True, help="transfer function JSON file")
    p.add_argument("--output", required=True, help="output image (.png or .ppm)")
    p.add_argument("--size", type=int, nargs=2, default=[512, 512],
                   metavar=("W", "H"))
    p.add_argument("--camera", type=float, nargs=3, default=None,
                   metavar=("X", "Y", "Z"),
                   help="eye position looking at the origin (default: auto-fit)")
    p.add_argument("--fov", type=float, default=45.0,
                   help="vertical field of view, degrees")
    p.add_argument("--rotate", type=float, nargs=2, default=[0.0, 0.0],
                   metavar=("YAW", "PITCH"),
                   help="rotate the volume, degrees about y then x")
    p.add_argument("--step", type=float, default=None,
                   help="ray step length (default: half the smallest voxel spacing)")
    p.add_argument("--early-termination", type=float,
                   default=DEFAULT_EARLY_TERMINATION,
                   help="stop rays above this opacity; 1.0 disables")
    p.add_argument("--clip", type=float, nargs=4, default=None,
                   metavar=("NX", "NY", "NZ", "OFFSET"),
                   help="clip plane in volume coordinates; keeps n.p <= offset")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("simulate", help="stream a scripted trajectory as UDP telemetry")
    p.add_argument("--trajectory", required=True, help="keyframe script JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--rate", type=float, default=90.0, help="samples per second")
    p.add_argument("--duration", type=float, default=None,
                   help="seconds to run (default: script length)")

    p = sub.add_parser("serve", help="run the live service")
    p.add_argument("--volume", required=True, help="volume meta file")
    p.add_argument("--tf", default=None, help="initial transfer function JSON")
    p.add_argument("--udp-port", type=int, default=DEFAULT_PORT)
    p.add_argument("--http-port", type=int, default=None)
    p.add_argument("--size", type=int, nargs=2, default=[512, 512],
                   metavar=("W", "H"))
    p.add_argument("--frame-cap", type=float, default=None,
                   help="max frames per second (1-120)")
    p.add_argument("--threads", type=int, default=1)

    return parser


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(path)
    return p


def _cmd_phantom(args) -> int:
    volume = generate_phantom(tuple(args.dims), tuple(args.spacing))
    write_volume(volume, args.output)
    print(f"wrote {args.output} ({'x'.join(map(str, args.dims))} u16le)")
    return EXIT_OK


def _cmd_render(args) -> int:
    volume = load_volume(str(_require_file(args.volume)))
    tf = TransferFunction.from_json(_require_file(args.tf).read_text())
    size = (args.size[0], args.size[1])
    fov = math.radians(args.fov)
    if args.camera is not None:
        camera = Camera(
            eye=tuple(args.camera), look_at=(0.0, 0.0, 0.0), up=(0.0, 1.0, 0.0),
            vertical_fov=fov, image_size=size,
        )
    else:
        camera = frame_volume(volume.meta, size, vertical_fov=fov)
    yaw, pitch = (math.radians(v) for v in args.rotate)
    transform = VolumeTransform.identity()
    if yaw or pitch:
        transform = VolumeTransform(
            mat_mul(rotation_x(pitch), rotation_y(yaw)), (0.0, 0.0, 0.0)
        )
    plane = None
    if args.clip is not None:
        nx, ny, nz, offset = args.clip
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if norm == 0:
            raise ValueError("clip plane normal must be nonzero")
        plane = ClipPlane((nx / norm, ny / norm, nz / norm), offset, True)
    settings = RenderSettings(
        step_size=args.step, early_termination_alpha=args.early_termination
    )
    frame = render_frame(
        volume, tf, camera, transform=transform, plane=plane,
        settings=settings, threads=args.threads,
    )
    frame.save(args.output)
    print(f"wrote {args.output} ({size[0]}x{size[1]})")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    trajectory = ScriptedTrajectory.load(_require_file(args.trajectory))
    report = run_simulator(
        trajectory, (args.host, args.port), rate=args.rate, duration=args.duration
    )
    print(
        f"sent {report.samples_sent} samples over {report.ticks} ticks "
        f"to {args.host}:{args.port}"
    )
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import DEFAULT_HTTP_PORT, ServiceConfig, serve

    _require_file(args.volume)
    if args.tf is not None:
        _require_file(args.tf)
    kwargs = dict(
        volume_path=args.volume,
        tf_path=args.tf,
        udp_port=args.udp_port,
        image_size=(args.size[0], args.size[1]),
        threads=args.threads,
    )
    kwargs["http_port"] = (
        args.http_port if args.http_port is not None else DEFAULT_HTTP_PORT
    )
    if args.frame_cap is not None:
        kwargs["frame_cap"] = args.frame_cap
    serve(ServiceConfig(**kwargs))
    return EXIT_OK


_COMMANDS = {
    "phantom": _cmd_phantom,
    "render": _cmd_render,
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (VolumeFormatError, TransferFunctionFormatError, TrajectoryFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONTENT
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
