"""Maps controller samples to navigation and transfer-function edits.

The main controller translates/rotates the volume while its activation
controls are held (big button for translation, trigger for rotation) and
adjusts the selected peak in edit context; the nav pad fires discrete peak
actions on button press edges. A long press of SELECT_NEXT switches between
the navigation and edit contexts.

All processing is a pure function of the sample stream, so replaying a
recorded stream reproduces the final state exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .controllers import Button, ControllerSample, Device
from .geometry import (
    ClipPlane,
    Vec3,
    VolumeTransform,
    mat_mul,
    mat_transpose,
    mat_vec,
    qconj,
    qmul,
    qnormalize,
    qrotate,
    rotation_x,
    rotation_y,
    rotation_z,
    vdot,
    vnorm,
    vnormalize,
    vscale,
    vsub,
    z_twist,
)
from .transfer import MIN_WIDTH, TransferFunction, TransferFunctionError

TRIGGER_THRESHOLD = 0.5
LONG_PRESS_US = 600_000

WHITE = (1.0, 1.0, 1.0)


class EditMode(enum.Enum):
    CENTER_HEIGHT = "center_height"
    WIDTH = "width"


class InteractionContext(enum.Enum):
    NAVIGATION = "navigation"
    TF_EDIT = "tf_edit"


class WrongDeviceError(ValueError):
    """A sample was routed to a handler for the other device."""


@dataclass(frozen=True)
class Gains:
    """Sensitivity configuration for controller-driven state changes."""

    translation: float = 1.0  # scene units per meter
    rotation: float = 2.0  # radians per meter of lateral movement
    roll: float = 1.0  # volume z-rotation per radian of controller roll
    peak_center: float = 1.0  # center shift per meter
    peak_height: float = 2.0  # height change per meter
    peak_width: float = 0.5  # width change per meter
    clip_anchor: float = 100.0  # scene units per meter for the clip plane pose
    dead_zone: float = 1e-3  # meters; position deltas below this are noise


@dataclass(frozen=True)
class SessionSnapshot:
    """Immutable view of the render-relevant state."""

    transform: VolumeTransform
    tf: TransferFunction
    plane: ClipPlane
    edit_mode: EditMode
    context: InteractionContext
    bulb_color: tuple[float, float, float]
    revision: int


class Session:
    """Owns the interactive state and consumes the ordered sample stream."""

    def __init__(
        self,
        tf: TransferFunction | None = None,
        gains: Gains | None = None,
        transform: VolumeTransform | None = None,
        plane: ClipPlane | None = None,
    ):
        self.transform = transform or VolumeTransform.identity()
        self.tf = tf if tf is not None else TransferFunction()
        self.plane = plane or ClipPlane()
        self.edit_mode = EditMode.CENTER_HEIGHT
        self.context = InteractionContext.NAVIGATION
        self.gains = gains or Gains()
        self.revision = 0
        self._last: dict[Device, ControllerSample] = {}
        self._select_press_us: int | None = None
        self._select_long_fired = False

    # -- feedback ---------------------------------------------------------

    def bulb_color(self) -> tuple[float, float, float]:
        """Color of the wand's glowing bulb: the selected peak's color, or
        white when nothing is selected."""
        peak = self.tf.selected_peak
        return peak.color if peak is not None else WHITE

    def snapshot(self) -> SessionSnapshot:
        return SessionSnapshot(
            transform=self.transform,
            tf=self.tf.copy(),
            plane=self.plane,
            edit_mode=self.edit_mode,
            context=self.context,
            bulb_color=self.bulb_color(),
            revision=self.revision,
        )

    # -- stream entry point ----------------------------------------------

    def process(self, sample: ControllerSample) -> list[dict]:
        """Apply one sample; returns the emitted status events."""
        before_bulb = self.bulb_color()
        if sample.device is Device.NAV_PAD:
            events = self.handle_navpad(sample)
        else:
            events = self._handle_main(sample)
        after_bulb = self.bulb_color()
        if after_bulb != before_bulb:
            events.append({"type": "bulb", "color": list(after_bulb)})
        return events

    def _bump(self):
        self.revision += 1

    def _previous(self, sample: ControllerSample) -> ControllerSample | None:
        prev = self._last.get(sample.device)
        self._last[sample.device] = sample
        return prev

    def _delta_position(self, prev: ControllerSample, sample: ControllerSample) -> Vec3:
        delta = vsub(sample.position, prev.position)
        if vnorm(delta) < self.gains.dead_zone:
            return (0.0, 0.0, 0.0)
        return delta

    # -- main controller --------------------------------------------------

    def _handle_main(self, sample: ControllerSample) -> list[dict]:
        if sample.device is not Device.MAIN:
            raise WrongDeviceError("expected a main-controller sample")
        chord = sample.pressed(Button.MODE_CH) and sample.pressed(Button.MODE_W)
        prev = self._last.get(sample.device)
        prev_chord = (
            prev is not None
            and prev.pressed(Button.MODE_CH)
            and prev.pressed(Button.MODE_W)
        )
        if chord:
            return self._step_clip_plane(sample, chord_edge=not prev_chord)
        if self.context is InteractionContext.TF_EDIT:
            if sample.pressed(Button.BIG) and self.tf.selected is None:
                # editing gesture with nothing to edit: report instead of raising
                prev = self._previous(sample)
                events = self._edit_mode_edges(sample, prev)
                events.append({"type": "status", "message": "no peak selected"})
                return events
            return self.step_edit(sample)
        return self.step_navigation(sample)

    def step_navigation(self, sample: ControllerSample) -> list[dict]:
        """Translate while BIG is held, rotate while the trigger is pressed.

        Horizontal movement turns the volume about the world y axis, vertical
        movement about x, and controller roll about z. With neither control
        held the pose is untouched, so the user can move freely.
        """
        if sample.device is not Device.MAIN:
            raise WrongDeviceError("expected a main-controller sample")
        prev = self._previous(sample)
        if prev is None:
            return []
        events: list[dict] = []
        delta = self._delta_position(prev, sample)
        moved = delta != (0.0, 0.0, 0.0)

        if sample.pressed(Button.BIG) and moved:
            self.transform = self.transform.translated_by(
                vscale(delta, self.gains.translation)
            )
            self._bump()
        if sample.trigger > TRIGGER_THRESHOLD:
            yaw = self.gains.rotation * delta[0] if moved else 0.0
            pitch = self.gains.rotation * delta[1] if moved else 0.0
            rel = qmul(sample.orientation, qconj(prev.orientation))
            roll = self.gains.roll * z_twist(qnormalize(rel))
            if yaw != 0.0 or pitch != 0.0 or roll != 0.0:
                delta_rot = mat_mul(
                    rotation_z(roll), mat_mul(rotation_x(pitch), rotation_y(yaw))
                )
                self.transform = self.transform.rotated_by(delta_rot)
                self._bump()
        return events

    def step_edit(self, sample: ControllerSample) -> list[dict]:
        """Adjust the selected peak while BIG is held: center/height from x/y
        movement in one mode, width from x movement in the other. MODE_CH /
        MODE_W press edges switch between the two modes."""
        if sample.device is not Device.MAIN:
            raise WrongDeviceError("expected a main-controller sample")
        prev = self._previous(sample)
        events = self._edit_mode_edges(sample, prev)
        if prev is None or not sample.pressed(Button.BIG):
            return events
        if self.tf.selected is None:
            raise TransferFunctionError("no peak selected")
        delta = self._delta_position(prev, sample)
        if delta == (0.0, 0.0, 0.0):
            return events
        peak = self.tf.peaks[self.tf.selected]
        if self.edit_mode is EditMode.CENTER_HEIGHT:
            peak.center = _clamp(peak.center + self.gains.peak_center * delta[0], 0.0, 1.0)
            peak.height = _clamp(peak.height + self.gains.peak_height * delta[1], 0.0, 1.0)
        else:
            peak.width = _clamp(peak.width + self.gains.peak_width * delta[0], MIN_WIDTH, 0.5)
        self._bump()
        events.append({"type": "peak_changed", "index": self.tf.selected})
        return events

    def _edit_mode_edges(
        self, sample: ControllerSample, prev: ControllerSample | None
    ) -> list[dict]:
        events: list[dict] = []
        for button, mode in (
            (Button.MODE_CH, EditMode.CENTER_HEIGHT),
            (Button.MODE_W, EditMode.WIDTH),
        ):
            edge = sample.pressed(button) and (prev is None or not prev.pressed(button))
            if edge and self.edit_mode is not mode:
                self.edit_mode = mode
                self._bump()
                events.append({"type": "edit_mode", "mode": mode.value})
        return events

    def _step_clip_plane(self, sample: ControllerSample, chord_edge: bool) -> list[dict]:
        """MODE_CH + MODE_W held together: the chord edge toggles the clip
        plane; while it stays held (and the plane is on) the plane follows the
        controller pose in volume-local space."""
        self._last[sample.device] = sample
        events: list[dict] = []
        if chord_edge:
            self.plane = replace(self.plane, enabled=not self.plane.enabled)
            self._bump()
            events.append({"type": "clip_plane", "enabled": self.plane.enabled})
        if self.plane.enabled:
            rt = mat_transpose(self.transform.rotation)
            normal_world = qrotate(sample.orientation, (0.0, 0.0, 1.0))
            normal_local = vnormalize(mat_vec(rt, normal_world))
            anchor_world = vscale(sample.position, self.gains.clip_anchor)
            anchor_local = mat_vec(rt, vsub(anchor_world, self.transform.translation))
            offset = vdot(normal_local, anchor_local)
            plane = ClipPlane(normal_local, offset, True)
            if plane != self.plane:
                self.plane = plane
                self._bump()
        return events

    # -- nav pad ----------------------------------------------------------

    def handle_navpad(self, sample: ControllerSample) -> list[dict]:
        """Discrete peak actions on press edges; SELECT_NEXT held past the
        long-press threshold toggles the navigation/edit context instead."""
        if sample.device is not Device.NAV_PAD:
            raise WrongDeviceError("expected a nav-pad sample")
        prev = self._previous(sample)

        def edge(button: Button) -> bool:
            return sample.pressed(button) and (prev is None or not prev.pressed(button))

        def released(button: Button) -> bool:
            return (
                prev is not None and prev.pressed(button) and not sample.pressed(button)
            )

        events: list[dict] = []

        if edge(Button.ADD):
            try:
                peak = self.tf.add_peak()
                self._bump()
                events.append(
                    {
                        "type": "peak_added",
                        "index": self.tf.selected,
                        "color": list(peak.color),
                    }
                )
            except TransferFunctionError as exc:
                events.append({"type": "status", "message": str(exc)})
        if edge(Button.DELETE):
            try:
                self.tf.delete_selected()
                self._bump()
                events.append({"type": "peak_deleted", "selected": self.tf.selected})
            except TransferFunctionError as exc:
                events.append({"type": "status", "message": str(exc)})
        if edge(Button.TOGGLE_ENABLE):
            try:
                enabled = self.tf.toggle_selected_enabled()
                self._bump()
                events.append(
                    {"type": "peak_toggled", "index": self.tf.selected, "enabled": enabled}
                )
            except TransferFunctionError as exc:
                events.append({"type": "status", "message": str(exc)})
        if edge(Button.CYCLE_COLOR):
            try:
                color = self.tf.cycle_selected_color()
                self._bump()
                events.append(
                    {"type": "peak_color", "index": self.tf.selected, "color": list(color)}
                )
            except TransferFunctionError as exc:
                events.append({"type": "status", "message": str(exc)})

        # SELECT_NEXT: short press advances the selection on release; holding
        # past the threshold toggles the interaction context once instead.
        if edge(Button.SELECT_NEXT):
            self._select_press_us = sample.timestamp_us
            self._select_long_fired = False
        if (
            self._select_press_us is not None
            and sample.pressed(Button.SELECT_NEXT)
            and not self._select_long_fired
            and sample.timestamp_us - self._select_press_us >= LONG_PRESS_US
        ):
            self._select_long_fired = True
            self.context = (
                InteractionContext.TF_EDIT
                if self.context is InteractionContext.NAVIGATION
                else InteractionContext.NAVIGATION
            )
            self._bump()
            events.append({"type": "context", "context": self.context.value})
        if released(Button.SELECT_NEXT):
            if not self._select_long_fired:
                try:
                    self.tf.select_next()
                    self._bump()
                    events.append({"type": "peak_selected", "index": self.tf.selected})
                except TransferFunctionError as exc:
                    events.append({"type": "status", "message": str(exc)})
            self._select_press_us = None
            self._select_long_fired = False

        return events


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x
