"""Shared vocabulary for the two-device controller pair.

The main (wand) controller is tracked in 6 DOF and drives navigation and peak
editing; the nav pad is the button-only companion for discrete peak actions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .geometry import Quat, Vec3, qnorm

QUAT_NORM_TOLERANCE = 1e-3


class Device(enum.IntEnum):
    MAIN = 0
    NAV_PAD = 1


class Button(str, enum.Enum):
    # main controller
    BIG = "BIG"
    MODE_CH = "MODE_CH"
    MODE_W = "MODE_W"
    # nav pad
    ADD = "ADD"
    DELETE = "DELETE"
    TOGGLE_ENABLE = "TOGGLE_ENABLE"
    SELECT_NEXT = "SELECT_NEXT"
    CYCLE_COLOR = "CYCLE_COLOR"


MAIN_BUTTONS = frozenset({Button.BIG, Button.MODE_CH, Button.MODE_W})
NAV_PAD_BUTTONS = frozenset(
    {Button.ADD, Button.DELETE, Button.TOGGLE_ENABLE, Button.SELECT_NEXT, Button.CYCLE_COLOR}
)

IDENTITY_QUAT: Quat = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ControllerSample:
    """One timestamped controller reading: pose, buttons, analog trigger."""

    device: Device
    timestamp_us: int
    position: Vec3 = (0.0, 0.0, 0.0)
    orientation: Quat = IDENTITY_QUAT
    buttons: frozenset[Button] = field(default_factory=frozenset)
    trigger: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "device", Device(self.device))
        object.__setattr__(self, "timestamp_us", int(self.timestamp_us))
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "orientation", tuple(float(c) for c in self.orientation))
        object.__setattr__(self, "buttons", frozenset(Button(b) for b in self.buttons))
        if any(not math.isfinite(c) for c in self.position + self.orientation):
            raise ValueError("position and orientation must be finite")
        if abs(qnorm(self.orientation) - 1.0) > QUAT_NORM_TOLERANCE:
            raise ValueError(
                f"orientation must be a unit quaternion within {QUAT_NORM_TOLERANCE}"
            )
        if not (0.0 <= self.trigger <= 1.0):
            raise ValueError(f"trigger must be in [0, 1], got {self.trigger}")

    def pressed(self, button: Button) -> bool:
        return button in self.buttons

    def with_time(self, timestamp_us: int) -> "ControllerSample":
        return replace(self, timestamp_us=timestamp_us)
