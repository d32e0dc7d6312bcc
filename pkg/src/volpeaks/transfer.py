"""Peak-based transfer functions.

A transfer function is an ordered list of *peaks*: windowed sine bumps that
each map a voxel value range to one color and an opacity profile. Evaluating
the function at a value x alpha-blends the peak colors in list order (later
peaks over earlier) using each peak's window value as its opacity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

MAX_PEAKS = 8
LUT_SIZE = 256
MIN_WIDTH = 1e-3  # editing floor; the model itself only requires width > 0

DEFAULT_CENTER = 0.5
DEFAULT_WIDTH = 0.1
DEFAULT_HEIGHT = 0.8

# Predefined colors, in cycle order.
PALETTE: tuple[tuple[float, float, float], ...] = (
    (0.0, 1.0, 0.0),  # green
    (1.0, 0.0, 0.0),  # red
    (0.0, 0.0, 1.0),  # blue
    (1.0, 1.0, 0.0),  # yellow
    (0.0, 1.0, 1.0),  # cyan
    (1.0, 0.0, 1.0),  # magenta
    (1.0, 1.0, 1.0),  # white
    (1.0, 0.5, 0.0),  # orange
)


class TransferFunctionError(ValueError):
    """Invalid transfer function state or edit (capacity, no selection)."""


class TransferFunctionFormatError(TransferFunctionError):
    """Malformed serialized transfer function."""


def _check_unit(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise TransferFunctionError(f"{name} must be in [0, 1], got {value!r}")
    return value


@dataclass
class Peak:
    """One windowed sine bump: center, half-width, height, color, enabled flag."""

    center: float
    width: float
    height: float
    color: tuple[float, float, float] = (1.0, 1.0, 1.0)
    enabled: bool = True

    def __post_init__(self):
        self.center = _check_unit(self.center, "center")
        self.height = _check_unit(self.height, "height")
        self.width = float(self.width)
        if not (0.0 < self.width <= 0.5):
            raise TransferFunctionError(f"width must be in (0, 0.5], got {self.width!r}")
        if len(self.color) != 3:
            raise TransferFunctionError(f"color must have 3 channels, got {self.color!r}")
        self.color = tuple(_check_unit(c, "color channel") for c in self.color)

    def value(self, x: float) -> float:
        """Window value at x: height * sin(pi/(2*width) * (x - center + width))
        inside [center - width, center + width], zero outside."""
        if x < self.center - self.width or x > self.center + self.width:
            return 0.0
        return self.height * math.sin(math.pi / (2.0 * self.width) * (x - self.center + self.width))

    def slope_bound(self) -> float:
        """Upper bound on |d value/dx|: height * pi / (2 * width)."""
        return self.height * math.pi / (2.0 * self.width)


def peak_value(peak: Peak, x: float) -> float:
    """Module-level alias for :meth:`Peak.value`."""
    return peak.value(x)


class LookupTable:
    """256-entry straight-alpha RGBA table, entry k evaluated at (k + 0.5) / 256."""

    def __init__(self, rgba: np.ndarray):
        rgba = np.asarray(rgba, dtype=np.float64)
        if rgba.shape != (LUT_SIZE, 4):
            raise ValueError(f"expected ({LUT_SIZE}, 4) table, got {rgba.shape}")
        if rgba.min() < 0.0 or rgba.max() > 1.0:
            raise ValueError("lookup table entries must lie in [0, 1]")
        self.rgba = rgba
        self.rgba.setflags(write=False)

    def __len__(self) -> int:
        return LUT_SIZE

    def sample(self, x: float) -> tuple[float, float, float, float]:
        """Nearest-bin lookup: the entry whose bin contains x."""
        k = min(max(int(x * LUT_SIZE), 0), LUT_SIZE - 1)
        return tuple(self.rgba[k])


class TransferFunction:
    """Ordered collection of up to 8 peaks with an optional selection."""

    def __init__(self, peaks: list[Peak] | None = None, selected: int | None = None):
        peaks = list(peaks) if peaks else []
        if len(peaks) > MAX_PEAKS:
            raise TransferFunctionError(f"at most {MAX_PEAKS} peaks allowed, got {len(peaks)}")
        if selected is not None and not (0 <= selected < len(peaks)):
            raise TransferFunctionError(f"selected index {selected} out of range")
        self.peaks = peaks
        self.selected = selected

    def __len__(self) -> int:
        return len(self.peaks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransferFunction):
            return NotImplemented
        return self.peaks == other.peaks and self.selected == other.selected

    @property
    def selected_peak(self) -> Peak | None:
        return None if self.selected is None else self.peaks[self.selected]

    def copy(self) -> "TransferFunction":
        return TransferFunction([replace(p) for p in self.peaks], self.selected)

    # -- editing ----------------------------------------------------------

    def add_peak(self, color: tuple[float, float, float] | None = None) -> Peak:
        """Append a default peak (selected afterwards); color defaults to the
        next palette entry by count."""
        if len(self.peaks) >= MAX_PEAKS:
            raise TransferFunctionError(f"peak capacity reached ({MAX_PEAKS})")
        if color is None:
            color = PALETTE[len(self.peaks) % len(PALETTE)]
        peak = Peak(DEFAULT_CENTER, DEFAULT_WIDTH, DEFAULT_HEIGHT, tuple(color))
        self.peaks.append(peak)
        self.selected = len(self.peaks) - 1
        return peak

    def _require_selection(self) -> int:
        if self.selected is None:
            raise TransferFunctionError("no peak selected")
        return self.selected

    def delete_selected(self) -> None:
        """Remove the selected peak and select the previous one (or none)."""
        idx = self._require_selection()
        del self.peaks[idx]
        if not self.peaks:
            self.selected = None
        else:
            self.selected = max(idx - 1, 0)

    def toggle_selected_enabled(self) -> bool:
        idx = self._require_selection()
        self.peaks[idx].enabled = not self.peaks[idx].enabled
        return self.peaks[idx].enabled

    def select_next(self) -> int:
        """Advance the selection cyclically; requires at least one peak."""
        if not self.peaks:
            raise TransferFunctionError("no peaks to select")
        if self.selected is None:
            self.selected = 0
        else:
            self.selected = (self.selected + 1) % len(self.peaks)
        return self.selected

    def cycle_selected_color(self, palette=PALETTE) -> tuple[float, float, float]:
        """Advance the selected peak's color through the palette."""
        idx = self._require_selection()
        peak = self.peaks[idx]
        try:
            pos = palette.index(peak.color)
            color = palette[(pos + 1) % len(palette)]
        except ValueError:
            color = palette[0]
        peak.color = color
        return color

    # -- evaluation -------------------------------------------------------

    def evaluate(self, x: float) -> tuple[float, float, float, float]:
        """Straight RGBA at voxel value x.

        Enabled peaks are composited in list order with the over operator,
        later peaks over earlier, accumulating premultiplied internally.
        """
        acc_r = acc_g = acc_b = acc_a = 0.0
        for peak in self.peaks:
            if not peak.enabled:
                continue
            a = peak.value(x)
            if a <= 0.0:
                continue
            acc_r = a * peak.color[0] + (1.0 - a) * acc_r
            acc_g = a * peak.color[1] + (1.0 - a) * acc_g
            acc_b = a * peak.color[2] + (1.0 - a) * acc_b
            acc_a = a + (1.0 - a) * acc_a
        if acc_a > 0.0:
            return acc_r / acc_a, acc_g / acc_a, acc_b / acc_a, acc_a
        return 0.0, 0.0, 0.0, 0.0

    def build_lut(self) -> LookupTable:
        """Tabulate :meth:`evaluate` at the 256 bin centers (k + 0.5) / 256."""
        rgba = np.empty((LUT_SIZE, 4), dtype=np.float64)
        for k in range(LUT_SIZE):
            rgba[k] = self.evaluate((k + 0.5) / LUT_SIZE)
        return LookupTable(rgba)

    def slope_bound(self) -> float:
        """Sum of enabled peak slope bounds; Lipschitz constant of the
        blended alpha (and half that of each premultiplied channel)."""
        return sum(p.slope_bound() for p in self.peaks if p.enabled)

    # -- serialization ----------------------------------------------------

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(
            {
                "peaks": [
                    {
                        "center": p.center,
                        "width": p.width,
                        "height": p.height,
                        "color": list(p.color),
                        "enabled": p.enabled,
                    }
                    for p in self.peaks
                ],
                "selected": self.selected,
            },
            indent=indent,
        )

    @classmethod
    def from_json(cls, text: str) -> "TransferFunction":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TransferFunctionFormatError(f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise TransferFunctionFormatError("top level must be an object")
        raw_peaks = doc.get("peaks")
        if not isinstance(raw_peaks, list):
            raise TransferFunctionFormatError("'peaks' must be an array")
        if len(raw_peaks) > MAX_PEAKS:
            raise TransferFunctionFormatError(
                f"peaks: at most {MAX_PEAKS} allowed, got {len(raw_peaks)}"
            )
        peaks = []
        for i, entry in enumerate(raw_peaks):
            if not isinstance(entry, dict):
                raise TransferFunctionFormatError(f"peaks[{i}]: must be an object")
            try:
                peaks.append(
                    Peak(
                        center=entry["center"],
                        width=entry["width"],
                        height=entry["height"],
                        color=tuple(entry["color"]),
                        enabled=bool(entry.get("enabled", True)),
                    )
                )
            except KeyError as exc:
                raise TransferFunctionFormatError(f"peaks[{i}]: missing field {exc}") from exc
            except (TypeError, TransferFunctionError) as exc:
                raise TransferFunctionFormatError(f"peaks[{i}]: {exc}") from exc
        selected = doc.get("selected")
        if selected is not None:
            if not isinstance(selected, int) or isinstance(selected, bool):
                raise TransferFunctionFormatError("'selected' must be an integer or null")
            if not (0 <= selected < len(peaks)):
                raise TransferFunctionFormatError(f"'selected' index {selected} out of range")
        return cls(peaks, selected)


def tf_evaluate(tf: TransferFunction, x: float) -> tuple[float, float, float, float]:
    """Module-level alias for :meth:`TransferFunction.evaluate`."""
    return tf.evaluate(x)


def build_lut(tf: TransferFunction) -> LookupTable:
    """Module-level alias for :meth:`TransferFunction.build_lut`."""
    return tf.build_lut()
