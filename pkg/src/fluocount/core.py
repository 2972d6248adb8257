"""Frames, color conversion and region-of-interest extraction.

Everything downstream works on 8-bit RGB rasters stored as (height, width, 3)
uint8 numpy arrays. Hue and saturation use the 0-255 scale so published
threshold constants apply directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Default centered crop for 4096x2160 source footage.
DEFAULT_ROI = 720


class DimensionError(ValueError):
    """Raster dimensions incompatible with the requested operation."""


def check_rgb(pixels) -> np.ndarray:
    """Validate an (h, w, 3) uint8 RGB raster and return it as ndarray."""
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionError(f"expected (h, w, 3) RGB raster, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 255:
            arr = arr.astype(np.uint8)
        else:
            raise DimensionError(f"expected uint8 samples in [0, 255], got dtype {arr.dtype}")
    return arr


@dataclass(frozen=True)
class Frame:
    """One RGB video frame plus its ordinal position in the video."""

    pixels: np.ndarray
    index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pixels", check_rgb(self.pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RoiFrame:
    """A centered crop of a source frame.

    offset_x/offset_y locate the crop within the source frame.
    """

    pixels: np.ndarray
    offset_x: int
    offset_y: int
    index: int = 0

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def round_half_up(x):
    """Round floats half away from zero toward +inf (x is nonnegative here)."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def rgb_to_hsv_pixel(r: int, g: int, b: int) -> tuple[int, int, int]:
    """Convert one 8-bit RGB triple to 8-bit (h, s, v).

    v = max(r, g, b); s = round(255 * (v - min) / v) with s = 0 for black;
    hue from the hexagonal formula in degrees [0, 360), scaled by 255/360.
    Achromatic pixels get hue 0. Rounding is half-up, computed in exact
    integer arithmetic so .5 boundaries are bit-exact.
    """
    v = max(r, g, b)
    mn = min(r, g, b)
    delta = v - mn
    # round(255 * delta / v) = (2*255*delta + v) // (2*v)
    s = 0 if v == 0 else (510 * delta + v) // (2 * v)
    if delta == 0:
        return 0, s, v
    # hue = 60 * n / delta degrees, with integer n in [0, 6*delta)
    if v == r:
        n = (g - b) % (6 * delta)
    elif v == g:
        n = (b - r) + 2 * delta
    else:
        n = (r - g) + 4 * delta
    # scaled hue = round((60 * n/delta) * 255/360) = round(85*n / (2*delta))
    h = (170 * n + 2 * delta) // (4 * delta)
    return h, s, v


def rgb_to_hsv(pixels) -> np.ndarray:
    """Vectorized 8-bit RGB -> 8-bit HSV for an (h, w, 3) raster.

    Bit-exact with rgb_to_hsv_pixel applied per pixel.
    """
    arr = check_rgb(pixels).astype(np.int64)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = np.max(arr, axis=-1)
    mn = np.min(arr, axis=-1)
    delta = v - mn
    safe_v = np.where(v > 0, v, 1)
    s = np.where(v > 0, (510 * delta + v) // (2 * safe_v), 0)
    safe_d = np.where(delta > 0, delta, 1)
    n = np.select(
        [v == r, v == g],
        [(g - b) % (6 * safe_d), (b - r) + 2 * delta],
        default=(r - g) + 4 * delta,
    )
    h = np.where(delta > 0, (170 * n + 2 * delta) // (4 * safe_d), 0)
    out = np.stack([h, s, v], axis=-1)
    return out.astype(np.uint8)


def value_channel(pixels) -> np.ndarray:
    """HSV value channel (per-pixel max of R, G, B) as uint8."""
    return np.max(check_rgb(pixels), axis=-1)


def crop_roi(frame: Frame, roi_width: int = DEFAULT_ROI, roi_height: int = DEFAULT_ROI) -> RoiFrame:
    """Centered crop of a frame; odd-parity offsets round down."""
    if roi_width <= 0 or roi_height <= 0:
        raise DimensionError("ROI dimensions must be positive")
    if roi_width > frame.width or roi_height > frame.height:
        raise DimensionError(
            f"ROI {roi_width}x{roi_height} exceeds frame {frame.width}x{frame.height}"
        )
    off_x = (frame.width - roi_width) // 2
    off_y = (frame.height - roi_height) // 2
    crop = frame.pixels[off_y : off_y + roi_height, off_x : off_x + roi_width].copy()
    return RoiFrame(pixels=crop, offset_x=off_x, offset_y=off_y, index=frame.index)
