"""Foreground/background pixel classification for fluorescent-marked insects.

A pixel is foreground when it passes four independent clauses: the RGB
ordering r > b > g (pink), a brightness floor on the HSV value channel, a
hue band restricted to the extremes of the hue circle, and a mid-range
saturation band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import check_rgb, rgb_to_hsv_pixel, round_half_up


@dataclass
class ThresholdConfig:
    """Pixel classification constants, all on the 0-255 scale.

    value_floor:     minimum HSV value (brightness) for foreground.
    hue_upper/lower: foreground hue must be above hue_upper or below hue_lower.
    sat_lower/upper: foreground saturation must lie in (sat_lower, sat_upper].
    """

    value_floor: int = 40
    hue_upper: int = 220
    hue_lower: int = 25
    sat_lower: int = 90
    sat_upper: int = 255

    def __post_init__(self):
        for name in ("value_floor", "hue_upper", "hue_lower", "sat_lower", "sat_upper"):
            v = getattr(self, name)
            if not 0 <= v <= 255:
                raise ValueError(f"{name}={v} outside [0, 255]")
        if self.hue_lower >= self.hue_upper:
            raise ValueError("hue_lower must be < hue_upper")
        if self.sat_lower >= self.sat_upper:
            raise ValueError("sat_lower must be < sat_upper")


def is_foreground(pixel, cfg: ThresholdConfig = ThresholdConfig()) -> bool:
    """Classify a single 8-bit RGB triple."""
    r, g, b = int(pixel[0]), int(pixel[1]), int(pixel[2])
    if not (r > b > g):
        return False
    h, s, v = rgb_to_hsv_pixel(r, g, b)
    if v <= cfg.value_floor:
        return False
    if not (h > cfg.hue_upper or h < cfg.hue_lower):
        return False
    return cfg.sat_lower < s <= cfg.sat_upper


def foreground_mask(pixels, cfg: ThresholdConfig = ThresholdConfig()) -> np.ndarray:
    """Per-pixel foreground classification of an RGB raster.

    No spatial coupling: each output bit depends only on its own pixel.
    """
    arr = check_rgb(pixels).astype(np.int16)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    # cheap clauses first; hue/saturation math only on surviving pixels,
    # where r is the max channel and g the min, so the general formulas
    # collapse to the v == r branch
    cand = (r > b) & (b > g) & (r > cfg.value_floor)
    if not cand.any():
        return cand
    rr = r[cand].astype(np.int64)
    gg = g[cand].astype(np.int64)
    bb = b[cand].astype(np.int64)
    delta = rr - gg
    s = (510 * delta + rr) // (2 * rr)
    n = (gg - bb) % (6 * delta)
    h = (170 * n + 2 * delta) // (4 * delta)
    keep = (h > cfg.hue_upper) | (h < cfg.hue_lower)
    keep &= (s > cfg.sat_lower) & (s <= cfg.sat_upper)
    mask = np.zeros(arr.shape[:2], dtype=bool)
    mask[cand] = keep
    return mask


def calibrate_value_floor(images, masks) -> int:
    """Mean HSV value over all marked pixels of the calibration set.

    images: RGB rasters; masks: matching boolean rasters marking the
    illuminated-insect pixels. Returns the rounded mean, the new value_floor.
    """
    if len(images) == 0:
        raise ValueError("need at least one calibration image")
    if len(images) != len(masks):
        raise ValueError("images and masks must pair up")
    total = 0
    count = 0
    for img, mask in zip(images, masks):
        v = np.max(check_rgb(img), axis=-1)
        m = np.asarray(mask, dtype=bool)
        if m.shape != v.shape:
            raise ValueError(f"mask shape {m.shape} does not match image {v.shape}")
        total += int(v[m].sum(dtype=np.int64))
        count += int(m.sum())
    if count == 0:
        raise ValueError("calibration masks mark no pixels")
    return int(round_half_up(total / count))
