"""Blob extraction, size filtering, scoring and the cumulative insect counter."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import ndimage

from . import segment, threshold
from .core import Frame, crop_roi, value_channel

_EIGHT = np.ones((3, 3), dtype=int)

DEFAULT_MIN_BLOB_PX = 20
DEFAULT_SMOOTH_RADIUS = 1


@dataclass
class PipelineConfig:
    """All knobs of the main detection pipeline."""

    thresholds: threshold.ThresholdConfig = field(default_factory=threshold.ThresholdConfig)
    roi_width: int | None = 720
    roi_height: int | None = 720
    smooth_radius: int = DEFAULT_SMOOTH_RADIUS
    seed_floor: int | None = None  # None -> thresholds.value_floor
    min_blob_px: int = DEFAULT_MIN_BLOB_PX
    use_watershed: bool = True

    def effective_seed_floor(self) -> int:
        return self.thresholds.value_floor if self.seed_floor is None else self.seed_floor

    def as_dict(self) -> dict:
        d = asdict(self)
        d["thresholds"] = asdict(self.thresholds)
        return d


@dataclass(frozen=True)
class Detection:
    """One counted blob in ROI pixel coordinates."""

    frame_index: int
    x: int
    y: int
    width: int
    height: int
    area_px: int
    score: float

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.width, self.height)


@dataclass(frozen=True)
class FrameResult:
    frame_index: int
    blob_count: int
    detections: tuple[Detection, ...]


@dataclass
class VideoReport:
    frames: list[FrameResult]
    global_count: int
    config: dict

    def all_detections(self) -> list[Detection]:
        return [d for fr in self.frames for d in fr.detections]


def connected_components(seg) -> list[tuple[np.ndarray, np.ndarray]]:
    """Blobs of a segmented mask as (rows, cols) index arrays.

    Blobs are maximal 8-connected runs of a single nonzero label; label
    identity is the authority, so adjacent pixels with different labels
    never merge.
    """
    seg = np.asarray(seg)
    cc, n = ndimage.label(seg != 0, structure=_EIGHT)
    blobs = []
    for k, sl in enumerate(ndimage.find_objects(cc), start=1):
        if sl is None:
            continue
        inside = cc[sl] == k
        labs = seg[sl][inside]
        y0, x0 = sl[0].start, sl[1].start
        if labs.min() == labs.max():
            ys, xs = np.nonzero(inside)
            blobs.append((ys + y0, xs + x0))
            continue
        # a spatial component holding several labels splits along them
        for lab in np.unique(labs):
            sub, m = ndimage.label(inside & (seg[sl] == lab), structure=_EIGHT)
            for j in range(1, m + 1):
                ys, xs = np.nonzero(sub == j)
                blobs.append((ys + y0, xs + x0))
    # deterministic order: by first pixel in row-major order
    blobs.sort(key=lambda b: (int(b[0][0]), int(b[1][0])))
    return blobs


def filter_and_score(blobs, value_raster, min_blob_px: int, frame_index: int = 0) -> list[Detection]:
    """Drop undersized blobs, compute tight boxes and mean-brightness scores."""
    if min_blob_px < 0:
        raise ValueError("min_blob_px must be >= 0")
    v = np.asarray(value_raster, dtype=np.float64)
    dets = []
    for ys, xs in blobs:
        area = int(ys.size)
        if area < min_blob_px:
            continue
        x0, x1 = int(xs.min()), int(xs.max())
        y0, y1 = int(ys.min()), int(ys.max())
        score = float(v[ys, xs].mean())
        dets.append(
            Detection(
                frame_index=frame_index,
                x=x0,
                y=y0,
                width=x1 - x0 + 1,
                height=y1 - y0 + 1,
                area_px=area,
                score=score,
            )
        )
    return dets


def update_counter(prev_count: int, curr_count: int, global_count: int) -> int:
    """Increment the cumulative counter by the rise in per-frame blob count."""
    return global_count + max(0, curr_count - prev_count)


def detect_frame(frame: Frame, cfg: PipelineConfig) -> FrameResult:
    """Run the full per-frame pipeline: crop, threshold, split, count."""
    rw = cfg.roi_width if cfg.roi_width is not None else frame.width
    rh = cfg.roi_height if cfg.roi_height is not None else frame.height
    roi = crop_roi(frame, rw, rh)
    mask = threshold.foreground_mask(roi.pixels, cfg.thresholds)
    value = value_channel(roi.pixels)
    if cfg.use_watershed:
        smoothed = segment.box_smooth(value, cfg.smooth_radius)
        seeds = segment.regional_maxima(smoothed, floor=cfg.effective_seed_floor())
        peaks = segment.watershed_peaks(smoothed, seeds, targets=mask)
        seg = segment.apply_mask(peaks, mask)
    else:
        seg = mask.astype(np.int32)
    blobs = connected_components(seg)
    dets = filter_and_score(blobs, value, cfg.min_blob_px, frame_index=frame.index)
    return FrameResult(frame_index=frame.index, blob_count=len(dets), detections=tuple(dets))


def run_video(frames, cfg: PipelineConfig) -> VideoReport:
    """Detect over an ordered frame iterable, folding the global counter.

    The counter fold is strictly in frame order; frames themselves could be
    processed in parallel without changing the result.
    """
    results = []
    global_count = 0
    prev = 0
    for frame in frames:
        fr = detect_frame(frame, cfg)
        global_count = update_counter(prev, fr.blob_count, global_count)
        prev = fr.blob_count
        results.append(fr)
    return VideoReport(frames=results, global_count=global_count, config=cfg.as_dict())
