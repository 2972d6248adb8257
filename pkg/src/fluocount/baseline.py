"""Comparison detector: per-frame Otsu thresholds, hardened by taking the
video-wide maximum threshold on a second pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import Frame, check_rgb, crop_roi, round_half_up
from .detect import PipelineConfig, FrameResult, VideoReport, connected_components, filter_and_score, update_counter

_EIGHT = np.ones((3, 3), dtype=int)

# ITU BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class OtsuResult:
    per_frame_thresholds: tuple[int, ...]
    video_max: int


def luminance(pixels) -> np.ndarray:
    """8-bit BT.601 luminance of an RGB raster."""
    arr = check_rgb(pixels).astype(np.float64)
    return round_half_up(arr @ _LUMA).astype(np.uint8)


def otsu_threshold(gray) -> int:
    """Threshold maximizing between-class variance over the 256-bin histogram.

    Classes are {<= t} and {> t}; ties resolve to the smallest t, so a
    uniform raster returns 0.
    """
    g = np.asarray(gray)
    if g.size == 0:
        raise ValueError("empty raster")
    hist = np.bincount(g.ravel().astype(np.int64), minlength=256).astype(np.float64)
    total = hist.sum()
    w0 = np.cumsum(hist)  # count of pixels <= t
    sum0 = np.cumsum(hist * np.arange(256))
    sum_all = sum0[-1]
    w1 = total - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(w0 > 0, sum0 / w0, 0.0)
        mu1 = np.where(w1 > 0, (sum_all - sum0) / w1, 0.0)
    var_between = w0 * w1 * (mu0 - mu1) ** 2
    var_between[np.isnan(var_between)] = 0.0
    return int(np.argmax(var_between))


def _roi_luma(frame: Frame, cfg: PipelineConfig) -> np.ndarray:
    rw = cfg.roi_width if cfg.roi_width is not None else frame.width
    rh = cfg.roi_height if cfg.roi_height is not None else frame.height
    return luminance(crop_roi(frame, rw, rh).pixels)


def video_max_threshold(frames, cfg: PipelineConfig = PipelineConfig()) -> OtsuResult:
    """First pass: Otsu per ROI luminance frame, then the video maximum."""
    thresholds = [otsu_threshold(_roi_luma(f, cfg)) for f in frames]
    if not thresholds:
        raise ValueError("empty video")
    return OtsuResult(per_frame_thresholds=tuple(thresholds), video_max=max(thresholds))


def binarize_pass(frames, video_max: int, cfg: PipelineConfig = PipelineConfig()) -> VideoReport:
    """Second pass: binarize every ROI luminance with > video_max and count.

    The report is shaped identically to the main pipeline's, with score =
    mean luminance.
    """
    results = []
    global_count = 0
    prev = 0
    for frame in frames:
        lum = _roi_luma(frame, cfg)
        binary = lum > video_max
        labels, n = ndimage.label(binary, structure=_EIGHT)
        if n:
            # components below the size filter would be dropped by
            # filter_and_score anyway; removing them up front keeps noisy
            # binarizations (thousands of speckle components) cheap
            counts = np.bincount(labels.ravel())
            small = counts < cfg.min_blob_px
            small[0] = False
            if small.any():
                labels[small[labels]] = 0
        blobs = connected_components(labels)
        dets = filter_and_score(blobs, lum, cfg.min_blob_px, frame_index=frame.index)
        fr = FrameResult(frame_index=frame.index, blob_count=len(dets), detections=tuple(dets))
        global_count = update_counter(prev, fr.blob_count, global_count)
        prev = fr.blob_count
        results.append(fr)
    config = cfg.as_dict()
    config["mode"] = "baseline"
    config["otsu_video_max"] = int(video_max)
    return VideoReport(frames=results, global_count=global_count, config=config)


def baseline_detect(frames, cfg: PipelineConfig = PipelineConfig()) -> VideoReport:
    """Full two-pass baseline over a re-iterable frame sequence."""
    frames = list(frames)
    otsu = video_max_threshold(frames, cfg)
    return binarize_pass(frames, otsu.video_max, cfg)
