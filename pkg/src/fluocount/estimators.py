"""Scikit-learn style front ends for the two detectors.

Both estimators take an ordered iterable of Frame objects (or raw (h, w, 3)
uint8 arrays) and predict a VideoReport, so they compose with sklearn
tooling (get_params/set_params/clone) and share one parameter surface with
the CLI.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import baseline as _baseline
from . import detect as _detect
from . import threshold as _threshold
from .core import Frame


def _as_frames(X):
    frames = []
    for i, item in enumerate(X):
        if isinstance(item, Frame):
            frames.append(item)
        else:
            frames.append(Frame(pixels=np.asarray(item), index=i))
    return frames


class _PipelineParams(BaseEstimator):
    def __init__(self, value_floor=40, hue_upper=220, hue_lower=25, sat_lower=90,
                 sat_upper=255, roi_width=720, roi_height=720, smooth_radius=1,
                 seed_floor=None, min_blob_px=20, use_watershed=True):
        self.value_floor = value_floor
        self.hue_upper = hue_upper
        self.hue_lower = hue_lower
        self.sat_lower = sat_lower
        self.sat_upper = sat_upper
        self.roi_width = roi_width
        self.roi_height = roi_height
        self.smooth_radius = smooth_radius
        self.seed_floor = seed_floor
        self.min_blob_px = min_blob_px
        self.use_watershed = use_watershed

    def _config(self) -> _detect.PipelineConfig:
        return _detect.PipelineConfig(
            thresholds=_threshold.ThresholdConfig(
                value_floor=self.value_floor,
                hue_upper=self.hue_upper,
                hue_lower=self.hue_lower,
                sat_lower=self.sat_lower,
                sat_upper=self.sat_upper,
            ),
            roi_width=self.roi_width,
            roi_height=self.roi_height,
            smooth_radius=self.smooth_radius,
            seed_floor=self.seed_floor,
            min_blob_px=self.min_blob_px,
            use_watershed=self.use_watershed,
        )


class InsectDetector(_PipelineParams):
    """Color-threshold + watershed insect detector. Stateless: fit is a no-op."""

    def fit(self, X=None, y=None):
        return self

    def predict(self, X) -> _detect.VideoReport:
        return _detect.run_video(_as_frames(X), self._config())


class OtsuBaselineDetector(_PipelineParams):
    """Two-pass Otsu luminance baseline.

    fit() runs the first pass (per-frame Otsu thresholds, video maximum);
    predict() binarizes with the fitted maximum. fit and predict may see
    different footage; the usual flow fits and predicts on the same video.
    """

    def fit(self, X, y=None):
        self.otsu_result_ = _baseline.video_max_threshold(_as_frames(X), self._config())
        return self

    def predict(self, X) -> _detect.VideoReport:
        frames = _as_frames(X)
        if not hasattr(self, "otsu_result_"):
            return _baseline.baseline_detect(frames, self._config())
        return _baseline.binarize_pass(frames, self.otsu_result_.video_max, self._config())

    def fit_predict(self, X, y=None) -> _detect.VideoReport:
        frames = _as_frames(X)
        return self.fit(frames).predict(frames)
