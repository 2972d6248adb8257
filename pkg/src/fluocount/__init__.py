"""fluocount: detect, segment and count fluorescent-marked insects in
UAV night footage."""

from .core import Frame, RoiFrame, crop_roi, rgb_to_hsv, rgb_to_hsv_pixel, value_channel
from .threshold import ThresholdConfig, calibrate_value_floor, foreground_mask, is_foreground
from .segment import apply_mask, box_smooth, regional_maxima, watershed_peaks
from .detect import (
    Detection,
    FrameResult,
    PipelineConfig,
    VideoReport,
    connected_components,
    detect_frame,
    filter_and_score,
    run_video,
    update_counter,
)
from .baseline import OtsuResult, baseline_detect, binarize_pass, luminance, otsu_threshold, video_max_threshold
from .evaluate import GroundTruthBox, MatchResult, PRCurve, auc_pr, best_f1, iou, match_frame, pr_curve
from .synth import ClutterSpec, InsectSpec, SceneSpec, grid_spec, make_calibration_set, render_frame, render_video
from .estimators import InsectDetector, OtsuBaselineDetector

__version__ = "0.1.0"

__all__ = [
    "Frame",
    "RoiFrame",
    "crop_roi",
    "rgb_to_hsv",
    "rgb_to_hsv_pixel",
    "value_channel",
    "ThresholdConfig",
    "calibrate_value_floor",
    "foreground_mask",
    "is_foreground",
    "apply_mask",
    "box_smooth",
    "regional_maxima",
    "watershed_peaks",
    "Detection",
    "FrameResult",
    "PipelineConfig",
    "VideoReport",
    "connected_components",
    "detect_frame",
    "filter_and_score",
    "run_video",
    "update_counter",
    "OtsuResult",
    "baseline_detect",
    "binarize_pass",
    "luminance",
    "otsu_threshold",
    "video_max_threshold",
    "GroundTruthBox",
    "MatchResult",
    "PRCurve",
    "auc_pr",
    "best_f1",
    "iou",
    "match_frame",
    "pr_curve",
    "ClutterSpec",
    "InsectSpec",
    "SceneSpec",
    "grid_spec",
    "make_calibration_set",
    "render_frame",
    "render_video",
    "InsectDetector",
    "OtsuBaselineDetector",
]
