"""LWIR+RGB drone detection evaluation toolkit."""

from spectrafuse._core import (
    Detection,
    DetectorError,
    EvalError,
    FramePair,
    GroundTruthLabel,
    Homography,
    IoError,
    MatchResult,
    ParseError,
    ScenarioMetrics,
    ValidationError,
    builtin_scenarios,
    detection_rate,
    estimate_homography,
    evaluate_scenario,
    false_alarm_rate,
    fuse_pixels,
    generate_scenario,
    iou,
    match_frame,
    oracle_detect,
    pair_streams,
    read_detections,
    read_image,
    read_labels,
    warp_to_target,
    write_detections,
    write_image,
    write_labels,
)

__all__ = [
    "Detection",
    "DetectorError",
    "EvalError",
    "FramePair",
    "GroundTruthLabel",
    "Homography",
    "IoError",
    "MatchResult",
    "ParseError",
    "ScenarioMetrics",
    "ValidationError",
    "builtin_scenarios",
    "detection_rate",
    "estimate_homography",
    "evaluate_scenario",
    "false_alarm_rate",
    "fuse_pixels",
    "generate_scenario",
    "iou",
    "match_frame",
    "oracle_detect",
    "pair_streams",
    "read_detections",
    "read_image",
    "read_labels",
    "warp_to_target",
    "write_detections",
    "write_image",
    "write_labels",
]
