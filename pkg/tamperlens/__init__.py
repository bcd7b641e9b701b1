"""tamperlens: обнаружение вмешательства в камеру наблюдения по правилам."""

from tamperlens.pipeline.detection_pipeline import (
    CalibrationProfile,
    Classification,
    DetectorConfig,
    calibrate,
    classify,
)
from tamperlens.vision.image_core import GrayImage, read_image

__version__ = "1.0.0"

__all__ = [
    "CalibrationProfile",
    "Classification",
    "DetectorConfig",
    "GrayImage",
    "calibrate",
    "classify",
    "read_image",
]
