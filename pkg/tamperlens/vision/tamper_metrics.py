"""Скалярные метрики качества кадра: резкость и разброс яркости."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from tamperlens.errors import ImageTooSmallError, InvalidParameterError
from tamperlens.vision.image_core import GrayImage

LAPLACIAN_KERNEL = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.int64)


@dataclass(frozen=True)
class QualityThresholds:
    blur_sharpness_min: float
    noimage_std_min: float = 10.0

    def __post_init__(self):
        if self.blur_sharpness_min < 0:
            raise InvalidParameterError(f"blur_sharpness_min must be >= 0, got {self.blur_sharpness_min}")
        if self.noimage_std_min < 0:
            raise InvalidParameterError(f"noimage_std_min must be >= 0, got {self.noimage_std_min}")


def laplacian_response(img: GrayImage) -> np.ndarray:
    """Отклик 4-связного лапласиана на внутренних пикселях (без рамки в 1 px)."""
    if img.width < 3 or img.height < 3:
        raise ImageTooSmallError(f"laplacian needs at least 3x3 pixels, got {img.width}x{img.height}")
    response = ndimage.correlate(img.pixels.astype(np.int64), LAPLACIAN_KERNEL, mode="constant")
    return response[1:-1, 1:-1]


def laplacian_variance(img: GrayImage) -> float:
    """
    Дисперсия лапласиана (генеральная, делитель n).

    Args:
        img (GrayImage): Изображение не меньше 3×3.

    Returns:
        float: Резкость; 0 для однородного кадра.
    """
    return float(np.var(laplacian_response(img)))


def intensity_std(img: GrayImage) -> float:
    return float(np.std(img.pixels.astype(np.float64)))
