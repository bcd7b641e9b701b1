"""Синтетические варианты кадров: размытие, поворот, перекрытие объектива, яркость."""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import ndimage

from tamperlens.errors import InvalidParameterError
from tamperlens.vision.image_core import GrayImage, round_half_up, write_image

LABELS = ("normal", "blurred", "rotated", "obstructed")
REFERENCE_DELTAS = (-60, -40, -20, 0, 20, 40, 60, 80)
SCENE_SEED = 20240917


@dataclass(frozen=True)
class SynthParams:
    """Степень искажений для синтетических кадров"""

    sigma: float = 4.0
    angle_deg: float = 90.0
    obstruct_level: int = 0
    obstruct_coverage: float = 1.0
    jitter_delta: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidParameterError(f"sigma must be >= 0, got {self.sigma}")
        if not 0 < self.obstruct_coverage <= 1:
            raise InvalidParameterError(f"obstruct_coverage must be in (0, 1], got {self.obstruct_coverage}")
        if not 0 <= self.obstruct_level <= 255:
            raise InvalidParameterError(f"obstruct_level must be in [0, 255], got {self.obstruct_level}")
        if not math.isfinite(self.angle_deg):
            raise InvalidParameterError(f"angle_deg must be finite, got {self.angle_deg}")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Нормированное одномерное ядро Гаусса радиуса ceil(3·sigma)."""
    radius = max(1, math.ceil(3 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """
    Сепарабельное размытие по Гауссу с повторением краевых пикселей.

    Args:
        img (GrayImage): Исходное изображение.
        sigma (float): СКО ядра в пикселях; 0 возвращает вход без изменений.

    Returns:
        GrayImage: Размытое изображение.
    """
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img

    kernel = gaussian_kernel(sigma)
    smoothed = ndimage.correlate1d(img.pixels.astype(np.float64), kernel, axis=0, mode="nearest")
    smoothed = ndimage.correlate1d(smoothed, kernel, axis=1, mode="nearest")
    return GrayImage(round_half_up(smoothed))


def _snapped_cos_sin(angle_deg: float) -> Tuple[float, float]:
    # кратные 90° должны давать точную перестановку индексов
    theta = math.radians(angle_deg)
    return round(math.cos(theta), 12), round(math.sin(theta), 12)


def rotate_image(img: GrayImage, angle_deg: float) -> GrayImage:
    """
    Поворот вокруг центра ((w-1)/2, (h-1)/2) на angle_deg в системе с осью y вниз
    (по часовой стрелке на экране), билинейная интерполяция, фон 0.
    """
    if not math.isfinite(angle_deg):
        raise InvalidParameterError(f"angle must be finite, got {angle_deg}")

    cos_t, sin_t = _snapped_cos_sin(angle_deg)
    cx = (img.width - 1) / 2.0
    cy = (img.height - 1) / 2.0
    ys, xs = np.mgrid[0:img.height, 0:img.width].astype(np.float64)
    dx = xs - cx
    dy = ys - cy

    # обратное отображение: точка результата -> точка источника
    src_x = cx + cos_t * dx + sin_t * dy
    src_y = cy - sin_t * dx + cos_t * dy
    rotated = ndimage.map_coordinates(
        img.pixels.astype(np.float64), [src_y, src_x], order=1, mode="constant", cval=0.0
    )
    return GrayImage(round_half_up(rotated))


def obstruct(img: GrayImage, level: int, coverage: float) -> GrayImage:
    """Заливает верхние ceil(coverage·height) строк значением level."""
    if not 0 < coverage <= 1:
        raise InvalidParameterError(f"coverage must be in (0, 1], got {coverage}")
    if not 0 <= level <= 255:
        raise InvalidParameterError(f"level must be in [0, 255], got {level}")

    rows = min(img.height, math.ceil(round(coverage * img.height, 9)))
    pixels = img.pixels.copy()
    pixels[:rows, :] = level
    return GrayImage(pixels)


def brightness_jitter(img: GrayImage, delta: int) -> GrayImage:
    """pixel = clamp(pixel + delta, 0, 255)"""
    if delta == 0:
        return img
    shifted = img.pixels.astype(np.int32) + int(delta)
    return GrayImage(np.clip(shifted, 0, 255).astype(np.uint8))


def add_noise(img: GrayImage, sigma: float, seed: int) -> GrayImage:
    """Аддитивный гауссов шум сенсора, округление и обрезка в [0, 255]."""
    if sigma < 0:
        raise InvalidParameterError(f"noise sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    noisy = img.pixels.astype(np.float64) + rng.normal(0.0, sigma, size=img.pixels.shape)
    return GrayImage(round_half_up(noisy))


def textured_scene(
    width: int = 320,
    height: int = 240,
    seed: int = SCENE_SEED,
    density: float = 0.10,
    tile: int = 80,
) -> GrayImage:
    """
    Стандартная текстурная сцена: плоские плитки (уровни 64..128) и 10% соли,
    размытой с sigma = 1.

    Плитки держат разброс яркости размытого кадра выше порога "нет изображения",
    соль дает углы для детектора.
    """
    if width <= 0 or height <= 0:
        raise InvalidParameterError(f"scene size must be positive, got {width}x{height}")
    if not 0 < density < 1:
        raise InvalidParameterError(f"density must be in (0, 1), got {density}")

    rows = np.arange(height)[:, None] // tile
    cols = np.arange(width)[None, :] // tile
    base = 64 + 16 * ((rows + 2 * cols) % 5)

    rng = np.random.default_rng(seed)
    salt = np.where(rng.random((height, width)) < density, 255, base).astype(np.uint8)
    return gaussian_blur(GrayImage(salt), 1.0)


def reference_set(scene: Optional[GrayImage] = None) -> List[Tuple[str, GrayImage]]:
    """Восемь эталонов: сцена при разной освещенности."""
    scene = scene if scene is not None else textured_scene()
    return [(f"ref_{i}_{delta:+d}", brightness_jitter(scene, delta)) for i, delta in enumerate(REFERENCE_DELTAS)]


def synthetic_corpus(
    per_class: int = 40,
    seed: int = SCENE_SEED,
    params: SynthParams = SynthParams(),
    scene: Optional[GrayImage] = None,
) -> List[Tuple[str, str, GrayImage]]:
    """
    Сбалансированный тестовый набор: per_class кадров на каждый из четырех классов.

    Returns:
        list: Кортежи (имя файла, метка, изображение) в детерминированном порядке.
    """
    if per_class <= 0:
        raise InvalidParameterError(f"per_class must be positive, got {per_class}")

    scene = scene if scene is not None else textured_scene(seed=seed)
    rng = np.random.default_rng(seed + 1)
    samples = []
    for i in range(per_class):
        delta = int(rng.integers(-40, 41))
        noise_seed = int(rng.integers(0, 2**31))
        fresh = add_noise(brightness_jitter(scene, delta), 1.0, noise_seed)
        samples.append((f"normal_{i:03d}.pgm", "normal", fresh))

    for i in range(per_class):
        delta = int(rng.integers(-40, 41))
        samples.append((f"blurred_{i:03d}.pgm", "blurred", gaussian_blur(brightness_jitter(scene, delta), params.sigma)))

    for i in range(per_class):
        delta = int(rng.integers(-40, 41))
        samples.append((f"rotated_{i:03d}.pgm", "rotated", rotate_image(brightness_jitter(scene, delta), params.angle_deg)))

    for i in range(per_class):
        level = int(rng.integers(0, 256))
        samples.append((f"obstructed_{i:03d}.pgm", "obstructed", obstruct(scene, level, params.obstruct_coverage)))

    return samples


def build_corpus(
    out_dir: Union[str, Path],
    per_class: int = 40,
    seed: int = SCENE_SEED,
    params: SynthParams = SynthParams(),
) -> Tuple[int, int]:
    """
    Пишет на диск references/ и dataset/{normal,blurred,rotated,obstructed}/ в формате PGM.

    Args:
        out_dir (str | Path): Корневая директория корпуса.
        per_class (int): Кадров на класс.
        seed (int): Зерно сцены и возмущений.
        params (SynthParams): Параметры искажений.

    Returns:
        tuple: (число эталонов, число тестовых кадров).
    """
    out_dir = Path(out_dir)
    scene = textured_scene(seed=seed)

    refs_dir = out_dir / "references"
    refs_dir.mkdir(parents=True, exist_ok=True)
    references = reference_set(scene)
    for name, img in references:
        write_image(refs_dir / f"{name}.pgm", img)

    samples = synthetic_corpus(per_class, seed, params, scene)
    for label in LABELS:
        (out_dir / "dataset" / label).mkdir(parents=True, exist_ok=True)
    for name, label, img in samples:
        write_image(out_dir / "dataset" / label / name, img)

    logging.info(f"Synthetic corpus written to {out_dir}: {len(references)} references, {len(samples)} test frames")
    return len(references), len(samples)
