"""
ORB: пирамида изображений, сегментный тест FAST-9, ранжирование по Харрису,
ориентация по центроиду яркости и повернутый BRIEF на 256 бит.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from tamperlens.errors import InvalidParameterError, PatchOutOfBoundsError
from tamperlens.vision.image_core import GrayImage, round_half_up

DESCRIPTOR_BITS = 256
DESCRIPTOR_BYTES = DESCRIPTOR_BITS // 8
PATTERN_SEED = 1009
HARRIS_K = 0.04
HARRIS_WINDOW = 7
SMOOTHING_WINDOW = 5

# окружность Брезенхема радиуса 3, (dx, dy) по часовой стрелке начиная сверху
CIRCLE_OFFSETS = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)
ARC_LENGTH = 9


@dataclass(frozen=True)
class OrbParams:
    max_features: int = 500
    pyramid_levels: int = 8
    scale_factor: float = 1.2
    fast_threshold: int = 20
    patch_size: int = 31
    pattern_seed: int = PATTERN_SEED

    def __post_init__(self):
        if self.max_features < 1:
            raise InvalidParameterError(f"max_features must be >= 1, got {self.max_features}")
        if self.pyramid_levels < 1:
            raise InvalidParameterError(f"pyramid_levels must be >= 1, got {self.pyramid_levels}")
        if not self.scale_factor > 1:
            raise InvalidParameterError(f"scale_factor must be > 1, got {self.scale_factor}")
        if self.fast_threshold <= 0:
            raise InvalidParameterError(f"fast_threshold must be > 0, got {self.fast_threshold}")
        if self.patch_size < 15 or self.patch_size % 2 == 0:
            raise InvalidParameterError(f"patch_size must be odd and >= 15, got {self.patch_size}")

    @property
    def half_patch(self) -> int:
        return self.patch_size // 2


@dataclass(frozen=True)
class Keypoint:
    """Ключевая точка; x, y в координатах уровня 0 (внутри extract) или переданного изображения"""

    x: float
    y: float
    level: int = 0
    angle_deg: float = 0.0
    response: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.angle_deg < 360.0:
            raise InvalidParameterError(f"angle_deg must be in [0, 360), got {self.angle_deg}")
        if self.level < 0:
            raise InvalidParameterError(f"level must be >= 0, got {self.level}")


@dataclass(frozen=True)
class Descriptor256:
    """256 результатов сравнений, упакованных в 32 байта (бит i: байт i//8, разряд i%8)"""

    data: bytes

    def __post_init__(self):
        if len(self.data) != DESCRIPTOR_BYTES:
            raise InvalidParameterError(f"descriptor must be {DESCRIPTOR_BYTES} bytes, got {len(self.data)}")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Descriptor256":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (DESCRIPTOR_BITS,):
            raise InvalidParameterError(f"expected {DESCRIPTOR_BITS} bits, got {bits.shape}")
        return cls(np.packbits(bits, bitorder="little").tobytes())

    @classmethod
    def from_hex(cls, text: str) -> "Descriptor256":
        return cls(bytes.fromhex(text))

    def hex(self) -> str:
        return self.data.hex()

    def bit(self, i: int) -> int:
        return (self.data[i // 8] >> (i % 8)) & 1

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8)


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """Набор признаков: ключевые точки и матрица дескрипторов (n, 32)"""

    keypoints: Tuple[Keypoint, ...] = ()
    descriptors: np.ndarray = field(default_factory=lambda: np.zeros((0, DESCRIPTOR_BYTES), dtype=np.uint8))

    def __post_init__(self):
        descriptors = np.array(self.descriptors, dtype=np.uint8, copy=True).reshape(-1, DESCRIPTOR_BYTES)
        if len(descriptors) != len(self.keypoints):
            raise InvalidParameterError(
                f"{len(self.keypoints)} keypoints but {len(descriptors)} descriptors"
            )
        descriptors.setflags(write=False)
        object.__setattr__(self, "keypoints", tuple(self.keypoints))
        object.__setattr__(self, "descriptors", descriptors)

    @classmethod
    def from_pairs(cls, features: Sequence[Tuple[Keypoint, Descriptor256]]) -> "FeatureSet":
        if not features:
            return cls()
        keypoints = [kp for kp, _ in features]
        descriptors = np.stack([d.as_array() for _, d in features])
        return cls(tuple(keypoints), descriptors)

    def __len__(self) -> int:
        return len(self.keypoints)

    def __iter__(self) -> Iterator[Tuple[Keypoint, Descriptor256]]:
        for kp, row in zip(self.keypoints, self.descriptors):
            yield kp, Descriptor256(row.tobytes())

    def __getitem__(self, i: int) -> Tuple[Keypoint, Descriptor256]:
        return self.keypoints[i], Descriptor256(self.descriptors[i].tobytes())

    def __eq__(self, other):
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return self.keypoints == other.keypoints and np.array_equal(self.descriptors, other.descriptors)

    def points(self) -> np.ndarray:
        """Координаты (n, 2) в порядке (x, y)"""
        return np.array([(kp.x, kp.y) for kp in self.keypoints], dtype=np.float64).reshape(-1, 2)


# Пирамида

def _round(value: float) -> int:
    return int(math.floor(value + 0.5))


def _resize_bilinear(pixels: np.ndarray, width: int, height: int) -> np.ndarray:
    # центры пикселей совпадают: src = (dst + 0.5) * scale - 0.5
    scale_y = pixels.shape[0] / height
    scale_x = pixels.shape[1] / width
    ys = (np.arange(height, dtype=np.float64) + 0.5) * scale_y - 0.5
    xs = (np.arange(width, dtype=np.float64) + 0.5) * scale_x - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return ndimage.map_coordinates(pixels.astype(np.float64), [grid_y, grid_x], order=1, mode="nearest")


def build_pyramid(img: GrayImage, levels: int, scale_factor: float, patch_size: int = 31) -> List[GrayImage]:
    """
    Строит пирамиду: уровень k имеет размеры round(dim / scale_factor^k).

    Уровень 0 всегда равен входу; уровни с меньшей стороной меньше patch_size отбрасываются.
    """
    if levels < 1:
        raise InvalidParameterError(f"levels must be >= 1, got {levels}")
    if not scale_factor > 1:
        raise InvalidParameterError(f"scale_factor must be > 1, got {scale_factor}")

    pyramid = [img]
    for k in range(1, levels):
        width = _round(img.width / scale_factor**k)
        height = _round(img.height / scale_factor**k)
        if min(width, height) < patch_size:
            break
        previous = pyramid[-1].pixels
        pyramid.append(GrayImage(round_half_up(_resize_bilinear(previous, width, height))))
    return pyramid


# FAST

def _arc_extremes(pixels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Для каждого внутреннего пикселя (отступ 3) возвращает лучшее по дугам из 9 точек
    минимальное превышение (светлее центра) и минимальное понижение (темнее центра).
    """
    height, width = pixels.shape
    center = pixels[3:height - 3, 3:width - 3].astype(np.int16)
    ring = np.stack([
        pixels[3 + dy:height - 3 + dy, 3 + dx:width - 3 + dx].astype(np.int16)
        for dx, dy in CIRCLE_OFFSETS
    ])
    brighter = ring - center
    darker = center - ring
    doubled_b = np.concatenate([brighter, brighter[:ARC_LENGTH - 1]])
    doubled_d = np.concatenate([darker, darker[:ARC_LENGTH - 1]])

    best_b = np.full(center.shape, np.iinfo(np.int16).min, dtype=np.int16)
    best_d = best_b.copy()
    for start in range(len(CIRCLE_OFFSETS)):
        best_b = np.maximum(best_b, doubled_b[start:start + ARC_LENGTH].min(axis=0))
        best_d = np.maximum(best_d, doubled_d[start:start + ARC_LENGTH].min(axis=0))
    return best_b, best_d


def fast_corner_mask(img: GrayImage, threshold: int) -> np.ndarray:
    """
    Маска углов FAST-9 до подавления немаксимумов.

    Пиксель (не ближе 3 к краю) угол, если на окружности из 16 точек есть 9 подряд,
    все ярче I(p)+threshold или все темнее I(p)-threshold.
    """
    mask = np.zeros((img.height, img.width), dtype=bool)
    if img.height < 7 or img.width < 7:
        return mask
    best_b, best_d = _arc_extremes(img.pixels)
    mask[3:img.height - 3, 3:img.width - 3] = (best_b > threshold) | (best_d > threshold)
    return mask


def fast_score(img: GrayImage, threshold: int) -> np.ndarray:
    """Оценка FAST: наибольший порог, при котором пиксель остается углом; 0 вне углов."""
    score = np.zeros((img.height, img.width), dtype=np.int32)
    if img.height < 7 or img.width < 7:
        return score
    best_b, best_d = _arc_extremes(img.pixels)
    best = np.maximum(best_b, best_d).astype(np.int32)
    inner = np.where(best > threshold, best - 1, 0)
    score[3:img.height - 3, 3:img.width - 3] = inner
    return score


def harris_response(img: GrayImage, k: float = HARRIS_K, window: int = HARRIS_WINDOW) -> np.ndarray:
    """Отклик Харриса det(M) - k·tr(M)^2 с окном window×window."""
    pixels = img.pixels.astype(np.float64) / 255.0
    ix = ndimage.sobel(pixels, axis=1, mode="nearest")
    iy = ndimage.sobel(pixels, axis=0, mode="nearest")
    area = float(window * window)
    sxx = ndimage.uniform_filter(ix * ix, size=window, mode="nearest") * area
    syy = ndimage.uniform_filter(iy * iy, size=window, mode="nearest") * area
    sxy = ndimage.uniform_filter(ix * iy, size=window, mode="nearest") * area
    trace = sxx + syy
    return sxx * syy - sxy * sxy - k * trace * trace


def detect_fast(img: GrayImage, threshold: int, max_kp: int, border: int = 3) -> List[Keypoint]:
    """
    Детектор FAST-9 с подавлением немаксимумов 3×3 по оценке FAST и отбором
    max_kp лучших по отклику Харриса.

    Args:
        img (GrayImage): Изображение.
        threshold (int): Порог сегментного теста (> 0).
        max_kp (int): Сколько точек оставить.
        border (int): Минимальное расстояние до края (не меньше 3).

    Returns:
        list: Ключевые точки в координатах img, по убыванию отклика.
    """
    if threshold <= 0:
        raise InvalidParameterError(f"threshold must be > 0, got {threshold}")
    if max_kp <= 0:
        return []

    border = max(3, border)
    score = fast_score(img, threshold)
    if border > 3:
        score[:border, :] = 0
        score[-border:, :] = 0
        score[:, :border] = 0
        score[:, -border:] = 0

    local_max = ndimage.maximum_filter(score, size=3, mode="constant", cval=0)
    ys, xs = np.nonzero((score > 0) & (score == local_max))
    if len(xs) == 0:
        return []

    response = harris_response(img)[ys, xs]
    # np.nonzero уже упорядочивает по (y, x); ничьи по отклику решает этот порядок
    order = np.argsort(-response, kind="stable")[:max_kp]
    return [
        Keypoint(x=float(xs[i]), y=float(ys[i]), response=float(response[i]))
        for i in order
    ]


# Ориентация

@lru_cache(maxsize=8)
def _disc_offsets(radius: int) -> Tuple[np.ndarray, np.ndarray]:
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    inside = dx * dx + dy * dy <= radius * radius
    return dx[inside], dy[inside]


def _orientations(pixels: np.ndarray, xs: np.ndarray, ys: np.ndarray, radius: int) -> np.ndarray:
    dx, dy = _disc_offsets(radius)
    patch = pixels[ys[:, None] + dy[None, :], xs[:, None] + dx[None, :]].astype(np.float64)
    m10 = patch @ dx.astype(np.float64)
    m01 = patch @ dy.astype(np.float64)
    angles = np.degrees(np.arctan2(m01, m10)) % 360.0
    # -0.0 % 360 и крошечные отрицательные значения дают 360.0
    return np.where(angles >= 360.0, 0.0, angles)


def _pixel_coords(kp: Keypoint) -> Tuple[int, int]:
    return _round(kp.x), _round(kp.y)


def keypoint_orientation(img: GrayImage, kp: Keypoint, radius: int) -> float:
    """
    Ориентация по центроиду яркости: atan2(m01, m10) по кругу радиуса radius,
    в градусах [0, 360), ось y направлена вниз.
    """
    x, y = _pixel_coords(kp)
    if x - radius < 0 or y - radius < 0 or x + radius >= img.width or y + radius >= img.height:
        raise PatchOutOfBoundsError(f"orientation disc of radius {radius} at ({x}, {y}) leaves the image")
    return float(_orientations(img.pixels, np.array([x]), np.array([y]), radius)[0])


# Повернутый BRIEF

@lru_cache(maxsize=8)
def sampling_pattern(patch_size: int, seed: int) -> np.ndarray:
    """
    256 пар точек (ax, ay, bx, by) из изотропного нормального распределения
    с sigma = patch_size/5, все внутри круга радиуса patch_size//2 - 2.
    """
    sigma = patch_size / 5.0
    limit = patch_size // 2 - SMOOTHING_WINDOW // 2
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < DESCRIPTOR_BITS:
        ax, ay, bx, by = rng.normal(0.0, sigma, size=4)
        if ax * ax + ay * ay > limit * limit or bx * bx + by * by > limit * limit:
            continue
        if _round(ax) == _round(bx) and _round(ay) == _round(by):
            continue
        pairs.append((ax, ay, bx, by))
    pattern = np.array(pairs, dtype=np.float64)
    pattern.setflags(write=False)
    return pattern


def smoothed_sums(img: GrayImage) -> np.ndarray:
    """Суммы по окну 5×5 (целочисленный аналог box-фильтра)."""
    kernel = np.ones((SMOOTHING_WINDOW, SMOOTHING_WINDOW), dtype=np.int32)
    return ndimage.correlate(img.pixels.astype(np.int32), kernel, mode="nearest")


def _rotated_samples(pattern: np.ndarray, angles_deg: np.ndarray) -> Tuple[np.ndarray, ...]:
    theta = np.radians(angles_deg)[:, None]
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    ax, ay, bx, by = (pattern[None, :, i] for i in range(4))

    def rounded(v):
        return np.floor(v + 0.5).astype(np.int64)

    return (
        rounded(cos_t * ax - sin_t * ay),
        rounded(sin_t * ax + cos_t * ay),
        rounded(cos_t * bx - sin_t * by),
        rounded(sin_t * bx + cos_t * by),
    )


def _describe_many(sums: np.ndarray, xs: np.ndarray, ys: np.ndarray, angles: np.ndarray, pattern: np.ndarray) -> np.ndarray:
    rax, ray, rbx, rby = _rotated_samples(pattern, angles)
    first = sums[ys[:, None] + ray, xs[:, None] + rax]
    second = sums[ys[:, None] + rby, xs[:, None] + rbx]
    # строгое "меньше": равные значения дают 0
    bits = (first < second).astype(np.uint8)
    return np.packbits(bits, axis=1, bitorder="little")


def describe(img: GrayImage, kp: Keypoint, params: OrbParams = OrbParams()) -> Descriptor256:
    """
    Повернутый BRIEF: пары шаблона поворачиваются на kp.angle_deg, бит i = 1,
    если сглаженная яркость в a_i строго меньше, чем в b_i.
    """
    x, y = _pixel_coords(kp)
    half = params.half_patch
    if x - half < 0 or y - half < 0 or x + half >= img.width or y + half >= img.height:
        raise PatchOutOfBoundsError(f"patch of size {params.patch_size} at ({x}, {y}) leaves the image")

    pattern = sampling_pattern(params.patch_size, params.pattern_seed)
    packed = _describe_many(smoothed_sums(img), np.array([x]), np.array([y]), np.array([kp.angle_deg]), pattern)
    return Descriptor256(packed[0].tobytes())


def level_budgets(pyramid: Sequence[GrayImage], max_features: int) -> List[int]:
    """Бюджет точек по уровням пропорционально площади, остаток уровню 0."""
    areas = np.array([level.width * level.height for level in pyramid], dtype=np.float64)
    budgets = np.floor(max_features * areas / areas.sum()).astype(int)
    budgets[0] += max_features - budgets.sum()
    return budgets.tolist()


def extract(img: GrayImage, params: OrbParams = OrbParams()) -> FeatureSet:
    """
    Полный ORB: пирамида -> FAST и Харрис на каждом уровне -> ориентация -> BRIEF.

    Args:
        img (GrayImage): Изображение.
        params (OrbParams): Параметры детектора.

    Returns:
        FeatureSet: Признаки с координатами уровня 0; пустой набор, если углов нет.
    """
    pyramid = build_pyramid(img, params.pyramid_levels, params.scale_factor, params.patch_size)
    budgets = level_budgets(pyramid, params.max_features)
    pattern = sampling_pattern(params.patch_size, params.pattern_seed)
    half = params.half_patch

    keypoints: List[Keypoint] = []
    descriptors: List[np.ndarray] = []
    for level, (level_img, budget) in enumerate(zip(pyramid, budgets)):
        candidates = detect_fast(level_img, params.fast_threshold, budget, border=half)
        logging.debug(f"ORB level {level}: {level_img.width}x{level_img.height}, budget {budget}, found {len(candidates)}")
        if not candidates:
            continue

        xs = np.array([int(kp.x) for kp in candidates])
        ys = np.array([int(kp.y) for kp in candidates])
        angles = _orientations(level_img.pixels, xs, ys, half)
        descriptors.append(_describe_many(smoothed_sums(level_img), xs, ys, angles, pattern))

        scale_x = img.width / level_img.width
        scale_y = img.height / level_img.height
        for kp, x, y, angle in zip(candidates, xs, ys, angles):
            keypoints.append(Keypoint(
                x=float((x + 0.5) * scale_x - 0.5),
                y=float((y + 0.5) * scale_y - 0.5),
                level=level,
                angle_deg=float(angle),
                response=kp.response,
            ))

    if not keypoints:
        return FeatureSet()
    return FeatureSet(tuple(keypoints), np.concatenate(descriptors))
