"""Гомография test -> reference: нормализованный DLT внутри RANSAC и угол поворота."""

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Tuple

import numpy as np

from tamperlens.errors import (
    DegenerateConfigurationError,
    InvalidParameterError,
    NoConsensusError,
    TooFewPairsError,
    UndefinedAngleError,
)

SINGULAR_RATIO = 1e-9
COLLINEAR_TOLERANCE = 1e-8
RANSAC_SEED = 1234


@dataclass(frozen=True)
class Correspondence:
    """Точка (x1, y1) на проверяемом кадре и (x2, y2) на эталоне"""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x1, self.y1, self.x2, self.y2)):
            raise InvalidParameterError(f"correspondence coordinates must be finite: {self}")


@dataclass(frozen=True)
class RansacParams:
    max_iterations: int = 1000
    inlier_threshold: float = 3.0
    min_inliers: int = 10
    rng_seed: int = RANSAC_SEED

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.inlier_threshold > 0:
            raise InvalidParameterError(f"inlier_threshold must be > 0, got {self.inlier_threshold}")


def _normalized(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if abs(h[2, 2]) > 1e-12:
        return h / h[2, 2]
    h = h / np.linalg.norm(h)
    first = h.flat[np.flatnonzero(np.abs(h.ravel()) > 0)[0]]
    return h if first > 0 else -h


def _is_singular(h: np.ndarray) -> bool:
    singular = np.linalg.svd(h, compute_uv=False)
    return not singular[0] > 0 or singular[-1] / singular[0] < SINGULAR_RATIO


@dataclass(frozen=True, eq=False)
class Homography:
    """Матрица 3×3: h[2][2] = 1, если |h[2][2]| > 1e-12, иначе единичная норма Фробениуса"""

    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        if h.shape != (3, 3) or not np.all(np.isfinite(h)):
            raise DegenerateConfigurationError(f"homography must be a finite 3x3 matrix, got shape {h.shape}")
        if _is_singular(h):
            raise DegenerateConfigurationError("homography is singular")
        h = _normalized(h)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    def __eq__(self, other):
        if not isinstance(other, Homography):
            return NotImplemented
        return np.array_equal(self.h, other.h)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.h))

    def project(self, points: np.ndarray) -> np.ndarray:
        """Проецирует точки (n, 2); точки на бесконечности дают inf."""
        return _project(self.h[None], np.asarray(points, dtype=np.float64))[0]


def _project(hs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """(B, 3, 3) × (n, 2) -> (B, n, 2)"""
    homogeneous = np.column_stack([points, np.ones(len(points))])
    mapped = np.einsum("bij,nj->bni", hs, homogeneous)
    w = mapped[..., 2:3]
    with np.errstate(divide="ignore", invalid="ignore"):
        projected = mapped[..., :2] / w
    return np.where(np.abs(w) < 1e-12, np.inf, projected)


def _errors(hs: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    projected = _project(hs, src)
    with np.errstate(invalid="ignore"):
        errors = np.linalg.norm(projected - dst[None], axis=2)
    return np.where(np.isfinite(errors), errors, np.inf)


def _as_arrays(pairs: Sequence[Correspondence]) -> Tuple[np.ndarray, np.ndarray]:
    src = np.array([(p.x1, p.y1) for p in pairs], dtype=np.float64).reshape(-1, 2)
    dst = np.array([(p.x2, p.y2) for p in pairs], dtype=np.float64).reshape(-1, 2)
    return src, dst


def _hartley(points: np.ndarray) -> np.ndarray:
    """
    Матрицы нормализации (B, 3, 3): центроид в 0, СКО расстояния sqrt(2).

    Args:
        points (np.ndarray): Наборы точек (B, n, 2).
    """
    centroid = points.mean(axis=1)
    rms = np.sqrt(((points - centroid[:, None]) ** 2).sum(axis=2).mean(axis=1))
    with np.errstate(divide="ignore"):
        scale = np.where(rms > 0, math.sqrt(2.0) / rms, 0.0)
    t = np.zeros((len(points), 3, 3))
    t[:, 0, 0] = scale
    t[:, 1, 1] = scale
    t[:, 0, 2] = -scale * centroid[:, 0]
    t[:, 1, 2] = -scale * centroid[:, 1]
    t[:, 2, 2] = 1.0
    return t


def _apply(t: np.ndarray, points: np.ndarray) -> np.ndarray:
    return points * t[:, None, [0, 1], [0, 1]] + t[:, None, [0, 1], 2]


def _solve_dlt(src: np.ndarray, dst: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Пакетный нормализованный DLT.

    Args:
        src, dst (np.ndarray): Наборы точек (B, n, 2).

    Returns:
        tuple: (матрицы (B, 3, 3), признак вырожденности (B,)).
    """
    t_src = _hartley(src)
    t_dst = _hartley(dst)
    a = _apply(t_src, src)
    b = _apply(t_dst, dst)
    x, y = a[..., 0], a[..., 1]
    u, v = b[..., 0], b[..., 1]
    zeros = np.zeros_like(x)
    ones = np.ones_like(x)

    rows_u = np.stack([-x, -y, -ones, zeros, zeros, zeros, u * x, u * y, u], axis=2)
    rows_v = np.stack([zeros, zeros, zeros, -x, -y, -ones, v * x, v * y, v], axis=2)
    system = np.concatenate([rows_u, rows_v], axis=1)

    _, singular, vt = np.linalg.svd(system)
    h_norm = vt[:, -1, :].reshape(-1, 3, 3)
    # второе с конца сингулярное число ~0: решение не единственно
    rank_deficient = singular[:, 7] < 1e-10 * singular[:, 0]
    hs = np.linalg.inv(t_dst) @ h_norm @ t_src
    return hs, rank_deficient | (t_src[:, 0, 0] == 0) | (t_dst[:, 0, 0] == 0)


def _has_collinear_triple(points: np.ndarray) -> np.ndarray:
    """Для наборов (B, 4, 2) в нормализованных координатах: есть ли три точки на одной прямой."""
    t = _hartley(points)
    normalized = _apply(t, points)
    degenerate = np.zeros(len(points), dtype=bool)
    for i, j, k in combinations(range(points.shape[1]), 3):
        ab = normalized[:, j] - normalized[:, i]
        ac = normalized[:, k] - normalized[:, i]
        cross = ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0]
        degenerate |= np.abs(cross) < COLLINEAR_TOLERANCE
    return degenerate


def _fit(src: np.ndarray, dst: np.ndarray) -> Homography:
    if len(src) < 4:
        raise TooFewPairsError(f"at least 4 correspondences required, got {len(src)}")
    if len(src) == 4 and (_has_collinear_triple(src[None])[0] or _has_collinear_triple(dst[None])[0]):
        raise DegenerateConfigurationError("three of the four points are collinear")
    hs, degenerate = _solve_dlt(src[None], dst[None])
    if degenerate[0]:
        raise DegenerateConfigurationError("correspondences do not determine a unique homography")
    return Homography(hs[0])


def dlt_homography(pairs: Sequence[Correspondence]) -> Homography:
    """
    Нормализованный DLT (Хартли) по 4 и более соответствиям.

    Args:
        pairs (list): Соответствия test -> reference.

    Returns:
        Homography: Оценка методом наименьших квадратов.
    """
    src, dst = _as_arrays(pairs)
    return _fit(src, dst)


def reprojection_error(h: Homography, pair: Correspondence) -> float:
    """Расстояние между H·(x1, y1) и (x2, y2); точка на бесконечности дает +inf."""
    src, dst = _as_arrays([pair])
    return float(_errors(h.h[None], src, dst)[0, 0])


def ransac_homography(pairs: Sequence[Correspondence], params: RansacParams = RansacParams()) -> Tuple[Homography, Tuple[int, ...]]:
    """
    RANSAC с фиксированным зерном.

    Все выборки по 4 пары строятся заранее, модели решаются пакетно, лучшая выбирается
    по (число inlier'ов по убыванию, номер итерации по возрастанию), затем DLT
    уточняется по всем inlier'ам.

    Returns:
        tuple: (гомография, отсортированные индексы inlier'ов).
    """
    src, dst = _as_arrays(pairs)
    n = len(src)
    if n < 4:
        raise TooFewPairsError(f"at least 4 correspondences required, got {n}")

    rng = np.random.default_rng(params.rng_seed)
    samples = rng.random((params.max_iterations, n)).argsort(axis=1)[:, :4]
    sample_src = src[samples]
    sample_dst = dst[samples]

    valid = ~(_has_collinear_triple(sample_src) | _has_collinear_triple(sample_dst))
    if not valid.any():
        raise DegenerateConfigurationError("every minimal sample is degenerate")

    hs, rank_deficient = _solve_dlt(sample_src[valid], sample_dst[valid])
    usable = ~rank_deficient & np.all(np.isfinite(hs), axis=(1, 2))
    usable &= np.array([not usable_i or not _is_singular(h) for h, usable_i in zip(hs, usable)])
    if not usable.any():
        raise DegenerateConfigurationError("every minimal sample is degenerate")

    errors = _errors(hs, src, dst)
    counts = np.where(usable, (errors <= params.inlier_threshold).sum(axis=1), -1)
    best = int(np.argmax(counts))
    best_count = int(counts[best])
    logging.debug(f"RANSAC: best model has {best_count} of {n} inliers")

    required = max(4, params.min_inliers)
    if best_count < required:
        raise NoConsensusError(f"best model has {best_count} inliers, {required} required")

    inliers = np.flatnonzero(errors[best] <= params.inlier_threshold)
    try:
        refined = _fit(src[inliers], dst[inliers])
    except DegenerateConfigurationError:
        refined = Homography(hs[best])
    return refined, tuple(int(i) for i in inliers)


def rotation_angle(h: Homography) -> float:
    """
    Угол поворота ближайшей ортогональной матрицы к блоку 2×2 (полярное разложение),
    в градусах (-180, 180].
    """
    m = h.h if h.h[2, 2] >= 0 else -h.h
    a = m[:2, :2]
    num = a[1, 0] - a[0, 1]
    den = a[0, 0] + a[1, 1]
    if abs(num) < 1e-12 and abs(den) < 1e-12:
        raise UndefinedAngleError("rotation angle is undefined for this homography")
    angle = math.degrees(math.atan2(num, den))
    return 180.0 if angle <= -180.0 else angle
