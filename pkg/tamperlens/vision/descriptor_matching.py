"""Полный перебор по расстоянию Хэмминга, взаимная проверка и подсчет хороших совпадений."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from tamperlens.errors import InvalidParameterError
from tamperlens.vision.orb_features import DESCRIPTOR_BITS, Descriptor256, FeatureSet


@dataclass(frozen=True)
class Match:
    query_idx: int
    train_idx: int
    distance: int


@dataclass(frozen=True)
class MatchParams:
    """
    Что считать хорошим совпадением.

    ratio_threshold: если задан, совпадение остается только при
    distance < ratio_threshold * второе_по_близости_расстояние.
    """

    good_distance_max: int = 64
    cross_check: bool = True
    ratio_threshold: Optional[float] = None

    def __post_init__(self):
        if not 0 <= self.good_distance_max <= DESCRIPTOR_BITS:
            raise InvalidParameterError(f"good_distance_max must be in [0, 256], got {self.good_distance_max}")
        if self.ratio_threshold is not None and not 0 < self.ratio_threshold <= 1:
            raise InvalidParameterError(f"ratio_threshold must be in (0, 1], got {self.ratio_threshold}")


def hamming(a: Descriptor256, b: Descriptor256) -> int:
    """Число различающихся бит, 0..256."""
    return int(np.bitwise_count(np.bitwise_xor(a.as_array(), b.as_array())).sum())


def distance_table(query: FeatureSet, train: FeatureSet) -> np.ndarray:
    """
    Матрица расстояний Хэмминга (|Q|, |T|).

    Считается через распакованные биты: d = |a| + |b| - 2·<a, b>, все значения целые и точные.
    """
    q_bits = np.unpackbits(query.descriptors, axis=1).astype(np.float32)
    t_bits = np.unpackbits(train.descriptors, axis=1).astype(np.float32)
    overlap = q_bits @ t_bits.T
    table = q_bits.sum(axis=1)[:, None] + t_bits.sum(axis=1)[None, :] - 2.0 * overlap
    return np.rint(table).astype(np.int32)


def _nearest(table: np.ndarray) -> List[Match]:
    # argmin возвращает первый минимум: ничьи уходят к меньшему train_idx
    best = table.argmin(axis=1)
    return [Match(q, int(t), int(table[q, t])) for q, t in enumerate(best)]


def nearest_matches(query: FeatureSet, train: FeatureSet) -> List[Match]:
    """Для каждого признака запроса ближайший признак train; пустой train дает пустой результат."""
    if len(query) == 0 or len(train) == 0:
        return []
    return _nearest(distance_table(query, train))


def _cross_checked(table: np.ndarray) -> List[Match]:
    reverse = table.argmin(axis=0)
    return [m for m in _nearest(table) if reverse[m.train_idx] == m.query_idx]


def cross_checked(query: FeatureSet, train: FeatureSet) -> List[Match]:
    """Только взаимно ближайшие пары (q -> t и t -> q)."""
    if len(query) == 0 or len(train) == 0:
        return []
    return _cross_checked(distance_table(query, train))


def _ratio_filter(table: np.ndarray, matches: List[Match], ratio: float) -> List[Match]:
    if table.shape[1] < 2:
        return []
    second = np.partition(table, 1, axis=1)[:, 1]
    return [m for m in matches if m.distance < ratio * second[m.query_idx]]


def good_matches(test: FeatureSet, reference: FeatureSet, params: MatchParams = MatchParams()) -> List[Match]:
    """Хорошие совпадения test -> reference по правилам params."""
    if len(test) == 0 or len(reference) == 0:
        return []
    table = distance_table(test, reference)
    matches = _cross_checked(table) if params.cross_check else _nearest(table)
    if params.ratio_threshold is not None:
        matches = _ratio_filter(table, matches, params.ratio_threshold)
    return [m for m in matches if m.distance <= params.good_distance_max]


def good_match_count(test: FeatureSet, reference: FeatureSet, params: MatchParams = MatchParams()) -> int:
    return len(good_matches(test, reference, params))
