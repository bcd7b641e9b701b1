"""
Дерево решений о вмешательстве в камеру: калибровка порогов по эталонным кадрам
и классификация кадра как normal / blurred / obstructed / rotated.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from tamperlens.errors import (
    HomographyError,
    InconsistentReferencesError,
    InvalidParameterError,
    ProfileSchemaError,
    TamperLensError,
    TooFewFeaturesError,
    TooFewReferencesError,
)
from tamperlens.vision.descriptor_matching import Match, MatchParams, good_match_count, good_matches
from tamperlens.vision.homography import Correspondence, RansacParams, ransac_homography, rotation_angle
from tamperlens.vision.image_core import GrayImage
from tamperlens.vision.orb_features import FeatureSet, OrbParams, extract
from tamperlens.vision.tamper_metrics import QualityThresholds, intensity_std, laplacian_variance

PROFILE_VERSION = 1

# имена правил в decision_path
LOW_MATCH_COUNT = "low_match_count"
MATCH_COUNT_OK = "match_count_ok"
LOW_STD_DEV = "low_std_dev"
LOW_SHARPNESS = "low_sharpness"
UNMATCHED_FALLBACK = "unmatched_fallback"
NO_RANSAC_CONSENSUS = "no_ransac_consensus"
ROTATION_EXCEEDS_LIMIT = "rotation_exceeds_limit"
ROTATION_WITHIN_LIMIT = "rotation_within_limit"


@dataclass(frozen=True)
class CalibrationParams:
    """
    Как пороги выводятся из эталонов.

    match_count_min = max(floor(beta · min попарного числа совпадений), abs_floor)
    blur_sharpness_min = gamma · min резкости эталонов
    """

    beta: float = 0.5
    gamma: float = 0.25
    abs_floor: int = 10
    min_ref_features: int = 30

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidParameterError(f"beta must be > 0, got {self.beta}")
        if not self.gamma > 0:
            raise InvalidParameterError(f"gamma must be > 0, got {self.gamma}")
        if self.abs_floor < 1:
            raise InvalidParameterError(f"abs_floor must be >= 1, got {self.abs_floor}")
        if self.min_ref_features < 1:
            raise InvalidParameterError(f"min_ref_features must be >= 1, got {self.min_ref_features}")


@dataclass(frozen=True)
class DetectorConfig:
    orb: OrbParams = field(default_factory=OrbParams)
    match: MatchParams = field(default_factory=MatchParams)
    ransac: RansacParams = field(default_factory=RansacParams)
    calibration: CalibrationParams = field(default_factory=CalibrationParams)
    noimage_std_min: float = 10.0
    rotation_limit_deg: float = 50.0

    def __post_init__(self):
        if not self.rotation_limit_deg > 0:
            raise InvalidParameterError(f"rotation_limit_deg must be > 0, got {self.rotation_limit_deg}")
        if self.noimage_std_min < 0:
            raise InvalidParameterError(f"noimage_std_min must be >= 0, got {self.noimage_std_min}")


@dataclass(frozen=True)
class ReferenceEntry:
    name: str
    features: FeatureSet
    sharpness: float


@dataclass(frozen=True)
class CalibrationProfile:
    """Результат калибровки: параметры, пороги и признаки эталонов. Неизменяем."""

    orb_params: OrbParams
    match_params: MatchParams
    ransac_params: RansacParams
    quality: QualityThresholds
    match_count_min: int
    rotation_limit_deg: float
    calibration: CalibrationParams
    references: Tuple[ReferenceEntry, ...]
    version: int = PROFILE_VERSION

    def __post_init__(self):
        object.__setattr__(self, "references", tuple(self.references))
        if len(self.references) < 2:
            raise ProfileSchemaError("references", f"at least 2 required, got {len(self.references)}")
        if self.match_count_min < 1:
            raise ProfileSchemaError("match_count_min", f"must be >= 1, got {self.match_count_min}")
        if not self.rotation_limit_deg > 0:
            raise ProfileSchemaError("rotation_limit_deg", f"must be > 0, got {self.rotation_limit_deg}")
        for ref in self.references:
            if len(ref.features) == 0:
                raise ProfileSchemaError("references", f"reference {ref.name!r} has no features")

    @property
    def reference_names(self) -> List[str]:
        return [ref.name for ref in self.references]


@dataclass(frozen=True)
class Classification:
    label: str
    best_ref: str
    good_matches: int
    sharpness: float
    std_dev: float
    rotation_deg: Optional[float]
    decision_path: Tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "best_ref": self.best_ref,
            "good_matches": self.good_matches,
            "sharpness": self.sharpness,
            "std_dev": self.std_dev,
            "rotation_deg": self.rotation_deg,
            "decision_path": list(self.decision_path),
        }


def calibrate(refs: Sequence[Tuple[str, GrayImage]], config: DetectorConfig = DetectorConfig()) -> CalibrationProfile:
    """
    Калибровка по нормальным кадрам.

    Args:
        refs (list): Пары (имя, изображение), не меньше двух.
        config (DetectorConfig): Параметры детектора и правила вывода порогов.

    Returns:
        CalibrationProfile: Профиль с порогами и признаками эталонов.
    """
    if len(refs) < 2:
        raise TooFewReferencesError(f"at least 2 references required, got {len(refs)}")

    entries = []
    for name, img in refs:
        features = extract(img, config.orb)
        if len(features) < config.calibration.min_ref_features:
            raise TooFewFeaturesError(name, len(features), config.calibration.min_ref_features)
        sharpness = laplacian_variance(img)
        logging.info(f"Reference {name}: {len(features)} features, sharpness {sharpness:.1f}")
        entries.append(ReferenceEntry(name, features, sharpness))

    min_pair = None
    for i, first in enumerate(entries):
        for j, second in enumerate(entries):
            if i == j:
                continue
            count = good_match_count(first.features, second.features, config.match)
            logging.debug(f"Good matches {first.name} -> {second.name}: {count}")
            if count == 0:
                raise InconsistentReferencesError(first.name, second.name)
            min_pair = count if min_pair is None else min(min_pair, count)

    params = config.calibration
    match_count_min = max(math.floor(params.beta * min_pair), params.abs_floor)
    blur_sharpness_min = params.gamma * min(entry.sharpness for entry in entries)
    logging.info(
        f"Calibrated on {len(entries)} references: min pairwise good matches {min_pair}, "
        f"match_count_min {match_count_min}, blur_sharpness_min {blur_sharpness_min:.2f}"
    )

    return CalibrationProfile(
        orb_params=config.orb,
        match_params=config.match,
        ransac_params=config.ransac,
        quality=QualityThresholds(blur_sharpness_min, config.noimage_std_min),
        match_count_min=match_count_min,
        rotation_limit_deg=config.rotation_limit_deg,
        calibration=params,
        references=tuple(entries),
    )


def _features(img: GrayImage, params: OrbParams) -> FeatureSet:
    try:
        return extract(img, params)
    except TamperLensError as e:
        logging.warning(f"Feature extraction failed ({e}); treating frame as featureless")
        return FeatureSet()


def _sharpness(img: GrayImage) -> float:
    try:
        return laplacian_variance(img)
    except TamperLensError:
        return 0.0


def _best_reference(features: FeatureSet, profile: CalibrationProfile) -> Tuple[int, List[Match]]:
    """Эталон с наибольшим числом хороших совпадений (при равенстве первый) и сами совпадения"""
    per_ref = [good_matches(features, ref.features, profile.match_params) for ref in profile.references]
    best = max(range(len(per_ref)), key=lambda i: (len(per_ref[i]), -i))
    return best, per_ref[best]


def _rotation(features: FeatureSet, reference: FeatureSet, matches: List[Match], profile: CalibrationProfile) -> float:
    """Угол поворота проверяемого кадра относительно эталона по уже найденным совпадениям."""
    pairs = []
    for m in matches:
        test_kp = features.keypoints[m.query_idx]
        ref_kp = reference.keypoints[m.train_idx]
        pairs.append(Correspondence(test_kp.x, test_kp.y, ref_kp.x, ref_kp.y))
    homography, inliers = ransac_homography(pairs, profile.ransac_params)
    logging.debug(f"Homography from {len(pairs)} matches, {len(inliers)} inliers")
    # H переводит кадр в эталон; поворот кадра относительно эталона дает обратная матрица
    return rotation_angle(homography.inverse())


def classify(img: GrayImage, profile: CalibrationProfile) -> Classification:
    """
    Классифицирует кадр по профилю. Не бросает исключений из-за содержимого кадра:
    любой сбой на этапе гомографии превращается в метку obstructed с пояснением
    в decision_path.
    """
    features = _features(img, profile.orb_params)
    best, matches = _best_reference(features, profile)
    good = len(matches)
    best_ref = profile.references[best]
    sharpness = _sharpness(img)
    std_dev = intensity_std(img)

    def verdict(label: str, path: List[str], rotation: Optional[float] = None) -> Classification:
        return Classification(label, best_ref.name, good, sharpness, std_dev, rotation, tuple(path))

    if good < profile.match_count_min:
        path = [LOW_MATCH_COUNT]
        if std_dev < profile.quality.noimage_std_min:
            return verdict("obstructed", path + [LOW_STD_DEV])
        if sharpness < profile.quality.blur_sharpness_min:
            return verdict("blurred", path + [LOW_SHARPNESS])
        logging.warning(
            f"Frame is sharp and textured but matches no reference ({good} < {profile.match_count_min}); "
            f"falling back to obstructed"
        )
        return verdict("obstructed", path + [UNMATCHED_FALLBACK])

    path = [MATCH_COUNT_OK]
    try:
        rotation = _rotation(features, best_ref.features, matches, profile)
    except HomographyError as e:
        logging.warning(f"Homography against {best_ref.name} failed: {e}; falling back to obstructed")
        return verdict("obstructed", path + [NO_RANSAC_CONSENSUS, UNMATCHED_FALLBACK])

    if abs(rotation) > profile.rotation_limit_deg:
        return verdict("rotated", path + [ROTATION_EXCEEDS_LIMIT], rotation)
    return verdict("normal", path + [ROTATION_WITHIN_LIMIT], rotation)
