"""Сохранение и загрузка профиля калибровки в JSON (версия 1)."""

import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Callable, Union

from tamperlens.errors import ProfileFormatError, ProfileSchemaError, ProfileVersionError, TamperLensError
from tamperlens.pipeline.detection_pipeline import (
    PROFILE_VERSION,
    CalibrationParams,
    CalibrationProfile,
    ReferenceEntry,
)
from tamperlens.vision.descriptor_matching import MatchParams
from tamperlens.vision.homography import RansacParams
from tamperlens.vision.orb_features import Descriptor256, FeatureSet, Keypoint, OrbParams
from tamperlens.vision.tamper_metrics import QualityThresholds


def _keypoint_to_dict(kp: Keypoint) -> dict:
    return {"x": kp.x, "y": kp.y, "level": kp.level, "angle_deg": kp.angle_deg, "response": kp.response}


def profile_to_dict(profile: CalibrationProfile) -> dict:
    """Словарь с фиксированным порядком ключей, чтобы файлы профилей можно было сравнивать diff'ом"""
    return {
        "version": profile.version,
        "orb_params": asdict(profile.orb_params),
        "match_params": asdict(profile.match_params),
        "ransac_params": asdict(profile.ransac_params),
        "quality": asdict(profile.quality),
        "match_count_min": profile.match_count_min,
        "rotation_limit_deg": profile.rotation_limit_deg,
        "calibration": asdict(profile.calibration),
        "references": [
            {
                "name": ref.name,
                "sharpness": ref.sharpness,
                "keypoints": [_keypoint_to_dict(kp) for kp in ref.features.keypoints],
                "descriptors": [row.tobytes().hex() for row in ref.features.descriptors],
            }
            for ref in profile.references
        ],
    }


def _require(data: dict, key: str, prefix: str = "") -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ProfileSchemaError(prefix + key)
    return data[key]


def _section(data: dict, key: str) -> dict:
    section = _require(data, key)
    if not isinstance(section, dict):
        raise ProfileSchemaError(key, "must be a JSON object")
    return section


def _build(name: str, factory: Callable, *args, **kwargs):
    """Вызывает конструктор и переводит ошибки типов/значений в ошибку схемы с именем поля"""
    try:
        return factory(*args, **kwargs)
    except ProfileSchemaError:
        raise
    except (TypeError, ValueError, TamperLensError) as e:
        raise ProfileSchemaError(name, str(e))


def _build_section(data: dict, key: str, cls: type):
    """Секция-датакласс: каждое поле обязано присутствовать, значения по умолчанию не подставляются"""
    section = _section(data, key)
    for f in fields(cls):
        _require(section, f.name, f"{key}.")
    return _build(key, cls, **section)


def _reference_from_dict(data: dict, index: int) -> ReferenceEntry:
    prefix = f"references[{index}]."
    try:
        return _parse_reference(data, prefix)
    except (TypeError, ValueError) as e:
        if isinstance(e, TamperLensError):
            raise
        raise ProfileSchemaError(prefix.rstrip("."), str(e))


def _parse_reference(data: dict, prefix: str) -> ReferenceEntry:
    name = _require(data, "name", prefix)
    sharpness = _require(data, "sharpness", prefix)
    keypoints_data = _require(data, "keypoints", prefix)
    descriptors_data = _require(data, "descriptors", prefix)
    if len(keypoints_data) != len(descriptors_data):
        raise ProfileSchemaError(prefix + "descriptors", "count differs from keypoints")

    keypoints = []
    for i, kp in enumerate(keypoints_data):
        kp_prefix = f"{prefix}keypoints[{i}]."
        keypoints.append(_build(
            kp_prefix.rstrip("."),
            Keypoint,
            x=float(_require(kp, "x", kp_prefix)),
            y=float(_require(kp, "y", kp_prefix)),
            level=int(_require(kp, "level", kp_prefix)),
            angle_deg=float(_require(kp, "angle_deg", kp_prefix)),
            response=float(_require(kp, "response", kp_prefix)),
        ))
    descriptors = [_build(f"{prefix}descriptors[{i}]", Descriptor256.from_hex, text) for i, text in enumerate(descriptors_data)]
    features = FeatureSet.from_pairs(list(zip(keypoints, descriptors)))
    return ReferenceEntry(str(name), features, float(sharpness))


def profile_from_dict(data: dict) -> CalibrationProfile:
    """
    Собирает профиль из разобранного JSON.

    Raises:
        ProfileVersionError: Версия отличается от поддерживаемой.
        ProfileSchemaError: Нет обязательного поля или значение нарушает инварианты.
    """
    version = _require(data, "version")
    if version != PROFILE_VERSION:
        raise ProfileVersionError(f"unsupported profile version {version}, expected {PROFILE_VERSION}")

    orb = _build_section(data, "orb_params", OrbParams)
    match = _build_section(data, "match_params", MatchParams)
    ransac = _build_section(data, "ransac_params", RansacParams)
    quality = _build_section(data, "quality", QualityThresholds)
    match_count_min = _require(data, "match_count_min")
    rotation_limit = _require(data, "rotation_limit_deg")
    # блок calibration необязателен; если он есть, он полный
    calibration = _build_section(data, "calibration", CalibrationParams) if "calibration" in data else CalibrationParams()
    references_data = _require(data, "references")
    if not isinstance(references_data, list):
        raise ProfileSchemaError("references", "must be a JSON array")
    references = [_reference_from_dict(ref, i) for i, ref in enumerate(references_data)]
    try:
        match_count_min = int(match_count_min)
        rotation_limit = float(rotation_limit)
    except (TypeError, ValueError) as e:
        raise ProfileSchemaError("match_count_min/rotation_limit_deg", str(e))

    return _build(
        "profile",
        CalibrationProfile,
        orb_params=orb,
        match_params=match,
        ransac_params=ransac,
        quality=quality,
        match_count_min=match_count_min,
        rotation_limit_deg=rotation_limit,
        calibration=calibration,
        references=tuple(references),
        version=version,
    )


def dumps_profile(profile: CalibrationProfile) -> str:
    return json.dumps(profile_to_dict(profile), indent=2) + "\n"


def save_profile(profile: CalibrationProfile, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_profile(profile), encoding="utf-8")


def load_profile(path: Union[str, Path]) -> CalibrationProfile:
    """
    Читает профиль с диска.

    Args:
        path (str | Path): Путь к JSON-файлу.

    Returns:
        CalibrationProfile: Профиль, равный сохраненному поле в поле.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProfileFormatError(f"malformed profile JSON in {path}: {e}")
    if not isinstance(data, dict):
        raise ProfileFormatError(f"profile must be a JSON object, got {type(data).__name__}")
    return profile_from_dict(data)
