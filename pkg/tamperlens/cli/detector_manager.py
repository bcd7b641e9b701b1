import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from tamperlens.cli.profile_store import load_profile, save_profile
from tamperlens.errors import TamperLensError
from tamperlens.pipeline.detection_pipeline import CalibrationProfile, Classification, DetectorConfig, calibrate, classify
from tamperlens.vision.image_core import GrayImage, read_image


def load_references(refs_dir: str) -> List[Tuple[str, GrayImage]]:
    """Эталоны из директории: имя файла без расширения и изображение, по алфавиту"""
    refs = []
    for path in sorted(Path(refs_dir).iterdir()):
        if path.name.startswith(".") or not path.is_file():
            continue
        refs.append((path.stem, read_image(path)))
    return refs


class CalibrationManager:
    """Калибровка профиля по директории эталонов"""

    def __init__(self, config: DetectorConfig = DetectorConfig()):
        self.config = config
        self.profile: Optional[CalibrationProfile] = None

    def run(self, refs_dir: str, out_path: str) -> Tuple[bool, str]:
        """
        Калибрует профиль и сохраняет его.

        Args:
            refs_dir (str): Директория с нормальными кадрами.
            out_path (str): Куда записать профиль.

        Returns:
            tuple: (успех, сводка порогов или сообщение об ошибке).
        """
        try:
            refs = load_references(refs_dir)
            logging.info(f"Calibrating on {len(refs)} references from {refs_dir}")
            profile = calibrate(refs, self.config)
            save_profile(profile, out_path)
        except (TamperLensError, OSError) as e:
            logging.error(f"Calibration failed: {e}")
            return False, str(e)

        self.profile = profile
        summary = (
            f"Profile written to {out_path}\n"
            f"references: {len(profile.references)}\n"
            f"match_count_min: {profile.match_count_min}\n"
            f"blur_sharpness_min: {profile.quality.blur_sharpness_min:.4f}"
        )
        return True, summary


class ClassificationManager:
    """Классификация отдельных кадров по сохраненному профилю"""

    def __init__(self):
        self.profile: Optional[CalibrationProfile] = None

    def load(self, profile_path: str) -> Tuple[bool, Optional[str]]:
        try:
            self.profile = load_profile(profile_path)
        except (TamperLensError, OSError) as e:
            logging.error(f"Cannot load profile {profile_path}: {e}")
            return False, str(e)
        return True, None

    def classify_paths(self, paths: Sequence[str]) -> Tuple[bool, List[Tuple[str, Classification]]]:
        """
        Классифицирует кадры; чтение файла может завершиться ошибкой, метка - нет.

        Returns:
            tuple: (все ли файлы прочитаны, список (путь, результат)).
        """
        ok = True
        results = []
        for path in paths:
            try:
                img = read_image(path)
            except (TamperLensError, OSError) as e:
                logging.error(f"Cannot read {path}: {e}")
                ok = False
                continue
            result = classify(img, self.profile)
            logging.info(f"{path}: {result.label} via {', '.join(result.decision_path)}")
            results.append((path, result))
        return ok, results

    @staticmethod
    def format_result(path: str, result: Classification, as_json: bool = False) -> str:
        if as_json:
            return json.dumps({"path": path, **result.to_dict()})
        rotation = "n/a" if result.rotation_deg is None else f"{result.rotation_deg:.1f} deg"
        return (
            f"{path}: {result.label} (best_ref {result.best_ref}, good matches {result.good_matches}, "
            f"sharpness {result.sharpness:.1f}, std {result.std_dev:.1f}, rotation {rotation}; "
            f"{' > '.join(result.decision_path)})"
        )
