import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import accuracy_score, confusion_matrix, precision_recall_fscore_support

from tamperlens.cli.dataset import LabeledDataset, load_dataset
from tamperlens.cli.profile_store import load_profile
from tamperlens.errors import EmptyDatasetError, TamperLensError
from tamperlens.pipeline.detection_pipeline import CalibrationProfile, Classification, classify
from tamperlens.vision.image_core import read_image
from tamperlens.vision.tamper_synth import LABELS

BINARY_LABELS = ("normal", "abnormal")


def to_binary(label: str) -> str:
    return "normal" if label == "normal" else "abnormal"


@dataclass(frozen=True)
class SampleResult:
    path: str
    true_label: str
    classification: Classification
    seconds: float

    def to_dict(self) -> dict:
        return {"path": self.path, "true_label": self.true_label, **self.classification.to_dict(), "seconds": self.seconds}


@dataclass(frozen=True, eq=False)
class EvalReport:
    """
    Итог оценки. Положительный класс бинарной задачи: abnormal.

    binary_confusion: [[TN, FP], [FN, TP]] (строки: истинный класс normal/abnormal).
    """

    confusion: np.ndarray
    binary_confusion: np.ndarray
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_image_seconds_mean: float
    per_image_seconds_max: float
    n_samples: int
    undefined: Tuple[str, ...] = ()
    n_references: int = 0
    abnormal_calibration_samples: int = 0
    profile_size_kb: Optional[float] = None
    samples: Tuple[SampleResult, ...] = ()

    def class_recall(self, label: str) -> float:
        i = LABELS.index(label)
        total = int(self.confusion[i].sum())
        return float(self.confusion[i, i] / total) if total else 0.0

    def to_dict(self, include_samples: bool = True) -> dict:
        data = {
            "positive_class": "abnormal",
            "labels": list(LABELS),
            "confusion": self.confusion.tolist(),
            "binary_confusion": self.binary_confusion.tolist(),
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "undefined": list(self.undefined),
            "per_image_seconds": {"mean": self.per_image_seconds_mean, "max": self.per_image_seconds_max},
            "n_samples": self.n_samples,
            "n_references": self.n_references,
            "abnormal_calibration_samples": self.abnormal_calibration_samples,
            "profile_size_kb": self.profile_size_kb,
        }
        if include_samples:
            data["samples"] = [s.to_dict() for s in self.samples]
        return data


def summarize(
    true_labels: Sequence[str],
    predicted: Sequence[str],
    seconds: Sequence[float],
    n_references: int = 0,
    profile_size_kb: Optional[float] = None,
    samples: Sequence[SampleResult] = (),
) -> EvalReport:
    """
    Считает матрицы ошибок и бинарные метрики.

    Деление на ноль дает 0, а имя метрики попадает в undefined.

    Args:
        true_labels (list): Истинные метки (четыре класса).
        predicted (list): Предсказанные метки.
        seconds (list): Время классификации каждого кадра.

    Returns:
        EvalReport: Отчет.
    """
    if len(true_labels) == 0:
        raise EmptyDatasetError("cannot evaluate an empty dataset")

    confusion = confusion_matrix(true_labels, predicted, labels=list(LABELS))
    binary_confusion = np.array([
        [confusion[:1, :1].sum(), confusion[:1, 1:].sum()],
        [confusion[1:, :1].sum(), confusion[1:, 1:].sum()],
    ])

    true_binary = [to_binary(label) for label in true_labels]
    pred_binary = [to_binary(label) for label in predicted]
    precision, recall, f1, _ = precision_recall_fscore_support(
        true_binary, pred_binary, labels=list(BINARY_LABELS), average=None, zero_division=0
    )

    (tn, fp), (fn, tp) = binary_confusion
    undefined = []
    if tp + fp == 0:
        undefined.append("precision")
    if tp + fn == 0:
        undefined.append("recall")
    if precision[1] + recall[1] == 0:
        undefined.append("f1")

    return EvalReport(
        confusion=confusion,
        binary_confusion=binary_confusion,
        accuracy=float(accuracy_score(true_binary, pred_binary)),
        precision=float(precision[1]),
        recall=float(recall[1]),
        f1=float(f1[1]),
        per_image_seconds_mean=float(np.mean(seconds)) if len(seconds) else 0.0,
        per_image_seconds_max=float(np.max(seconds)) if len(seconds) else 0.0,
        n_samples=len(true_labels),
        undefined=tuple(undefined),
        n_references=n_references,
        profile_size_kb=profile_size_kb,
        samples=tuple(samples),
    )


def _classify_sample(profile: CalibrationProfile, path: Path, true_label: str) -> SampleResult:
    img = read_image(path)
    # время только классификации, без декодирования
    started = time.perf_counter()
    result = classify(img, profile)
    elapsed = time.perf_counter() - started
    logging.info(f"{path}: {result.label} (true {true_label}, {result.good_matches} good matches)")
    return SampleResult(str(path), true_label, result, elapsed)


def evaluate(
    profile: CalibrationProfile,
    dataset: LabeledDataset,
    workers: int = 1,
    profile_size_kb: Optional[float] = None,
) -> EvalReport:
    """
    Классифицирует каждый кадр датасета и собирает отчет.

    Args:
        profile (CalibrationProfile): Профиль калибровки.
        dataset (LabeledDataset): Размеченные кадры.
        workers (int): Число потоков; результаты сохраняют порядок датасета.
        profile_size_kb (float, optional): Размер файла профиля для отчета.

    Returns:
        EvalReport: Отчет с матрицами, метриками и временем.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot evaluate an empty dataset")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda sample: _classify_sample(profile, *sample), dataset.samples))

    return summarize(
        [r.true_label for r in results],
        [r.classification.label for r in results],
        [r.seconds for r in results],
        n_references=len(profile.references),
        profile_size_kb=profile_size_kb,
        samples=results,
    )


def format_report(report: EvalReport) -> str:
    """Текстовый отчет в форме таблицы сравнения методов"""
    rows = [
        ("Number of reference samples", f"{report.n_references}"),
        ("Abnormal samples used for calibration", f"{report.abnormal_calibration_samples}"),
        ("Profile size", "n/a" if report.profile_size_kb is None else f"{report.profile_size_kb:.1f} KB"),
        ("Accuracy", f"{report.accuracy:.4f}"),
        ("Precision", f"{report.precision:.4f}" + (" (undefined)" if "precision" in report.undefined else "")),
        ("Recall", f"{report.recall:.4f}" + (" (undefined)" if "recall" in report.undefined else "")),
        ("F1-score", f"{report.f1:.4f}" + (" (undefined)" if "f1" in report.undefined else "")),
        ("Average processing time (per image)", f"{report.per_image_seconds_mean:.3f} sec"),
        ("Max processing time (per image)", f"{report.per_image_seconds_max:.3f} sec"),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"Performance evaluation ({report.n_samples} samples, positive class: abnormal)", ""]
    lines += [f"{name.ljust(width)}  {value}" for name, value in rows]

    lines += ["", "Confusion matrix (rows: true, columns: predicted)"]
    header = " " * 12 + "".join(label.rjust(12) for label in LABELS)
    lines.append(header)
    for label, row in zip(LABELS, report.confusion):
        lines.append(label.ljust(12) + "".join(str(int(v)).rjust(12) for v in row))
    return "\n".join(lines)


class EvaluationManager:
    """Оценка профиля на датасете для CLI"""

    def __init__(self, workers: int = 1):
        self.workers = workers
        self.last_report: Optional[EvalReport] = None

    def run(self, profile_path: str, dataset_root: str, as_json: bool = False) -> Tuple[bool, str]:
        """
        Загружает профиль и датасет и строит отчет для печати.

        Returns:
            tuple: (успех, отчет или сообщение об ошибке).
        """
        try:
            profile = load_profile(profile_path)
            dataset = load_dataset(dataset_root)
            size_kb = Path(profile_path).stat().st_size / 1024.0
            report = evaluate(profile, dataset, workers=self.workers, profile_size_kb=size_kb)
        except (TamperLensError, OSError) as e:
            logging.error(f"Evaluation failed: {e}")
            return False, str(e)

        self.last_report = report
        logging.info(
            f"Evaluated {report.n_samples} samples: accuracy {report.accuracy:.4f}, "
            f"precision {report.precision:.4f}, recall {report.recall:.4f}, f1 {report.f1:.4f}"
        )
        if as_json:
            return True, json.dumps(report.to_dict(), indent=2)
        return True, format_report(report)

