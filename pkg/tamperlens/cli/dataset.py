"""Размеченный датасет: по одной директории на класс."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Tuple, Union

from tamperlens.errors import DatasetError, DatasetSchemaError
from tamperlens.vision.image_core import read_image
from tamperlens.vision.tamper_synth import LABELS


@dataclass(frozen=True)
class LabeledDataset:
    samples: Tuple[Tuple[Path, str], ...] = ()

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Tuple[Path, str]]:
        return iter(self.samples)

    def counts(self) -> dict:
        """Число кадров по меткам, в порядке LABELS"""
        return {label: sum(1 for _, l in self.samples if l == label) for label in LABELS}


def load_dataset(root: Union[str, Path], verify: bool = True) -> LabeledDataset:
    """
    Загружает датасет вида root/{normal,blurred,rotated,obstructed}/*.

    Args:
        root (str | Path): Корневая директория.
        verify (bool): Проверять, что каждый файл декодируется.

    Returns:
        LabeledDataset: Кадры, упорядоченные лексикографически по пути.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root is not a directory: {root}")

    samples: List[Tuple[Path, str]] = []
    for entry in sorted(root.iterdir()):
        if entry.name.startswith("."):
            logging.warning(f"Skipping hidden entry {entry}")
            continue
        if not entry.is_dir():
            logging.warning(f"Skipping stray file at dataset root: {entry}")
            continue
        if entry.name not in LABELS:
            raise DatasetSchemaError(f"unknown label: {entry.name}")

        for path in sorted(entry.iterdir()):
            if path.name.startswith("."):
                logging.warning(f"Skipping hidden file {path}")
                continue
            if not path.is_file():
                continue
            if verify:
                # ImageDecodeError называет файл
                read_image(path)
            samples.append((path, entry.name))

    samples.sort(key=lambda sample: str(sample[0]))
    logging.info(f"Loaded {len(samples)} samples from {root}")
    return LabeledDataset(tuple(samples))
