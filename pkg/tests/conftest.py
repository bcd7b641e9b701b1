import numpy as np
import pytest

from tamperlens.pipeline.detection_pipeline import calibrate
from tamperlens.vision.image_core import GrayImage
from tamperlens.vision.tamper_synth import reference_set, textured_scene


def checkerboard(width: int, height: int) -> GrayImage:
    ys, xs = np.mgrid[0:height, 0:width]
    return GrayImage(((xs + ys) % 2 * 255).astype(np.uint8))


def uniform(width: int, height: int, level: int) -> GrayImage:
    return GrayImage(np.full((height, width), level, dtype=np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def scene():
    return textured_scene()


@pytest.fixture(scope="session")
def references(scene):
    return reference_set(scene)


@pytest.fixture(scope="session")
def profile(references):
    return calibrate(references)
