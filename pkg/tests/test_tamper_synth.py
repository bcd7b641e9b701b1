import numpy as np
import pytest

from tamperlens.errors import InvalidParameterError
from tamperlens.vision.image_core import GrayImage, read_image
from tamperlens.vision.tamper_metrics import intensity_std, laplacian_variance
from tamperlens.vision.tamper_synth import (
    LABELS,
    REFERENCE_DELTAS,
    SynthParams,
    add_noise,
    brightness_jitter,
    build_corpus,
    gaussian_blur,
    gaussian_kernel,
    obstruct,
    reference_set,
    rotate_image,
    synthetic_corpus,
    textured_scene,
)

from conftest import checkerboard, uniform


class TestGaussianBlur:
    @pytest.mark.parametrize("sigma, radius", [(0.5, 2), (1.0, 3), (4.0, 12)])
    def test_kernel(self, sigma, radius):
        kernel = gaussian_kernel(sigma)
        assert len(kernel) == 2 * radius + 1
        assert kernel.sum() == pytest.approx(1.0)
        assert np.allclose(kernel, kernel[::-1])

    def test_zero_sigma_is_identity(self, scene):
        assert gaussian_blur(scene, 0.0) == scene

    def test_uniform_image_is_unchanged(self):
        img = uniform(20, 10, 77)
        assert gaussian_blur(img, 2.5) == img

    def test_negative_sigma_rejected(self, scene):
        with pytest.raises(InvalidParameterError):
            gaussian_blur(scene, -1.0)


class TestRotateImage:
    def test_zero_angle_is_identity(self, scene):
        assert rotate_image(scene, 0.0) == scene

    def test_quarter_turn_is_transpose_then_row_reversal(self, rng):
        pixels = rng.integers(0, 256, size=(17, 17), dtype=np.uint8)
        rotated = rotate_image(GrayImage(pixels), 90.0)
        assert np.array_equal(rotated.pixels, pixels.T[:, ::-1])

    def test_half_turn_on_non_square_image(self, scene):
        rotated = rotate_image(scene, 180.0)
        assert np.array_equal(rotated.pixels, scene.pixels[::-1, ::-1])

    def test_uncovered_area_is_black(self):
        rotated = rotate_image(uniform(40, 20, 200), 90.0)
        assert rotated.pixels[0, 0] == 0
        assert rotated.pixels[10, 20] == 200


class TestObstructAndJitter:
    def test_full_coverage(self, scene):
        assert intensity_std(obstruct(scene, 37, 1.0)) == 0.0

    def test_partial_coverage_fills_top_rows(self, scene):
        covered = obstruct(scene, 0, 0.5)
        assert np.all(covered.pixels[:120] == 0)
        assert np.array_equal(covered.pixels[120:], scene.pixels[120:])

    @pytest.mark.parametrize("coverage", [0.0, 1.5])
    def test_coverage_range(self, scene, coverage):
        with pytest.raises(InvalidParameterError):
            obstruct(scene, 0, coverage)

    def test_jitter_clamps(self):
        img = GrayImage(np.array([[0, 100, 250]], dtype=np.uint8))
        assert brightness_jitter(img, 10).pixels.tolist() == [[10, 110, 255]]
        assert brightness_jitter(img, -120).pixels.tolist() == [[0, 0, 130]]

    def test_noise_is_seeded(self, scene):
        assert add_noise(scene, 1.0, 5) == add_noise(scene, 1.0, 5)
        assert add_noise(scene, 0.0, 5) == scene


class TestScene:
    def test_scene_is_deterministic(self):
        assert textured_scene() == textured_scene()
        assert textured_scene(seed=1) != textured_scene(seed=2)

    def test_blurred_scene_keeps_intensity_spread(self, scene):
        assert intensity_std(gaussian_blur(scene, 4.0)) > 10.0

    def test_reference_names(self, references):
        assert len(references) == len(REFERENCE_DELTAS)
        assert references[0][0] == "ref_0_-60"
        assert references[3][0] == "ref_3_+0"

    def test_reference_set_defaults_to_standard_scene(self, scene):
        assert reference_set()[3][1] == scene


class TestCorpus:
    def test_balanced_and_ordered(self):
        samples = synthetic_corpus(per_class=2)
        assert [label for _, label, _ in samples] == [label for label in LABELS for _ in range(2)]
        assert samples[0][0] == "normal_000.pgm"
        obstructed = [img for _, label, img in samples if label == "obstructed"]
        assert all(intensity_std(img) == 0.0 for img in obstructed)

    def test_params_validation(self):
        with pytest.raises(InvalidParameterError):
            SynthParams(obstruct_coverage=0.0)

    def test_build_corpus_layout(self, tmp_path):
        n_refs, n_samples = build_corpus(tmp_path, per_class=1)
        assert (n_refs, n_samples) == (8, 4)
        assert len(list((tmp_path / "references").glob("*.pgm"))) == 8
        for label in LABELS:
            files = list((tmp_path / "dataset" / label).iterdir())
            assert [f.name for f in files] == [f"{label}_000.pgm"]
        assert read_image(tmp_path / "references" / "ref_3_+0.pgm") == textured_scene()


class TestSynthInvariants:
    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 4.0])
    def test_blur_keeps_mean(self, scene, sigma):
        blurred = gaussian_blur(scene, sigma)
        assert abs(blurred.pixels.mean() - scene.pixels.mean()) <= 1.0

    @pytest.mark.parametrize("size", [17, 31, 64])
    def test_two_quarter_turns_make_a_half_turn(self, rng, size):
        img = GrayImage(rng.integers(0, 256, size=(size, size), dtype=np.uint8))
        assert rotate_image(rotate_image(img, 90.0), 90.0) == rotate_image(img, 180.0)

    @pytest.mark.parametrize("angle", [360.0, -360.0, 720.0])
    def test_full_turn_returns_input(self, scene, angle):
        turned = rotate_image(scene, angle)
        assert np.abs(turned.pixels.astype(int) - scene.pixels.astype(int)).max() <= 1

    @pytest.mark.parametrize("sigma", [1.0, 4.0])
    def test_blur_lowers_laplacian_variance(self, sigma):
        board = checkerboard(64, 64)
        assert laplacian_variance(gaussian_blur(board, sigma)) < laplacian_variance(board)
