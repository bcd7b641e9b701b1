import numpy as np
import pytest

from tamperlens.errors import InvalidParameterError
from tamperlens.vision.descriptor_matching import (
    Match,
    MatchParams,
    cross_checked,
    distance_table,
    good_match_count,
    good_matches,
    hamming,
    nearest_matches,
)
from tamperlens.vision.orb_features import Descriptor256, FeatureSet, Keypoint, extract
from tamperlens.vision.tamper_synth import gaussian_blur


def with_flipped_bits(n: int) -> np.ndarray:
    """Дескриптор, отличающийся от нулевого ровно n битами"""
    bits = np.zeros(256, dtype=np.uint8)
    bits[:n] = 1
    return np.packbits(bits, bitorder="little")


def feature_set(rows) -> FeatureSet:
    rows = np.asarray(rows, dtype=np.uint8).reshape(-1, 32)
    keypoints = tuple(Keypoint(float(i), 0.0) for i in range(len(rows)))
    return FeatureSet(keypoints, rows)


class TestHamming:
    def test_matches_bit_counting_oracle(self, rng):
        raw = rng.integers(0, 256, size=(10_000, 2, 32), dtype=np.uint8)
        for a, b in raw:
            expected = bin(int.from_bytes(a.tobytes(), "big") ^ int.from_bytes(b.tobytes(), "big")).count("1")
            assert hamming(Descriptor256(a.tobytes()), Descriptor256(b.tobytes())) == expected

    def test_extremes(self):
        zeros = Descriptor256(bytes(32))
        ones = Descriptor256(b"\xff" * 32)
        assert hamming(zeros, zeros) == 0
        assert hamming(zeros, ones) == 256

    def test_distance_table_agrees_with_hamming(self, rng):
        query = feature_set(rng.integers(0, 256, size=(7, 32)))
        train = feature_set(rng.integers(0, 256, size=(5, 32)))
        table = distance_table(query, train)
        for i in range(7):
            for j in range(5):
                assert table[i, j] == hamming(query[i][1], train[j][1])


class TestMatching:
    def test_random_set_matches_itself(self, rng):
        features = feature_set(rng.integers(0, 256, size=(50, 32)))
        matches = good_matches(features, features)
        assert [(m.query_idx, m.train_idx, m.distance) for m in matches] == [(i, i, 0) for i in range(50)]

    def test_empty_sets(self, rng):
        features = feature_set(rng.integers(0, 256, size=(3, 32)))
        assert nearest_matches(features, FeatureSet()) == []
        assert cross_checked(FeatureSet(), features) == []
        assert good_match_count(FeatureSet(), features) == 0

    def test_ties_go_to_lower_train_index(self):
        query = feature_set([with_flipped_bits(0)])
        train = feature_set([with_flipped_bits(3), with_flipped_bits(3)])
        assert nearest_matches(query, train) == [Match(0, 0, 3)]

    def test_cross_check_drops_one_sided_matches(self):
        # оба запроса ближе всего к train[0], но train[0] выбирает только запрос 0
        query = feature_set([with_flipped_bits(0), with_flipped_bits(5)])
        train = feature_set([with_flipped_bits(1), with_flipped_bits(200)])
        assert [m.query_idx for m in nearest_matches(query, train)] == [0, 1]
        assert cross_checked(query, train) == [Match(0, 0, 1)]

    def test_distance_budget(self):
        query = feature_set([with_flipped_bits(0)])
        near = feature_set([with_flipped_bits(64)])
        far = feature_set([with_flipped_bits(65)])
        assert good_match_count(query, near) == 1
        assert good_match_count(query, far) == 0

    def test_without_cross_check(self):
        query = feature_set([with_flipped_bits(0), with_flipped_bits(5)])
        train = feature_set([with_flipped_bits(1), with_flipped_bits(200)])
        assert good_match_count(query, train, MatchParams(cross_check=False)) == 2

    @pytest.mark.parametrize("ratio, kept", [(0.8, 0), (0.9, 1)])
    def test_ratio_filter(self, ratio, kept):
        query = feature_set([with_flipped_bits(0)])
        train = feature_set([with_flipped_bits(10), with_flipped_bits(12)])
        assert good_match_count(query, train, MatchParams(ratio_threshold=ratio)) == kept

    @pytest.mark.parametrize("kwargs", [{"good_distance_max": 300}, {"ratio_threshold": 0.0}])
    def test_params_validation(self, kwargs):
        with pytest.raises(InvalidParameterError):
            MatchParams(**kwargs)


def random_descriptors(rng, n: int):
    return [Descriptor256(row.tobytes()) for row in rng.integers(0, 256, size=(n, 32), dtype=np.uint8)]


class TestMetricProperties:
    @pytest.mark.parametrize("seed", range(5))
    def test_symmetry_and_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(200):
            a, b, c = random_descriptors(rng, 3)
            assert hamming(a, b) == hamming(b, a)
            assert hamming(a, c) <= hamming(a, b) + hamming(b, c)

    @pytest.mark.parametrize("seed", range(5))
    def test_cross_check_is_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        # мало различных значений: много ничьих
        query = feature_set(rng.integers(0, 2, size=(40, 32)))
        train = feature_set(rng.integers(0, 2, size=(30, 32)))
        forward = {(m.query_idx, m.train_idx) for m in cross_checked(query, train)}
        backward = {(m.train_idx, m.query_idx) for m in cross_checked(train, query)}
        assert forward == backward

    @pytest.mark.parametrize("seed", range(3))
    def test_count_grows_with_distance_budget(self, seed):
        rng = np.random.default_rng(seed)
        query = feature_set(rng.integers(0, 256, size=(60, 32)))
        train = feature_set(rng.integers(0, 256, size=(60, 32)))
        counts = [good_match_count(query, train, MatchParams(good_distance_max=d)) for d in range(0, 257, 16)]
        assert counts == sorted(counts)


@pytest.mark.parametrize("sigma", [2.0, 4.0])
def test_blur_loses_good_matches(scene, sigma):
    features = extract(scene)
    blurred = extract(gaussian_blur(scene, sigma))
    assert good_match_count(features, blurred) < good_match_count(features, features)
