import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxray import Volume, build_histogram, global_stddev, otsu
from voxray.histogram import HistogramError

# --- independent oracle: per-threshold evaluation of the weighted
# intra-class variance in exact rational arithmetic ---------------------------


def intra_class_variance(counts, t) -> Fraction:
    total = sum(counts)
    result = Fraction(0)
    for lo, hi in ((0, t + 1), (t + 1, 256)):
        n = sum(counts[lo:hi])
        if n == 0:
            continue
        b = sum(i * counts[i] for i in range(lo, hi))
        a = sum(i * i * counts[i] for i in range(lo, hi))
        # sum c*(i - mu)^2 == a - b^2/n
        var = (Fraction(a) - Fraction(b * b, n)) / n
        result += Fraction(n, total) * var
    return result


def otsu_oracle(counts) -> int:
    values = [intra_class_variance(counts, t) for t in range(256)]
    return min(range(256), key=lambda t: (values[t], t))


def between_class_variance(counts, t) -> Fraction:
    total = sum(counts)
    n0 = sum(counts[: t + 1])
    n1 = total - n0
    if n0 == 0 or n1 == 0:
        return Fraction(0)
    mu0 = Fraction(sum(i * counts[i] for i in range(t + 1)), n0)
    mu1 = Fraction(sum(i * counts[i] for i in range(t + 1, 256)), n1)
    return Fraction(n0, total) * Fraction(n1, total) * (mu0 - mu1) ** 2


def make_volume(values):
    arr = np.asarray(values, dtype=np.uint8)
    return Volume(dims=(arr.size, 1, 1), data=arr)


class TestBuildHistogram:
    def test_single_level(self):
        h = build_histogram(make_volume([5] * 8))
        assert h.counts[5] == 8 and h.total == 8
        assert h.probabilities[5] == 1.0
        assert h.global_sigma == 0.0

    def test_two_point_distribution(self):
        h = build_histogram(make_volume([0] * 4 + [255] * 4))
        assert h.probabilities[0] == 0.5 and h.probabilities[255] == 0.5
        assert h.global_sigma == 127.5

    def test_total_counts_voxels(self):
        h = build_histogram(make_volume(list(range(200))))
        assert h.total == 200
        assert h.counts.sum() == 200
        assert abs(h.probabilities.sum() - 1.0) < 1e-9


class TestGlobalStddev:
    def test_constant_is_zero(self):
        assert global_stddev(make_volume([9] * 10)) == 0.0

    def test_two_point(self):
        assert global_stddev(make_volume([0, 255, 0, 255])) == 127.5

    def test_hand_computed(self):
        # values {0,0,0,4}: mean 1, population variance 3
        assert math.isclose(global_stddev(make_volume([0, 0, 0, 4])), math.sqrt(3))


class TestOtsu:
    def test_two_spike_plateau_returns_smallest(self):
        counts = [0] * 256
        counts[10] = 500
        counts[200] = 500
        assert otsu(counts) == 10

    def test_single_bin_degenerates_to_zero(self):
        counts = [0] * 256
        counts[137] = 42
        assert otsu(counts) == 0

    def test_all_zero_errors(self):
        with pytest.raises(HistogramError):
            otsu([0] * 256)

    def test_level_t_belongs_to_class_zero(self):
        # mass at 100 and 101 only: T=100 separates perfectly (class 0 holds
        # level 100), so the zero-variance split is found at exactly 100
        counts = [0] * 256
        counts[100] = 10
        counts[101] = 10
        assert otsu(counts) == 100

    def test_matches_oracle_on_random_histograms(self):
        rs = np.random.default_rng(7)
        for _ in range(60):
            counts = rs.integers(0, 1000, 256)
            counts[rs.integers(0, 256, 200)] = 0  # sparse-ish histograms
            if counts.sum() == 0:
                continue
            counts = [int(c) for c in counts]
            assert otsu(counts) == otsu_oracle(counts)

    @given(st.integers(min_value=1, max_value=10_000), st.data())
    @settings(max_examples=30, deadline=None)
    def test_invariant_under_count_scaling(self, k, data):
        rs = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        counts = [int(c) for c in rs.integers(0, 50, 256)]
        if sum(counts) == 0:
            counts[3] = 1
        assert otsu(counts) == otsu([k * c for c in counts])

    def test_equals_between_class_maximization(self):
        rs = np.random.default_rng(21)
        for _ in range(40):
            counts = [int(c) for c in rs.integers(0, 200, 256)]
            if sum(counts) == 0:
                continue
            values = [between_class_variance(counts, t) for t in range(256)]
            best = max(range(256), key=lambda t: (values[t], -t))
            # max of between-class with smallest-T ties == min of intra-class
            ties = [t for t in range(256) if values[t] == values[best]]
            assert otsu(counts) == min(ties)

    def test_otsu_on_bimodal_volume_lands_in_gap(self, small_sphere_histogram):
        t = small_sphere_histogram.otsu_threshold
        assert 20 < t < 160
