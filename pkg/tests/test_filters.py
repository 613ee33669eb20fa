import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxray import FilterConfig, FilterKind, Volume, build_histogram
from voxray.filters import (
    FilterError,
    apply_filter,
    apply_filter_batch,
    axis_cluster_average,
    entropy_filter,
    local_cluster_filter,
    mean_filter,
    okada_filter,
    sigma_filter,
)
from voxray.reference import reference_filter


def vol_from(data):
    data = np.asarray(data, dtype=np.uint8)
    nz, ny, nx = data.shape
    return Volume(dims=(nx, ny, nz), data=data)


def constant(v, n=9):
    return vol_from(np.full((n, n, n), v, dtype=np.uint8))


class TestAxisClusterAverage:
    def test_constant(self):
        assert axis_cluster_average(constant(90), 4, 4, 4) == 90.0

    def test_center_hole(self):
        data = np.full((9, 9, 9), 30, dtype=np.uint8)
        data[4, 4, 4] = 0
        # center sampled once per axis arm: six neighbors contribute
        assert axis_cluster_average(vol_from(data), 4, 4, 4) == pytest.approx(2 * 30 / 3)

    def test_lone_center(self):
        data = np.zeros((9, 9, 9), dtype=np.uint8)
        data[4, 4, 4] = 90
        assert axis_cluster_average(vol_from(data), 4, 4, 4) == pytest.approx(90 / 3)


class TestLocalCluster:
    CFG = FilterConfig(kind=FilterKind.LOCAL_CLUSTER)

    def test_constant(self):
        assert local_cluster_filter(constant(123), 4, 4, 4, self.CFG) == 123.0

    def test_single_spot_attenuation(self, spot_volume):
        # only the center cluster touches the spike: (255/3) / 9
        got = local_cluster_filter(spot_volume, 4, 4, 4, self.CFG)
        assert got == pytest.approx(255 / 27)

    def test_half_space_boundary_value(self):
        data = np.zeros((9, 9, 9), dtype=np.uint8)
        data[:, :, :5] = 200  # x <= 4 filled; center sits on the face
        got = local_cluster_filter(vol_from(data), 4, 4, 4, self.CFG)
        # golden value from the reference oracle: center cluster 1600/9, the
        # four fully-inside diagonal clusters 200, the four outside ones
        # 200/9, averaging to 3200/27
        assert got == pytest.approx(3200 / 27)
        assert got == pytest.approx(reference_filter(vol_from(data), 4, 4, 4, self.CFG))
        assert 0 < got < 200

    def test_requires_matching_kind(self, spot_volume):
        with pytest.raises(FilterError):
            local_cluster_filter(spot_volume, 4, 4, 4, FilterConfig(kind=FilterKind.MEAN))


class TestMeanFilter:
    def test_constant(self):
        assert mean_filter(constant(44), 4, 4, 4) == 44.0

    def test_single_voxel(self):
        data = np.zeros((9, 9, 9), dtype=np.uint8)
        data[4, 4, 4] = 27
        assert mean_filter(vol_from(data), 4, 4, 4) == 1.0

    def test_corner_zero_extension(self):
        # 8 of 27 kernel samples are inside at a corner
        assert mean_filter(constant(27), 0, 0, 0) == pytest.approx(8 * 27 / 27)


class TestSigmaFilter:
    def test_zero_sigma_keeps_equal_values_only(self):
        data = np.full((9, 9, 9), 10, dtype=np.uint8)
        data[4, 4, 4] = 200
        assert sigma_filter(vol_from(data), 4, 4, 4, 3, 2.0, 0.0) == 200.0

    def test_band_excludes_far_values(self):
        data = np.full((9, 9, 9), 10, dtype=np.uint8)
        data[4, 4, 4] = 200
        # band 2*5 = 10 around 200 excludes the 10s
        assert sigma_filter(vol_from(data), 4, 4, 4, 3, 2.0, 5.0) == 200.0

    def test_constant(self):
        assert sigma_filter(constant(50), 4, 4, 4, 3, 2.0, 30.0) == 50.0

    def test_wide_band_averages_everything(self):
        data = np.full((9, 9, 9), 10, dtype=np.uint8)
        data[4, 4, 4] = 37
        got = sigma_filter(vol_from(data), 4, 4, 4, 3, 2.0, 200.0)
        assert got == pytest.approx((26 * 10 + 37) / 27)


class TestOkadaFilter:
    def test_constant(self):
        assert okada_filter(constant(66), 4, 4, 4, 5.0) == 66.0

    def test_partial_neighbors(self):
        data = np.full((9, 9, 9), 250, dtype=np.uint8)
        data[4, 4, 4] = 100
        data[4, 4, 3] = 98  # -x neighbor
        data[4, 4, 5] = 99  # +x neighbor
        assert okada_filter(vol_from(data), 4, 4, 4, 5.0) == pytest.approx((98 + 99) / 2)

    def test_no_neighbors_returns_zero(self):
        data = np.full((9, 9, 9), 250, dtype=np.uint8)
        data[4, 4, 4] = 100
        assert okada_filter(vol_from(data), 4, 4, 4, 5.0) == 0.0

    def test_center_not_in_average(self):
        data = np.zeros((9, 9, 9), dtype=np.uint8)
        data[4, 4, 4] = 10
        data[4, 4, 5] = 14
        # only the 14 qualifies (|10-14| < 5); center 10 itself excluded
        assert okada_filter(vol_from(data), 4, 4, 4, 5.0) == 14.0


class TestEntropyFilter:
    def test_single_level_volume_suppresses(self):
        v = constant(99)
        h = build_histogram(v)
        assert entropy_filter(v, 4, 4, 4, 3, 0.5, h.probabilities) == 0.0

    def test_half_probability_levels(self):
        # kernel of 27 voxels, each level has global probability 1/2:
        # H = 27 * 0.5 = 13.5 bits
        data = np.zeros((6, 6, 6), dtype=np.uint8)
        data[:3] = 7
        data[3:] = 9
        v = vol_from(data)
        h = build_histogram(v)
        assert entropy_filter(v, 3, 3, 3, 3, 2.0, h.probabilities) == float(v.sample(3, 3, 3))
        # and the entropy sum itself crosses a 13.4 threshold but not 13.6
        assert entropy_filter(v, 3, 3, 3, 3, 13.4, h.probabilities) != 0.0
        assert entropy_filter(v, 3, 3, 3, 3, 13.6, h.probabilities) == 0.0

    def test_negative_threshold_always_passes(self, constant_volume):
        h = build_histogram(constant_volume)
        got = entropy_filter(constant_volume, 4, 4, 4, 3, -1.0, h.probabilities)
        assert got == 77.0


class TestApplyFilter:
    def test_none_is_identity(self, constant_volume):
        assert apply_filter(constant_volume, 4, 4, 4, FilterConfig()) == 77.0

    def test_mean_dispatch_on_constant(self, constant_volume):
        assert apply_filter(constant_volume, 4, 4, 4, FilterConfig(kind=FilterKind.MEAN)) == 77.0

    def test_missing_histogram_is_config_error(self, constant_volume):
        for kind in (FilterKind.SIGMA, FilterKind.ENTROPY):
            with pytest.raises(FilterError, match="histogram"):
                apply_filter(constant_volume, 4, 4, 4, FilterConfig(kind=kind))

    def test_batch_matches_scalar(self, random_volume_9):
        h = build_histogram(random_volume_9)
        cfg = FilterConfig(kind=FilterKind.LOCAL_CLUSTER)
        xs, ys, zs = [1, 4, 8], [0, 4, 7], [2, 4, 6]
        batch = apply_filter_batch(random_volume_9, xs, ys, zs, cfg, h)
        for i in range(3):
            assert batch[i] == apply_filter(random_volume_9, xs[i], ys[i], zs[i], cfg, h)


class TestReferenceEquivalence:
    def test_random_volumes_all_kinds(self):
        rs = np.random.default_rng(11)
        for trial in range(40):
            data = rs.integers(0, 256, (9, 9, 9), dtype=np.uint8)
            v = vol_from(data)
            h = build_histogram(v)
            coords = rs.integers(-1, 10, (8, 3))
            for kind in FilterKind:
                cfg = FilterConfig(kind=kind)
                for cx, cy, cz in coords:
                    fast = apply_filter(v, int(cx), int(cy), int(cz), cfg, h)
                    ref = reference_filter(v, int(cx), int(cy), int(cz), cfg, h)
                    assert abs(fast - ref) <= 1e-9, (kind, (cx, cy, cz))

    def test_constant_volume_exact(self, constant_volume):
        h = build_histogram(constant_volume)
        for kind in FilterKind:
            cfg = FilterConfig(kind=kind)
            assert apply_filter(constant_volume, 4, 4, 4, cfg, h) == reference_filter(
                constant_volume, 4, 4, 4, cfg, h
            )

    def test_border_coordinates_exact(self, random_volume_9):
        h = build_histogram(random_volume_9)
        for kind in FilterKind:
            cfg = FilterConfig(kind=kind)
            for c in [(0, 0, 0), (8, 8, 8), (0, 4, 8), (-3, 4, 4), (4, 4, 12)]:
                fast = apply_filter(random_volume_9, *c, cfg, h)
                ref = reference_filter(random_volume_9, *c, cfg, h)
                assert fast == pytest.approx(ref, abs=1e-9)

    def test_larger_kernel_and_offset(self, random_volume_9):
        h = build_histogram(random_volume_9)
        for kind in (FilterKind.MEAN, FilterKind.SIGMA, FilterKind.ENTROPY,
                     FilterKind.LOCAL_CLUSTER):
            cfg = FilterConfig(kind=kind, kernel_size=5, cluster_offset=2)
            for c in [(4, 4, 4), (1, 7, 3)]:
                fast = apply_filter(random_volume_9, *c, cfg, h)
                ref = reference_filter(random_volume_9, *c, cfg, h)
                assert fast == pytest.approx(ref, abs=1e-9)


class TestFilterProperties:
    def test_idempotent_on_constants(self, constant_volume):
        h = build_histogram(constant_volume)
        v = constant_volume
        assert apply_filter(v, 4, 4, 4, FilterConfig(kind=FilterKind.MEAN), h) == 77.0
        assert apply_filter(v, 4, 4, 4, FilterConfig(kind=FilterKind.LOCAL_CLUSTER), h) == 77.0
        assert apply_filter(v, 4, 4, 4, FilterConfig(kind=FilterKind.SIGMA), h) == 77.0
        assert apply_filter(v, 4, 4, 4, FilterConfig(kind=FilterKind.OKADA), h) == 77.0
        # entropy of a single-level volume is zero, so the suppress branch
        # is the one taken at any positive threshold
        assert apply_filter(v, 4, 4, 4, FilterConfig(kind=FilterKind.ENTROPY), h) == 0.0
        cfg = FilterConfig(kind=FilterKind.ENTROPY, entropy_threshold=0.0)
        assert apply_filter(v, 4, 4, 4, cfg, h) == 0.0  # H == 0 is not > 0

    @given(data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_outputs_stay_in_range(self, data):
        rs = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        v = vol_from(rs.integers(0, 256, (7, 7, 7), dtype=np.uint8))
        h = build_histogram(v)
        kind = data.draw(st.sampled_from(list(FilterKind)))
        c = data.draw(st.tuples(*[st.integers(-2, 8)] * 3))
        out = apply_filter(v, *c, FilterConfig(kind=kind), h)
        assert 0.0 <= out <= 255.0

    def test_mean_and_cluster_shift_equivariance(self):
        rs = np.random.default_rng(3)
        base = rs.integers(40, 120, (9, 9, 9), dtype=np.uint8)
        shift = 25
        v1 = vol_from(base)
        v2 = vol_from(base + shift)  # stays below 255: no clamping
        for kind in (FilterKind.MEAN, FilterKind.LOCAL_CLUSTER):
            cfg = FilterConfig(kind=kind)
            for c in [(4, 4, 4), (3, 5, 4), (2, 2, 2)]:  # cluster reach stays inside
                a = apply_filter(v1, *c, cfg)
                b = apply_filter(v2, *c, cfg)
                assert b == pytest.approx(a + shift, abs=1e-9)

    def test_spike_attenuation_golden_values(self, spot_volume):
        # the reference filter is the authority for both spike responses
        mean_cfg = FilterConfig(kind=FilterKind.MEAN)
        lc_cfg = FilterConfig(kind=FilterKind.LOCAL_CLUSTER)
        ref_mean = reference_filter(spot_volume, 4, 4, 4, mean_cfg)
        ref_lc = reference_filter(spot_volume, 4, 4, 4, lc_cfg)
        assert ref_mean == pytest.approx(255 / 27)
        assert ref_lc == pytest.approx(255 / 27)
        assert apply_filter(spot_volume, 4, 4, 4, mean_cfg) == pytest.approx(ref_mean)
        assert apply_filter(spot_volume, 4, 4, 4, lc_cfg) == pytest.approx(ref_lc)
        assert ref_lc <= ref_mean

    def test_axis_symmetry_invariance(self):
        n = 7
        rs = np.random.default_rng(8)
        data = rs.integers(0, 256, (n, n, n), dtype=np.uint8)
        v = vol_from(data)
        h = build_histogram(v)
        coord = (2, 3, 4)
        expected = {
            kind: apply_filter(v, *coord, FilterConfig(kind=kind), h) for kind in FilterKind
        }

        def transform_point(p, perm, flips):
            out = [p[perm[axis]] for axis in range(3)]
            return tuple((n - 1 - out[a]) if flips[a] else out[a] for a in range(3))

        for perm in itertools.permutations(range(3)):
            for flips in itertools.product((False, True), repeat=3):
                new = np.zeros_like(data)
                for z in range(n):
                    for y in range(n):
                        for x in range(n):
                            tx, ty, tz = transform_point((x, y, z), perm, flips)
                            new[tz, ty, tx] = data[z, y, x]
                tv = vol_from(new)
                th = build_histogram(tv)
                tc = transform_point(coord, perm, flips)
                for kind in FilterKind:
                    got = apply_filter(tv, *tc, FilterConfig(kind=kind), th)
                    assert got == pytest.approx(expected[kind], abs=1e-9), (kind, perm, flips)


class TestFilterConfig:
    def test_kernel_must_be_odd(self):
        with pytest.raises(FilterError):
            FilterConfig(kernel_size=4)
        with pytest.raises(FilterError):
            FilterConfig(kernel_size=1)

    def test_thresholds_nonnegative(self):
        with pytest.raises(FilterError):
            FilterConfig(threshold=-1)
        with pytest.raises(FilterError):
            FilterConfig(okada_threshold=-0.5)

    def test_unknown_name_lists_valid(self):
        with pytest.raises(FilterError, match="none, mean, sigma, okada, entropy, local-cluster"):
            FilterKind.from_name("nosuch")

    def test_json_round_trip(self):
        cfg = FilterConfig(kind=FilterKind.OKADA, kernel_size=5, threshold=101.0,
                           okada_threshold=30.0)
        assert FilterConfig.from_json(cfg.to_json()) == cfg

    def test_digest_distinguishes_configs(self):
        a = FilterConfig(kind=FilterKind.MEAN)
        b = FilterConfig(kind=FilterKind.MEAN, threshold=100.0)
        assert a.digest() != b.digest()
        assert len(a.digest()) == 8

    def test_resolve_threshold_uses_otsu(self, small_sphere_histogram):
        cfg = FilterConfig(kind=FilterKind.MEAN).resolve_threshold(small_sphere_histogram)
        assert cfg.threshold == float(small_sphere_histogram.otsu_threshold)
        explicit = FilterConfig(kind=FilterKind.MEAN, threshold=5.0)
        assert explicit.resolve_threshold(small_sphere_histogram).threshold == 5.0
