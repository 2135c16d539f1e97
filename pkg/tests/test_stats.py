"""Locality statistics: class means, standardization, t-tests, schedules."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import GAUSSIAN_KERNEL, LAPLACIAN_KERNEL, stack_to_layer_weights
from locoreg.stats import (
    CENTER_CLASS,
    DIAG_CLASS,
    NEAR_CLASS,
    DegenerateLayerError,
    KernelLayer,
    KernelSet,
    ScheduleEntry,
    affine_modulation,
    aggregate_profile,
    class_label,
    derive_schedule,
    eligible_layers,
    format_schedule,
    group_mean,
    index_classes,
    layer_profile,
    parse_schedule,
    profile_table,
    significance_stars,
    student_cdf,
    t_test_one_sided,
)

I_CENTER = ((1, 1),)
I_NEAR = ((0, 1), (1, 0), (1, 2), (2, 1))
I_DIAG = ((0, 0), (0, 2), (2, 0), (2, 2))


def oracle_student_cdf(t, df):
    """CDF by numeric integration of the t density from 0, loops and quad only."""

    def pdf(x):
        return math.exp(
            math.lgamma((df + 1) / 2.0)
            - math.lgamma(df / 2.0)
            - 0.5 * math.log(df * math.pi)
            - (df + 1) / 2.0 * math.log1p(x * x / df)
        )

    area, _ = quad(pdf, 0.0, abs(t))
    return 0.5 + area if t >= 0 else 0.5 - area


def make_layer(stack, name="conv", depth=0):
    return KernelLayer(name, depth, stack_to_layer_weights(stack))


def jittered_layer(rng, kernel, n=40, scale=1e-4, name="conv", depth=0):
    stack = kernel[None, :, :] + scale * rng.standard_normal((n, 3, 3))
    return make_layer(stack, name, depth)


class TestIndexClasses:
    def test_k3_matches_named_sets(self):
        ic = index_classes(3)
        assert ic.distances == (0, 1, 2)
        assert ic.cells(0) == I_CENTER
        assert set(ic.cells(1)) == set(I_NEAR)
        assert set(ic.cells(2)) == set(I_DIAG)

    def test_k5_distances(self):
        assert index_classes(5).distances == (0, 1, 2, 4, 5, 8)

    def test_partition(self):
        for k in (3, 5, 7):
            ic = index_classes(k)
            all_cells = [c for _, cells in ic.classes for c in cells]
            assert len(all_cells) == k * k
            assert len(set(all_cells)) == k * k

    def test_unknown_distance(self):
        with pytest.raises(KeyError):
            index_classes(3).cells(8)

    def test_labels(self):
        assert [class_label(d) for d in (0, 1, 2, 4, 5, 8)] == [
            "center",
            "near",
            "diag",
            "d4",
            "d5",
            "d8",
        ]


class TestGroupMean:
    def test_gaussian_class_means(self, gaussian_kernel):
        assert group_mean(gaussian_kernel, I_CENTER) == 0.25
        assert group_mean(gaussian_kernel, I_NEAR) == 0.12
        assert group_mean(gaussian_kernel, I_DIAG) == 0.06

    def test_gaussian_differences_exact(self, gaussian_kernel):
        m_c = group_mean(gaussian_kernel, I_CENTER)
        m_n = group_mean(gaussian_kernel, I_NEAR)
        m_d = group_mean(gaussian_kernel, I_DIAG)
        assert m_c - m_n == 0.13
        assert m_n - m_d == 0.06

    def test_laplacian_magnitudes(self, laplacian_kernel):
        assert group_mean(laplacian_kernel, I_CENTER, use_abs=True) == 8.0
        assert group_mean(laplacian_kernel, I_NEAR, use_abs=True) == 1.0
        assert group_mean(laplacian_kernel, I_DIAG, use_abs=True) == 1.0

    def test_signed_mode(self, laplacian_kernel):
        assert group_mean(laplacian_kernel, I_NEAR, use_abs=False) == -1.0

    def test_zero_kernel(self):
        assert group_mean(np.zeros((3, 3)), I_NEAR) == 0.0

    def test_empty_set(self):
        with pytest.raises(ValueError):
            group_mean(np.zeros((3, 3)), ())

    def test_bad_cell(self):
        with pytest.raises(IndexError):
            group_mean(np.zeros((3, 3)), ((3, 1),))


class TestLayerProfile:
    def test_antisymmetric_pair(self):
        a = np.zeros((3, 3))
        a[1, 1] = 2.0
        b = np.zeros((3, 3))
        for cell in I_NEAR:
            b[cell] = 2.0
        got = layer_profile(np.stack([a, b]), I_CENTER, I_NEAR)
        assert np.allclose(got, [1.0, -1.0])

    def test_identical_kernels_degenerate(self, gaussian_kernel):
        stack = np.stack([gaussian_kernel] * 5)
        with pytest.raises(DegenerateLayerError):
            layer_profile(stack, I_CENTER, I_NEAR)

    def test_jittered_gaussian_all_positive(self, gaussian_kernel):
        rng = np.random.default_rng(41)
        stack = gaussian_kernel[None] + 1e-4 * rng.standard_normal((30, 3, 3))
        got = layer_profile(stack, I_CENTER, I_NEAR)
        assert np.all(got > 0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(42)
        stack = rng.standard_normal((20, 3, 3))
        base = layer_profile(stack, I_CENTER, I_NEAR)
        scaled = layer_profile(7.3 * stack, I_CENTER, I_NEAR)
        assert np.allclose(base, scaled, rtol=1e-12)

    def test_needs_two_kernels(self):
        with pytest.raises(ValueError):
            layer_profile(np.ones((1, 3, 3)), I_CENTER, I_NEAR)

    def test_population_sigma(self):
        # divide-by-n spread: obs {3, 1} has sigma 1, not sqrt(2)
        a = np.zeros((3, 3))
        a[1, 1] = 3.0
        b = np.zeros((3, 3))
        b[1, 1] = 1.0
        got = layer_profile(np.stack([a, b]), I_CENTER, I_NEAR)
        assert np.allclose(got, [3.0, 1.0])


class TestStudentCDF:
    def test_at_zero(self):
        assert student_cdf(0.0, 5) == 0.5

    def test_table_quantile(self):
        assert student_cdf(2.015, 5) == pytest.approx(0.95, abs=1e-4)

    def test_symmetry(self):
        for t in (0.3, 1.0, 2.5):
            assert student_cdf(-t, 7) == pytest.approx(1.0 - student_cdf(t, 7), abs=1e-15)

    def test_monotone(self):
        ts = np.linspace(-4, 4, 33)
        vals = [student_cdf(t, 9) for t in ts]
        assert np.all(np.diff(vals) > 0)

    def test_oracle_sweep(self):
        for df in range(1, 101):
            for t in (-2.0, 0.5, 2.0, 6.708203932499369):
                assert student_cdf(t, df) == pytest.approx(oracle_student_cdf(t, df), abs=1e-6)

    def test_rejects_df_zero(self):
        with pytest.raises(ValueError):
            student_cdf(1.0, 0)


class TestTTest:
    def test_hand_arithmetic(self):
        t, p = t_test_one_sided([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
        assert t == pytest.approx(6.708203932499369, abs=1e-12)
        assert p == pytest.approx(1.0 - oracle_student_cdf(t, 5), abs=1e-9)

    def test_symmetric_pair(self):
        t, p = t_test_one_sided([-0.7, 0.7])
        assert t == 0.0
        assert p == 0.5

    def test_zero_variance(self):
        with pytest.raises(ValueError):
            t_test_one_sided([1.0, 1.0, 1.0])

    def test_too_few(self):
        with pytest.raises(ValueError):
            t_test_one_sided([1.0])

    def test_negative_mean_large_p(self):
        t, p = t_test_one_sided([-1.0, -1.1, -0.9, -1.05])
        assert t < 0
        assert p > 0.99


class TestSignificanceStars:
    @pytest.mark.parametrize(
        "p,stars",
        [(0.0005, "***"), (0.001, "**"), (0.005, "**"), (0.01, "*"), (0.05, "*"), (0.1, ""), (0.5, "")],
    )
    def test_thresholds(self, p, stars):
        assert significance_stars(p) == stars


class TestAggregateProfile:
    def test_jittered_gaussian_strongly_significant(self, gaussian_kernel):
        rng = np.random.default_rng(43)
        kset = KernelSet(
            "blurnet",
            [jittered_layer(rng, gaussian_kernel, n=20, name=f"conv{i}", depth=i) for i in range(2)],
        )
        row = aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS)
        assert row.comparison == "center-near"
        assert row.n == 40
        assert row.m > 0
        assert row.stars == "***"

    def test_single_layer_all_equals_lower_half(self, gaussian_kernel):
        rng = np.random.default_rng(44)
        kset = KernelSet("one", [jittered_layer(rng, gaussian_kernel)])
        a = aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS, "all")
        b = aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS, "lower_half")
        assert (a.m, a.n, a.t, a.p) == (b.m, b.n, b.t, b.p)

    def test_single_layer_upper_half_empty(self, gaussian_kernel):
        rng = np.random.default_rng(45)
        kset = KernelSet("one", [jittered_layer(rng, gaussian_kernel)])
        with pytest.raises(ValueError):
            aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS, "upper_half")

    def test_lower_upper_split(self, gaussian_kernel):
        # 3 layers: lower half = first 2 by depth, upper = last 1
        rng = np.random.default_rng(46)
        layers = [jittered_layer(rng, gaussian_kernel, n=10 + i, name=f"c{i}", depth=i) for i in range(3)]
        kset = KernelSet("three", layers)
        low = aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS, "lower_half")
        up = aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS, "upper_half")
        assert low.n == 10 + 11
        assert up.n == 12

    def test_permutation_invariance(self):
        rng = np.random.default_rng(47)
        stack = rng.standard_normal((30, 3, 3))
        perm = rng.permutation(30)
        a = aggregate_profile(KernelSet("m", [make_layer(stack)]), use_abs=False)
        b = aggregate_profile(KernelSet("m", [make_layer(stack[perm])]), use_abs=False)
        assert a.m == pytest.approx(b.m, rel=1e-12)
        assert a.t == pytest.approx(b.t, rel=1e-12)
        assert a.p == pytest.approx(b.p, rel=1e-12)

    def test_degenerate_layer_skipped_with_warning(self, gaussian_kernel):
        rng = np.random.default_rng(48)
        flat = make_layer(np.stack([gaussian_kernel] * 8), name="flat", depth=0)
        good = jittered_layer(rng, gaussian_kernel, n=12, name="good", depth=1)
        kset = KernelSet("m", [flat, good])
        with pytest.warns(UserWarning, match="degenerate"):
            row = aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS)
        assert row.n == 12

    def test_one_by_one_layers_excluded(self):
        rng = np.random.default_rng(49)
        pointwise = KernelLayer("pw", 0, rng.standard_normal((1, 1, 4, 8)))
        spatial = make_layer(rng.standard_normal((10, 3, 3)), name="sp", depth=1)
        kset = KernelSet("m", [pointwise, spatial])
        assert eligible_layers(kset) == [spatial]
        assert aggregate_profile(kset, use_abs=False).n == 10

    def test_only_pointwise_layers_error(self):
        rng = np.random.default_rng(50)
        kset = KernelSet("m", [KernelLayer("pw", 0, rng.standard_normal((1, 1, 2, 2)))])
        with pytest.raises(ValueError):
            aggregate_profile(kset)

    def test_mixed_k_pools_both(self):
        rng = np.random.default_rng(51)
        k3 = make_layer(rng.standard_normal((10, 3, 3)), name="a", depth=0)
        k5 = make_layer(rng.standard_normal((12, 5, 5)), name="b", depth=1)
        row = aggregate_profile(KernelSet("m", [k3, k5]), use_abs=False)
        assert row.n == 22

    def test_class_missing_in_small_k_warns(self):
        rng = np.random.default_rng(52)
        k3 = make_layer(rng.standard_normal((10, 3, 3)), name="a", depth=0)
        k5 = make_layer(rng.standard_normal((12, 5, 5)), name="b", depth=1)
        kset = KernelSet("m", [k3, k5])
        with pytest.warns(UserWarning, match="lacks"):
            row = aggregate_profile(kset, DIAG_CLASS, 8, use_abs=False)
        assert row.n == 12

    def test_null_calibration_sample(self):
        # sign-symmetric weights, signed mode: the center-near statistic
        # should look like noise; expect p > 0.1 in the vast majority of seeds
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            layers = [
                make_layer(rng.standard_normal((40, 3, 3)), name=f"c{d}", depth=d)
                for d in range(3)
            ]
            row = aggregate_profile(KernelSet("null", layers), use_abs=False)
            hits += row.p > 0.1
        assert hits >= 16

    def test_profile_table_rows(self, gaussian_kernel):
        rng = np.random.default_rng(53)
        kset = KernelSet(
            "m",
            [jittered_layer(rng, gaussian_kernel, n=10, name=f"c{i}", depth=i) for i in range(2)],
        )
        rows = profile_table(kset)
        assert [(r.comparison, r.subset) for r in rows] == [
            ("center-near", "all"),
            ("center-near", "lower_half"),
            ("center-near", "upper_half"),
            ("near-diag", "all"),
            ("near-diag", "lower_half"),
            ("near-diag", "upper_half"),
        ]


class TestSchedule:
    def test_affine_modulation(self):
        assert affine_modulation(1.0, 1.5) == 1.0
        assert affine_modulation(0.8, 1.5) == pytest.approx(0.7, abs=1e-15)
        assert affine_modulation(1.2, 1.5) == pytest.approx(1.3, abs=1e-15)

    def test_equal_class_means_give_neutral(self):
        layer = make_layer(np.ones((4, 3, 3)), name="c0")
        [entry] = derive_schedule([KernelSet("m", [layer])])
        assert entry.gamma == pytest.approx(1.0, abs=1e-15)
        assert entry.eta == pytest.approx(1.0, abs=1e-15)

    def test_center_heavy_layer(self):
        # near/center ratio 0.8 -> gamma 0.7; near/diag ratio 0.8 -> eta 1/0.7
        w = np.ones((3, 3))
        for cell in I_NEAR:
            w[cell] = 0.8
        [entry] = derive_schedule([KernelSet("m", [make_layer(w[None])])], c=1.5)
        assert entry.gamma == pytest.approx(0.7, rel=1e-12)
        assert entry.eta == pytest.approx(1.0 / 0.7, rel=1e-12)

    def test_corner_light_layer(self):
        # near/diag ratio 1.2 -> eta 1/1.3
        w = np.ones((3, 3))
        for cell in I_NEAR:
            w[cell] = 1.2
        w[1, 1] = 1.2  # keep near/center ratio at 1
        [entry] = derive_schedule([KernelSet("m", [make_layer(w[None])])], c=1.5)
        assert entry.gamma == pytest.approx(1.0, rel=1e-12)
        assert entry.eta == pytest.approx(1.0 / 1.3, rel=1e-12)

    def test_ratio_averaged_over_models(self):
        def model(near_value):
            w = np.ones((3, 3))
            for cell in I_NEAR:
                w[cell] = near_value
            return KernelSet("m", [make_layer(w[None])])

        # ratios 0.6 and 1.0 average to 0.8 -> gamma 0.7
        [entry] = derive_schedule([model(0.6), model(1.0)], c=1.5)
        assert entry.gamma == pytest.approx(0.7, rel=1e-12)

    def test_zero_center_rejected(self):
        w = np.ones((3, 3))
        w[1, 1] = 0.0
        with pytest.raises(ValueError, match="center"):
            derive_schedule([KernelSet("m", [make_layer(w[None])])])

    def test_zero_near_makes_nonpositive_gamma(self):
        w = np.zeros((3, 3))
        w[1, 1] = 1.0
        for cell in I_DIAG:
            w[cell] = 1.0
        with pytest.raises(ValueError, match="non-positive"):
            derive_schedule([KernelSet("m", [make_layer(w[None])])], c=1.5)

    def test_layer_count_mismatch(self):
        rng = np.random.default_rng(54)
        one = KernelSet("a", [make_layer(rng.standard_normal((4, 3, 3)))])
        two = KernelSet(
            "b",
            [make_layer(rng.standard_normal((4, 3, 3)), name=f"c{d}", depth=d) for d in range(2)],
        )
        with pytest.raises(ValueError, match="layer count"):
            derive_schedule([one, two])

    def test_names_from_first_model(self):
        rng = np.random.default_rng(55)
        a = KernelSet("a", [make_layer(np.abs(rng.standard_normal((4, 3, 3))) + 0.1, name="alpha")])
        b = KernelSet("b", [make_layer(np.abs(rng.standard_normal((4, 3, 3))) + 0.1, name="beta")])
        [entry] = derive_schedule([a, b])
        assert entry.layer == "alpha"

    def test_round_trip(self):
        entries = [
            ScheduleEntry("conv1", 0.7, 1.0 / 1.3, 1.5),
            ScheduleEntry("conv2, odd name", 1.1, 0.9, 1.5),
        ]
        assert parse_schedule(format_schedule(entries)) == entries

    def test_parse_rejects_bad_header(self):
        with pytest.raises(ValueError):
            parse_schedule("layer,g,e,c\nconv1,1,1,1.5\n")

    def test_parse_rejects_empty(self):
        with pytest.raises(ValueError):
            parse_schedule("")

    def test_entry_positivity(self):
        with pytest.raises(ValueError):
            ScheduleEntry("x", -0.1, 1.0, 1.5)


class TestKernelSetTypes:
    def test_layer_rejects_non_4d(self):
        with pytest.raises(ValueError):
            KernelLayer("x", 0, np.ones((3, 3)))

    def test_layer_rejects_rectangular(self):
        with pytest.raises(ValueError):
            KernelLayer("x", 0, np.ones((3, 5, 1, 1)))

    def test_layer_rejects_even(self):
        with pytest.raises(ValueError):
            KernelLayer("x", 0, np.ones((2, 2, 1, 1)))

    def test_layer_rejects_nan(self):
        w = np.ones((3, 3, 1, 1))
        w[0, 0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            KernelLayer("x", 0, w)

    def test_set_sorts_by_depth(self):
        l2 = make_layer(np.ones((1, 3, 3)), name="late", depth=5)
        l1 = make_layer(np.ones((1, 3, 3)), name="early", depth=1)
        kset = KernelSet("m", [l2, l1])
        assert [layer.name for layer in kset.layers] == ["early", "late"]

    def test_set_rejects_duplicate_depths(self):
        layers = [make_layer(np.ones((1, 3, 3)), name=n, depth=0) for n in ("a", "b")]
        with pytest.raises(ValueError):
            KernelSet("m", layers)

    def test_kernel_stack_order(self):
        w = np.zeros((3, 3, 2, 3))
        for c in range(2):
            for f in range(3):
                w[:, :, c, f] = 10 * c + f
        stack = KernelLayer("x", 0, w).kernel_stack()
        assert [int(s[0, 0]) for s in stack] == [0, 1, 2, 10, 11, 12]
