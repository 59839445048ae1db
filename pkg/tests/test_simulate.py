import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from levelset_lab import simulate
from levelset_lab.simulate import (
    HorizonError,
    ModelError,
    PathSample,
    path_rng,
    read_path_csv,
    read_paths_binary,
    sample_levy_type,
    sample_stable_subordinator,
    sample_subordinated_stable,
    sample_symmetric_stable,
    subordinate_path,
    write_path_csv,
    write_paths_binary,
)
from levelset_lab.symbol import LevyMeasureModel

XI = np.array([0.25, 0.5, 1.0, 2.0, 4.0])


def ecf(x, xi=XI):
    """Real part of the empirical characteristic function and its standard error."""
    c = np.cos(np.outer(xi, x))
    return c.mean(axis=1), c.std(axis=1, ddof=1) / math.sqrt(len(x))


def levy_half_cdf(x):
    """CDF of the positive 1/2-stable law with Laplace transform exp(-√λ)."""
    return special.erfc(0.5 / np.sqrt(x))


def endpoints(sampler, count, **kw):
    return np.array([sampler(seed=5, index=i, **kw).x[-1] for i in range(count)])


class TestSeeding:
    def test_same_stream(self):
        a, b = path_rng(3, 7).standard_normal(5), path_rng(3, 7).standard_normal(5)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        assert not np.array_equal(path_rng(3, 7).standard_normal(5), path_rng(3, 8).standard_normal(5))
        assert not np.array_equal(path_rng(3, 7).standard_normal(5), path_rng(4, 7).standard_normal(5))

    def test_paths_bit_identical(self):
        a = sample_symmetric_stable(1.5, 256, seed=11, index=4)
        b = sample_symmetric_stable(1.5, 256, seed=11, index=4)
        assert np.array_equal(a.values, b.values)


class TestSubordinator:
    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.7])
    def test_laplace_transform(self, gamma):
        s = simulate.positive_stable(gamma, 100_000, path_rng(1, 0))
        e = np.exp(-s)
        assert abs(e.mean() - math.exp(-1)) <= 3 * e.std(ddof=1) / math.sqrt(len(e))

    def test_closed_form_law(self):
        s = simulate.positive_stable(0.5, 100_000, path_rng(2, 0))
        assert stats.kstest(s, levy_half_cdf).statistic <= 0.01

    def test_scaling(self):
        # T_2 = 2^{1/γ} T_1 in law: compare against the exact quantiles of T_1 for γ = 1/2
        p = np.array([0.1, 0.25, 0.5])
        t2 = simulate.positive_stable(0.5, 100_000, path_rng(3, 0)) + simulate.positive_stable(0.5, 100_000, path_rng(3, 1))
        q1 = 0.25 / special.erfcinv(p) ** 2
        assert np.all(np.abs(np.quantile(t2, p) / (4 * q1) - 1) <= 0.02)

    def test_path_increasing(self):
        p = sample_stable_subordinator(0.6, 4096, seed=1)
        assert p.x[0] == 0.0 and np.all(np.diff(p.x) > 0)

    def test_path_marginal(self):
        # T_1 of a path on [0, 1] with many steps still has Laplace transform e^{-1}
        t1 = endpoints(sample_stable_subordinator, 4000, gamma=0.5, n_steps=64)
        e = np.exp(-t1)
        assert abs(e.mean() - math.exp(-1)) <= 4 * e.std(ddof=1) / math.sqrt(len(e))

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 1.5])
    def test_domain(self, gamma):
        with pytest.raises(ValueError):
            sample_stable_subordinator(gamma, 8)


class TestSymmetricStable:
    def test_characteristic_function(self):
        x = simulate.symmetric_stable(1.5, 100_000, path_rng(4, 0))
        xi = np.array([0.5, 1.0, 2.0])
        phi, se = ecf(x, xi)
        assert np.all(np.abs(phi - np.exp(-xi ** 1.5)) <= 3 * se)

    def test_path_endpoint_law(self):
        x = endpoints(sample_symmetric_stable, 3000, alpha=1.2, n_steps=32, horizon=2.0)
        phi, se = ecf(x)
        assert np.all(np.abs(phi - np.exp(-2.0 * XI ** 1.2)) <= 4 * se)

    def test_near_gaussian(self):
        # α → 2 approaches N(0, 2): interquartile range 2·√2·Φ^{-1}(3/4)
        x = simulate.symmetric_stable(1.99, 100_000, path_rng(5, 0))
        iqr = np.subtract(*np.quantile(x, [0.75, 0.25]))
        assert iqr == pytest.approx(2 * math.sqrt(2) * stats.norm.ppf(0.75), rel=0.05)

    def test_symmetry(self):
        x = simulate.symmetric_stable(0.8, 100_000, path_rng(6, 0))
        up, down = np.mean(x > 1.0), np.mean(x < -1.0)
        se = math.sqrt((up + down) / len(x))
        assert abs(up - down) <= 4 * se

    def test_isotropic_plane(self):
        x = simulate.isotropic_stable(1.3, 2, 100_000, path_rng(7, 0))
        for direction in ([1.0, 0.0], [0.6, 0.8]):
            proj = x @ np.asarray(direction)
            phi, se = ecf(proj, np.array([1.0]))
            assert abs(phi[0] - math.exp(-1.0)) <= 4 * se[0]

    def test_start_point_and_shape(self):
        p = sample_symmetric_stable(1.5, 16, n=3, x0=[1.0, 2.0, 3.0])
        assert p.values.shape == (17, 3) and np.array_equal(p.values[0], [1.0, 2.0, 3.0])

    @pytest.mark.parametrize("alpha", [0.0, 2.0])
    def test_domain(self, alpha):
        with pytest.raises(ValueError):
            sample_symmetric_stable(alpha, 8)


class TestLevyType:
    def test_reduces_to_exact_sampler(self):
        m = LevyMeasureModel.stable(1.5)
        x = np.array([sample_levy_type(m, 16, seed=8, index=i).x[-1] for i in range(10_000)])
        phi, _ = ecf(x)
        assert np.max(np.abs(phi - np.exp(-XI ** 1.5))) <= 0.02

    def test_doubled_intensity_is_time_change(self):
        m2 = LevyMeasureModel.stable(1.5, modulation=lambda x, h: 2.0, modulation_bounds=(2.0, 2.0))
        x = np.array([sample_levy_type(m2, 8, seed=9, index=i).x[-1] for i in range(4000)])
        phi, se = ecf(x)
        assert np.all(np.abs(phi - np.exp(-2.0 * XI ** 1.5)) <= 4 * se + 1e-3)

    def test_constant_drift(self):
        v = 1.4
        m = LevyMeasureModel.tempered(1.5, 1.0, drift=lambda x: v, drift_bound=v)
        x = np.array([sample_levy_type(m, 8, seed=10, index=i).x[-1] for i in range(2000)])
        assert abs(x.mean() - v) <= 3 * x.std(ddof=1) / math.sqrt(len(x))

    def test_step_refinement(self):
        m = LevyMeasureModel.tempered(1.2, 2.0)
        a = np.array([sample_levy_type(m, 8, seed=12, index=i).x[-1] for i in range(4000)])
        b = np.array([sample_levy_type(m, 16, seed=13, index=i).x[-1] for i in range(4000)])
        (pa, sa), (pb, sb) = ecf(a), ecf(b)
        assert np.all(np.abs(pa - pb) <= 4 * np.hypot(sa, sb))

    def test_cutoff_rule(self):
        m = LevyMeasureModel.stable(1.5)
        dt = 1.0 / 16
        target = 0.01 * dt ** (2 / 1.5)
        # uncapped: residual variance 4wδ^{1/2} meets the rule with equality
        s = simulate.jump_scheme(m, dt, max_jumps=1e12)
        assert s.small_variance == pytest.approx(target, rel=1e-5)
        assert s.small_variance == pytest.approx(4 * m.kernel.weight * s.delta ** 0.5, rel=1e-9)
        # capped: 32 candidate jumps per step, the rest goes to the Gaussian correction
        c = simulate.jump_scheme(m, dt)
        assert c.tail_mass * dt == pytest.approx(32, rel=1e-5)
        assert c.small_variance > target and c.delta > s.delta

    def test_envelope_violation(self):
        # the construction audit covers |x| <= 10; the excursion beyond is caught at run time
        m = LevyMeasureModel.stable(1.5, modulation=lambda x, h: 3.0 if abs(x) > 20 else 1.0,
                                    modulation_bounds=(1.0, 2.0))
        with pytest.raises(ModelError, match="envelope"):
            sample_levy_type(m, 64, x0=50.0)

    def test_plane_not_supported(self):
        with pytest.raises(NotImplementedError):
            sample_levy_type(LevyMeasureModel.stable(1.5, n=2), 8)


class TestSubordination:
    def test_near_identity_time_change(self):
        x = sample_symmetric_stable(1.5, 2 ** 14, horizon=4.0, seed=1)
        t = sample_stable_subordinator(0.999, 64, seed=2)
        y = subordinate_path(x, t)
        matched = x.values[np.round(t.times / x.dt).astype(int)]
        assert np.max(np.abs(y.x - matched[:, 0])) < 0.5
        assert np.all(np.diff(y.times) > 0)

    def test_horizon_error_and_truncation(self):
        x = sample_symmetric_stable(1.5, 64, horizon=1.0)
        t = sample_stable_subordinator(0.5, 64, horizon=50.0, seed=3)
        with pytest.raises(HorizonError):
            subordinate_path(x, t)
        y = subordinate_path(x, t, truncate=True)
        assert y.truncated and y.steps < t.steps

    def test_subordination_closure(self):
        z = np.array([sample_subordinated_stable(1.6, 0.5, 1, seed=14, index=i).x[-1] for i in range(20_000)])
        phi, se = ecf(z)
        assert np.all(np.abs(phi - np.exp(-XI ** 0.8)) <= 4 * se)


class TestIO:
    def test_binary_roundtrip(self, tmp_path):
        paths = [sample_symmetric_stable(1.5, 100, seed=1, index=i, n=2) for i in range(3)]
        write_paths_binary(tmp_path / "p.bin", paths)
        back = read_paths_binary(tmp_path / "p.bin")
        assert len(back) == 3
        for a, b in zip(paths, back):
            assert np.array_equal(a.values, b.values) and a.dt == b.dt

    def test_binary_needs_common_grid(self, tmp_path):
        with pytest.raises(ValueError):
            write_paths_binary(tmp_path / "p.bin", [sample_symmetric_stable(1.5, 8), sample_symmetric_stable(1.5, 9)])

    @given(values=st.lists(st.floats(-1e300, 1e300), min_size=2, max_size=20))
    @settings(max_examples=30, deadline=None)
    def test_csv_roundtrip(self, values, tmp_path_factory):
        p = PathSample(0.125, np.asarray(values), "test")
        f = tmp_path_factory.mktemp("csv") / "p.csv"
        write_path_csv(f, p)
        assert np.array_equal(read_path_csv(f).values, p.values)

    def test_invalid_path(self):
        with pytest.raises(ValueError):
            PathSample(0.1, np.array([0.0, np.nan]), "bad")
