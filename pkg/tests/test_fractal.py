import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelset_lab.fractal import (
    PointSet,
    box_counting_dim,
    box_counts,
    collision_locations,
    collision_times,
    hawkes_probe_dim,
    hull_hit_probability,
    level_set_times,
    monotone_violations,
    subordinator_hits,
)
from levelset_lab.indices import SetMeasureModel
from levelset_lab.simulate import PathSample, path_rng, sample_symmetric_stable

ORIGIN = SetMeasureModel.dirac(0.0)


def cantor_numerators(ratio_inv, depth):
    """Left endpoints of the depth-level Cantor blocks as integers over ratio_inv^depth."""
    top = ratio_inv - 1
    return sorted(sum(d * top * ratio_inv ** (depth - 1 - i) for i, d in enumerate(bits))
                  for bits in itertools.product((0, 1), repeat=depth))


def dyadic_count_oracle(ratio_inv, depth, k):
    """Occupied boxes [j 2^{-k}, (j+1) 2^{-k}) counted in exact integer arithmetic."""
    den = ratio_inv ** depth
    return len({min((m << k) // den, 2 ** k - 1) for m in cantor_numerators(ratio_inv, depth)})


def path(values, dt=0.1):
    return PathSample(dt, np.asarray(values, float), "test")


class TestExtraction:
    def test_constant_path_in_target(self):
        p = path(np.zeros(11))
        assert np.allclose(level_set_times(p, ORIGIN, 1e-3).points, p.times)

    def test_linear_crossing(self):
        # x(t) = t - 0.43 crosses 0 once between grid nodes
        p = path(np.arange(11) * 0.1 - 0.43)
        ps = level_set_times(p, ORIGIN, 1e-3)
        assert len(ps) == 1 and ps.points[0] == pytest.approx(0.43, abs=1e-12)

    def test_interval_target(self):
        p = path(np.linspace(-1, 1, 21))
        ps = level_set_times(p, SetMeasureModel.interval(0.0, 0.5), 1e-9)
        assert np.allclose(ps.points, p.times[10:16])

    def test_self_collision_is_full_grid(self):
        p = sample_symmetric_stable(1.5, 64, seed=1)
        assert np.allclose(collision_times(p, p, 1e-6).points, p.times)
        assert np.allclose(collision_locations(p, p, 1e-6).points, np.unique(p.x))

    def test_far_apart_paths_never_collide(self):
        p = sample_symmetric_stable(1.5, 64, seed=1)
        q = PathSample(p.dt, p.values + 10.0, "shifted")
        # a stable path on [0, 1] with 64 steps stays well inside ±5 for this seed
        assert np.ptp(p.x) < 5
        assert collision_times(p, q, 0.1).empty

    def test_grid_mismatch(self):
        with pytest.raises(ValueError, match="grid"):
            collision_times(sample_symmetric_stable(1.5, 64), sample_symmetric_stable(1.5, 32), 0.1)

    def test_collision_sets_shrink_with_eps(self):
        p, q = sample_symmetric_stable(1.5, 4096, seed=2, index=0), sample_symmetric_stable(1.5, 4096, seed=2, index=1)
        sets = [set(collision_times(p, q, e).points) for e in (0.5, 0.1, 0.02, 0.004)]
        assert all(b <= a for a, b in zip(sets, sets[1:]))
        assert len(sets[0]) > len(sets[-1])

    def test_level_sets_shrink_with_eps(self):
        p = sample_symmetric_stable(1.5, 4096, seed=3)
        sets = [set(level_set_times(p, ORIGIN, e).points) for e in (0.5, 0.1, 0.02)]
        assert all(b <= a for a, b in zip(sets, sets[1:]))


class TestBoxCounting:
    def test_dyadic_grid(self):
        e = box_counting_dim(PointSet.dyadic_grid(20))
        assert e.estimate == pytest.approx(1.0, abs=0.01)

    def test_single_point(self):
        e = box_counting_dim(PointSet(np.array([0.3]), (0.0, 1.0), 2.0 ** -20))
        assert e.estimate == pytest.approx(0.0, abs=0.01)

    @pytest.mark.parametrize("ratio_inv,depth", [(3, 7), (4, 6), (5, 6)])
    def test_counts_match_integer_oracle(self, ratio_inv, depth):
        ps = PointSet.cantor(1 / ratio_inv, depth)
        ks = range(0, 12)
        assert list(box_counts(ps.points, ps.ambient, ks)) == [dyadic_count_oracle(ratio_inv, depth, k) for k in ks]

    @pytest.mark.parametrize("ratio_inv,depth", [(3, 12), (4, 10), (5, 9)])
    def test_cantor_family(self, ratio_inv, depth):
        e = box_counting_dim(PointSet.cantor(1 / ratio_inv, depth))
        assert e.estimate == pytest.approx(math.log(2) / math.log(ratio_inv), abs=0.03)
        assert e.se > 0 and e.band[1] - e.band[0] >= 3

    @given(scale=st.floats(1e-3, 1e3), shift=st.floats(-1e3, 1e3))
    @settings(max_examples=30, deadline=None)
    def test_affine_invariance(self, scale, shift):
        base = PointSet.cantor(1 / 3, 8)
        moved = PointSet(shift + scale * base.points, (shift, shift + scale), scale * base.eps)
        ks = range(0, 12)
        assert np.array_equal(box_counts(base.points, base.ambient, ks), box_counts(moved.points, moved.ambient, ks))
        assert box_counting_dim(moved).estimate == pytest.approx(box_counting_dim(base).estimate, abs=1e-12)

    def test_too_few_scales(self):
        with pytest.raises(ValueError, match="4 scales"):
            box_counting_dim(PointSet.dyadic_grid(10), k_range=(0, 6))

    def test_empty(self):
        with pytest.raises(ValueError):
            box_counting_dim(PointSet(np.array([]), (0.0, 1.0)))


class TestHawkesProbe:
    def test_cantor(self):
        e = hawkes_probe_dim(PointSet.cantor(1 / 3, 10), seed=11)
        assert e.estimate == pytest.approx(math.log(2) / math.log(3), abs=0.07)
        assert "monotonicity-violation" not in e.flags
        lo, hi = e.interval
        assert lo <= e.estimate <= hi

    def test_full_interval_saturates(self):
        e = hawkes_probe_dim(np.array([[0.0, 1.0]]), gamma_grid=np.linspace(0.1, 0.9, 9), M=400, seed=1)
        assert np.all(e.table[:, 1] >= 0.95)
        assert e.estimate == pytest.approx(1.0, abs=0.05)

    def test_empty_set_is_degenerate(self):
        e = hawkes_probe_dim(PointSet(np.array([]), (0.0, 1.0)))
        assert e.estimate == 0.0 and "degenerate" in e.flags

    def test_hit_frequency_is_monotone(self):
        e = hawkes_probe_dim(PointSet.cantor(1 / 3, 8), gamma_grid=np.linspace(0.1, 0.9, 9), M=2000, seed=4)
        p = e.table[:, 1]
        se = np.sqrt(np.maximum(p * (1 - p), 1e-3) / 2000)
        assert monotone_violations(p, se) == []

    @pytest.mark.parametrize("gamma", [0.3, 0.6])
    def test_single_interval_hit_rate(self, gamma):
        # the simulated landing test agrees with the quadrature over the undershoot
        M = 20_000
        h = subordinator_hits(np.array([[1.0, 1.5]]), 0.0, gamma, M, path_rng(5, 0)).mean()
        exact = hull_hit_probability(0.0, 1.0, 1.5, gamma)
        assert abs(h - exact) <= 4 * math.sqrt(exact * (1 - exact) / M)

    def test_monotone_violation_detector(self):
        p, se = np.array([0.2, 0.5, 0.1]), np.full(3, 0.01)
        assert monotone_violations(p, se) == [(0, 2), (1, 2)]


class TestStablePaths:
    def test_zero_set_nonempty(self):
        # points are hit by a 1.5-stable path: ε = Δt^{1/α}
        n = 4096
        eps = (1.0 / n) ** (1 / 1.5)
        sizes = [len(level_set_times(sample_symmetric_stable(1.5, n, seed=6, index=i), ORIGIN, eps)) for i in range(32)]
        assert min(sizes) > 1

    def test_collisions_frequent(self):
        n = 4096
        eps = (1.0 / n) ** (1 / 1.5)
        hits = 0
        for i in range(100):
            p = sample_symmetric_stable(1.5, n, seed=7, index=2 * i)
            q = sample_symmetric_stable(1.5, n, seed=7, index=2 * i + 1)
            # the paths start together; count collisions after the first step
            t = collision_times(p, q, eps).points
            hits += np.any(t > p.dt)
        assert hits >= 95
