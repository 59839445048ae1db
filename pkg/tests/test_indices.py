import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelset_lab.indices import (
    SetMeasureModel,
    Verdict,
    check_d_measure,
    convergence_probe,
    gamma_inf,
    gamma_star,
    gamma_sup_dset,
)
from levelset_lab.symbol import SymbolProfile

CANTOR_D = math.log(2) / math.log(3)


def power(alpha):
    return SymbolProfile.from_power(alpha)


def dset_index_oracle(n, d, alpha):
    """The integrand r^{αγ - n - 1 + d} is integrable at 0 iff γ > (n - d)/α."""
    return min(max((n - d) / alpha, 0.0), 1.0)


class TestConvergenceProbe:
    def test_p_integral_converges(self):
        assert convergence_probe(lambda r: r ** -0.5).verdict is Verdict.CONVERGES

    def test_harmonic_diverges_with_log_ladder(self):
        v = convergence_probe(lambda r: 1.0 / r)
        assert v.verdict is Verdict.DIVERGES
        assert v.rung_slope == pytest.approx(math.log(2), rel=1e-8)

    def test_power_divergence_exponent(self):
        # rung k integrates r^{-1.3} over [2^{-k}, 2^{-k+1}]: (2^{0.3} - 1)/0.3 · 2^{0.3(k-1)}
        v = convergence_probe(lambda r: r ** -1.3)
        assert v.verdict is Verdict.DIVERGES
        assert v.exponent == pytest.approx(0.3, abs=0.02)
        k = np.arange(1, 41)
        exact = np.cumsum((2 ** 0.3 - 1) / 0.3 * 2.0 ** (0.3 * (k - 1)))
        assert np.allclose(v.ladder, exact, rtol=1e-9)

    def test_zero_integrand(self):
        assert convergence_probe(lambda r: 0.0).converges

    def test_negative_integrand_rejected(self):
        with pytest.raises(ValueError):
            convergence_probe(lambda r: -1.0)

    def test_errors_propagate(self):
        def boom(r):
            raise ZeroDivisionError("bad integrand")

        with pytest.raises(ZeroDivisionError):
            convergence_probe(boom)

    @given(p=st.floats(-0.95, 0.95).filter(lambda p: abs(p) > 0.02))
    @settings(max_examples=25, deadline=None)
    def test_p_integral_dichotomy(self, p):
        # ∫_0^1 r^{-1+p} dr is finite iff p > 0
        v = convergence_probe(lambda r: r ** (-1.0 + p))
        assert v.converges == (p > 0)


class TestGammaStar:
    @pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8, 2.0])
    def test_inverse_alpha(self, alpha):
        g = gamma_star(power(alpha))
        assert g.value == pytest.approx(1 / alpha, abs=0.01)
        assert g.cross_check == pytest.approx(1 / alpha, abs=1e-3)
        assert g.bracket[1] - g.bracket[0] <= 1e-3

    def test_constant_profile_is_boundary(self):
        g = gamma_star(SymbolProfile.from_function(lambda r: np.ones_like(r)))
        assert g.value == 1.0

    def test_subcritical_alpha_clips_to_one(self):
        assert gamma_star(power(0.8)).value == 1.0


class TestDsetIndices:
    @pytest.mark.parametrize("n,d,alpha", [(1, 0.0, 1.5), (1, CANTOR_D, 1.5), (2, 1.0, 1.2)])
    def test_analytic_exponent(self, n, d, alpha):
        prof = power(alpha)
        gi, gs = gamma_inf(prof, d, n), gamma_sup_dset(prof, d, n)
        target = dset_index_oracle(n, d, alpha)
        assert gi.value == pytest.approx(target, abs=0.01)
        assert gs.value == pytest.approx(target, abs=0.01)
        assert abs(gi.value - gs.value) <= 2e-3

    @pytest.mark.parametrize("alpha", [0.7, 1.5])
    def test_full_dimension_gives_zero(self, alpha):
        # r^{αγ-1} converges for every γ > 0; the infimum is resolved to the bisection tolerance
        assert gamma_inf(power(alpha), 1.0, 1).value == pytest.approx(0.0, abs=1e-3)
        assert gamma_sup_dset(power(alpha), 1.0, 1).value == 0.0

    def test_gamma_star_agrees_with_point_index(self):
        prof = power(1.5)
        assert gamma_star(prof).value == pytest.approx(gamma_inf(prof, 0.0, 1).value, abs=2e-3)

    def test_sup_needs_declared_dimension(self):
        with pytest.raises(NotImplementedError):
            gamma_sup_dset(power(1.5), None, 1)

    def test_dimension_domain(self):
        with pytest.raises(ValueError):
            gamma_inf(power(1.5), 1.5, 1)

    def test_monotone_in_d_and_alpha(self):
        alphas, ds = [1.2, 1.5, 1.8], [0.0, 0.3, 0.6]
        table = np.array([[gamma_inf(power(a), d, 1).value for d in ds] for a in alphas])
        assert np.all(np.diff(table, axis=0) <= 1e-12)
        assert np.all(np.diff(table, axis=1) <= 1e-12)
        assert np.all((table >= 0) & (table <= 1))

    def test_open_and_closed_values(self):
        g = gamma_sup_dset(power(1.5), 0.0, 1)
        assert g.closed_value <= 2 / 3 <= g.open_value


class TestSetMeasure:
    def test_dirac_d_measure(self):
        c = check_d_measure(SetMeasureModel.dirac(0.3, mass=2.0), 0.0)
        assert c.c1 == pytest.approx(2.0) and c.c2 == pytest.approx(2.0) and c.holds

    def test_interval_d_measure(self):
        # ball(x, r) = 2r inside, r at an endpoint
        c = check_d_measure(SetMeasureModel.interval(0.0, 1.0), 1.0)
        assert c.c1 == pytest.approx(1.0) and c.c2 == pytest.approx(2.0) and c.holds

    def test_cantor_d_measure(self):
        m = SetMeasureModel.cantor(1 / 3, 12)
        c = check_d_measure(m, CANTOR_D)
        assert c.holds and 0 < c.c1 <= 1 <= c.c2 < 4
        assert not check_d_measure(m, 1.0).holds

    @pytest.mark.parametrize("k", range(0, 12))
    def test_cantor_block_masses(self, k):
        # the closed ball [0, 3^{-k}] around the left endpoint holds one level-k block
        m = SetMeasureModel.cantor(1 / 3, 12)
        assert float(m.ball(0.0, 3.0 ** -k)) == pytest.approx(2.0 ** -k, rel=1e-12)

    @given(x=st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_cantor_cdf_self_similar(self, x):
        m = SetMeasureModel.cantor(1 / 3, 14)
        assert float(m.cdf(x / 3)) == pytest.approx(float(m.cdf(x)) / 2, abs=2.0 ** -14)

    @given(x=st.floats(-1, 2), r=st.floats(0, 2))
    @settings(max_examples=100, deadline=None)
    def test_ball_bounded_by_sup(self, x, r):
        for m in (SetMeasureModel.interval(0, 1), SetMeasureModel.tabulated([0.1, 0.5, 0.55], [1, 2, 3])):
            assert 0 <= float(m.ball(x, r)) <= m.sup_ball(r) + 1e-12 <= m.mass + 1e-12

    def test_cantor_intervals(self):
        iv = SetMeasureModel.cantor(1 / 4, 3).intervals()
        assert iv.shape == (8, 2)
        assert np.allclose(iv[:, 1] - iv[:, 0], 4.0 ** -3)
        assert iv[-1, 1] == pytest.approx(1.0)

    @pytest.mark.parametrize("ratio", [1 / 3, 1 / 4, 1 / 5])
    def test_natural_dimension(self, ratio):
        assert SetMeasureModel.cantor(ratio).d == pytest.approx(math.log(2) / math.log(1 / ratio))

    def test_invalid(self):
        with pytest.raises(ValueError):
            SetMeasureModel.cantor(0.6)
        with pytest.raises(ValueError):
            SetMeasureModel.interval(1.0, 0.0)
        with pytest.raises(ValueError):
            SetMeasureModel.dirac(mass=0.0)
