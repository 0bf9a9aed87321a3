"""J/K/xi summaries, influence functions, and bias-approximation curves."""

import numpy as np
import pytest

from lsdiv import (
    DiscreteDensity,
    DivergenceInfiniteError,
    TiltParams,
    bias_curves,
    density_vector,
    general_jk,
    if_first_order,
    if_second_order,
    minimize_lsd,
    model_jkxi,
    point_contaminated,
)
from lsdiv.estimation import estimating_equation_residual
from helpers import (
    first_order_if_oracle,
    second_order_if_oracle,
    solve_contaminated_theta,
)


def mixture_density(family, theta1, theta2, eps, eps_tail=1e-13):
    l1 = family.support_window(theta1, eps_tail)[1]
    l2 = family.support_window(theta2, eps_tail)[1]
    x = np.arange(max(l1, l2))
    mass = (1.0 - eps) * family.density(theta1, x) + eps * family.density(theta2, x)
    return DiscreteDensity(offset=0, mass=mass, tail_bound=eps_tail)


class TestModelJkxi:
    @pytest.mark.parametrize("theta", [2.0, 4.0])
    def test_beta_zero_fisher_efficiency(self, family, theta):
        s = model_jkxi(family, theta, 0.0)
        assert s.j_scalar == pytest.approx(1.0 / theta, abs=1e-10)
        assert s.k_scalar == pytest.approx(1.0 / theta, abs=1e-10)
        assert s.sandwich_scalar == pytest.approx(theta, abs=1e-8)

    @pytest.mark.parametrize("beta", [0.0, 0.5])
    def test_xi_vanishes(self, family, beta):
        assert abs(model_jkxi(family, 4.0, beta).xi_scalar) <= 1e-12

    def test_brute_force_wide_window(self, family):
        theta, beta = 4.0, 0.5
        s = model_jkxi(family, theta, beta)
        x = np.arange(0, 301)
        f = family.density(theta, x)
        u = family.score(theta, x)
        fb = f ** (1.0 + beta)
        af, bf = float(np.dot(fb, u)), float(fb.sum())
        w = bf * u - af
        j = float(np.dot(w * u, fb))
        xi = float(np.dot(w, fb))
        k = float(np.dot(w**2, f ** (1.0 + 2.0 * beta))) - xi**2
        assert s.j_scalar == pytest.approx(j, abs=1e-10)
        assert s.k_scalar == pytest.approx(k, abs=1e-10)

    def test_k_nonnegative(self, family):
        for beta in (0.0, 0.3, 0.7, 1.0):
            assert model_jkxi(family, 4.0, beta).k_scalar >= 0.0


class TestGeneralJk:
    @pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0])
    def test_reduces_to_model_at_the_model(self, family, gamma):
        beta = 0.3
        g = density_vector(family, 4.0, 1e-12)
        general = general_jk(g, family, 4.0, TiltParams(beta, gamma))
        model = model_jkxi(family, 4.0, beta)
        assert general.j_scalar == pytest.approx(model.j_scalar, abs=1e-10)
        assert general.k_scalar == pytest.approx(model.k_scalar, abs=1e-10)

    def test_positive_j_at_minimizer(self, family):
        rng = np.random.default_rng(8)
        p = TiltParams(0.4, 0.2)
        for _ in range(10):
            eps = rng.uniform(0.02, 0.15)
            theta_c = rng.uniform(8.0, 14.0)
            g = mixture_density(family, 4.0, theta_c, eps)
            theta_g = minimize_lsd(g, family, p).theta_hat
            assert general_jk(g, family, theta_g, p).j_scalar > 0.0

    def test_nonpositive_exp_a_rejected(self, family):
        g = density_vector(family, 4.0, 1e-12)
        with pytest.raises(DivergenceInfiniteError):
            general_jk(g, family, 4.0, TiltParams(0.0, -1.0))


class TestFirstOrderInfluence:
    def test_beta_zero_is_centred_identity(self, family):
        assert if_first_order(12, None, family, 4.0, TiltParams(0.0, 0.7)) == pytest.approx(
            8.0, abs=1e-8
        )
        for y in (0, 3, 9):
            assert if_first_order(y, None, family, 4.0, TiltParams(0.0, 0.0)) == pytest.approx(
                y - 4.0, abs=1e-8
            )

    @pytest.mark.parametrize("beta", [0.0, 0.25, 0.5, 1.0])
    def test_model_case_gamma_free(self, family, beta):
        values = [
            if_first_order(12, None, family, 4.0, TiltParams(beta, gm))
            for gm in (-1.0, 0.0, 1.0, 2.0)
        ]
        assert max(values) - min(values) <= 1e-10

    def test_redescending_for_positive_beta(self, family):
        p = TiltParams(0.5, 0.0)
        assert abs(if_first_order(50, None, family, 4.0, p)) < 1e-4
        assert abs(if_first_order(60, None, family, 4.0, p)) < abs(
            if_first_order(12, None, family, 4.0, p)
        )

    def test_unbounded_at_beta_zero(self, family):
        p = TiltParams(0.0, 0.0)
        ratio = if_first_order(80, None, family, 4.0, p) / if_first_order(
            40, None, family, 4.0, p
        )
        assert ratio == pytest.approx(2.0, abs=0.15)

    def test_general_case_matches_model_at_the_model(self, family):
        g = density_vector(family, 4.0, 1e-12)
        for beta, gamma in [(0.0, 0.0), (0.3, 0.5), (0.5, -0.5)]:
            p = TiltParams(beta, gamma)
            general = if_first_order(12, g, family, 4.0, p)
            model = if_first_order(12, None, family, 4.0, p)
            assert general == pytest.approx(model, rel=1e-8, abs=1e-10)

    def test_model_case_against_contamination_oracle(self, family):
        for beta, gamma in [(0.0, 0.0), (0.5, 0.5), (1.0, 0.0), (0.3, -0.3)]:
            p = TiltParams(beta, gamma)
            closed = if_first_order(12, None, family, 4.0, p)
            oracle = first_order_if_oracle(12, p)
            assert closed == pytest.approx(oracle, rel=1e-5, abs=1e-8)

    def test_general_case_against_contamination_oracle(self, family):
        # true density: contaminated mixture; functional perturbed at y
        p = TiltParams(0.4, 0.3)
        g = mixture_density(family, 4.0, 12.0, 0.08)
        theta_g = minimize_lsd(g, family, p, search_with_tight_tol()).theta_hat
        closed = if_first_order(9, g, family, theta_g, p)
        step = 1e-6

        def solved(eps):
            ge = point_contaminated(g, 9, eps)
            lo, hi = theta_g - 1.0, theta_g + 1.0
            from scipy.optimize import brentq

            return brentq(
                lambda t: estimating_equation_residual(t, ge, family, p), lo, hi, xtol=1e-14
            )

        oracle = (solved(step) - solved(-step)) / (2.0 * step)
        assert closed == pytest.approx(oracle, rel=1e-4)


def search_with_tight_tol():
    from lsdiv import SearchConfig

    return SearchConfig(tol_theta=1e-10)


class TestSecondOrderInfluence:
    def test_vanishes_at_likelihood_disparity(self, family):
        assert abs(if_second_order(12, family, 4.0, TiltParams(0.0, 0.0))) <= 1e-6

    def test_matches_contamination_oracle_grid(self, family):
        for beta in (0.0, 0.5, 1.0):
            for gamma in (0.0, 0.5, 1.0):
                p = TiltParams(beta, gamma)
                closed = if_second_order(12, family, 4.0, p)
                oracle = second_order_if_oracle(12, p)
                assert closed == pytest.approx(oracle, rel=1e-3, abs=1e-4), (beta, gamma)

    def test_gamma_sensitivity(self, family):
        # the second order sees the gamma-dependence the first order misses
        base = if_second_order(12, family, 4.0, TiltParams(0.0, 0.0))
        moved = if_second_order(12, family, 4.0, TiltParams(0.0, 0.5))
        assert abs(moved - base) > 10.0 * 1e-3


class TestBiasCurves:
    def test_zero_at_zero(self, family):
        curve = bias_curves(12, family, 4.0, TiltParams(0.3, 0.0), [0.0, 0.05, 0.1])
        assert curve.first_order[0] == 0.0
        assert curve.second_order[0] == 0.0

    def test_structure(self, family):
        eps = np.linspace(0.0, 0.1, 11)
        p = TiltParams(0.3, 0.5)
        curve = bias_curves(12, family, 4.0, p, eps)
        tp = if_first_order(12, None, family, 4.0, p)
        tpp = if_second_order(12, family, 4.0, p)
        np.testing.assert_allclose(curve.first_order, eps * tp, rtol=1e-12)
        np.testing.assert_allclose(
            curve.second_order - curve.first_order, 0.5 * eps**2 * tpp, rtol=1e-12
        )
        with np.errstate(invalid="ignore"):
            np.testing.assert_allclose(
                curve.adequacy_ratio, 1.0 + 0.5 * (tpp / tp) * eps, rtol=1e-12
            )

    def test_second_order_beats_first_order(self, family):
        # quadratic prediction closer to the solved contaminated bias
        p = TiltParams(0.3, 0.0)
        eps = 0.05
        true_bias = solve_contaminated_theta(eps, 12, p) - 4.0
        curve = bias_curves(12, family, 4.0, p, [eps])
        err_first = abs(curve.first_order[0] - true_bias)
        err_second = abs(curve.second_order[0] - true_bias)
        assert err_second < err_first

    def test_linear_at_likelihood_disparity(self, family):
        curve = bias_curves(12, family, 4.0, TiltParams(0.0, 0.0), np.linspace(0, 0.1, 6))
        assert np.max(np.abs(curve.second_order - curve.first_order)) <= 1e-6


class TestPointContaminated:
    def test_mixture_mass(self, family):
        f = density_vector(family, 4.0, 1e-12)
        g = point_contaminated(f, 12, 0.1)
        assert g.total == pytest.approx(0.9 * f.total + 0.1, abs=1e-12)
        idx = 12 - g.offset
        assert g.mass[idx] == pytest.approx(0.9 * f.mass[12 - f.offset] + 0.1, abs=1e-15)

    def test_window_extends_to_cover_y(self, family):
        f = density_vector(family, 2.0, 1e-6)
        g = point_contaminated(f, 40, 0.05)
        assert g.offset + g.mass.size > 40
