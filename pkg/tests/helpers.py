"""Shared test utilities: random densities and independent numeric oracles.

Everything here is deliberately implemented through the public API or plain
numpy so it can serve as an independent check of the library internals.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from lsdiv import DiscreteDensity, PoissonFamily, TiltParams, density_vector
from lsdiv.asymptotics import point_contaminated
from lsdiv.estimation import estimating_equation_residual

FAMILY = PoissonFamily()


def random_density(rng: np.random.Generator, size: int = 25, offset: int = 0) -> DiscreteDensity:
    """Strictly positive random discrete density on a fixed window."""
    raw = rng.random(size) + 1e-3
    return DiscreteDensity(offset=offset, mass=raw / raw.sum(), tail_bound=0.0)


def random_density_with_zeros(rng: np.random.Generator, size: int = 25) -> DiscreteDensity:
    """Random density with a few empty cells (an empirical-frequency shape)."""
    raw = rng.random(size)
    raw[rng.random(size) < 0.2] = 0.0
    if raw.sum() == 0:
        raw[0] = 1.0
    return DiscreteDensity(offset=0, mass=raw / raw.sum(), tail_bound=0.0)


def poisson_pair(theta_g: float, theta_f: float, eps_tail: float = 1e-12):
    """Two Poisson densities on one shared window (both strictly positive)."""
    fam = FAMILY
    l1 = fam.support_window(theta_g, eps_tail)[1]
    l2 = fam.support_window(theta_f, eps_tail)[1]
    x = np.arange(max(l1, l2))
    g = DiscreteDensity(offset=0, mass=fam.density(theta_g, x), tail_bound=eps_tail)
    f = DiscreteDensity(offset=0, mass=fam.density(theta_f, x), tail_bound=eps_tail)
    return g, f


def solve_contaminated_theta(
    eps: float,
    y: int,
    p: TiltParams,
    theta_true: float = 4.0,
    lo: float = 2.0,
    hi: float = 9.0,
) -> float:
    """Root of the estimating equation under (1-eps) * f_theta_true + eps * delta_y."""
    base = density_vector(FAMILY, theta_true, 1e-14)
    g_eps = point_contaminated(base, y, eps)
    return brentq(
        lambda t: estimating_equation_residual(t, g_eps, FAMILY, p), lo, hi, xtol=1e-14
    )


def second_order_if_oracle(
    y: int, p: TiltParams, theta_true: float = 4.0, step: float = 5e-5
) -> float:
    """Richardson-extrapolated second difference of the contaminated functional.

    theta(eps) is solved exactly by root finding along the contamination
    path, so this is independent of every closed-form expression in the
    library.
    """
    t0 = solve_contaminated_theta(0.0, y, p, theta_true)

    def second_diff(e: float) -> float:
        tp = solve_contaminated_theta(e, y, p, theta_true)
        tm = solve_contaminated_theta(-e, y, p, theta_true)
        return (tp - 2.0 * t0 + tm) / e**2

    return (4.0 * second_diff(step / 2.0) - second_diff(step)) / 3.0


def two_sample_reject_worker(args) -> bool:
    """One two-sample replication under the null; module-level so process
    pools can pickle it."""
    from lsdiv.hypotest import two_sample_statistic
    from lsdiv.simulate import replication_rng, sample_poisson

    seed, rep, n, m, theta, beta, gamma, level = args
    rng = replication_rng(seed, rep)
    s1 = sample_poisson(theta, n, rng)
    s2 = sample_poisson(theta, m, rng)
    result = two_sample_statistic(s1, s2, FAMILY, TiltParams(beta, gamma), levels=(level,))
    return result.reject_at[level]


def first_order_if_oracle(
    y: int, p: TiltParams, theta_true: float = 4.0, step: float = 1e-6
) -> float:
    """Central-difference slope of the contaminated functional at eps = 0."""
    tp = solve_contaminated_theta(step, y, p, theta_true)
    tm = solve_contaminated_theta(-step, y, p, theta_true)
    return (tp - tm) / (2.0 * step)
