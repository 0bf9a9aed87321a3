"""Discrete parametric family contract and the Poisson implementation.

A family exposes the pointwise density, the score u = d log f / d theta,
the score derivative u' = du/d theta and a truncated support window whose
excluded tail mass is below a caller-chosen bound.  Every "integral" of the
underlying theory becomes a finite sum over that window.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .divergence import DEFAULT_EPS_TAIL, DiscreteDensity

__all__ = ["ParametricFamily", "PoissonFamily", "density_vector", "moments_c_d"]


class ParametricFamily(ABC):
    """Scalar-parameter discrete model on a subset of {0, 1, 2, ...}."""

    @abstractmethod
    def density(self, theta: float, x: np.ndarray) -> np.ndarray:
        """f_theta evaluated at integer points x."""

    def log_density(self, theta: float, x: np.ndarray) -> np.ndarray:
        """log f_theta(x); override when an analytic form avoids underflow."""
        return np.log(self.density(theta, x))

    @abstractmethod
    def score(self, theta: float, x: np.ndarray) -> np.ndarray:
        """u(theta, x) = d log f_theta(x) / d theta."""

    @abstractmethod
    def score_derivative(self, theta: float, x: np.ndarray) -> np.ndarray:
        """u'(theta, x) = d u(theta, x) / d theta."""

    @abstractmethod
    def support_window(
        self, theta: float, eps_tail: float = DEFAULT_EPS_TAIL
    ) -> tuple[int, int]:
        """Smallest window (offset, length) capturing mass >= 1 - eps_tail."""


@dataclass(frozen=True)
class PoissonFamily(ParametricFamily):
    """Poisson(theta) on {0, 1, 2, ...}; u = x/theta - 1, u' = -x/theta^2."""

    def _check(self, theta: float) -> None:
        if theta <= 0:
            raise ValueError(f"Poisson parameter must be positive, got {theta}")

    def density(self, theta: float, x) -> np.ndarray:
        return np.exp(self.log_density(theta, x))

    def log_density(self, theta: float, x) -> np.ndarray:
        self._check(theta)
        x = np.asarray(x, dtype=float)
        return x * np.log(theta) - theta - gammaln(x + 1.0)

    def score(self, theta: float, x) -> np.ndarray:
        self._check(theta)
        return np.asarray(x, dtype=float) / theta - 1.0

    def score_derivative(self, theta: float, x) -> np.ndarray:
        self._check(theta)
        return -np.asarray(x, dtype=float) / theta**2

    def support_window(
        self, theta: float, eps_tail: float = DEFAULT_EPS_TAIL
    ) -> tuple[int, int]:
        self._check(theta)
        if not 0 < eps_tail < 1:
            raise ValueError("eps_tail must lie in (0, 1)")
        # Scan the cumulative mass with the stable ratio recurrence
        # f(x+1) = f(x) * theta / (x+1); stop at the first L with
        # tail mass < eps_tail.
        fx = np.exp(-theta)
        cum = fx
        length = 1
        while 1.0 - cum >= eps_tail:
            fx *= theta / length
            cum += fx
            length += 1
            if length > 100_000:  # pragma: no cover - safety stop
                raise RuntimeError("support window scan did not terminate")
        return 0, length


def density_vector(
    family: ParametricFamily, theta: float, eps_tail: float = DEFAULT_EPS_TAIL
) -> DiscreteDensity:
    """Model density truncated to its eps_tail support window.

    Poisson masses use the ratio recurrence f(x) = f(x-1) * theta / x, which
    is stable on the window and reproduces the mode tie at integer theta
    exactly; other families fall back to pointwise density evaluation.
    """
    offset, length = family.support_window(theta, eps_tail)
    if isinstance(family, PoissonFamily) and offset == 0:
        ratios = np.empty(length)
        ratios[0] = np.exp(-theta)
        if length > 1:
            ratios[1:] = theta / np.arange(1, length)
        mass = np.cumprod(ratios)
    else:
        x = offset + np.arange(length)
        mass = family.density(theta, x)
    return DiscreteDensity(offset=offset, mass=mass, tail_bound=eps_tail)


def moments_c_d(
    family: ParametricFamily,
    theta: float,
    beta: float,
    i_max: int = 3,
    eps_tail: float = DEFAULT_EPS_TAIL,
) -> tuple[np.ndarray, np.ndarray]:
    """Tilted score moments c_i = sum u^i f^(1+beta), d_i = sum u' u^i f^(1+beta).

    Returned as arrays of length i_max + 1.
    """
    offset, length = family.support_window(theta, eps_tail)
    x = offset + np.arange(length)
    f = family.density(theta, x)
    u = family.score(theta, x)
    du = family.score_derivative(theta, x)
    w = f ** (1.0 + beta)
    powers = np.vstack([u**i for i in range(i_max + 1)])
    c = powers @ w
    d = powers @ (du * w)
    return c, d
