"""Core divergence evaluators for the logarithmic super divergence family.

The family is indexed by two real tilt parameters (beta, gamma) through the
derived exponents ``A = 1 + gamma*(1 - beta)`` and ``B = beta - gamma*(1 - beta)``,
which always satisfy ``A + B = 1 + beta``.  A link function applied to each
integral term selects the branch: the identity link gives the S-divergence,
the log link gives the logarithmic S-divergence (the default here).

All evaluators work on finite discrete mass vectors (:class:`DiscreteDensity`)
aligned on a common integer window; sums that could underflow are accumulated
in log space.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "Psi",
    "TiltParams",
    "DiscreteDensity",
    "DivergenceInfiniteError",
    "SupportAlignmentError",
    "derive_exponents",
    "align",
    "lsd",
    "gsd",
    "lpd",
    "ldpd",
    "ld",
    "named_special",
]

# Below this magnitude an exponent is treated as exactly zero and the
# continuity limit of the divergence is used instead of the raw formula.
EXPONENT_BOUNDARY = 1e-8

DEFAULT_EPS_TAIL = 1e-12


class DivergenceInfiniteError(ValueError):
    """The divergence is +infinity for the given pair (e.g. an empty cell
    raised to a negative exponent)."""


class SupportAlignmentError(ValueError):
    """The two densities are not defined on a compatible window."""


class Psi(enum.Enum):
    """Link function applied to each integral term of the divergence."""

    IDENTITY = "identity"
    LOG = "log"


def derive_exponents(beta: float, gamma: float) -> tuple[float, float]:
    """Return the exponent pair ``(A, B)`` for tilt parameters (beta, gamma).

    ``A = 1 + gamma*(1 - beta)``, ``B = beta - gamma*(1 - beta)``; their sum
    is ``1 + beta`` exactly.

    Raises:
        ValueError: if ``beta < 0``.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    exp_a = 1.0 + gamma * (1.0 - beta)
    exp_b = beta - gamma * (1.0 - beta)
    return exp_a, exp_b


@dataclass(frozen=True)
class TiltParams:
    """The (beta, gamma) pair with derived exponents and link choice."""

    beta: float
    gamma: float
    psi: Psi = Psi.LOG
    exp_a: float = field(init=False)
    exp_b: float = field(init=False)

    def __post_init__(self) -> None:
        exp_a, exp_b = derive_exponents(self.beta, self.gamma)
        object.__setattr__(self, "exp_a", exp_a)
        object.__setattr__(self, "exp_b", exp_b)


@dataclass(frozen=True)
class DiscreteDensity:
    """A finite nonnegative mass vector on a truncated integer support.

    ``mass[i]`` is the probability at ``offset + i``.  ``tail_bound`` bounds
    the mass lying outside the stored window; empirical frequency vectors
    carry ``tail_bound = 0`` and sum to exactly 1.
    """

    offset: int
    mass: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self) -> None:
        mass = np.asarray(self.mass, dtype=float)
        object.__setattr__(self, "mass", mass)
        if mass.ndim != 1 or mass.size == 0:
            raise ValueError("mass must be a non-empty 1-d vector")
        if np.any(mass < 0):
            raise ValueError("mass entries must be nonnegative")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be nonnegative")

    @property
    def support(self) -> np.ndarray:
        return self.offset + np.arange(self.mass.size)

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    def mean(self) -> float:
        return float(np.dot(self.support, self.mass) / self.total)


def align(g: DiscreteDensity, f: DiscreteDensity) -> tuple[np.ndarray, np.ndarray]:
    """Place two densities on the union window, padding with zeros.

    Returns the pair of aligned mass vectors ``(g, f)``.
    """
    lo = min(g.offset, f.offset)
    hi = max(g.offset + g.mass.size, f.offset + f.mass.size)
    gv = np.zeros(hi - lo)
    fv = np.zeros(hi - lo)
    gv[g.offset - lo : g.offset - lo + g.mass.size] = g.mass
    fv[f.offset - lo : f.offset - lo + f.mass.size] = f.mass
    return gv, fv


def _log_terms(gv: np.ndarray, fv: np.ndarray, p: TiltParams):
    """Log-space building blocks shared by the evaluators.

    Returns ``(log_sf, log_sg, log_sfg)`` where ``sf = sum f^(1+beta)``,
    ``sg = sum g^(1+beta)`` and ``sfg = sum f^B g^A`` (the latter only when
    both exponents are away from zero; otherwise None).
    """
    if np.any(fv <= 0):
        raise SupportAlignmentError(
            "model density must be strictly positive on the union window"
        )
    one_beta = 1.0 + p.beta
    logf = np.log(fv)
    pos = gv > 0
    if not np.any(pos):
        raise ValueError("data density has no positive mass on the window")
    logg = np.log(gv[pos])

    log_sf = logsumexp(one_beta * logf)
    log_sg = logsumexp(one_beta * logg)

    log_sfg = None
    if abs(p.exp_a) >= EXPONENT_BOUNDARY and abs(p.exp_b) >= EXPONENT_BOUNDARY:
        if p.exp_a < 0 and not np.all(pos):
            raise DivergenceInfiniteError(
                "empty data cell with negative exponent A makes the divergence infinite"
            )
        log_sfg = logsumexp(p.exp_b * logf[pos] + p.exp_a * logg)
    return log_sf, log_sg, log_sfg, logf, pos, logg


def lsd(g: DiscreteDensity, f: DiscreteDensity, p: TiltParams) -> float:
    """Logarithmic S-divergence between data density ``g`` and model ``f``.

    ``f`` must be strictly positive on the union window.  At the exponent
    boundaries ``|A| < 1e-8`` or ``|B| < 1e-8`` the continuity limit is
    returned (the raw formula is singular there); this covers in particular
    the likelihood-disparity member beta = gamma = 0.
    """
    gv, fv = align(g, f)
    log_sf, log_sg, log_sfg, logf, pos, logg = _log_terms(gv, fv, p)
    one_beta = 1.0 + p.beta

    if abs(p.exp_b) < EXPONENT_BOUNDARY:
        # B -> 0 limit: (1/(1+b)) log(sf/sg) - sum g^(1+b) log(f/g) / sg
        w = np.exp(one_beta * logg - log_sg)
        corr = float(np.dot(w, logf[pos] - logg))
        return (log_sf - log_sg) / one_beta - corr
    if abs(p.exp_a) < EXPONENT_BOUNDARY:
        # A -> 0 limit, roles of f and g exchanged in the correction term.
        if not np.all(pos):
            raise DivergenceInfiniteError(
                "empty data cell at the A=0 boundary makes the divergence infinite"
            )
        full_logg = np.log(gv)
        w = np.exp(one_beta * logf - log_sf)
        corr = float(np.dot(w, full_logg - logf))
        return (log_sg - log_sf) / one_beta - corr

    return (
        log_sf / p.exp_a
        - one_beta / (p.exp_a * p.exp_b) * log_sfg
        + log_sg / p.exp_b
    )


def gsd(g: DiscreteDensity, f: DiscreteDensity, p: TiltParams) -> float:
    """Generalized S-divergence: dispatches on the link in ``p.psi``.

    The log link delegates to :func:`lsd`; the identity link evaluates the
    plain S-divergence.  The identity branch has no boundary-limit handling
    (its members of interest keep both exponents away from zero).
    """
    if p.psi is Psi.LOG:
        return lsd(g, f, p)
    gv, fv = align(g, f)
    log_sf, log_sg, log_sfg, _, _, _ = _log_terms(gv, fv, p)
    if log_sfg is None:
        raise ValueError(
            "identity-link divergence is undefined at the exponent boundary A=0 or B=0"
        )
    one_beta = 1.0 + p.beta
    return (
        np.exp(log_sf) / p.exp_a
        - one_beta / (p.exp_a * p.exp_b) * np.exp(log_sfg)
        + np.exp(log_sg) / p.exp_b
    )


def lpd(g: DiscreteDensity, f: DiscreteDensity, gamma: float) -> float:
    """Logarithmic power divergence with index gamma (closed form).

    Undefined at gamma in {0, -1} where the coefficient 1/(gamma*(gamma+1))
    blows up.
    """
    if gamma in (0.0, -1.0):
        raise ValueError("lpd is undefined at gamma in {0, -1}")
    gv, fv = align(g, f)
    if np.any(fv <= 0):
        raise SupportAlignmentError("model density must be positive on the window")
    pos = gv > 0
    if gamma < -1 and not np.all(pos):
        raise DivergenceInfiniteError("empty data cell with gamma < -1")
    logf = np.log(fv[pos])
    logg = np.log(gv[pos])
    val = logsumexp((1.0 + gamma) * logg - gamma * logf)
    return float(val / (gamma * (gamma + 1.0)))


def ldpd(g: DiscreteDensity, f: DiscreteDensity, beta: float) -> float:
    """Logarithmic density power divergence with index beta > 0 (closed form)."""
    if beta <= 0:
        raise ValueError("ldpd requires beta > 0 (beta = 0 is the likelihood disparity)")
    gv, fv = align(g, f)
    if np.any(fv <= 0):
        raise SupportAlignmentError("model density must be positive on the window")
    pos = gv > 0
    logf = np.log(fv)
    logg = np.log(gv[pos])
    t1 = logsumexp((1.0 + beta) * logf)
    t2 = logsumexp(beta * logf[pos] + logg)
    t3 = logsumexp((1.0 + beta) * logg)
    return float(t1 - (1.0 + 1.0 / beta) * t2 + t3 / beta)


def ld(g: DiscreteDensity, f: DiscreteDensity) -> float:
    """Likelihood disparity sum g*log(g/f); empty data cells contribute 0."""
    gv, fv = align(g, f)
    if np.any(fv <= 0):
        raise SupportAlignmentError("model density must be positive on the window")
    pos = gv > 0
    return float(np.dot(gv[pos], np.log(gv[pos] / fv[pos])))


class SpecialKind(enum.Enum):
    LPD = "lpd"
    LDPD = "ldpd"
    LD = "ld"


def named_special(
    g: DiscreteDensity,
    f: DiscreteDensity,
    kind: SpecialKind,
    param: float | None = None,
) -> float:
    """Evaluate one of the named special cases by its closed form.

    ``param`` carries gamma for LPD and beta for LDPD; it is ignored for LD.
    """
    if kind is SpecialKind.LD:
        return ld(g, f)
    if param is None:
        raise ValueError(f"{kind.value} requires its index parameter")
    if kind is SpecialKind.LPD:
        return lpd(g, f, param)
    return ldpd(g, f, param)
