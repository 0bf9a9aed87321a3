"""Seeded Monte-Carlo harness for the estimation and testing tables.

Every replication owns an independent counter-based RNG stream derived from
(seed, replication index), so the full pipeline is a pure function of the
configuration and is byte-reproducible under any execution order or degree
of parallelism.  Grid cells where the exponent A is nonpositive cannot be
estimated and are emitted with the "--" sentinel.
"""

from __future__ import annotations

import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .divergence import EXPONENT_BOUNDARY, TiltParams, derive_exponents
from .estimation import SearchConfig, empirical_frequencies, minimize_lsd
from .families import PoissonFamily
from .hypotest import divergence_between_fits, null_law

__all__ = [
    "SimKind",
    "ContaminationScheme",
    "Contamination",
    "SimulationConfig",
    "CellResult",
    "SimulationReport",
    "replication_rng",
    "sample_poisson",
    "contaminated_sample",
    "run_estimation_sim",
    "run_testing_sim",
    "run_simulation",
    "emit_report",
]

SENTINEL = "--"

ESTIMATION_BETA_GRID = (0.0, 0.1, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0)
TESTING_BETA_GRID = (0.0, 0.1, 0.2, 0.4, 0.7, 0.8, 0.9, 1.0)
GAMMA_GRID = (-1.0, -0.9, -0.7, -0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.5, 2.0)


class SimKind(enum.Enum):
    ESTIMATION_BIAS = "estimation_bias"
    TESTING_LEVEL = "testing_level"
    TESTING_POWER = "testing_power"
    IF_CURVE = "if_curve"
    BIAS_APPROX = "bias_approx"


class ContaminationScheme(enum.Enum):
    REPLACE_FIXED_COUNT = "replace_fixed_count"
    MIXTURE_DRAW = "mixture_draw"


@dataclass(frozen=True)
class Contamination:
    eps: float
    theta_contam: float
    scheme: ContaminationScheme

    def __post_init__(self) -> None:
        if not 0 <= self.eps < 1:
            raise ValueError("contamination proportion must lie in [0, 1)")


@dataclass(frozen=True)
class SimulationConfig:
    kind: SimKind
    n: int
    theta_true: float
    replications: int = 1000
    theta_null: float | None = None
    theta_target: float | None = None  # estimation bias/MSE reference; defaults to theta_true
    contamination: Contamination | None = None
    grid_beta: tuple[float, ...] = ()
    grid_gamma: tuple[float, ...] = GAMMA_GRID
    seed: int = 0
    level: float = 0.05

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if not self.grid_beta:
            default = (
                ESTIMATION_BETA_GRID
                if self.kind is SimKind.ESTIMATION_BIAS
                else TESTING_BETA_GRID
            )
            object.__setattr__(self, "grid_beta", default)
        if not self.grid_gamma:
            raise ValueError("gamma grid must be non-empty")
        object.__setattr__(self, "grid_beta", tuple(float(b) for b in self.grid_beta))
        object.__setattr__(self, "grid_gamma", tuple(float(g) for g in self.grid_gamma))

    def target(self) -> float:
        return self.theta_true if self.theta_target is None else self.theta_target

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind.value,
            "n": self.n,
            "replications": self.replications,
            "theta_true": self.theta_true,
            "theta_null": self.theta_null,
            "theta_target": self.theta_target,
            "grid_beta": list(self.grid_beta),
            "grid_gamma": list(self.grid_gamma),
            "seed": self.seed,
            "level": self.level,
            "contamination": None,
        }
        if self.contamination is not None:
            d["contamination"] = {
                "eps": self.contamination.eps,
                "theta_contam": self.contamination.theta_contam,
                "scheme": self.contamination.scheme.value,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        d = dict(d)
        contamination = d.get("contamination")
        if contamination is not None:
            contamination = Contamination(
                eps=contamination["eps"],
                theta_contam=contamination["theta_contam"],
                scheme=ContaminationScheme(contamination["scheme"]),
            )
        return cls(
            kind=SimKind(d["kind"]),
            n=d["n"],
            theta_true=d["theta_true"],
            replications=d.get("replications", 1000),
            theta_null=d.get("theta_null"),
            theta_target=d.get("theta_target"),
            contamination=contamination,
            grid_beta=tuple(d.get("grid_beta") or ()),
            grid_gamma=tuple(d.get("grid_gamma") or GAMMA_GRID),
            seed=d.get("seed", 0),
            level=d.get("level", 0.05),
        )


@dataclass(frozen=True)
class CellResult:
    beta: float
    gamma: float
    metrics: dict[str, float | None]
    replications: int
    failures: int


@dataclass(frozen=True)
class SimulationReport:
    cells: list[CellResult]
    metadata: dict
    wall_time: float = 0.0  # informational only; never serialized

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "cells": [
                {
                    "beta": c.beta,
                    "gamma": c.gamma,
                    "metrics": c.metrics,
                    "replications": c.replications,
                    "failures": c.failures,
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationReport":
        return cls(
            cells=[
                CellResult(
                    beta=c["beta"],
                    gamma=c["gamma"],
                    metrics=c["metrics"],
                    replications=c["replications"],
                    failures=c["failures"],
                )
                for c in d["cells"]
            ],
            metadata=d["metadata"],
        )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, replication index)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(replication,))
    return np.random.Generator(np.random.Philox(ss))


def _poisson_cdf(theta: float, tail: float = 1e-13) -> np.ndarray:
    fx = np.exp(-theta)
    values = [fx]
    cum = fx
    k = 1
    while 1.0 - cum >= tail:
        fx *= theta / k
        cum += fx
        values.append(fx)
        k += 1
    return np.cumsum(values)


def sample_poisson(theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Poisson(theta) draws by CDF inversion; bit-reproducible per stream."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    cdf = _poisson_cdf(theta)
    u = rng.random(n)
    return np.searchsorted(cdf, u, side="left").astype(np.int64)


def contaminated_sample(
    n: int,
    theta_true: float,
    contamination: Contamination | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample of size n, optionally contaminated.

    The fixed-count scheme overwrites the last floor(eps*n) entries of a pure
    sample with draws from the contaminating component; the mixture scheme
    routes each observation independently with probability eps.
    """
    if contamination is None or contamination.eps == 0.0:
        return sample_poisson(theta_true, n, rng)
    if contamination.scheme is ContaminationScheme.REPLACE_FIXED_COUNT:
        sample = sample_poisson(theta_true, n, rng)
        k = int(np.floor(contamination.eps * n))
        if k > 0:
            sample[n - k :] = sample_poisson(contamination.theta_contam, k, rng)
        return sample
    flags = rng.random(n) < contamination.eps
    u = rng.random(n)
    base = np.searchsorted(_poisson_cdf(theta_true), u, side="left")
    contam = np.searchsorted(_poisson_cdf(contamination.theta_contam), u, side="left")
    return np.where(flags, contam, base).astype(np.int64)


# ---------------------------------------------------------------------------
# Replication workers (module-level so process pools can pickle them)
# ---------------------------------------------------------------------------


def _estimate_worker(args) -> float | None:
    seed, rep, n, theta_true, contam, beta, gamma = args
    rng = replication_rng(seed, rep)
    sample = contaminated_sample(n, theta_true, contam, rng)
    try:
        result = minimize_lsd(
            empirical_frequencies(sample),
            PoissonFamily(),
            TiltParams(beta, gamma),
            SearchConfig(),
        )
    except (ValueError, ArithmeticError):
        return None
    return result.theta_hat


def _reject_worker(args) -> bool | None:
    seed, rep, n, theta_draw, contam, beta, gamma, theta0, critical = args
    rng = replication_rng(seed, rep)
    sample = contaminated_sample(n, theta_draw, contam, rng)
    family = PoissonFamily()
    p = TiltParams(beta, gamma)
    try:
        fit = minimize_lsd(empirical_frequencies(sample), family, p, SearchConfig())
        w = 2.0 * n * divergence_between_fits(family, fit.theta_hat, theta0, p)
    except (ValueError, ArithmeticError):
        return None
    return bool(w > critical)


def _map_ordered(worker, args_list, n_jobs: int):
    if n_jobs <= 1:
        return [worker(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(worker, args_list, chunksize=32))


# ---------------------------------------------------------------------------
# Table runners
# ---------------------------------------------------------------------------

FAILURE_CELL_LIMIT = 0.05  # cells with more than 5% failed replications emit "--"


def _metadata(config: SimulationConfig) -> dict:
    return {"seed": config.seed, "config": config.to_dict()}


def run_estimation_sim(config: SimulationConfig, n_jobs: int = 1) -> SimulationReport:
    """Empirical bias and MSE of the minimum-divergence estimate per grid cell."""
    if config.kind is not SimKind.ESTIMATION_BIAS:
        raise ValueError("config.kind must be ESTIMATION_BIAS")
    target = config.target()
    cells: list[CellResult] = []
    for gamma in config.grid_gamma:
        for beta in config.grid_beta:
            exp_a, _ = derive_exponents(beta, gamma)
            if exp_a <= EXPONENT_BOUNDARY:
                cells.append(
                    CellResult(beta, gamma, {"bias": None, "mse": None},
                               config.replications, config.replications)
                )
                continue
            args = [
                (config.seed, rep, config.n, config.theta_true, config.contamination,
                 beta, gamma)
                for rep in range(config.replications)
            ]
            estimates = _map_ordered(_estimate_worker, args, n_jobs)
            ok = np.array([e for e in estimates if e is not None])
            failures = config.replications - ok.size
            if failures > FAILURE_CELL_LIMIT * config.replications:
                metrics = {"bias": None, "mse": None}
            else:
                metrics = {
                    "bias": float(np.mean(ok) - target),
                    "mse": float(np.mean((ok - target) ** 2)),
                }
            cells.append(CellResult(beta, gamma, metrics, config.replications, failures))
    return SimulationReport(cells=cells, metadata=_metadata(config))


def run_testing_sim(config: SimulationConfig, n_jobs: int = 1) -> SimulationReport:
    """Empirical level or power of the one-sample test per grid cell."""
    if config.kind not in (SimKind.TESTING_LEVEL, SimKind.TESTING_POWER):
        raise ValueError("config.kind must be TESTING_LEVEL or TESTING_POWER")
    if config.theta_null is None:
        raise ValueError("testing simulations need theta_null")
    metric_name = "level" if config.kind is SimKind.TESTING_LEVEL else "power"
    theta_draw = (
        config.theta_null if config.kind is SimKind.TESTING_LEVEL else config.theta_true
    )
    family = PoissonFamily()
    cells: list[CellResult] = []
    for gamma in config.grid_gamma:
        for beta in config.grid_beta:
            exp_a, _ = derive_exponents(beta, gamma)
            if exp_a <= EXPONENT_BOUNDARY:
                cells.append(
                    CellResult(beta, gamma, {metric_name: None},
                               config.replications, config.replications)
                )
                continue
            p = TiltParams(beta, gamma)
            rank = null_law(family, config.theta_null, p)[1]
            # The reference tables compare W directly against the chi-square
            # critical value, without the eigenvalue weight; the weight-induced
            # level inflation at larger beta (e.g. 0.076 at beta=0.7, n=50) is
            # exactly what those tables document, so the harness reproduces it.
            critical = float(chi2.ppf(1.0 - config.level, df=1)) if rank else np.inf
            args = [
                (config.seed, rep, config.n, theta_draw, config.contamination,
                 beta, gamma, config.theta_null, critical)
                for rep in range(config.replications)
            ]
            rejects = _map_ordered(_reject_worker, args, n_jobs)
            ok = [r for r in rejects if r is not None]
            failures = config.replications - len(ok)
            if failures > FAILURE_CELL_LIMIT * config.replications or not ok:
                metrics = {metric_name: None}
            else:
                metrics = {metric_name: float(np.mean(ok))}
            cells.append(CellResult(beta, gamma, metrics, config.replications, failures))
    return SimulationReport(cells=cells, metadata=_metadata(config))


def run_simulation(config: SimulationConfig, n_jobs: int = 1) -> SimulationReport:
    if config.kind is SimKind.ESTIMATION_BIAS:
        return run_estimation_sim(config, n_jobs)
    if config.kind in (SimKind.TESTING_LEVEL, SimKind.TESTING_POWER):
        return run_testing_sim(config, n_jobs)
    raise ValueError(f"kind {config.kind.value} is handled by the CLI curve emitters")


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------


def _format_value(value: float | None) -> str:
    return SENTINEL if value is None else format(value, ".17g")


def report_to_csv(report: SimulationReport) -> str:
    lines = ["gamma,beta,metric,value,n_fail"]
    for cell in report.cells:
        for name, value in cell.metrics.items():
            lines.append(
                f"{cell.gamma:g},{cell.beta:g},{name},{_format_value(value)},{cell.failures}"
            )
    return "\n".join(lines) + "\n"


def report_to_json(report: SimulationReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def emit_report(report: SimulationReport, format: str, path) -> None:
    """Write the report as CSV or JSON; byte-identical for identical runs."""
    if format == "csv":
        text = report_to_csv(report)
    elif format == "json":
        text = report_to_json(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"failed writing report to {path}: {exc}") from exc
