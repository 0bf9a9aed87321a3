"""Command-line front end.

Subcommands: divergence, estimate, influence, bias-approx, test, simulate.
Numeric results go to stdout as JSON unless --out is given; curve and table
emitters write CSV (or JSON for simulation reports).  All randomness is
controlled by explicit --seed values, so outputs are byte-reproducible.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from .asymptotics import bias_curves, if_first_order, if_second_order
from .divergence import Psi, TiltParams, lsd, gsd
from .estimation import SearchConfig, empirical_frequencies, minimize_lsd
from .families import PoissonFamily, density_vector
from .hypotest import one_sample_test, two_sample_statistic, second_order_test_influence
from .simulate import SimulationConfig, emit_report, run_simulation


def _fail(message: str) -> None:
    click.echo(json.dumps({"error": message}), err=True)
    sys.exit(1)


def _emit(payload: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    else:
        click.echo(payload, nl=not payload.endswith("\n"))


def _parse_sample(text: str | None, path: str | None) -> np.ndarray:
    if (text is None) == (path is None):
        _fail("provide exactly one of --data or --data-file")
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    tokens = text.replace(",", " ").split()
    try:
        return np.array([int(t) for t in tokens])
    except ValueError:
        _fail("sample entries must be integers")


@click.group()
def main() -> None:
    """Logarithmic super divergence toolkit."""


tilt_options = [
    click.option("--beta", type=float, required=True, help="tilt parameter beta >= 0"),
    click.option("--gamma", type=float, required=True, help="tilt parameter gamma"),
]


def with_tilt(cmd):
    for opt in reversed(tilt_options):
        cmd = opt(cmd)
    return cmd


@main.command()
@with_tilt
@click.option("--theta-g", type=float, required=True, help="Poisson parameter of the data-side density")
@click.option("--theta-f", type=float, required=True, help="Poisson parameter of the model-side density")
@click.option("--psi", type=click.Choice(["log", "identity"]), default="log")
@click.option("--out", type=click.Path(), default=None)
def divergence(beta, gamma, theta_g, theta_f, psi, out):
    """Divergence between two Poisson model densities."""
    try:
        p = TiltParams(beta, gamma, Psi.LOG if psi == "log" else Psi.IDENTITY)
        from .hypotest import model_pair_densities

        g, f = model_pair_densities(PoissonFamily(), theta_g, theta_f)
        value = gsd(g, f, p)
    except (ValueError, ArithmeticError) as exc:
        _fail(str(exc))
    _emit(json.dumps({"beta": beta, "gamma": gamma, "psi": psi, "value": value}) + "\n", out)


@main.command()
@with_tilt
@click.option("--data", type=str, default=None, help="comma/space separated integers")
@click.option("--data-file", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None)
def estimate(beta, gamma, data, data_file, out):
    """Minimum-divergence Poisson fit of an integer sample."""
    sample = _parse_sample(data, data_file)
    try:
        result = minimize_lsd(
            empirical_frequencies(sample), PoissonFamily(), TiltParams(beta, gamma), SearchConfig()
        )
    except (ValueError, ArithmeticError) as exc:
        _fail(str(exc))
    payload = {
        "theta_hat": result.theta_hat,
        "objective": result.objective,
        "residual": result.residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "bracket": list(result.bracket),
    }
    _emit(json.dumps(payload) + "\n", out)


@main.command()
@with_tilt
@click.option("--theta", type=float, required=True, help="model parameter")
@click.option("--y-max", type=int, default=30, help="largest contamination point")
@click.option("--out", type=click.Path(), default=None)
def influence(beta, gamma, theta, y_max, out):
    """First/second-order influence curves at the model (CSV: y,beta,gamma,if1,if2,if2_test)."""
    family = PoissonFamily()
    p = TiltParams(beta, gamma)
    lines = ["y,beta,gamma,if1,if2,if2_test"]
    try:
        for y in range(y_max + 1):
            if1 = if_first_order(y, None, family, theta, p)
            if2 = if_second_order(y, family, theta, p)
            if2_test = second_order_test_influence(y, family, theta, p)
            lines.append(f"{y},{beta:g},{gamma:g},{if1:.12g},{if2:.12g},{if2_test:.12g}")
    except (ValueError, ArithmeticError) as exc:
        _fail(str(exc))
    _emit("\n".join(lines) + "\n", out)


@main.command("bias-approx")
@with_tilt
@click.option("--theta", type=float, required=True)
@click.option("--y", type=int, required=True, help="contamination point")
@click.option("--eps-max", type=float, default=0.1)
@click.option("--steps", type=int, default=21)
@click.option("--out", type=click.Path(), default=None)
def bias_approx(beta, gamma, theta, y, eps_max, steps, out):
    """Bias approximation curves (CSV: eps,first_order,second_order,adequacy)."""
    try:
        curve = bias_curves(
            y, PoissonFamily(), theta, TiltParams(beta, gamma), np.linspace(0.0, eps_max, steps)
        )
    except (ValueError, ArithmeticError) as exc:
        _fail(str(exc))
    lines = ["eps,first_order,second_order,adequacy"]
    for e, fo, so, ad in zip(
        curve.eps_grid, curve.first_order, curve.second_order, curve.adequacy_ratio
    ):
        lines.append(f"{e:.6g},{fo:.12g},{so:.12g},{ad:.12g}")
    _emit("\n".join(lines) + "\n", out)


@main.command("test")
@with_tilt
@click.option("--data", type=str, default=None)
@click.option("--data-file", type=click.Path(exists=True), default=None)
@click.option("--data2", type=str, default=None, help="second sample enables the two-sample test")
@click.option("--theta0", type=float, default=None, help="null parameter (one-sample)")
@click.option("--level", type=float, multiple=True, default=(0.05,))
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None)
def test_cmd(beta, gamma, data, data_file, data2, theta0, level, seed, out):
    """One- or two-sample divergence test; prints a TestResult JSON object."""
    sample = _parse_sample(data, data_file)
    p = TiltParams(beta, gamma)
    try:
        if data2 is not None:
            sample2 = _parse_sample(data2, None)
            result = two_sample_statistic(
                sample, sample2, PoissonFamily(), p, levels=level, seed=seed
            )
        else:
            if theta0 is None:
                _fail("--theta0 is required for the one-sample test")
            result = one_sample_test(
                sample, PoissonFamily(), theta0, p, levels=level, seed=seed
            )
    except (ValueError, ArithmeticError) as exc:
        _fail(str(exc))
    _emit(json.dumps(result.to_dict()) + "\n", out)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help="JSON file matching the SimulationConfig schema")
@click.option("--seed", type=int, default=None, help="overrides the config seed")
@click.option("--replications", type=int, default=None, help="overrides the config value")
@click.option("--n-jobs", type=int, default=1)
@click.option("--out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def simulate(config_path, seed, replications, n_jobs, out, fmt):
    """Run a Monte-Carlo table and write it as CSV or JSON."""
    try:
        with open(config_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if seed is not None:
            raw["seed"] = seed
        if replications is not None:
            raw["replications"] = replications
        config = SimulationConfig.from_dict(raw)
        report = run_simulation(config, n_jobs=n_jobs)
        emit_report(report, fmt, out)
    except (ValueError, ArithmeticError, OSError, KeyError) as exc:
        _fail(str(exc))


if __name__ == "__main__":
    main()
