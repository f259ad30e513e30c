"""Command line front end.

Exit codes: 0 on success, 1 for bad inputs (files, shapes, parameters),
2 for numeric failures at runtime, 3 when a certificate check fails.
"""

from __future__ import annotations

import functools
import sys

import click
import numpy as np

from .algorithm import decimation_to_budget, screenkhorn
from .bench import (
    DEFAULT_ETA_GRID,
    ExperimentConfig,
    certify_outcome,
    compare_solvers,
    load_cost,
    load_problem,
    load_single_measure,
    run_experiment,
    write_matrix,
)
from .diagnostics import gap_diagnostic, omega_kappa
from .errors import (
    CertificateViolationError,
    InputError,
    ScreenkhornError,
)
from .solver import SolverConfig


def _mapped_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CertificateViolationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except InputError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except ScreenkhornError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _parse_float_list(text: str, what: str) -> tuple[float, ...]:
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            out.append(float(piece))
        except ValueError:
            raise InputError(f"cannot parse {piece!r} in --{what} as a number") from None
    if not out:
        raise InputError(f"--{what} must list at least one value")
    return tuple(out)


def _parse_budget_spec(text: str) -> tuple[float, ...]:
    """Either a comma list (0.1,0.5,0.9) or an inclusive range start:stop:step."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(
                f"budget range must be start:stop:step, got {text!r}"
            )
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise InputError(f"cannot parse budget range {text!r}") from None
        if step <= 0.0:
            raise InputError(f"budget range step must be positive, got {step}")
        if stop < start:
            raise InputError(f"budget range stop {stop} is below start {start}")
        values = []
        k = 0
        while True:
            value = start + k * step
            if value > stop * (1.0 + 1e-12) + 1e-15:
                break
            values.append(value)
            k += 1
        return tuple(values)
    return _parse_float_list(text, "budget")


def _load_inputs(measures, mu_path, nu_path, cost_path):
    if measures is not None and (mu_path is not None or nu_path is not None):
        raise InputError("pass either --measures or the --mu/--nu pair, not both")
    if measures is not None:
        return load_problem(measures, cost_path)
    if mu_path is None or nu_path is None:
        raise InputError("measures are required: --measures or both --mu and --nu")
    mu = load_single_measure(mu_path)
    nu = load_single_measure(nu_path)
    C = load_cost(cost_path)
    if C.shape != (mu.size, nu.size):
        raise InputError(
            f"{cost_path}: cost shape {C.shape} does not match measure sizes "
            f"({mu.size}, {nu.size})"
        )
    return mu, nu, C


def _check_eta(eta: float) -> float:
    if not (eta > 0.0) or not np.isfinite(eta):
        raise InputError(f"eta must be positive and finite, got {eta}")
    return eta


def _check_budget_factor(budget: float) -> float:
    if not (0.0 < budget <= 1.0):
        raise InputError(f"budget factor must be in (0, 1], got {budget}")
    return budget


@click.group()
def main():
    """Benchmark and solve entropic transport with screened duals."""


@main.command("run")
@click.option("--n", default=1000, show_default=True, type=int, help="rows")
@click.option("--m", default=1000, show_default=True, type=int, help="columns")
@click.option(
    "--eta",
    default=",".join(str(e) for e in DEFAULT_ETA_GRID),
    show_default=True,
    help="comma-separated regularization values",
)
@click.option(
    "--budget",
    default="0.1,0.25,0.5,0.75,0.99",
    show_default=True,
    help="comma list or inclusive start:stop:step of decimation factors",
)
@click.option("--trials", default=30, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option(
    "--normalize-cost/--no-normalize-cost", default=True, show_default=True
)
@click.option("--certify", is_flag=True, help="check certificates on every row")
@click.option("--pg-tol", default=1e-6, show_default=True, type=float)
@click.option("--verbose", is_flag=True, help="print progress per sweep cell")
@click.option("--out", default="results.csv", show_default=True)
@_mapped_errors
def run_cmd(n, m, eta, budget, trials, seed, normalize_cost, certify, pg_tol,
            verbose, out):
    """Paired Sinkhorn/Screenkhorn sweep over eta x budget x trial."""
    cfg = ExperimentConfig(
        n=n,
        m=m,
        eta_list=tuple(_check_eta(e) for e in _parse_float_list(eta, "eta")),
        budget_list=tuple(
            _check_budget_factor(b) for b in _parse_budget_spec(budget)
        ),
        trials=trials,
        seed=seed,
        normalize_cost=normalize_cost,
        output_path=out,
    )
    progress = (lambda msg: click.echo(msg, err=True)) if verbose else None
    rows, failures = run_experiment(
        cfg,
        certify=certify,
        solver_config=SolverConfig(pg_tolerance=pg_tol),
        progress=progress,
    )
    click.echo(f"wrote {len(rows)} rows to {cfg.output_path}")
    if failures:
        for row, cert in failures:
            click.echo(
                f"certificate {cert.name} failed at eta={row.eta} "
                f"budget={row.budget} trial={row.trial}: "
                f"{cert.empirical_value} > {cert.bound_value}",
                err=True,
            )
        raise CertificateViolationError(
            f"{len(failures)} certificate checks failed"
        )


_input_options = [
    click.option("--measures", default=None, type=click.Path(exists=True),
                 help="combined CSV with header index,mu,nu"),
    click.option("--mu", "mu_path", default=None, type=click.Path(exists=True),
                 help="row-measure CSV (header index,mu)"),
    click.option("--nu", "nu_path", default=None, type=click.Path(exists=True),
                 help="column-measure CSV (header index,nu)"),
    click.option("--cost", required=True, type=click.Path(exists=True),
                 help="headerless cost matrix CSV"),
]


def _with_input_options(fn):
    for opt in reversed(_input_options):
        fn = opt(fn)
    return fn


@main.command("solve")
@_with_input_options
@click.option("--eta", required=True, type=float)
@click.option("--budget", default=0.5, show_default=True, type=float,
              help="decimation factor in (0, 1]")
@click.option("--pg-tol", default=1e-6, show_default=True, type=float)
@click.option("--out", default=None, type=click.Path(),
              help="write the transport plan as headerless CSV")
@_mapped_errors
def solve_cmd(measures, mu_path, nu_path, cost, eta, budget, pg_tol, out):
    """Solve one instance with the screened dual and report the solution."""
    mu, nu, C = _load_inputs(measures, mu_path, nu_path, cost)
    _check_eta(eta)
    _check_budget_factor(budget)
    n_b, m_b = decimation_to_budget(mu.size, nu.size, budget)
    res = screenkhorn(
        C, eta, mu, nu, n_b, m_b,
        solver_config=SolverConfig(pg_tolerance=pg_tol),
        materialize_plan=out is not None,
    )
    click.echo(f"epsilon {res.screening.epsilon:.17g}")
    click.echo(f"kappa {res.screening.kappa:.17g}")
    click.echo(
        f"active rows {res.screening.n_active}/{mu.size}, "
        f"active cols {res.screening.m_active}/{nu.size}"
    )
    click.echo(f"converged {'true' if res.solver_report.converged else 'false'}")
    click.echo(
        f"projected gradient {res.solver_report.projected_gradient_inf_norm:.17g}"
    )
    row_violation = float(np.abs(res.row_marginal - mu.weights).sum())
    col_violation = float(np.abs(res.col_marginal - nu.weights).sum())
    click.echo(f"row violation {row_violation:.17g}")
    click.echo(f"col violation {col_violation:.17g}")
    click.echo(f"wall time {res.wall_time:.17g}")
    if out is not None:
        write_matrix(out, res.plan.entries)
        click.echo(f"wrote plan to {out}")


@main.command("compare")
@_with_input_options
@click.option("--eta", required=True, type=float)
@click.option("--budget", default=0.5, show_default=True, type=float)
@click.option("--pg-tol", default=1e-6, show_default=True, type=float)
@click.option("--sinkhorn-threshold", default=1e-9, show_default=True, type=float)
@click.option("--sinkhorn-max-iter", default=1000, show_default=True, type=int)
@_mapped_errors
def compare_cmd(measures, mu_path, nu_path, cost, eta, budget, pg_tol,
                sinkhorn_threshold, sinkhorn_max_iter):
    """Run both solvers on one instance and print paired metrics."""
    mu, nu, C = _load_inputs(measures, mu_path, nu_path, cost)
    _check_eta(eta)
    _check_budget_factor(budget)
    n_b, m_b = decimation_to_budget(mu.size, nu.size, budget)
    outcome = compare_solvers(
        C, eta, mu, nu, n_b, m_b,
        solver_config=SolverConfig(pg_tolerance=pg_tol),
        sinkhorn_threshold=sinkhorn_threshold,
        sinkhorn_max_iter=sinkhorn_max_iter,
    )
    res = outcome.screened
    click.echo(f"time sinkhorn {outcome.time_sinkhorn:.17g}")
    click.echo(f"time screenkhorn {outcome.time_screenkhorn:.17g}")
    click.echo(f"speedup {outcome.speedup:.17g}")
    click.echo(f"row violation {outcome.row_violation:.17g}")
    click.echo(f"col violation {outcome.col_violation:.17g}")
    click.echo(f"rel divergence {outcome.rel_divergence:.17g}")
    click.echo(f"epsilon {res.screening.epsilon:.17g}")
    click.echo(f"kappa {res.screening.kappa:.17g}")
    click.echo(
        f"active rows {res.screening.n_active}/{mu.size}, "
        f"active cols {res.screening.m_active}/{nu.size}"
    )
    click.echo(f"omega {omega_kappa(res):.17g}")
    click.echo(f"gap diagnostic {gap_diagnostic(res, mu, nu, C, eta):.17g}")
    click.echo(f"converged {'true' if outcome.converged else 'false'}")
    if not outcome.converged:
        click.echo("certificates skipped: run did not converge")
        return
    bad = []
    for cert in certify_outcome(outcome, mu, nu):
        state = "ok" if cert.satisfied else "FAILED"
        click.echo(
            f"certificate {cert.name}: {state} "
            f"({cert.empirical_value:.17g} <= {cert.bound_value:.17g})"
        )
        if not cert.satisfied:
            bad.append(cert.name)
    if bad:
        raise CertificateViolationError(
            "failed certificates: " + ", ".join(bad)
        )


if __name__ == "__main__":
    main()
