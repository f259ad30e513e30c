"""Benchmark harness: Gaussian cloud generation, cost construction, paired
Sinkhorn vs screened-solve sweeps over (eta, budget, trial), and CSV I/O.

Data for a trial depends only on (master seed, trial index), so every
(eta, budget) cell sees identical inputs and comparisons are paired. Wall
times for both solvers include kernel construction; neither includes
materializing the dense plan. One warm-up solve per eta is run and discarded
before any timed work.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, fields
from typing import Callable, Iterable, TextIO

import numpy as np

from ._rng import derive_seed, normals
from .algorithm import ScreenkhornResult, decimation_to_budget, screenkhorn
from .core import (
    CostMatrix,
    DiscreteMeasure,
    DualSolution,
    gibbs_kernel,
    sinkhorn,
)
from .diagnostics import (
    Certificate,
    marginal_norm_certificates,
    pinsker_check,
    violation_certificate_cols,
    violation_certificate_rows,
)
from .errors import (
    DegenerateCostError,
    InputError,
    ParameterError,
    ScreenkhornError,
    ShapeError,
)
from .solver import SolverConfig

_Y_MEAN = np.array([3.0, 3.0])
# lower-triangular square root of the target covariance [[1, -0.8], [-0.8, 1]]
_Y_CHOL = np.array([[1.0, 0.0], [-0.8, 0.6]])

DEFAULT_ETA_GRID = (0.1, 0.5, 1.0, 5.0)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    m: int
    eta_list: tuple[float, ...]
    budget_list: tuple[float, ...]
    trials: int
    seed: int
    normalize_cost: bool
    output_path: str

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ParameterError(f"sizes must be positive, got ({self.n}, {self.m})")
        if not self.eta_list:
            raise ParameterError("eta_list must be nonempty")
        if any(not (e > 0.0) for e in self.eta_list):
            raise ParameterError(f"every eta must be positive, got {self.eta_list}")
        if not self.budget_list:
            raise ParameterError("budget_list must be nonempty")
        if any(not (0.0 < b <= 1.0) for b in self.budget_list):
            raise ParameterError(
                f"every budget factor must be in (0, 1], got {self.budget_list}"
            )
        if self.trials < 1:
            raise ParameterError(f"trials must be at least 1, got {self.trials}")


@dataclass(frozen=True)
class ResultRow:
    eta: float
    budget: float
    trial: int
    seed: int
    time_sinkhorn: float
    time_screenkhorn: float
    speedup: float
    row_violation: float
    col_violation: float
    rel_divergence: float
    kappa: float
    epsilon: float
    active_rows: int
    active_cols: int
    converged: bool


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))

# columns that legitimately differ between repeat runs of the same config
TIME_COLUMNS = ("time_sinkhorn", "time_screenkhorn", "speedup")


def generate_gaussian_pair(
    n: int, m: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """X from the standard bivariate normal, Y from mean (3,3) with
    covariance [[1, -0.8], [-0.8, 1]]. Deterministic in (n, m, seed)."""
    if n < 1 or m < 1:
        raise ParameterError(f"sizes must be positive, got ({n}, {m})")
    z = normals(seed, 2 * (n + m))
    x = z[: 2 * n].reshape(n, 2)
    y = _Y_MEAN + z[2 * n :].reshape(m, 2) @ _Y_CHOL.T
    return x, y


def pairwise_euclidean(x: np.ndarray, y: np.ndarray, normalize: bool) -> CostMatrix:
    """C_ij = |x_i - y_j|_2, optionally scaled so the largest entry is 1."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != 2 or y.shape[1] != 2:
        raise ShapeError(
            f"expected 2-column point arrays, got shapes {x.shape} and {y.shape}"
        )
    diff = x[:, None, :] - y[None, :, :]
    c = np.sqrt((diff * diff).sum(axis=2))
    if normalize:
        top = c.max()
        if top <= 0.0:
            raise DegenerateCostError(
                "cannot normalize: every pairwise distance is zero"
            )
        c = c / top
    return CostMatrix(c)


def _plan_cost(
    C: CostMatrix, kernel_entries: np.ndarray, u: np.ndarray, v: np.ndarray
) -> float:
    """<C, P> for P = diag(e^u) K diag(e^v), without materializing P."""
    return float(
        np.einsum(
            "i,ij,ij,j->",
            np.exp(u),
            C.entries,
            kernel_entries,
            np.exp(v),
            optimize=True,
        )
    )


@dataclass(frozen=True, eq=False)
class ComparisonOutcome:
    """Both solvers run on one instance, with the paired metrics."""

    time_sinkhorn: float
    time_screenkhorn: float
    row_violation: float
    col_violation: float
    rel_divergence: float
    baseline: DualSolution
    screened: ScreenkhornResult

    @property
    def speedup(self) -> float:
        return self.time_sinkhorn / self.time_screenkhorn

    @property
    def converged(self) -> bool:
        return self.baseline.converged and self.screened.solver_report.converged


def compare_solvers(
    C: CostMatrix,
    eta: float,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    n_b: int,
    m_b: int,
    solver_config: SolverConfig | None = None,
    sinkhorn_threshold: float = 1e-9,
    sinkhorn_max_iter: int = 1000,
) -> ComparisonOutcome:
    """Run baseline and screened solvers on identical inputs and compare."""
    t0 = time.perf_counter()
    K = gibbs_kernel(C, eta)
    baseline = sinkhorn(mu, nu, K, sinkhorn_threshold, sinkhorn_max_iter)
    time_sink = time.perf_counter() - t0

    screened = screenkhorn(
        C, eta, mu, nu, n_b, m_b,
        solver_config=solver_config,
        materialize_plan=False,
    )

    row_violation = float(np.abs(screened.row_marginal - mu.weights).sum())
    col_violation = float(np.abs(screened.col_marginal - nu.weights).sum())
    cost_star = _plan_cost(C, K.entries, baseline.potentials.u, baseline.potentials.v)
    cost_screen = _plan_cost(
        C, K.entries, screened.potentials.u, screened.potentials.v
    )
    rel_divergence = abs(cost_star - cost_screen) / cost_star

    return ComparisonOutcome(
        time_sinkhorn=time_sink,
        time_screenkhorn=screened.wall_time,
        row_violation=row_violation,
        col_violation=col_violation,
        rel_divergence=rel_divergence,
        baseline=baseline,
        screened=screened,
    )


def certify_outcome(
    outcome: ComparisonOutcome, mu: DiscreteMeasure, nu: DiscreteMeasure
) -> list[Certificate]:
    """All per-run certificates for a converged comparison.

    Containment of the solution in its box is checked first (reported as a
    zero/one certificate), then the Pinsker inequality on both marginal
    pairs, the explicit squared-violation bounds, and the marginal mass
    bounds.
    """
    res = outcome.screened
    lower, upper = res.bounds.stacked(res.problem.n_active, res.problem.m_active)
    sol = res.solver_report.solution
    inside = bool(np.all(sol >= lower) and np.all(sol <= upper))
    checks = [
        Certificate(0.0 if inside else 1.0, 0.0, inside, "box-containment"),
        pinsker_check(mu.weights, res.row_marginal),
        pinsker_check(nu.weights, res.col_marginal),
        violation_certificate_rows(res, mu, nu),
        violation_certificate_cols(res, mu, nu),
    ]
    checks.extend(marginal_norm_certificates(res, mu, nu))
    return checks


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_result_header(stream: TextIO) -> None:
    stream.write(",".join(RESULT_COLUMNS) + "\n")
    stream.flush()


def write_result_row(stream: TextIO, row: ResultRow) -> None:
    stream.write(
        ",".join(format_value(getattr(row, name)) for name in RESULT_COLUMNS) + "\n"
    )
    stream.flush()


def run_experiment(
    cfg: ExperimentConfig,
    certify: bool = False,
    solver_config: SolverConfig | None = None,
    sinkhorn_threshold: float = 1e-9,
    sinkhorn_max_iter: int = 1000,
    progress: Callable[[str], None] | None = None,
) -> tuple[list[ResultRow], list[tuple[ResultRow, Certificate]]]:
    """Sweep eta x budget x trial, writing CSV rows as they complete.

    A row that fails inside either solver is recorded with nan metrics and
    converged=false instead of aborting the sweep. Certificate checks run
    only on converged rows and failures are collected, not raised.
    """
    say = progress or (lambda _msg: None)
    mu = DiscreteMeasure(np.full(cfg.n, 1.0 / cfg.n))
    nu = DiscreteMeasure(np.full(cfg.m, 1.0 / cfg.m))
    rows: list[ResultRow] = []
    cert_failures: list[tuple[ResultRow, Certificate]] = []

    with open(cfg.output_path, "w", newline="") as out:
        write_result_header(out)
        for eta in cfg.eta_list:
            # warm-up, discarded: first trial's data at the first budget
            warm_seed = derive_seed(cfg.seed, 0)
            wx, wy = generate_gaussian_pair(cfg.n, cfg.m, warm_seed)
            wc = pairwise_euclidean(wx, wy, cfg.normalize_cost)
            n_b, m_b = decimation_to_budget(cfg.n, cfg.m, cfg.budget_list[0])
            try:
                compare_solvers(
                    wc, eta, mu, nu, n_b, m_b,
                    solver_config, sinkhorn_threshold, sinkhorn_max_iter,
                )
            except ScreenkhornError:
                pass
            say(f"eta={eta}: warm-up done")

            for budget_factor in cfg.budget_list:
                n_b, m_b = decimation_to_budget(cfg.n, cfg.m, budget_factor)
                for trial in range(cfg.trials):
                    trial_seed = derive_seed(cfg.seed, trial)
                    x, y = generate_gaussian_pair(cfg.n, cfg.m, trial_seed)
                    C = pairwise_euclidean(x, y, cfg.normalize_cost)
                    try:
                        outcome = compare_solvers(
                            C, eta, mu, nu, n_b, m_b,
                            solver_config, sinkhorn_threshold, sinkhorn_max_iter,
                        )
                        row = ResultRow(
                            eta=eta,
                            budget=budget_factor,
                            trial=trial,
                            seed=trial_seed,
                            time_sinkhorn=outcome.time_sinkhorn,
                            time_screenkhorn=outcome.time_screenkhorn,
                            speedup=outcome.speedup,
                            row_violation=outcome.row_violation,
                            col_violation=outcome.col_violation,
                            rel_divergence=outcome.rel_divergence,
                            kappa=outcome.screened.screening.kappa,
                            epsilon=outcome.screened.screening.epsilon,
                            active_rows=outcome.screened.screening.n_active,
                            active_cols=outcome.screened.screening.m_active,
                            converged=outcome.converged,
                        )
                    except ScreenkhornError as exc:
                        say(f"eta={eta} budget={budget_factor} trial={trial}: {exc}")
                        nan = float("nan")
                        row = ResultRow(
                            eta=eta, budget=budget_factor, trial=trial,
                            seed=trial_seed,
                            time_sinkhorn=nan, time_screenkhorn=nan, speedup=nan,
                            row_violation=nan, col_violation=nan,
                            rel_divergence=nan, kappa=nan, epsilon=nan,
                            active_rows=0, active_cols=0, converged=False,
                        )
                        outcome = None
                    rows.append(row)
                    write_result_row(out, row)
                    if certify and outcome is not None and outcome.converged:
                        for cert in certify_outcome(outcome, mu, nu):
                            if not cert.satisfied:
                                cert_failures.append((row, cert))
                                say(
                                    f"certificate {cert.name} FAILED: "
                                    f"{cert.empirical_value} > {cert.bound_value}"
                                )
                say(f"eta={eta} budget={budget_factor}: {cfg.trials} trials done")
    return rows, cert_failures


# ---------------------------------------------------------------------------
# file formats


def _parse_float(
    text: str, path: str, line: int, column: str
) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputError(
            f"{path}: line {line}, column {column}: cannot parse {text!r} as a number"
        ) from None
    if math.isnan(value) or math.isinf(value):
        raise InputError(
            f"{path}: line {line}, column {column}: value {text!r} is not finite"
        )
    return value


def write_measures(path: str, mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    """Header index,mu,nu; the shorter side is padded with blank cells."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "mu", "nu"])
        for i in range(max(mu.size, nu.size)):
            writer.writerow(
                [
                    i,
                    format(mu.weights[i], ".17g") if i < mu.size else "",
                    format(nu.weights[i], ".17g") if i < nu.size else "",
                ]
            )


def load_measures(path: str) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    mu_vals: list[float] = []
    nu_vals: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["index", "mu", "nu"]:
            raise InputError(
                f"{path}: expected header 'index,mu,nu', got {header}"
            )
        for line_no, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != 3:
                raise InputError(
                    f"{path}: line {line_no}: expected 3 cells, got {len(record)}"
                )
            for cell, column, acc in (
                (record[1], "mu", mu_vals),
                (record[2], "nu", nu_vals),
            ):
                if not cell.strip():
                    continue
                value = _parse_float(cell, path, line_no, column)
                if value <= 0.0:
                    raise InputError(
                        f"{path}: line {line_no}, column {column}: weight {value} "
                        "is not strictly positive"
                    )
                acc.append(value)
    if not mu_vals or not nu_vals:
        raise InputError(f"{path}: at least one weight per measure is required")
    return DiscreteMeasure(np.array(mu_vals)), DiscreteMeasure(np.array(nu_vals))


def write_single_measure(path: str, name: str, measure: DiscreteMeasure) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", name])
        for i, w in enumerate(measure.weights):
            writer.writerow([i, format(w, ".17g")])


def load_single_measure(path: str) -> DiscreteMeasure:
    vals: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 2 or header[0].strip() != "index":
            raise InputError(
                f"{path}: expected a two-column header starting with 'index', "
                f"got {header}"
            )
        column = header[1].strip()
        for line_no, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != 2:
                raise InputError(
                    f"{path}: line {line_no}: expected 2 cells, got {len(record)}"
                )
            value = _parse_float(record[1], path, line_no, column)
            if value <= 0.0:
                raise InputError(
                    f"{path}: line {line_no}, column {column}: weight {value} "
                    "is not strictly positive"
                )
            vals.append(value)
    if not vals:
        raise InputError(f"{path}: no weights found")
    return DiscreteMeasure(np.array(vals))


def write_matrix(path: str, matrix: np.ndarray) -> None:
    """Headerless rows of comma-separated decimals (cost and plan files)."""
    with open(path, "w", newline="") as fh:
        for row in np.asarray(matrix, dtype=np.float64):
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def load_cost(path: str) -> CostMatrix:
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for line_no, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            parsed = [
                _parse_float(cell, path, line_no, str(col))
                for col, cell in enumerate(record)
            ]
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise InputError(
                    f"{path}: line {line_no}: expected {width} cells, got {len(parsed)}"
                )
            for col, value in enumerate(parsed):
                if value < 0.0:
                    raise InputError(
                        f"{path}: line {line_no}, column {col}: cost {value} "
                        "is negative"
                    )
            rows.append(parsed)
    if not rows:
        raise InputError(f"{path}: no cost rows found")
    return CostMatrix(np.array(rows))


def load_problem(
    measures_path: str, cost_path: str
) -> tuple[DiscreteMeasure, DiscreteMeasure, CostMatrix]:
    mu, nu = load_measures(measures_path)
    C = load_cost(cost_path)
    if C.shape != (mu.size, nu.size):
        raise InputError(
            f"{cost_path}: cost shape {C.shape} does not match measure sizes "
            f"({mu.size}, {nu.size}) from {measures_path}"
        )
    return mu, nu, C
