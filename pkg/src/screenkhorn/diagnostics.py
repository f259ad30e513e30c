"""Metrics and computable certificates for screened solves.

Each certificate compares an empirical quantity from a finished run against
an explicit bound evaluated term by term from the problem data. A certificate
is satisfied when empirical <= bound * (1 + 1e-9) + 1e-12; the slack only
absorbs floating point noise, never looseness of the bound itself.

oracle_solve is an independent projected gradient method used by the test
suite as ground truth against minimize(). It shares no code with the
quasi-Newton path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algorithm import ScreenkhornResult
from .core import CostMatrix, DiscreteMeasure, TransportPlan
from .errors import InputError, OracleFailureError, ShapeError
from .screened import ScreenedDualProblem, gradient, objective
from .solver import projected_gradient

_REL_SLACK = 1e-9
_ABS_SLACK = 1e-12


@dataclass(frozen=True)
class Certificate:
    empirical_value: float
    bound_value: float
    satisfied: bool
    name: str


def _certify(name: str, empirical: float, bound: float) -> Certificate:
    ok = empirical <= bound * (1.0 + _REL_SLACK) + _ABS_SLACK
    return Certificate(float(empirical), float(bound), bool(ok), name)


def _require_converged(result: ScreenkhornResult, name: str) -> None:
    if not result.solver_report.converged:
        raise InputError(
            f"{name} requires a converged solve; this result stopped with "
            f"projected gradient {result.solver_report.projected_gradient_inf_norm}"
        )


def marginal_violations(
    P: TransportPlan, mu: DiscreteMeasure, nu: DiscreteMeasure
) -> tuple[float, float]:
    """l1 distances between the plan's marginals and the targets."""
    if P.shape != (mu.size, nu.size):
        raise ShapeError(
            f"plan shape {P.shape} does not match measures ({mu.size}, {nu.size})"
        )
    row = float(np.abs(P.row_marginal - mu.weights).sum())
    col = float(np.abs(P.col_marginal - nu.weights).sum())
    return row, col


def _positive_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ShapeError(f"{name} must be a nonempty vector")
    if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
        raise InputError(f"{name} must be strictly positive and finite")
    return v


def rho_distance(gamma, beta) -> float:
    """Sum of b - a + a log(a/b) over entry pairs; zero iff the vectors match.

    Each summand equals a * (t - log(1 + t)) for t = b/a - 1 and is
    nonnegative for every positive pair, so rounding residue below zero is
    clamped per term before summing. Without the clamp, nearly identical
    vectors can sum to a tiny negative and poison downstream square roots.
    """
    g = _positive_vector(gamma, "gamma")
    b = _positive_vector(beta, "beta")
    if g.shape != b.shape:
        raise ShapeError(f"vector shapes {g.shape} and {b.shape} differ")
    t = b / g - 1.0
    terms = g * (t - np.log1p(t))
    return float(np.maximum(terms, 0.0).sum())


def pinsker_check(gamma, beta) -> Certificate:
    """l1 distance against sqrt(7 * min mass * rho distance)."""
    g = _positive_vector(gamma, "gamma")
    b = _positive_vector(beta, "beta")
    if g.shape != b.shape:
        raise ShapeError(f"vector shapes {g.shape} and {b.shape} differ")
    empirical = float(np.abs(g - b).sum())
    bound = float(np.sqrt(7.0 * min(g.sum(), b.sum()) * rho_distance(g, b)))
    return _certify("pinsker", empirical, bound)


def _c(z: float) -> float:
    """c_z = z - log z - 1, the scalar gap used in the violation bounds."""
    return float(z - np.log(z) - 1.0)


def violation_certificate_rows(
    result: ScreenkhornResult, mu: DiscreteMeasure, nu: DiscreteMeasure
) -> Certificate:
    """Explicit bound on the squared l1 row-marginal violation.

    The bound is, with K_min the smallest entry of the active kernel block,
    global extrema over mu and nu, and the minimum of nu over the active
    columns:

        n_b * c_kappa * max mu
        + 7 (n - n_b) * [ m_b max nu / (n kappa K_min)
                          + (m - m_b) eps^2
                          - min mu
                          + max mu * log( kappa (n - n_b + 1) max mu
                                              / (m_b K_min min_J nu)
                                          + n_b kappa^2 (max mu)^2
                                              / (m m_b eps^2 K_min^2 min_J nu) ) ]
    """
    _require_converged(result, "row violation certificate")
    p = result.problem
    n, m = p.n, p.m
    n_b, m_b = result.budget.n_b, result.budget.m_b
    eps, kap, k_min = p.epsilon, p.kappa, p.k_min
    mu_max = float(mu.weights.max())
    mu_min = float(mu.weights.min())
    nu_max = float(nu.weights.max())
    nu_min_active = float(p.nu_active.min())

    log_arg = (
        kap * (n - n_b + 1) * mu_max / (m_b * k_min * nu_min_active)
        + n_b * kap**2 * mu_max**2 / (m * m_b * eps**2 * k_min**2 * nu_min_active)
    )
    bound = n_b * _c(kap) * mu_max + 7.0 * (n - n_b) * (
        m_b * nu_max / (n * kap * k_min)
        + (m - m_b) * eps**2
        - mu_min
        + mu_max * np.log(log_arg)
    )
    empirical = float(np.abs(result.row_marginal - mu.weights).sum()) ** 2
    return _certify("row-violation-squared", empirical, bound)


def violation_certificate_cols(
    result: ScreenkhornResult, mu: DiscreteMeasure, nu: DiscreteMeasure
) -> Certificate:
    """Column analogue of violation_certificate_rows (swap sides, kappa -> 1/kappa)."""
    _require_converged(result, "column violation certificate")
    p = result.problem
    n, m = p.n, p.m
    n_b, m_b = result.budget.n_b, result.budget.m_b
    eps, kap, k_min = p.epsilon, p.kappa, p.k_min
    nu_max = float(nu.weights.max())
    nu_min = float(nu.weights.min())
    mu_max = float(mu.weights.max())
    mu_min_active = float(p.mu_active.min())

    log_arg = (
        (m - m_b + 1) * nu_max / (n_b * kap * k_min * mu_min_active)
        + m_b * nu_max**2 / (n * n_b * eps**2 * kap**2 * k_min**2 * mu_min_active)
    )
    bound = m_b * _c(1.0 / kap) * nu_max + 7.0 * (m - m_b) * (
        n_b * kap * mu_max / (m * k_min)
        + (n - n_b) * eps**2
        - nu_min
        + nu_max * np.log(log_arg)
    )
    empirical = float(np.abs(result.col_marginal - nu.weights).sum()) ** 2
    return _certify("col-violation-squared", empirical, bound)


def omega_kappa(result: ScreenkhornResult) -> float:
    """|1-k| ||mu_sc||_1 + |1-1/k| ||nu_sc||_1 + |1-k| + |1-1/k|.

    Exactly zero when kappa == 1: every |1 - kappa| factor is the float 0.0,
    so no rounding enters.
    """
    kap = result.screening.kappa
    row_mass = float(np.abs(result.row_marginal).sum())
    col_mass = float(np.abs(result.col_marginal).sum())
    a = abs(1.0 - kap)
    b = abs(1.0 - 1.0 / kap)
    return a * row_mass + b * col_mass + a + b


def marginal_norm_certificates(
    result: ScreenkhornResult, mu: DiscreteMeasure, nu: DiscreteMeasure
) -> tuple[Certificate, Certificate]:
    """l1 mass bounds on the screened marginals.

    Rows:    ||mu_sc||_1  <= kappa ||mu_I||_1
                             + (n - n_b) [ m_b max_J nu / (n kappa K_min)
                                           + (m - m_b) eps^2 ]
    Columns: ||nu_sc||_1  <= (1/kappa) ||nu_J||_1
                             + (m - m_b) [ n_b kappa max_I mu / (m K_min)
                                           + (n - n_b) eps^2 ]
    """
    _require_converged(result, "marginal norm certificate")
    p = result.problem
    n, m = p.n, p.m
    n_b, m_b = result.budget.n_b, result.budget.m_b
    eps, kap, k_min = p.epsilon, p.kappa, p.k_min
    nu_max_active = float(p.nu_active.max())
    mu_max_active = float(p.mu_active.max())

    row_bound = kap * float(p.mu_active.sum()) + (n - n_b) * (
        m_b * nu_max_active / (n * kap * k_min) + (m - m_b) * eps**2
    )
    col_bound = float(p.nu_active.sum()) / kap + (m - m_b) * (
        n_b * kap * mu_max_active / (m * k_min) + (n - n_b) * eps**2
    )
    row_emp = float(np.abs(result.row_marginal).sum())
    col_emp = float(np.abs(result.col_marginal).sum())
    return (
        _certify("row-marginal-mass", row_emp, row_bound),
        _certify("col-marginal-mass", col_emp, col_bound),
    )


def gap_diagnostic(
    result: ScreenkhornResult,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    C: CostMatrix,
    eta: float,
) -> float:
    """Scale factor times (violations + omega), reported without pass/fail.

    The factor is ||C||_inf / eta + log((n v m)^2 / (n m c^{7/2})) with c the
    smallest active-set mass on either side. The constants hidden by the
    objective-gap analysis are unknown, so this is a diagnostic number for
    trend watching, not a certificate.
    """
    p = result.problem
    c_mass = min(float(p.mu_active.min()), float(p.nu_active.min()))
    big = max(p.n, p.m)
    scale = C.max_norm / eta + np.log(big**2 / (p.n * p.m * c_mass**3.5))
    row = float(np.abs(result.row_marginal - mu.weights).sum())
    col = float(np.abs(result.col_marginal - nu.weights).sum())
    return float(scale * (row + col + omega_kappa(result)))


def oracle_solve(
    p: ScreenedDualProblem,
    lower: np.ndarray,
    upper: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 10_000_000,
) -> np.ndarray:
    """Projected gradient descent on the stacked screened dual, to high accuracy.

    Step sizes follow a diminishing-then-backtracking scheme: the trial step
    adapts across iterations (a Barzilai-Borwein ratio, clipped), and within
    an iteration it is halved until the projected step satisfies a sufficient
    decrease test. Ground truth for small instances only; refuses more than
    64 variables and raises if the iteration cap is hit.
    """
    dim = p.n_active + p.m_active
    if dim > 64:
        raise InputError(f"oracle limited to 64 variables, got {dim}")
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if lower.shape != (dim,) or upper.shape != (dim,):
        raise ShapeError(
            f"bounds of shapes {lower.shape}, {upper.shape} do not match "
            f"{dim} variables"
        )
    if not (tol > 0.0):
        raise InputError(f"tol must be positive, got {tol}")
    k = p.n_active

    def func(x: np.ndarray) -> float:
        return objective(p, x[:k], x[k:])

    def grad(x: np.ndarray) -> np.ndarray:
        return np.concatenate(gradient(p, x[:k], x[k:]))

    x = np.clip(np.zeros(dim), lower, upper)
    f = func(x)
    g = grad(x)
    step = 1.0
    for _ in range(max_iter):
        pg = projected_gradient(x, g, lower, upper)
        if np.abs(pg).max() < tol:
            return x
        trial = step
        x_new = x
        f_new = f
        for _ in range(200):
            cand = np.clip(x - trial * g, lower, upper)
            move = cand - x
            f_cand = func(cand)
            if f_cand <= f + 1e-4 * float(g @ move):
                x_new, f_new = cand, f_cand
                break
            trial *= 0.5
        else:
            # no acceptable step at any scale, flat to machine precision
            raise OracleFailureError(
                f"line search stalled with projected gradient {np.abs(pg).max()}"
            )
        g_new = grad(x_new)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0.0 else 1.0
        step = min(max(step, 1e-8), 1e8)
        x, f, g = x_new, f_new, g_new
    raise OracleFailureError(
        f"no convergence to {tol} within {max_iter} iterations "
        f"(projected gradient {np.abs(projected_gradient(x, g, lower, upper)).max()})"
    )
