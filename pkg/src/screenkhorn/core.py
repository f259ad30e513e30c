"""Measures, cost matrices, the Gibbs kernel, transport plans, and the plain
Sinkhorn solver used as the comparison baseline.

Everything here works in the scaling (exponential) domain without
log-stabilization. Regimes that overflow raise NumericRangeError instead of
propagating infinities; that is deliberate, the baseline should fail loudly
rather than return garbage timings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericRangeError, ParameterError, ShapeError


def _as_array(x, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InputError(f"{name} must be nonempty")
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Strictly positive weights on a finite support, normalized to mass 1."""

    weights: np.ndarray

    def __post_init__(self):
        w = _as_array(self.weights, "weights", 1)
        if not np.all(np.isfinite(w)):
            bad = int(np.flatnonzero(~np.isfinite(w))[0])
            raise InputError(f"weight[{bad}] is not finite")
        if np.any(w <= 0.0):
            bad = int(np.flatnonzero(w <= 0.0)[0])
            raise InputError(
                f"weights must be strictly positive, weight[{bad}] = {w[bad]}"
            )
        object.__setattr__(self, "weights", w / w.sum())

    @property
    def size(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Nonnegative finite cost per source/target pair."""

    entries: np.ndarray

    def __post_init__(self):
        c = _as_array(self.entries, "cost entries", 2)
        if not np.all(np.isfinite(c)):
            i, j = map(int, np.argwhere(~np.isfinite(c))[0])
            raise InputError(f"cost entry ({i}, {j}) is not finite")
        if np.any(c < 0.0):
            i, j = map(int, np.argwhere(c < 0.0)[0])
            raise InputError(f"cost entry ({i}, {j}) = {c[i, j]} is negative")
        object.__setattr__(self, "entries", c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def max_norm(self) -> float:
        return float(self.entries.max())


@dataclass(frozen=True, eq=False)
class GibbsKernel:
    """exp(-C/eta) with cached row and column sums."""

    entries: np.ndarray
    eta: float
    row_sums: np.ndarray = field(init=False)
    col_sums: np.ndarray = field(init=False)

    def __post_init__(self):
        k = _as_array(self.entries, "kernel entries", 2)
        eta = float(self.eta)
        if not np.isfinite(eta) or eta <= 0.0:
            raise ParameterError(f"eta must be positive and finite, got {eta}")
        kmin = float(k.min())
        kmax = float(k.max())
        # the fused range test also rejects nan, which fails both comparisons
        if not (kmin > 0.0 and kmax <= 1.0):
            bad = ~((k > 0.0) & (k <= 1.0))
            i, j = map(int, np.argwhere(bad)[0])
            raise InputError(f"kernel entry ({i}, {j}) = {k[i, j]} is outside (0, 1]")
        object.__setattr__(self, "entries", k)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "row_sums", k.sum(axis=1))
        object.__setattr__(self, "col_sums", k.sum(axis=0))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class DualPotentials:
    """Log-domain dual variables (u, v)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = _as_array(self.u, "u", 1)
        v = _as_array(self.v, "v", 1)
        for name, vec in (("u", u), ("v", v)):
            if not np.all(np.isfinite(vec)):
                bad = int(np.flatnonzero(~np.isfinite(vec))[0])
                raise InputError(f"potential {name}[{bad}] is not finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """A coupling matrix together with its marginals."""

    entries: np.ndarray
    row_marginal: np.ndarray = field(init=False)
    col_marginal: np.ndarray = field(init=False)

    def __post_init__(self):
        p = _as_array(self.entries, "plan entries", 2)
        if not np.all(np.isfinite(p)):
            i, j = map(int, np.argwhere(~np.isfinite(p))[0])
            raise InputError(f"plan entry ({i}, {j}) is not finite")
        if np.any(p <= 0.0):
            i, j = map(int, np.argwhere(p <= 0.0)[0])
            raise InputError(f"plan entry ({i}, {j}) = {p[i, j]} is not positive")
        object.__setattr__(self, "entries", p)
        object.__setattr__(self, "row_marginal", p.sum(axis=1))
        object.__setattr__(self, "col_marginal", p.sum(axis=0))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Output of the baseline solver: potentials plus run metadata."""

    potentials: DualPotentials
    iterations: int
    marginal_violation: float
    converged: bool


def gibbs_kernel(C: CostMatrix, eta: float) -> GibbsKernel:
    """K = exp(-C/eta), entrywise."""
    eta = float(eta)
    if not np.isfinite(eta) or eta <= 0.0:
        raise ParameterError(f"eta must be positive and finite, got {eta}")
    k = np.exp(-C.entries / eta)
    if np.any(k == 0.0):
        i, j = map(int, np.argwhere(k == 0.0)[0])
        raise NumericRangeError(
            f"kernel entry ({i}, {j}) underflowed to zero: cost {C.entries[i, j]} "
            f"is too large for eta = {eta}"
        )
    return GibbsKernel(k, eta)


def plan_from_potentials(pot: DualPotentials, K: GibbsKernel) -> TransportPlan:
    """P_ij = e^{u_i} K_ij e^{v_j}."""
    n, m = K.shape
    if pot.u.shape[0] != n or pot.v.shape[0] != m:
        raise ShapeError(
            f"potentials of lengths ({pot.u.shape[0]}, {pot.v.shape[0]}) do not "
            f"match kernel shape ({n}, {m})"
        )
    with np.errstate(over="ignore"):
        a = np.exp(pot.u)
        b = np.exp(pot.v)
    for name, vec in (("u", a), ("v", b)):
        if np.any(np.isinf(vec)):
            bad = int(np.flatnonzero(np.isinf(vec))[0])
            raise NumericRangeError(f"e^{name}[{bad}] overflows")
    with np.errstate(over="ignore"):
        p = (a[:, None] * K.entries) * b[None, :]
    if np.any(np.isinf(p)):
        i, j = map(int, np.argwhere(np.isinf(p))[0])
        raise NumericRangeError(f"plan entry ({i}, {j}) overflows")
    if np.any(p == 0.0):
        i, j = map(int, np.argwhere(p == 0.0)[0])
        raise NumericRangeError(f"plan entry ({i}, {j}) underflowed to zero")
    return TransportPlan(p)


def dual_objective(
    pot: DualPotentials, K: GibbsKernel, mu: DiscreteMeasure, nu: DiscreteMeasure
) -> float:
    """Sum of B(u, v) minus the linear terms <u, mu> + <v, nu>."""
    n, m = K.shape
    if pot.u.shape[0] != n or mu.size != n or pot.v.shape[0] != m or nu.size != m:
        raise ShapeError(
            f"dimensions disagree: kernel ({n}, {m}), u {pot.u.shape[0]}, "
            f"mu {mu.size}, v {pot.v.shape[0]}, nu {nu.size}"
        )
    with np.errstate(over="ignore"):
        a = np.exp(pot.u)
        b = np.exp(pot.v)
        mass = a @ (K.entries @ b)
    if not np.isfinite(mass):
        raise NumericRangeError("dual objective mass term overflows")
    return float(mass - pot.u @ mu.weights - pot.v @ nu.weights)


def divergence(P: TransportPlan, C: CostMatrix) -> float:
    """<C, P>, the transport cost of the plan."""
    if P.shape != C.shape:
        raise ShapeError(f"plan shape {P.shape} does not match cost shape {C.shape}")
    return float(np.sum(C.entries * P.entries))


def sinkhorn(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    K: GibbsKernel,
    stop_threshold: float = 1e-9,
    max_iter: int = 1000,
) -> DualSolution:
    """Alternating scaling iterations a = mu/(K b), b = nu/(K^T a).

    Stops once the combined l1 violation of both marginals drops below
    stop_threshold. Hitting max_iter is not an error: the solution comes back
    with converged=False and whatever violation was last measured.
    """
    if not (stop_threshold > 0.0):
        raise ParameterError(f"stop_threshold must be positive, got {stop_threshold}")
    if max_iter < 1:
        raise ParameterError(f"max_iter must be at least 1, got {max_iter}")
    n, m = K.shape
    if mu.size != n or nu.size != m:
        raise ShapeError(
            f"measure sizes ({mu.size}, {nu.size}) do not match kernel ({n}, {m})"
        )

    km = K.entries
    w_mu = mu.weights
    w_nu = nu.weights
    b = np.ones(m)
    kb = km @ b
    converged = False
    violation = np.inf
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, max_iter + 1):
            a = w_mu / kb
            kta = km.T @ a
            b = w_nu / kta
            kb = km @ b
            # after the b update the column marginal is exact up to roundoff,
            # so only the row marginal needs a fresh kernel product
            violation = float(
                np.abs(a * kb - w_mu).sum() + np.abs(b * kta - w_nu).sum()
            )
            if not np.isfinite(violation):
                raise NumericRangeError(
                    f"scaling iteration {it} overflowed; eta = {K.eta} is too small "
                    "for this cost matrix"
                )
            if violation < stop_threshold:
                converged = True
                break

    with np.errstate(divide="ignore"):
        u = np.log(a)
        v = np.log(b)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise NumericRangeError("scaling vector collapsed to zero, potentials diverge")
    return DualSolution(DualPotentials(u, v), it, violation, converged)
