"""Convex solvers for the two l1 programs used by the estimators.

solve_quad_l1 minimizes m'Gm - 2m'g + lambda*|m|_1 by cyclic coordinate
descent with exact soft-threshold updates. solve_supcon_l1 minimizes
|m|_1 subject to |Am - b|_inf <= eps, posed as a linear program over the
positive and negative parts of m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

DEFAULT_TOL = 1e-7
DEFAULT_MAXITER = 20000

# Entries at or below this magnitude are snapped to exact zero so support
# sets are well-defined.
ZERO_SNAP = 1e-12

# Eigenvalue slack accepted when asserting positive semi-definiteness.
PSD_SLACK = 1e-8


@dataclass(frozen=True)
class QuadL1Problem:
    """One column of the penalized Yule-Walker objective."""

    G: np.ndarray
    g: np.ndarray
    lam: float

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "g", g)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("G must be square")
        if g.shape != (G.shape[0],):
            raise ValueError("g length must match G")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        scale = np.abs(G).max() if G.size else 0.0
        if scale and np.abs(G - G.T).max() > 1e-10 * max(scale, 1.0):
            raise ValueError("G must be symmetric")


@dataclass(frozen=True)
class SupConL1Problem:
    """Minimum-l1 point of the slab |Am - b|_inf <= eps."""

    A: np.ndarray
    b: np.ndarray
    eps: float

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.ndim != 2:
            raise ValueError("A must be a matrix")
        if b.shape != (A.shape[0],):
            raise ValueError("b length must match rows of A")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    kkt_residual: float
    objective: float
    converged: bool


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def assert_psd(G: np.ndarray, name: str = "G") -> None:
    vals = np.linalg.eigvalsh(G)
    if vals[0] < -PSD_SLACK * max(vals[-1], 0.0):
        raise ValueError(
            f"{name} is not positive semi-definite: "
            f"min eigenvalue {vals[0]:.3e} vs max {vals[-1]:.3e}"
        )


def _quad_objective(G, g, lam, m):
    return float(m @ G @ m - 2.0 * m @ g + lam * np.abs(m).sum())


def _kkt_residual(G, g, lam, m):
    """Sup-norm violation of the stationarity conditions at m."""
    grad = 2.0 * (G @ m - g)
    on = m != 0.0
    res_zero = max(0.0, float(np.abs(grad[~on]).max() - lam)) if np.any(~on) else 0.0
    res_supp = float(np.abs(grad[on] + lam * np.sign(m[on])).max()) if np.any(on) else 0.0
    return max(res_zero, res_supp)


def solve_quad_l1(
    prob: QuadL1Problem,
    tol: float = DEFAULT_TOL,
    maxiter: int = DEFAULT_MAXITER,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverReport]:
    """Cyclic coordinate descent on the penalized quadratic.

    Each coordinate update is the exact minimizer
    m_i <- S(g_i - sum_{j != i} G_ij m_j, lambda/2) / G_ii,
    so the objective never increases. Convergence is declared when the
    largest coordinate change in a sweep is at most tol*(1 + |m|_inf).
    """
    G, g, lam = prob.G, prob.g, prob.lam
    k = G.shape[0]
    assert_psd(G)
    diag = np.diag(G).copy()
    if np.any(diag <= 0.0):
        bad = int(np.argmin(diag))
        raise ValueError(f"G[{bad},{bad}] = {diag[bad]:.3e} is not positive")
    m = np.zeros(k) if x0 is None else np.array(x0, dtype=float)
    Gm = G @ m if x0 is not None else np.zeros(k)
    half = 0.5 * lam
    sweeps = 0
    converged = False
    while sweeps < maxiter:
        sweeps += 1
        delta_max = 0.0
        for i in range(k):
            old = m[i]
            a = g[i] - Gm[i] + diag[i] * old
            new = soft_threshold(a, half) / diag[i]
            if new != old:
                Gm += G[:, i] * (new - old)
                m[i] = new
                delta_max = max(delta_max, abs(new - old))
        if delta_max <= tol * (1.0 + np.abs(m).max(initial=0.0)):
            converged = True
            break
    m[np.abs(m) <= ZERO_SNAP] = 0.0
    report = SolverReport(
        iterations=sweeps,
        kkt_residual=_kkt_residual(G, g, lam, m),
        objective=_quad_objective(G, g, lam, m),
        converged=converged,
    )
    return m, report


def solve_quad_l1_columns(
    G: np.ndarray,
    gs: np.ndarray,
    lam: float,
    tol: float = DEFAULT_TOL,
    maxiter: int = DEFAULT_MAXITER,
) -> tuple[np.ndarray, list[SolverReport]]:
    """Run solve_quad_l1 over all columns of gs against a shared G.

    The columns are independent problems; they are swept simultaneously
    so each cycle costs one rank-1 update instead of a Python loop per
    column. Iterates match the single-column solver exactly because the
    update arithmetic is identical and a column is frozen the moment its
    own stopping rule fires.
    """
    G = np.asarray(G, dtype=float)
    gs = np.asarray(gs, dtype=float)
    k, ncol = gs.shape
    assert_psd(G)
    diag = np.diag(G).copy()
    if np.any(diag <= 0.0):
        bad = int(np.argmin(diag))
        raise ValueError(f"G[{bad},{bad}] = {diag[bad]:.3e} is not positive")
    M = np.zeros((k, ncol))
    GM = np.zeros((k, ncol))
    half = 0.5 * lam
    active = np.arange(ncol)
    iterations = np.zeros(ncol, dtype=int)
    converged = np.zeros(ncol, dtype=bool)
    sweeps = 0
    while active.size and sweeps < maxiter:
        sweeps += 1
        delta_max = np.zeros(active.size)
        Ma = M[:, active]
        GMa = GM[:, active]
        ga = gs[:, active]
        for i in range(k):
            old = Ma[i]
            a = ga[i] - GMa[i] + diag[i] * old
            new = soft_threshold(a, half) / diag[i]
            step = new - old
            nz = step != 0.0
            if np.any(nz):
                GMa += np.outer(G[:, i], step * nz)
                Ma[i] = np.where(nz, new, old)
                np.maximum(delta_max, np.abs(step), out=delta_max)
        M[:, active] = Ma
        GM[:, active] = GMa
        iterations[active] = sweeps
        scale = 1.0 + np.abs(Ma).max(axis=0, initial=0.0)
        done = delta_max <= tol * scale
        converged[active[done]] = True
        active = active[~done]
    M[np.abs(M) <= ZERO_SNAP] = 0.0
    reports = [
        SolverReport(
            iterations=int(iterations[j]),
            kkt_residual=_kkt_residual(G, gs[:, j], lam, M[:, j]),
            objective=_quad_objective(G, gs[:, j], lam, M[:, j]),
            converged=bool(converged[j]),
        )
        for j in range(ncol)
    ]
    return M, reports


def solve_supcon_l1(
    prob: SupConL1Problem,
    tol: float = 1e-8,
) -> tuple[np.ndarray, SolverReport]:
    """Solve min |m|_1 subject to |Am - b|_inf <= eps as a linear program.

    Variables are the split m = m+ - m-, m+- >= 0, with objective
    1'(m+ + m-). With eps = 0 the slab collapses to equality constraints.
    Infeasibility is surfaced as an error since it means the budget eps
    is too small for the system.
    """
    A, b, eps = prob.A, prob.b, prob.eps
    nrow, k = A.shape
    c = np.ones(2 * k)
    split = np.hstack([A, -A])
    if eps == 0.0:
        res = linprog(c, A_eq=split, b_eq=b, bounds=(0, None), method="highs")
    else:
        a_ub = np.vstack([split, -split])
        b_ub = np.concatenate([b + eps, eps - b])
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    if res.status == 2:
        raise ValueError(
            f"infeasible l1 program: no m satisfies |Am - b|_inf <= {eps}"
        )
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    m = res.x[:k] - res.x[k:]
    m[np.abs(m) <= ZERO_SNAP] = 0.0
    violation = max(0.0, float(np.abs(A @ m - b).max(initial=0.0) - eps))
    report = SolverReport(
        iterations=int(res.nit),
        kkt_residual=violation,
        objective=float(np.abs(m).sum()),
        converged=violation <= tol,
    )
    return m, report
