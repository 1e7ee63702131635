"""Yule-Walker system assembly, sparse VAR estimation and the Granger network.

The VAR(d) transition matrices A_1..A_d of the idiosyncratic component
solve the Yule-Walker equation beta = G^-1 g with beta the vertical
stack of the A_l transposes. G is the pd x pd block-Toeplitz matrix with
block (l, l') = Gamma_xi(l - l') and g stacks Gamma_xi(1..d). Estimation
replaces the population autocovariances with their factor-adjusted
estimates and adds an l1 penalty or sup-norm constraint per column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .networks import Network
from .solvers import (
    DEFAULT_MAXITER,
    DEFAULT_TOL,
    SolverReport,
    SupConL1Problem,
    solve_quad_l1_columns,
    solve_supcon_l1,
)
from .spectral import AcvSet

SKEW_TOL = 1e-9


@dataclass(frozen=True)
class YwSystem:
    """The estimated Yule-Walker pair (Ghat, ghat) for a VAR(d)."""

    Ghat: np.ndarray
    ghat: np.ndarray
    d: int
    p: int

    def __post_init__(self):
        kd = self.d * self.p
        if self.Ghat.shape != (kd, kd):
            raise ValueError("Ghat must be pd x pd")
        if self.ghat.shape != (kd, self.p):
            raise ValueError("ghat must be pd x p")


@dataclass(frozen=True)
class VarEstimate:
    """Stacked VAR coefficient estimate and its solver provenance."""

    beta: np.ndarray
    d: int
    lam: float
    solver: str
    reports: tuple[SolverReport, ...]

    def __post_init__(self):
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("beta contains non-finite entries")

    @property
    def p(self) -> int:
        return self.beta.shape[1]

    def lag_matrix(self, ell: int) -> np.ndarray:
        """Transition matrix A_ell, 1-based lag index."""
        if not 1 <= ell <= self.d:
            raise ValueError(f"lag {ell} outside 1..{self.d}")
        p = self.p
        return self.beta[(ell - 1) * p : ell * p, :].T

    def lag_matrices(self) -> list[np.ndarray]:
        return [self.lag_matrix(ell) for ell in range(1, self.d + 1)]


def build_yw(acv_xi: AcvSet, d: int) -> YwSystem:
    """Assemble the block-Toeplitz Yule-Walker system at order d."""
    if d < 1:
        raise ValueError("VAR order d must be >= 1")
    if acv_xi.maxlag < d:
        raise ValueError(
            f"need autocovariances up to lag {d}, have {acv_xi.maxlag}"
        )
    p = acv_xi.p
    G = np.empty((d * p, d * p))
    for i in range(d):
        for j in range(d):
            G[i * p : (i + 1) * p, j * p : (j + 1) * p] = acv_xi.lag(i - j)
    skew = np.abs(G - G.T).max()
    if skew > SKEW_TOL * max(1.0, np.abs(G).max()):
        raise ValueError(
            f"Yule-Walker matrix has skew part {skew:.3e}; "
            "autocovariance inputs are inconsistent"
        )
    G = 0.5 * (G + G.T)
    g = np.vstack([acv_xi.lag(ell) for ell in range(1, d + 1)])
    return YwSystem(Ghat=G, ghat=g, d=d, p=p)


def estimate_beta(
    yw: YwSystem,
    lam: float,
    solver: str = "lasso",
    tol: float = DEFAULT_TOL,
    maxiter: int = DEFAULT_MAXITER,
) -> VarEstimate:
    """Estimate beta column by column at penalty level lam.

    lasso solves the penalized quadratic per column; dantzig minimizes
    each column's l1 norm subject to |Ghat m - ghat_j|_inf <= lam.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if solver == "lasso":
        beta, reports = solve_quad_l1_columns(
            yw.Ghat, yw.ghat, lam, tol=tol, maxiter=maxiter
        )
    elif solver == "dantzig":
        cols = []
        reports = []
        for j in range(yw.p):
            try:
                m, rep = solve_supcon_l1(
                    SupConL1Problem(yw.Ghat, yw.ghat[:, j], lam)
                )
            except ValueError as exc:
                raise ValueError(f"column {j}: {exc}") from None
            cols.append(m)
            reports.append(rep)
        beta = np.column_stack(cols)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return VarEstimate(
        beta=beta, d=yw.d, lam=lam, solver=solver, reports=tuple(reports)
    )


def threshold_matrix(est: np.ndarray, t: float) -> np.ndarray:
    """Zero every entry with |entry| <= t (strict survival rule)."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    out = np.asarray(est, dtype=float).copy()
    out[np.abs(out) <= t] = 0.0
    return out


def granger_network(
    est: VarEstimate,
    t: float,
    labels: tuple[str, ...] | None = None,
) -> Network:
    """Directed network of Granger linkages from the thresholded beta.

    Edge (i, i') is present when some thresholded A_l has a nonzero
    (i, i') entry; self-loops are legitimate edges. The weight is the
    surviving coefficient itself for d = 1 and the l2 norm over lags
    otherwise, where signs have no single natural definition.
    """
    p = est.p
    beta_t = threshold_matrix(est.beta, t)
    lags = np.stack(
        [beta_t[ell * p : (ell + 1) * p, :].T for ell in range(est.d)]
    )
    if est.d == 1:
        weights = lags[0].copy()
    else:
        weights = np.sqrt((lags**2).sum(axis=0))
    if labels is None:
        labels = tuple(f"s{i+1}" for i in range(p))
    return Network(weights=weights, directed=True, labels=labels, threshold=t)
