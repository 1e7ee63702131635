"""Innovation covariance, CLIME precision estimation and the two
partial-correlation networks.

Delta = Gamma^-1 captures contemporaneous dependence between the VAR
innovations; Omega = 2*pi*A(1)' Delta A(1) with A(1) = I - sum_l A_l is
the inverse of the long-run covariance of the idiosyncratic component.
Both give networks weighted by (negated, normalized) partial
correlations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .networks import Network
from .solvers import PSD_SLACK, SupConL1Problem, solve_supcon_l1
from .spectral import AcvSet
from .var import VarEstimate, threshold_matrix


@dataclass(frozen=True)
class PrecisionEstimate:
    """CLIME estimate of Delta before and after symmetrization."""

    gamma_hat: np.ndarray
    delta_check: np.ndarray
    delta_hat: np.ndarray
    eta: float

    def __post_init__(self):
        if not np.array_equal(self.delta_hat, self.delta_hat.T):
            raise ValueError("delta_hat must be exactly symmetric")


@dataclass(frozen=True)
class LongRunEstimate:
    omega_hat: np.ndarray
    a_of_one: np.ndarray


def innovation_cov(acv_xi: AcvSet, est: VarEstimate) -> np.ndarray:
    """Gamma_hat = Gamma_xi(0) - beta' g, symmetrized.

    g restacks Gamma_xi(1..d) from the same autocovariances the VAR
    estimate was built on. An indefinite result is passed through with a
    warning; repairing it would bias the downstream CLIME step.
    """
    p = acv_xi.p
    if est.p != p:
        raise ValueError(f"dimension mismatch: acv p={p}, estimate p={est.p}")
    if acv_xi.maxlag < est.d:
        raise ValueError("autocovariances do not cover the VAR order")
    g = np.vstack([acv_xi.lag(ell) for ell in range(1, est.d + 1)])
    gamma = acv_xi.lag(0) - est.beta.T @ g
    gamma = 0.5 * (gamma + gamma.T)
    vals = np.linalg.eigvalsh(gamma)
    if vals[0] < -PSD_SLACK * max(vals[-1], 0.0):
        warnings.warn(
            f"innovation covariance is indefinite "
            f"(min eigenvalue {vals[0]:.3e}); passing through unrepaired",
            stacklevel=2,
        )
    return gamma


def estimate_delta(
    gamma_hat: np.ndarray,
    eta: float,
    tol: float = 1e-8,
) -> PrecisionEstimate:
    """Columnwise constrained l1 estimation of Delta = Gamma^-1.

    Column j solves min |m|_1 subject to |Gamma_hat m - e_j|_inf <= eta.
    The raw solution need not be symmetric; for each pair the entry of
    smaller magnitude wins, with ties keeping the upper-triangle entry.
    """
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    p = gamma_hat.shape[0]
    cols = []
    for j in range(p):
        e_j = np.zeros(p)
        e_j[j] = 1.0
        try:
            m, _ = solve_supcon_l1(
                SupConL1Problem(gamma_hat, e_j, eta), tol=tol
            )
        except ValueError as exc:
            raise ValueError(f"column {j}: {exc}") from None
        cols.append(m)
    delta_check = np.column_stack(cols)
    lower_wins = np.abs(delta_check.T) < np.abs(delta_check)
    delta_hat = np.where(lower_wins, delta_check.T, delta_check)
    # The elementwise rule picks, for pair (i, i'), the entry of smaller
    # magnitude from either side, so the result is symmetric by value;
    # mirror the upper triangle to make it symmetric bit for bit.
    iu = np.triu_indices(p, 1)
    delta_hat[(iu[1], iu[0])] = delta_hat[iu]
    return PrecisionEstimate(
        gamma_hat=gamma_hat,
        delta_check=delta_check,
        delta_hat=delta_hat,
        eta=eta,
    )


def _partial_correlation_network(
    mat: np.ndarray,
    t: float,
    labels: tuple[str, ...] | None,
    kind: str,
) -> Network:
    p = mat.shape[0]
    diag = np.diag(mat)
    if np.any(diag <= 0.0):
        bad = int(np.argmin(diag))
        raise ValueError(
            f"{kind} matrix has non-positive diagonal at {bad}; "
            "partial correlations are undefined"
        )
    keep = np.abs(mat) > t
    scale = np.sqrt(np.outer(diag, diag))
    weights = np.where(keep, -mat / scale, 0.0)
    np.fill_diagonal(weights, 0.0)
    weights = 0.5 * (weights + weights.T)
    if labels is None:
        labels = tuple(f"s{i+1}" for i in range(p))
    return Network(weights=weights, directed=False, labels=labels, threshold=t)


def contemporaneous_network(
    delta_hat: np.ndarray,
    t_delta: float,
    labels: tuple[str, ...] | None = None,
) -> Network:
    """Undirected network weighted by -delta_ii'/sqrt(delta_ii delta_i'i').

    Off-diagonal entries surviving |delta_ii'| > t_delta define the edge
    set; the normalization always uses the unthresholded diagonal.
    """
    return _partial_correlation_network(
        np.asarray(delta_hat, dtype=float), t_delta, labels, "precision"
    )


def longrun_matrix(
    est: VarEstimate,
    t: float,
    delta_hat: np.ndarray,
) -> LongRunEstimate:
    """Omega_hat = 2*pi * A(1)' Delta_hat A(1) with thresholded VAR lags."""
    delta_hat = np.asarray(delta_hat, dtype=float)
    p = est.p
    if delta_hat.shape != (p, p):
        raise ValueError("delta_hat dimension does not match the VAR")
    beta_t = threshold_matrix(est.beta, t)
    a_sum = np.zeros((p, p))
    for ell in range(est.d):
        a_sum += beta_t[ell * p : (ell + 1) * p, :].T
    a_of_one = np.eye(p) - a_sum
    omega = 2.0 * np.pi * a_of_one.T @ delta_hat @ a_of_one
    omega = 0.5 * (omega + omega.T)
    return LongRunEstimate(omega_hat=omega, a_of_one=a_of_one)


def longrun_network(
    lr: LongRunEstimate,
    t_omega: float,
    labels: tuple[str, ...] | None = None,
) -> Network:
    """Long-run analogue of the contemporaneous network, from Omega_hat."""
    return _partial_correlation_network(lr.omega_hat, t_omega, labels, "long-run")


def structural_longrun_support(
    A_lags: list[np.ndarray],
    delta: np.ndarray,
) -> np.ndarray:
    """Entries of Omega that the model structure allows to be nonzero.

    omega_ii' can only differ from zero when the VAR transitions and
    Delta link i and i' through one of five patterns: a direct Delta
    entry, a direct transition either way, a shared neighbour j combining
    a transition with a Delta link (or transitions from j into both), or
    a Delta-linked pair (j, j') feeding i and i' separately. The
    converse fails only on exact cancellations, so the true support is
    contained in (not equal to) this set.
    """
    delta = np.asarray(delta, dtype=float)
    p = delta.shape[0]
    s = np.zeros((p, p))
    for a in A_lags:
        s += np.asarray(a, dtype=float)
    S = s != 0.0  # S[j, i]: some lag moves i into the equation of j
    D = delta != 0.0
    out = np.zeros((p, p), dtype=bool)
    idx = np.arange(p)
    for i in range(p):
        for ip in range(i, p):
            if i == ip:
                out[i, ip] = True
                continue
            if D[i, ip] or S[ip, i] or S[i, ip]:
                out[i, ip] = out[ip, i] = True
                continue
            others = (idx != i) & (idx != ip)
            si = S[:, i] & others
            sip = S[:, ip] & others
            hit = (
                np.any(si & D[ip, :])
                or np.any(sip & D[i, :])
                or np.any(si & sip)
            )
            if not hit:
                hit = bool(np.any(D[np.ix_(si, sip)]))
            out[i, ip] = out[ip, i] = hit
    return out
