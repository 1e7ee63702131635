"""Cross-validated choice of the penalty, VAR order, eta and thresholds.

The (lambda, d) score approximates one-step prediction error on held-out
segments; eta is chosen by the Burg matrix divergence between the
regularised precision fit on training data and the innovation covariance
of the test data; thresholds come from the kink in the log edge count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .panel import TimeSeriesPanel
from .precision import estimate_delta
from .spectral import default_bandwidth, factor_adjust
from .var import build_yw, estimate_beta

LAMBDA_GRID_SIZE = 10
LAMBDA_GRID_SPAN = 100.0
ETA_GRID_SIZE = 10
ETA_GRID_SPAN = (0.01, 1.0)
THRESHOLD_GRID_SIZE = 100


@dataclass(frozen=True)
class CvGrid:
    """Candidate penalties, VAR orders and the fold count."""

    lambdas: np.ndarray
    orders: tuple[int, ...]
    folds: int = 1

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "orders", tuple(int(d) for d in self.orders))
        if lam.size == 0 or len(self.orders) == 0:
            raise ValueError("grid must be nonempty")
        if np.any(lam <= 0.0):
            raise ValueError("penalties must be positive")
        if np.any(np.diff(lam) > 0.0):
            raise ValueError("penalties must be in descending order")
        if any(d < 1 for d in self.orders):
            raise ValueError("orders must be positive")
        if self.folds < 1:
            raise ValueError("fold count must be positive")


def default_lambda_grid(ghat: np.ndarray, size: int = LAMBDA_GRID_SIZE) -> np.ndarray:
    """Log-spaced penalties from the kill point 2|ghat|_inf downwards."""
    lam_max = 2.0 * np.abs(ghat).max()
    if lam_max == 0.0:
        raise ValueError("ghat is zero; no meaningful penalty scale")
    return np.geomspace(lam_max, lam_max / LAMBDA_GRID_SPAN, size)


def default_eta_grid(gamma_hat: np.ndarray, size: int = ETA_GRID_SIZE) -> np.ndarray:
    scale = np.abs(gamma_hat).max()
    if scale == 0.0:
        raise ValueError("covariance is zero; no meaningful penalty scale")
    lo, hi = ETA_GRID_SPAN
    return np.geomspace(hi, lo, size) * scale


def cv_folds(n: int, M: int) -> list[tuple[slice, slice]]:
    """Fold boundaries n_l = min(l*ceil(n/M), n), each split in half.

    Fold l covers observations n_{l-1}..n_l; the first ceil(len/2) of
    them train, the rest test. Folds whose halves are empty raise.
    """
    step = -(-n // M)
    bounds = [min(l * step, n) for l in range(M + 1)]
    out = []
    for l in range(M):
        start, end = bounds[l], bounds[l + 1]
        mid = start + (end - start + 1) // 2
        if mid - start < 1 or end - mid < 1:
            raise ValueError(
                f"fold {l + 1} of {M} covers {end - start} observations; "
                "too short to split into train and test"
            )
        out.append((slice(start, mid), slice(mid, end)))
    return out


def _segment_panel(panel: TimeSeriesPanel, sl: slice) -> TimeSeriesPanel:
    """Re-center a contiguous stretch so it is a valid panel on its own."""
    seg = panel.values[:, sl]
    seg = seg - seg.mean(axis=1, keepdims=True)
    return TimeSeriesPanel(values=seg, labels=panel.labels, centered=True)


def segment_idio_acv(panel: TimeSeriesPanel, sl: slice, q: int, fold: int, role: str):
    seg = _segment_panel(panel, sl)
    try:
        m_seg = default_bandwidth(seg.n)
    except ValueError as exc:
        raise ValueError(f"fold {fold} {role} segment: {exc}") from None
    _, _, acv_xi, _ = factor_adjust(seg, q, m_seg)
    return acv_xi


def cv_select_lambda_d(
    panel: TimeSeriesPanel,
    q: int,
    m: int,
    grid: CvGrid,
    solver: str = "lasso",
) -> tuple[float, int, np.ndarray]:
    """Pick (lambda, d) minimising held-out prediction error.

    Each fold refits the factor adjustment on its train and test halves
    with their own bandwidths (m applies to the full-sample fit only).
    The score sums tr(Gamma_xi^test(0) - 2 beta' g^test + beta' G^test
    beta) over folds. Ties prefer the larger penalty, then the smaller
    order.
    """
    folds = cv_folds(panel.n, grid.folds)
    max_d = max(grid.orders)
    for l, (tr, te) in enumerate(folds, start=1):
        train_len = tr.stop - tr.start
        if max_d * panel.p >= train_len:
            raise ValueError(
                f"fold {l}: order {max_d} needs d*p < {train_len} "
                f"training observations, have d*p = {max_d * panel.p}"
            )
    scores = np.zeros((grid.lambdas.size, len(grid.orders)))
    for l, (tr, te) in enumerate(folds, start=1):
        xi_tr = segment_idio_acv(panel, tr, q, l, "train")
        xi_te = segment_idio_acv(panel, te, q, l, "test")
        if max_d > min(xi_tr.maxlag, xi_te.maxlag):
            raise ValueError(
                f"fold {l}: order {max_d} exceeds the segment bandwidth"
            )
        base = float(np.trace(xi_te.lag(0)))
        for j, d in enumerate(grid.orders):
            yw_tr = build_yw(xi_tr, d)
            yw_te = build_yw(xi_te, d)
            for i, lam in enumerate(grid.lambdas):
                beta = estimate_beta(yw_tr, float(lam), solver=solver).beta
                fit = float(np.sum(beta * yw_te.ghat))
                quad = float(np.sum(beta * (yw_te.Ghat @ beta)))
                scores[i, j] += base - 2.0 * fit + quad
    best = None
    for i, lam in enumerate(grid.lambdas):
        for j, d in enumerate(grid.orders):
            s = scores[i, j]
            lam_f = float(lam)
            if (
                best is None
                or s < best[0]
                or (
                    s == best[0]
                    and (lam_f > best[1] or (lam_f == best[1] and d < best[2]))
                )
            ):
                best = (s, lam_f, d)
    return best[1], best[2], scores


def cv_select_eta(
    fold_pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    etas: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Pick eta by the Burg divergence summed over folds.

    Each fold supplies (train covariance, test covariance); the score is
    tr(Delta_train(eta) Gamma_test) - log det(...) - p, infinite when
    the determinant is not positive. Ties prefer the larger eta.
    """
    etas = np.asarray(etas, dtype=float)
    if etas.size == 0:
        raise ValueError("eta grid is empty")
    if len(fold_pairs) == 0:
        raise ValueError("need at least one fold")
    p = fold_pairs[0][0].shape[0]
    scores = np.empty(etas.size)
    for k, eta in enumerate(etas):
        total = 0.0
        for g_train, g_test in fold_pairs:
            delta_hat = estimate_delta(g_train, float(eta)).delta_hat
            prod = delta_hat @ g_test
            sign, logdet = np.linalg.slogdet(prod)
            if sign <= 0:
                total = np.inf
                break
            total += float(np.trace(prod)) - logdet - p
        scores[k] = total
    if not np.any(np.isfinite(scores)):
        raise ValueError(
            "every eta gave a non-positive determinant; widen the grid "
            "toward larger values"
        )
    best = None
    for k, eta in enumerate(etas):
        s = scores[k]
        if best is None or s < best[0] or (s == best[0] and eta > best[1]):
            best = (s, float(eta))
    return best[1], scores


def select_threshold(est: np.ndarray) -> float:
    """Threshold at the kink of the log edge count.

    Over a logarithmic grid between the smallest and largest nonzero
    magnitudes, N(t) counts entries exceeding t; the candidate with the
    largest discrete second difference of log(1 + N(t)) is returned.
    Degenerate inputs (all zero, or a single magnitude) give 0.
    """
    mags = np.abs(np.asarray(est, dtype=float)).ravel()
    nonzero = mags[mags > 0.0]
    if nonzero.size == 0:
        return 0.0
    vmin, vmax = nonzero.min(), nonzero.max()
    if vmin == vmax:
        return 0.0
    grid = np.geomspace(vmin, vmax, THRESHOLD_GRID_SIZE)
    counts = (mags[None, :] > grid[:, None]).sum(axis=1)
    f = np.log1p(counts)
    d2 = f[2:] - 2.0 * f[1:-1] + f[:-2]
    return float(grid[1 + int(np.argmax(d2))])
