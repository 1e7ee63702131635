"""Multi-step forecasting of the common and idiosyncratic components.

The restricted method projects onto the leading eigenvectors of
Gamma_chi(0), treating the common component as a static factor model.
The unrestricted method keeps the fully dynamic representation: it fits
small VARs on blocks of q+1 series, filters the panel to recover the
common shocks, and truncates the implied moving-average expansion. The
idiosyncratic part always comes from the estimated VAR recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import TimeSeriesPanel
from .spectral import AcvSet
from .var import VarEstimate

DEFAULT_TRUNCATION = 20
DEFAULT_PERMUTATIONS = 30
RIDGE_SCALE = 1e-8


@dataclass(frozen=True)
class RestrictedFactorModel:
    """Leading eigen-pairs of Gamma_chi(0)."""

    E_chi: np.ndarray
    M_chi: np.ndarray
    r: int

    def __post_init__(self):
        if self.r < 1 or self.E_chi.shape[1] != self.r:
            raise ValueError("need r >= 1 eigenvectors")
        gram = self.E_chi.T @ self.E_chi
        if np.abs(gram - np.eye(self.r)).max() > 1e-10:
            raise ValueError("eigenvectors are not orthonormal")
        if np.any(self.M_chi <= 0.0):
            raise ValueError("eigenvalues must be positive")


@dataclass(frozen=True)
class BlockFit:
    indices: np.ndarray
    order: int
    coeffs: np.ndarray  # (b, b*order), horizontal stack of A_1..A_s


@dataclass(frozen=True)
class BlockVarModel:
    """Blockwise VAR fit of the common component's dynamics."""

    blocks: tuple[BlockFit, ...]
    q: int
    p: int
    s_max: int
    n: int
    acv_chi: AcvSet

    @property
    def max_order(self) -> int:
        return max(b.order for b in self.blocks)

    def stacked_lags(self) -> np.ndarray:
        """Block-diagonal transition matrices, shape (max_order, p, p)."""
        s = self.max_order
        out = np.zeros((s, self.p, self.p))
        for blk in self.blocks:
            b = blk.indices.size
            for ell in range(blk.order):
                out[ell][np.ix_(blk.indices, blk.indices)] = blk.coeffs[
                    :, ell * b : (ell + 1) * b
                ]
        return out


@dataclass(frozen=True)
class ForecastResult:
    """Forecasts for horizons 1..a plus the in-sample common component."""

    chi_fc: np.ndarray
    xi_fc: np.ndarray
    x_fc: np.ndarray
    insample_chi: np.ndarray
    method: str

    @property
    def horizons(self) -> int:
        return self.chi_fc.shape[0]


def _fix_sign(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0.0:
            out[:, j] = -out[:, j]
    return out


def restricted_factor_model(gamma_chi0: np.ndarray, r: int) -> RestrictedFactorModel:
    vals, vecs = np.linalg.eigh(gamma_chi0)
    order = np.argsort(vals)[::-1][:r]
    top_vals = vals[order]
    if top_vals[-1] <= 0.0:
        raise ValueError(
            f"eigenvalue {r} of Gamma_chi(0) is {top_vals[-1]:.3e}; "
            "use a smaller r"
        )
    top_vecs = _fix_sign(vecs[:, order])
    return RestrictedFactorModel(E_chi=top_vecs, M_chi=top_vals, r=r)


def restricted_common_forecast(
    panel: TimeSeriesPanel,
    acv_chi: AcvSet,
    r: int,
    a: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Static-representation forecast of the common component.

    Horizon h uses chi_{n+h|n} = Gamma_chi(-h) E M^-1 E' X_n; the
    in-sample values are the plain eigen-projection E E' X_t. Horizons
    beyond the stored lag range are unavailable because the inverse
    transform only covers |l| <= m.
    """
    if a < 0:
        raise ValueError("horizon must be nonnegative")
    if a > acv_chi.maxlag:
        raise ValueError(
            f"horizon {a} exceeds available common autocovariance lag "
            f"{acv_chi.maxlag}"
        )
    p, n = panel.p, panel.n
    if r > p:
        raise ValueError(f"r = {r} exceeds p = {p}")
    if r == 0:
        return np.zeros((a, p)), np.zeros((p, n))
    model = restricted_factor_model(acv_chi.lag(0), r)
    E, M = model.E_chi, model.M_chi
    insample = E @ (E.T @ panel.values)
    x_n = panel.values[:, -1]
    core = E @ ((E.T @ x_n) / M)
    fc = np.empty((a, p))
    for h in range(1, a + 1):
        fc[h - 1] = acv_chi.lag(-h) @ core
    return fc, insample


def block_partition(p: int, q: int) -> list[np.ndarray]:
    """Split 1..p into consecutive blocks of size q+1.

    When p is not a multiple of q+1 the final block absorbs the
    remainder, so all blocks have size q+1 except the last with
    q+1 <= size < 2(q+1).
    """
    b = q + 1
    if p < b:
        raise ValueError(f"need at least q+1 = {b} series, have {p}")
    nfull = p // b
    sizes = [b] * (nfull - 1) if p % b else [b] * nfull
    if p % b:
        sizes.append(b + p - nfull * b)
    bounds = np.cumsum([0] + sizes)
    return [np.arange(bounds[i], bounds[i + 1]) for i in range(len(sizes))]


def _yw_solve(acv_block: np.ndarray, s: int, jitter: bool = False):
    """Solve the order-s Yule-Walker system for one block.

    acv_block stacks Gamma(l) for l = -L..L; returns (A, Sigma_res) with
    A the (b, b*s) coefficient stack.
    """
    L = (acv_block.shape[0] - 1) // 2
    b = acv_block.shape[1]

    def gam(ell):
        return acv_block[ell + L]

    C = np.empty((s * b, s * b))
    for i in range(s):
        for j in range(s):
            C[i * b : (i + 1) * b, j * b : (j + 1) * b] = gam(i - j)
    B = np.hstack([gam(ell).T for ell in range(1, s + 1)])
    if jitter:
        C = C + (RIDGE_SCALE * np.trace(C) / C.shape[0]) * np.eye(C.shape[0])
    A_T = np.linalg.solve(C, B.T)
    A = A_T.T
    sigma_res = gam(0) - A @ B.T
    return A, sigma_res


def fit_block_var(
    acv_chi: AcvSet,
    q: int,
    s_max: int,
    n: int,
) -> BlockVarModel:
    """Fit a VAR to each block of q+1 series, order chosen by Schwarz.

    Candidate orders s = 1..s_max are scored with
    log det(Sigma_res(s)) + s * b^2 * log(n) / n; non-positive-definite
    residual covariances are skipped. A singular Yule-Walker matrix gets
    one ridge retry before failing.
    """
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    if acv_chi.maxlag < s_max:
        raise ValueError(
            f"need common autocovariances up to lag {s_max}, "
            f"have {acv_chi.maxlag}"
        )
    p = acv_chi.p
    blocks = []
    for h, idx in enumerate(block_partition(p, q)):
        sub = acv_chi.gammas[:, idx[:, None], idx[None, :]]
        b = idx.size
        best = None
        for s in range(1, s_max + 1):
            try:
                A, sigma_res = _yw_solve(sub, s)
            except np.linalg.LinAlgError:
                try:
                    A, sigma_res = _yw_solve(sub, s, jitter=True)
                except np.linalg.LinAlgError:
                    raise np.linalg.LinAlgError(
                        f"block {h}: Yule-Walker matrix singular at order {s} "
                        "even after ridge jitter"
                    ) from None
            sign, logdet = np.linalg.slogdet(sigma_res)
            if sign <= 0:
                continue
            score = logdet + s * b * b * np.log(n) / n
            if best is None or score < best[0]:
                best = (score, s, A)
        if best is None:
            raise ValueError(
                f"block {h}: no VAR order in 1..{s_max} gives a positive "
                "definite residual covariance"
            )
        blocks.append(BlockFit(indices=idx, order=best[1], coeffs=best[2]))
    return BlockVarModel(
        blocks=tuple(blocks), q=q, p=p, s_max=s_max, n=n, acv_chi=acv_chi
    )


def _filter_and_expand(
    x: np.ndarray,
    model: BlockVarModel,
    q: int,
    a: int,
    K: int,
):
    """Forecast and in-sample common component for one series ordering."""
    p, n = x.shape
    lags = model.stacked_lags()
    s = lags.shape[0]
    if n <= s:
        raise ValueError(f"sample length {n} must exceed block order {s}")
    # Z_t = X_t - sum_l A_l X_{t-l}, available for t = s+1..n.
    z = x[:, s:].copy()
    for ell in range(1, s + 1):
        z -= lags[ell - 1] @ x[:, s - ell : n - ell]
    gamma_z = z @ z.T / z.shape[1]
    vals, vecs = np.linalg.eigh(gamma_z)
    order = np.argsort(vals)[::-1][:q]
    top_vals = vals[order]
    if top_vals[-1] <= 0.0:
        raise ValueError("filtered covariance is rank deficient below q")
    top_vecs = _fix_sign(vecs[:, order])
    root = np.sqrt(top_vals)
    R = top_vecs * root
    u = (top_vecs.T @ z) / root[:, None]  # (q, n - s), shocks for t = s+1..n
    # MA coefficients of the inverted filter: B_0 = R and
    # B_l = sum_k A_k B_{l-k} for l >= 1.
    B = np.zeros((K + a + 1, p, q))
    B[0] = R
    for ell in range(1, K + a + 1):
        for k in range(1, min(ell, s) + 1):
            B[ell] += lags[k - 1] @ B[ell - k]
    n_u = u.shape[1]
    K_eff = min(K, n_u - 1)
    fc = np.zeros((a, p))
    for h in range(1, a + 1):
        for ell in range(K_eff + 1):
            fc[h - 1] += B[ell + h] @ u[:, n_u - 1 - ell]
    insample = np.zeros((p, n))
    for t in range(s, n):
        t_u = t - s  # position of time t in the shock array
        for ell in range(min(K_eff, t_u) + 1):
            insample[:, t] += B[ell] @ u[:, t_u - ell]
    return fc, insample


def unrestricted_common_forecast(
    panel: TimeSeriesPanel,
    block_model: BlockVarModel,
    q: int,
    a: int,
    K: int = DEFAULT_TRUNCATION,
    n_perm: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Permutation-averaged blockwise forecast of the common component.

    The block partition is arbitrary, so the whole fit-filter-expand
    pipeline runs once per cross-sectional permutation (identity first,
    the rest drawn from the seeded generator) and the un-permuted
    results are averaged in fixed order.
    """
    if a < 0:
        raise ValueError("horizon must be nonnegative")
    if K < a:
        raise ValueError(f"truncation K = {K} must be at least horizon {a}")
    if n_perm < 1:
        raise ValueError("need at least one permutation")
    p, n = panel.p, panel.n
    if q == 0:
        return np.zeros((a, p)), np.zeros((p, n))
    if p < q + 1:
        raise ValueError(f"need at least q+1 = {q + 1} series, have {p}")
    rng = np.random.default_rng(seed)
    perms = [np.arange(p)]
    for _ in range(n_perm - 1):
        perms.append(rng.permutation(p))
    fcs = np.empty((n_perm, a, p))
    ins = np.empty((n_perm, p, n))
    for w, perm in enumerate(perms):
        x_perm = panel.values[perm]
        if w == 0:
            model = block_model
        else:
            acv_perm = AcvSet(
                component="chi",
                gammas=block_model.acv_chi.gammas[:, perm[:, None], perm[None, :]],
                maxlag=block_model.acv_chi.maxlag,
            )
            model = fit_block_var(
                acv_perm, q, block_model.s_max, block_model.n
            )
        fc_perm, in_perm = _filter_and_expand(x_perm, model, q, a, K)
        fcs[w][:, perm] = fc_perm
        ins[w][perm] = in_perm
    return np.sum(fcs, axis=0) / n_perm, np.sum(ins, axis=0) / n_perm


def idio_forecast(
    est: VarEstimate,
    xi_insample: np.ndarray,
    a: int,
) -> np.ndarray:
    """Recursive best-linear-predictor forecasts of the idiosyncratic VAR.

    Horizon h combines already-forecast values for lags below h with
    observed in-sample values for the rest:
    xi_{n+h|n} = sum_{l<h} A_l xi_{n+h-l|n} + sum_{l>=h} A_l xi_{n+h-l}.
    """
    if a < 1:
        raise ValueError("horizon must be >= 1; in-sample has its own path")
    p, n = xi_insample.shape
    if est.p != p:
        raise ValueError("dimension mismatch between estimate and panel")
    if n < est.d:
        raise ValueError(f"need at least d = {est.d} in-sample values")
    lags = est.lag_matrices()
    fc = np.zeros((a, p))
    for h in range(1, a + 1):
        acc = np.zeros(p)
        for ell in range(1, est.d + 1):
            if ell <= h - 1:
                acc += lags[ell - 1] @ fc[h - ell - 1]
            else:
                acc += lags[ell - 1] @ xi_insample[:, n + h - ell - 1]
        fc[h - 1] = acc
    return fc


def assemble_forecast(
    chi_fc: np.ndarray,
    xi_fc: np.ndarray,
    insample_chi: np.ndarray,
    method: str,
) -> ForecastResult:
    return ForecastResult(
        chi_fc=chi_fc,
        xi_fc=xi_fc,
        x_fc=chi_fc + xi_fc,
        insample_chi=insample_chi,
        method=method,
    )
