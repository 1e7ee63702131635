"""Bartlett lag-window spectral estimation and dynamic PCA.

The spectral density of the panel is estimated on the grid of 2m+1
Fourier frequencies omega_k = 2*pi*k/(2m+1), k = -m..m. Retaining the q
leading eigen-pairs frequency by frequency splits the spectrum into a
common part and an idiosyncratic remainder, whose autocovariances come
back out through the inverse transform on the same grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import TimeSeriesPanel

# Imaginary residue larger than this after an inverse transform signals a
# broken Hermitian symmetry rather than roundoff, so it is a hard error.
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class AcvSet:
    """Autocovariance matrices Gamma(l) for l = -maxlag..maxlag.

    component tags whose autocovariances these are: the observed panel
    ("x"), the common component ("chi") or the idiosyncratic one ("xi").
    gammas has shape (2*maxlag+1, p, p); index l + maxlag holds lag l.
    """

    component: str
    gammas: np.ndarray
    maxlag: int

    def __post_init__(self):
        if self.component not in ("x", "chi", "xi"):
            raise ValueError(f"unknown component {self.component!r}")
        g = np.asarray(self.gammas, dtype=float)
        object.__setattr__(self, "gammas", g)
        if g.shape[0] != 2 * self.maxlag + 1 or g.shape[1] != g.shape[2]:
            raise ValueError("gammas must have shape (2*maxlag+1, p, p)")

    @property
    def p(self) -> int:
        return self.gammas.shape[1]

    def lag(self, ell: int) -> np.ndarray:
        if abs(ell) > self.maxlag:
            raise ValueError(f"lag {ell} outside stored range +-{self.maxlag}")
        return self.gammas[ell + self.maxlag]


@dataclass(frozen=True)
class SpectralEstimate:
    """Smoothed periodogram matrices on the Fourier grid.

    matrices has shape (2m+1, p, p), complex; index k + m holds frequency
    omega_k.
    """

    matrices: np.ndarray
    m: int
    kernel: str = "bartlett"

    @property
    def p(self) -> int:
        return self.matrices.shape[1]

    @property
    def frequencies(self) -> np.ndarray:
        k = np.arange(-self.m, self.m + 1)
        return 2.0 * np.pi * k / (2 * self.m + 1)

    def at(self, k: int) -> np.ndarray:
        if abs(k) > self.m:
            raise ValueError(f"frequency index {k} outside +-{self.m}")
        return self.matrices[k + self.m]


@dataclass(frozen=True)
class DynamicPcaResult:
    """Leading eigen-pairs of the spectral density, per frequency.

    eigenvalues: (2m+1, q) descending per row; eigenvectors: (2m+1, p, q)
    complex unit columns; sigma_chi: (2m+1, p, p) rank-q reconstruction.
    """

    q: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sigma_chi: np.ndarray
    m: int

    @property
    def p(self) -> int:
        return self.sigma_chi.shape[1]

    @property
    def frequencies(self) -> np.ndarray:
        k = np.arange(-self.m, self.m + 1)
        return 2.0 * np.pi * k / (2 * self.m + 1)


def sample_acv(panel: TimeSeriesPanel, maxlag: int) -> AcvSet:
    """Sample autocovariances Gamma_x(l) = n^-1 sum_t X_{t-l} X_t' for l >= 0.

    The divisor is n at every lag; negative lags are the transposes.
    """
    if maxlag >= panel.n:
        raise ValueError(f"maxlag {maxlag} must be < n = {panel.n}")
    x = panel.values
    p, n = x.shape
    gammas = np.empty((2 * maxlag + 1, p, p))
    for ell in range(maxlag + 1):
        g = x[:, : n - ell] @ x[:, ell:].T / n
        gammas[ell + maxlag] = g
        gammas[maxlag - ell] = g.T
    return AcvSet(component="x", gammas=gammas, maxlag=maxlag)


def bartlett_weights(m: int, lags: np.ndarray) -> np.ndarray:
    """Triangular kernel K(l/m) = 1 - |l|/m, zero beyond the bandwidth."""
    u = np.abs(lags) / m
    return np.clip(1.0 - u, 0.0, None)


def windowed_acv(acv: AcvSet, m: int) -> AcvSet:
    """Scale Gamma(l) by the Bartlett weight K(l/m).

    This equals the inverse transform of the smoothed periodogram on the
    2m+1 frequency grid, so subtracting a common-component AcvSet from it
    keeps the Yule-Walker matrix positive semi-definite.
    """
    if acv.maxlag < m:
        raise ValueError(f"acv covers lags up to {acv.maxlag}, need {m}")
    lags = np.arange(-m, m + 1)
    w = bartlett_weights(m, lags)
    gammas = acv.gammas[acv.maxlag - m : acv.maxlag + m + 1] * w[:, None, None]
    return AcvSet(component=acv.component, gammas=gammas, maxlag=m)


def spectral_density(acv: AcvSet, m: int) -> SpectralEstimate:
    """Bartlett lag-window estimator on the 2m+1 Fourier frequencies.

    Sigma(omega) = (2*pi)^-1 sum_{|l| <= m} K(l/m) Gamma(l) exp(-i*l*omega).
    """
    if m < 1:
        raise ValueError("bandwidth m must be >= 1")
    if acv.maxlag < m:
        raise ValueError(f"acv covers lags up to {acv.maxlag}, need {m}")
    lags = np.arange(-m, m + 1)
    weights = bartlett_weights(m, lags)
    freqs = 2.0 * np.pi * np.arange(-m, m + 1) / (2 * m + 1)
    # phase[k, l] = exp(-i * l * omega_k)
    phase = np.exp(-1j * np.outer(freqs, lags))
    gam = acv.gammas[acv.maxlag - m : acv.maxlag + m + 1]
    weighted = gam * weights[:, None, None]
    mats = np.einsum("kl,lij->kij", phase, weighted) / (2.0 * np.pi)
    # The weighted ACV sequence is symmetric under (l -> -l, transpose), so
    # each matrix is Hermitian up to roundoff; enforce it exactly.
    mats = 0.5 * (mats + np.conj(np.transpose(mats, (0, 2, 1))))
    return SpectralEstimate(matrices=mats, m=m, kernel="bartlett")


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate an eigenvector so its largest-modulus entry is real positive."""
    i = int(np.argmax(np.abs(vec)))
    a = vec[i]
    mod = abs(a)
    if mod == 0.0:
        return vec
    return vec * (np.conj(a) / mod)


def dynamic_pca(spec: SpectralEstimate, q: int) -> DynamicPcaResult:
    """Keep the q leading eigen-pairs of the spectral density per frequency."""
    p = spec.p
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q >= p:
        raise ValueError(f"q = {q} must be < p = {p}")
    nfreq = spec.matrices.shape[0]
    eigenvalues = np.empty((nfreq, q))
    eigenvectors = np.empty((nfreq, p, q), dtype=complex)
    sigma_chi = np.zeros((nfreq, p, p), dtype=complex)
    for k in range(nfreq):
        if q == 0:
            continue
        vals, vecs = np.linalg.eigh(spec.matrices[k])
        order = np.argsort(vals)[::-1][:q]
        top_vals = vals[order]
        top_vecs = vecs[:, order]
        for j in range(q):
            top_vecs[:, j] = _fix_phase(top_vecs[:, j])
        eigenvalues[k] = top_vals
        eigenvectors[k] = top_vecs
        sigma_chi[k] = (top_vecs * top_vals) @ np.conj(top_vecs.T)
    return DynamicPcaResult(
        q=q,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        sigma_chi=sigma_chi,
        m=spec.m,
    )


def common_acv(pca: DynamicPcaResult, maxlag: int) -> AcvSet:
    """Autocovariances of the common component by inverse transform.

    Gamma_chi(l) = 2*pi/(2m+1) * sum_k Sigma_chi(omega_k) exp(i*l*omega_k).
    """
    m = pca.m
    if maxlag > m:
        raise ValueError(f"requested lag {maxlag} beyond bandwidth m = {m}")
    lags = np.arange(-maxlag, maxlag + 1)
    phase = np.exp(1j * np.outer(lags, pca.frequencies))
    mats = np.einsum("lk,kij->lij", phase, pca.sigma_chi)
    mats *= 2.0 * np.pi / (2 * m + 1)
    worst = np.abs(mats.imag).max() if mats.size else 0.0
    scale = max(1.0, np.abs(mats.real).max()) if mats.size else 1.0
    if worst > IMAG_TOL * scale:
        raise ValueError(
            f"imaginary residue {worst:.3e} exceeds tolerance; "
            "spectral input violates conjugate symmetry"
        )
    gammas = mats.real.copy()
    # Gamma(-l) must be the transpose of Gamma(l); both came from the same
    # sum so any gap is a symmetry bug upstream.
    for i, ell in enumerate(lags):
        j = np.where(lags == -ell)[0][0]
        if np.abs(gammas[i] - gammas[j].T).max() > IMAG_TOL * scale:
            raise ValueError("inverse transform broke lag symmetry")
    return AcvSet(component="chi", gammas=gammas, maxlag=maxlag)


def idio_acv(acv_x: AcvSet, acv_chi: AcvSet) -> AcvSet:
    """Gamma_xi(l) = Gamma_x(l) - Gamma_chi(l), entrywise over the lag range."""
    if acv_x.maxlag != acv_chi.maxlag:
        raise ValueError(
            f"lag ranges differ: {acv_x.maxlag} vs {acv_chi.maxlag}"
        )
    if acv_x.p != acv_chi.p:
        raise ValueError(f"dimensions differ: {acv_x.p} vs {acv_chi.p}")
    return AcvSet(
        component="xi",
        gammas=acv_x.gammas - acv_chi.gammas,
        maxlag=acv_x.maxlag,
    )


def factor_adjust(
    panel: TimeSeriesPanel, q: int, m: int
) -> tuple[AcvSet, AcvSet, AcvSet, DynamicPcaResult]:
    """Split the panel's autocovariances into common and idiosyncratic parts.

    Returns (windowed x, chi, xi, pca). The observed-panel ACVs carry the
    Bartlett weights so that both terms of the subtraction are inverse
    transforms over the same frequency grid; with q = 0 the idiosyncratic
    set equals the windowed observed one.
    """
    acv_x = sample_acv(panel, m)
    spec = spectral_density(acv_x, m)
    pca = dynamic_pca(spec, q)
    chi = common_acv(pca, m)
    win = windowed_acv(acv_x, m)
    return win, chi, idio_acv(win, chi), pca


def default_bandwidth(n: int) -> int:
    """m = floor(4 * (n / log n)^(1/3)), clamped into [1, n-1]."""
    if n < 3:
        raise ValueError("need n >= 3 to pick a bandwidth")
    m = int(np.floor(4.0 * (n / np.log(n)) ** (1.0 / 3.0)))
    return max(1, min(m, n - 1))
