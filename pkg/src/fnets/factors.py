"""Selection of the numbers of dynamic (q) and static (r) factors.

Both counts use an eigenvalue-ratio rule: q on eigenvalues of the
spectral density averaged over the Fourier grid, r on eigenvalues of a
lag-0 autocovariance. The ratio rule stands in for information-criterion
procedures that the estimation method leaves unspecified; it is scale
free and has no tuning constants.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .spectral import AcvSet, SpectralEstimate

EIG_FLOOR = 1e-12


@dataclass
class FactorCounts:
    q: int
    r: int
    q_method: str = "eigen_ratio"
    r_method: str = "eigen_ratio"

    def __post_init__(self):
        for method in (self.q_method, self.r_method):
            if method not in ("user", "eigen_ratio"):
                raise ValueError(f"unknown method {method!r}")
        if self.q < 0 or self.r < 0:
            raise ValueError("factor counts must be nonnegative")
        if self.q_method == "eigen_ratio" and self.r_method == "eigen_ratio" \
                and self.q > self.r:
            # A static representation stacks the dynamic factors, so q <= r
            # in the model; estimators are noisy, so only warn.
            warnings.warn(
                f"estimated q = {self.q} exceeds estimated r = {self.r}",
                stacklevel=2,
            )


def default_factor_cap(p: int) -> int:
    return min(10, p // 2)


def _ratio_argmax(mu: np.ndarray, kmax: int) -> int:
    """Index j in 1..kmax maximizing mu_j / mu_{j+1}; first wins ties."""
    mu = np.maximum(mu, EIG_FLOOR)
    ratios = mu[:kmax] / mu[1 : kmax + 1]
    return int(np.argmax(ratios)) + 1


def estimate_q(spec: SpectralEstimate, qmax: int) -> int:
    """Eigenvalue-ratio estimate of the dynamic factor count.

    Averages the leading qmax+1 eigenvalues of the spectral density over
    all 2m+1 frequencies and returns the position of the largest ratio of
    consecutive averaged eigenvalues.
    """
    p = spec.p
    if qmax >= p:
        raise ValueError(f"qmax = {qmax} must be < p = {p}")
    if qmax < 1:
        raise ValueError("qmax must be >= 1")
    nfreq = spec.matrices.shape[0]
    mu = np.empty((nfreq, qmax + 1))
    for k in range(nfreq):
        vals = np.linalg.eigvalsh(spec.matrices[k])[::-1]
        mu[k] = vals[: qmax + 1]
    return _ratio_argmax(mu.mean(axis=0), qmax)


def estimate_r(acv: AcvSet, rmax: int) -> int:
    """Eigenvalue-ratio estimate of the static factor count from Gamma(0)."""
    p = acv.p
    if rmax >= p:
        raise ValueError(f"rmax = {rmax} must be < p = {p}")
    if rmax < 1:
        raise ValueError("rmax must be >= 1")
    vals = np.linalg.eigvalsh(acv.lag(0))[::-1]
    return _ratio_argmax(vals[: rmax + 1], rmax)
