"""Autocovariances, Bartlett lag-window spectra and dynamic PCA."""

import numpy as np
import pytest

from fnets.panel import TimeSeriesPanel
from fnets.spectral import (
    AcvSet,
    DynamicPcaResult,
    bartlett_weights,
    common_acv,
    default_bandwidth,
    dynamic_pca,
    factor_adjust,
    idio_acv,
    sample_acv,
    spectral_density,
    windowed_acv,
)


def random_panel(rng, p, n):
    vals = rng.standard_normal((p, n))
    vals -= vals.mean(axis=1, keepdims=True)
    return TimeSeriesPanel(
        values=vals, labels=tuple(f"s{i + 1}" for i in range(p)), centered=True
    )


def acv_reference(x, maxlag):
    """Direct O(p^2 n) evaluation of Gamma(l) = n^-1 sum_t x_{t-l} x_t'."""
    p, n = x.shape
    out = {}
    for ell in range(maxlag + 1):
        g = np.zeros((p, p))
        for t in range(ell, n):
            g += np.outer(x[:, t - ell], x[:, t])
        out[ell] = g / n
        out[-ell] = out[ell].T
    return out


def inverse_ft_reference(spec, ell):
    """(2pi/(2m+1)) sum_k Sigma(omega_k) exp(i l omega_k), direct sum."""
    total = np.zeros((spec.p, spec.p), dtype=complex)
    for k, omega in zip(range(-spec.m, spec.m + 1), spec.frequencies):
        total += spec.at(k) * np.exp(1j * ell * omega)
    return total * 2.0 * np.pi / (2 * spec.m + 1)


def test_sample_acv_zero_panel():
    panel = TimeSeriesPanel(values=np.zeros((3, 8)), labels=("a", "b", "c"))
    acv = sample_acv(panel, 3)
    np.testing.assert_array_equal(acv.gammas, np.zeros((7, 3, 3)))
    assert acv.component == "x"


def test_sample_acv_hand_values():
    # every series is (1, 1): each entry follows the scalar hand sum,
    # Gamma(0) = 1 and Gamma(1) = 1/2 with the divisor held at n
    panel = TimeSeriesPanel(values=np.ones((2, 2)), labels=("a", "b"))
    acv = sample_acv(panel, 1)
    np.testing.assert_allclose(acv.lag(0), np.ones((2, 2)))
    np.testing.assert_allclose(acv.lag(1), np.full((2, 2), 0.5))


def test_sample_acv_matches_direct_sum():
    rng = np.random.default_rng(0)
    panel = random_panel(rng, 3, 50)
    acv = sample_acv(panel, 4)
    ref = acv_reference(panel.values, 4)
    for ell in range(-4, 5):
        np.testing.assert_allclose(acv.lag(ell), ref[ell], atol=1e-12)
    np.testing.assert_array_equal(acv.lag(-2), acv.lag(2).T)


def test_sample_acv_rejects_large_lag():
    panel = TimeSeriesPanel(values=np.zeros((2, 5)), labels=("a", "b"))
    with pytest.raises(ValueError, match="maxlag"):
        sample_acv(panel, 5)


def test_spectral_density_zero_acv():
    acv = AcvSet(component="x", gammas=np.zeros((9, 2, 2)), maxlag=4)
    spec = spectral_density(acv, 4)
    np.testing.assert_array_equal(spec.matrices, np.zeros((9, 2, 2)))


def test_spectral_density_white_noise_is_flat():
    # Gamma(0) = I and no other lags: Sigma(omega) = I/(2pi) everywhere
    m = 6
    gammas = np.zeros((2 * m + 1, 2, 2))
    gammas[m] = np.eye(2)
    spec = spectral_density(AcvSet(component="x", gammas=gammas, maxlag=m), m)
    for k in range(-m, m + 1):
        np.testing.assert_allclose(
            spec.at(k), np.eye(2) / (2.0 * np.pi), atol=1e-12
        )


def test_spectral_density_validates_inputs():
    acv = AcvSet(component="x", gammas=np.zeros((3, 2, 2)), maxlag=1)
    with pytest.raises(ValueError, match="m must be"):
        spectral_density(acv, 0)
    with pytest.raises(ValueError, match="covers lags up to"):
        spectral_density(acv, 2)


def test_inverse_transform_recovers_windowed_acv():
    rng = np.random.default_rng(1)
    panel = random_panel(rng, 4, 40)
    m = 5
    acv = sample_acv(panel, m)
    spec = spectral_density(acv, m)
    for ell in range(-m, m + 1):
        want = bartlett_weights(m, np.array([ell]))[0] * acv.lag(ell)
        got = inverse_ft_reference(spec, ell)
        assert np.abs(got.imag).max() < 1e-10
        np.testing.assert_allclose(got.real, want, atol=1e-10)


def test_spectral_density_psd_and_hermitian():
    rng = np.random.default_rng(2)
    panel = random_panel(rng, 5, 60)
    spec = spectral_density(sample_acv(panel, 7), 7)
    for k in range(-7, 8):
        s = spec.at(k)
        np.testing.assert_allclose(s, s.conj().T, atol=1e-12)
        vals = np.linalg.eigvalsh(s)
        assert vals.min() >= -1e-8 * max(vals.max(), 1e-30)
        np.testing.assert_allclose(
            spec.at(-k), spec.at(k).conj(), atol=1e-12
        )


def test_dynamic_pca_q_zero():
    rng = np.random.default_rng(3)
    spec = spectral_density(sample_acv(random_panel(rng, 3, 30), 3), 3)
    pca = dynamic_pca(spec, 0)
    np.testing.assert_array_equal(pca.sigma_chi, np.zeros_like(pca.sigma_chi))


class SpecStub:
    """Minimal stand-in exposing the SpectralEstimate surface."""

    kernel = "bartlett"

    def __init__(self, matrices, m):
        self.matrices = matrices
        self.m = m

    @property
    def p(self):
        return self.matrices.shape[1]

    @property
    def frequencies(self):
        k = np.arange(-self.m, self.m + 1)
        return 2.0 * np.pi * k / (2 * self.m + 1)

    def at(self, k):
        return self.matrices[k + self.m]


def test_dynamic_pca_rank_one_recovery():
    rng = np.random.default_rng(4)
    m = 2
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v /= np.linalg.norm(v)
    mats = np.repeat(np.outer(v, v.conj())[None], 2 * m + 1, axis=0)
    pca = dynamic_pca(SpecStub(mats, m), 1)
    for k in range(2 * m + 1):
        np.testing.assert_allclose(pca.sigma_chi[k], mats[k], atol=1e-10)


def test_dynamic_pca_residual_trace():
    rng = np.random.default_rng(5)
    panel = random_panel(rng, 4, 50)
    spec = spectral_density(sample_acv(panel, 4), 4)
    pca = dynamic_pca(spec, 3)
    for k in range(-4, 5):
        vals = np.sort(np.linalg.eigvalsh(spec.at(k)))
        resid = np.trace(spec.at(k) - pca.sigma_chi[k + 4]).real
        np.testing.assert_allclose(resid, vals[0], atol=1e-10)


def test_dynamic_pca_ordering_and_norms():
    rng = np.random.default_rng(6)
    spec = spectral_density(sample_acv(random_panel(rng, 5, 40), 4), 4)
    pca = dynamic_pca(spec, 3)
    assert np.all(np.diff(pca.eigenvalues, axis=1) <= 1e-12)
    norms = np.linalg.norm(pca.eigenvectors, axis=1)
    np.testing.assert_allclose(norms, np.ones_like(norms), atol=1e-10)


def test_dynamic_pca_trace_monotone_in_q():
    rng = np.random.default_rng(7)
    spec = spectral_density(sample_acv(random_panel(rng, 4, 40), 3), 3)
    prev = dynamic_pca(spec, 1)
    for q in (2, 3):
        cur = dynamic_pca(spec, q)
        for k in range(2 * 3 + 1):
            gap = np.trace(cur.sigma_chi[k] - prev.sigma_chi[k]).real
            np.testing.assert_allclose(gap, cur.eigenvalues[k, q - 1], atol=1e-10)
            assert gap >= -1e-12
        prev = cur


def test_dynamic_pca_rejects_q_ge_p():
    rng = np.random.default_rng(8)
    spec = spectral_density(sample_acv(random_panel(rng, 3, 30), 3), 3)
    with pytest.raises(ValueError, match="must be < p"):
        dynamic_pca(spec, 3)


def test_common_acv_zero():
    m, p = 3, 2
    pca = DynamicPcaResult(
        q=0,
        eigenvalues=np.zeros((2 * m + 1, 0)),
        eigenvectors=np.zeros((2 * m + 1, p, 0), dtype=complex),
        sigma_chi=np.zeros((2 * m + 1, p, p), dtype=complex),
        m=m,
    )
    acv = common_acv(pca, m)
    np.testing.assert_array_equal(acv.gammas, np.zeros((2 * m + 1, p, p)))
    assert acv.component == "chi"


def test_common_acv_full_retention_recovers_windowed():
    # retaining the whole spectrum inverts back to K(l/m) Gamma_x(l)
    rng = np.random.default_rng(9)
    panel = random_panel(rng, 3, 40)
    m = 4
    acv = sample_acv(panel, m)
    spec = spectral_density(acv, m)
    full = DynamicPcaResult(
        q=3,
        eigenvalues=np.zeros((2 * m + 1, 3)),
        eigenvectors=np.zeros((2 * m + 1, 3, 3), dtype=complex),
        sigma_chi=spec.matrices,
        m=m,
    )
    chi = common_acv(full, m)
    win = windowed_acv(acv, m)
    np.testing.assert_allclose(chi.gammas, win.gammas, atol=1e-10)


def test_common_acv_frequency_constant_spectrum():
    # Sigma(omega_k) = C at every k: lag 0 gives 2pi C, other lags vanish
    m, p = 4, 2
    c = np.array([[2.0, 0.3], [0.3, 1.0]], dtype=complex)
    pca = DynamicPcaResult(
        q=1,
        eigenvalues=np.zeros((2 * m + 1, 1)),
        eigenvectors=np.zeros((2 * m + 1, p, 1), dtype=complex),
        sigma_chi=np.repeat(c[None], 2 * m + 1, axis=0),
        m=m,
    )
    acv = common_acv(pca, m)
    np.testing.assert_allclose(acv.lag(0), 2.0 * np.pi * c.real, atol=1e-10)
    for ell in range(1, m + 1):
        np.testing.assert_allclose(acv.lag(ell), np.zeros((p, p)), atol=1e-10)


def test_common_acv_rejects_lag_beyond_bandwidth():
    m, p = 2, 2
    pca = DynamicPcaResult(
        q=0,
        eigenvalues=np.zeros((2 * m + 1, 0)),
        eigenvectors=np.zeros((2 * m + 1, p, 0), dtype=complex),
        sigma_chi=np.zeros((2 * m + 1, p, p), dtype=complex),
        m=m,
    )
    with pytest.raises(ValueError, match="beyond bandwidth"):
        common_acv(pca, 3)


def test_idio_acv_subtraction_identities():
    rng = np.random.default_rng(10)
    panel = random_panel(rng, 3, 40)
    m = 3
    win, chi, xi, _ = factor_adjust(panel, 1, m)
    np.testing.assert_allclose(xi.gammas + chi.gammas, win.gammas, atol=1e-12)
    zero_chi = AcvSet(
        component="chi", gammas=np.zeros_like(win.gammas), maxlag=m
    )
    np.testing.assert_array_equal(
        idio_acv(win, zero_chi).gammas, win.gammas
    )
    np.testing.assert_array_equal(
        idio_acv(win, win).gammas, np.zeros_like(win.gammas)
    )


def test_idio_acv_rejects_mismatch():
    a = AcvSet(component="x", gammas=np.zeros((5, 2, 2)), maxlag=2)
    b = AcvSet(component="chi", gammas=np.zeros((3, 2, 2)), maxlag=1)
    with pytest.raises(ValueError, match="lag ranges differ"):
        idio_acv(a, b)
    c = AcvSet(component="chi", gammas=np.zeros((5, 3, 3)), maxlag=2)
    with pytest.raises(ValueError, match="dimensions differ"):
        idio_acv(a, c)


def test_default_bandwidth_values():
    assert default_bandwidth(252) == 14
    assert default_bandwidth(100) == 11
    assert default_bandwidth(3) == 2
    with pytest.raises(ValueError):
        default_bandwidth(2)
