"""The two l1 programs against independent oracles and their KKT contracts."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fnets.solvers import (
    QuadL1Problem,
    SupConL1Problem,
    soft_threshold,
    solve_quad_l1,
    solve_quad_l1_columns,
    solve_supcon_l1,
)


def quad_objective(G, g, lam, m):
    return float(m @ G @ m - 2.0 * m @ g + lam * np.abs(m).sum())


def prox_grad_reference(G, g, lam, iters=200000, tol=1e-12):
    """Plain ISTA on m'Gm - 2m'g + lam|m|_1; independent of the solver."""
    L = 2.0 * np.linalg.eigvalsh(G).max()
    step = 1.0 / L
    m = np.zeros_like(g)
    for _ in range(iters):
        z = m - step * 2.0 * (G @ m - g)
        new = np.sign(z) * np.maximum(np.abs(z) - step * lam, 0.0)
        if np.abs(new - m).max() <= tol:
            return new
        m = new
    return m


def l1_min_by_vertex_enumeration(A, b, eps):
    """Minimal l1 norm over {|Am - b|_inf <= eps} by enumerating vertices.

    Every orthant restriction of the slab is a bounded polytope whose
    vertices activate k constraints drawn from the 2k slab faces and the
    k coordinate planes; the best l1 value over all such points is the
    LP optimum.
    """
    k = A.shape[0]
    combos = np.array(list(itertools.combinations(range(3 * k), k)))
    # hyperplanes 0..k-1: upper slab face, k..2k-1: lower, 2k..: coordinate
    stacked = np.vstack([A, A, np.eye(k)])
    offsets = np.concatenate([b + eps, b - eps, np.zeros(k)])
    N = stacked[combos]
    c = offsets[combos]
    det = np.linalg.det(N)
    ok = np.abs(det) > 1e-10
    m = np.full((len(combos), k), np.nan)
    if ok.any():
        m[ok] = np.linalg.solve(N[ok], c[ok][:, :, None])[:, :, 0]
    resid = np.abs(m @ A.T - b)
    feas = ok & np.all(resid <= eps + 1e-9, axis=1)
    assert feas.any(), "oracle found no feasible vertex"
    return float(np.abs(m[feas]).sum(axis=1).min())


def random_psd(rng, k, ridge=0.1):
    B = rng.standard_normal((k, k))
    G = B.T @ B / k + ridge * np.eye(k)
    return 0.5 * (G + G.T)


def test_soft_threshold_values():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.4, 1.0) == 0.0


def test_quad_unpenalized_identity_gram():
    rng = np.random.default_rng(0)
    g = rng.standard_normal(6)
    m, report = solve_quad_l1(QuadL1Problem(G=np.eye(6), g=g, lam=0.0))
    np.testing.assert_allclose(m, g, atol=1e-9)
    assert report.converged


def test_quad_identity_gram_soft_threshold():
    m, _ = solve_quad_l1(
        QuadL1Problem(G=np.eye(2), g=np.array([3.0, 0.1]), lam=1.0)
    )
    np.testing.assert_allclose(m, [2.5, 0.0], atol=1e-10)


def test_quad_matches_prox_grad_oracle():
    rng = np.random.default_rng(1)
    for _ in range(30):
        k = int(rng.integers(2, 8))
        G = random_psd(rng, k)
        g = rng.standard_normal(k)
        lam = float(rng.uniform(0.0, 1.0))
        m, report = solve_quad_l1(QuadL1Problem(G=G, g=g, lam=lam), tol=1e-9)
        ref = prox_grad_reference(G, g, lam)
        assert report.converged
        np.testing.assert_allclose(m, ref, atol=1e-6)


def test_quad_rejects_nonpositive_diagonal():
    G = np.diag([1.0, 0.0])
    with pytest.raises(ValueError):
        solve_quad_l1(QuadL1Problem(G=G, g=np.ones(2), lam=0.1))


def test_quad_reports_nonconvergence():
    rng = np.random.default_rng(2)
    G = random_psd(rng, 5, ridge=1e-4)
    g = rng.standard_normal(5)
    m, report = solve_quad_l1(QuadL1Problem(G=G, g=g, lam=0.01), maxiter=2)
    assert not report.converged
    assert np.all(np.isfinite(m))


def test_quad_columns_match_single_solves():
    rng = np.random.default_rng(3)
    k = 6
    G = random_psd(rng, k)
    gs = rng.standard_normal((k, 4))
    lam = 0.2
    M, reports = solve_quad_l1_columns(G, gs, lam, tol=1e-9)
    assert len(reports) == 4
    for j in range(4):
        single, _ = solve_quad_l1(
            QuadL1Problem(G=G, g=gs[:, j], lam=lam), tol=1e-9
        )
        np.testing.assert_allclose(M[:, j], single, atol=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.0, 4.0))
def test_quad_kill_condition(seed, factor):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 7))
    G = random_psd(rng, k)
    g = rng.standard_normal(k)
    lam = factor * 2.0 * np.abs(g).max()
    m, _ = solve_quad_l1(QuadL1Problem(G=G, g=g, lam=lam))
    np.testing.assert_array_equal(m, np.zeros(k))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_quad_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 7))
    G = random_psd(rng, k)
    g = rng.standard_normal(k)
    lam = float(rng.uniform(0.0, 0.5))
    perm = rng.permutation(k)
    base, _ = solve_quad_l1(QuadL1Problem(G=G, g=g, lam=lam), tol=1e-10)
    permuted, _ = solve_quad_l1(
        QuadL1Problem(G=G[np.ix_(perm, perm)], g=g[perm], lam=lam), tol=1e-10
    )
    np.testing.assert_allclose(permuted, base[perm], atol=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_quad_solution_beats_candidates(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 7))
    G = random_psd(rng, k)
    g = rng.standard_normal(k)
    lam = float(rng.uniform(0.0, 1.0))
    m, report = solve_quad_l1(QuadL1Problem(G=G, g=g, lam=lam))
    best = quad_objective(G, g, lam, m)
    assert best <= quad_objective(G, g, lam, np.zeros(k)) + 1e-10
    assert best <= quad_objective(G, g, lam, g) + 1e-10
    assert best == pytest.approx(report.objective, abs=1e-12)


def test_supcon_zero_rhs():
    A = np.array([[1.0, 0.2], [0.0, 1.0]])
    m, report = solve_supcon_l1(SupConL1Problem(A=A, b=np.zeros(2), eps=0.1))
    np.testing.assert_array_equal(m, np.zeros(2))
    assert report.objective == 0.0


def test_supcon_identity_shrinkage():
    m, _ = solve_supcon_l1(
        SupConL1Problem(A=np.eye(2), b=np.array([2.0, 0.0]), eps=0.5)
    )
    np.testing.assert_allclose(m, [1.5, 0.0], atol=1e-9)


def test_supcon_matches_vertex_enumeration():
    rng = np.random.default_rng(4)
    done = 0
    while done < 25:
        k = int(rng.integers(2, 5))
        A = rng.standard_normal((k, k))
        if np.linalg.cond(A) > 1e3:
            continue
        b = rng.standard_normal(k)
        eps = float(rng.uniform(0.05, 0.3))
        m, report = solve_supcon_l1(SupConL1Problem(A=A, b=b, eps=eps))
        want = l1_min_by_vertex_enumeration(A, b, eps)
        np.testing.assert_allclose(np.abs(m).sum(), want, atol=1e-6)
        assert np.abs(A @ m - b).max() <= eps + 1e-7
        assert report.converged
        done += 1


def test_supcon_infeasible_raises():
    # eps = 0 with inconsistent equations has no solution
    A = np.array([[1.0, 0.0], [1.0, 0.0]])
    b = np.array([1.0, -1.0])
    with pytest.raises(ValueError, match="infeasible"):
        solve_supcon_l1(SupConL1Problem(A=A, b=b, eps=0.0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_supcon_no_feasible_point_beats_solution(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    A = rng.standard_normal((k, k)) + 2.0 * np.eye(k)
    b = rng.standard_normal(k)
    eps = float(rng.uniform(0.01, 0.5))
    m, _ = solve_supcon_l1(SupConL1Problem(A=A, b=b, eps=eps))
    exact = np.linalg.solve(A, b)
    assert np.abs(m).sum() <= np.abs(exact).sum() + 1e-8
