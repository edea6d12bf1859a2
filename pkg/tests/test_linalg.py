import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from dtnlab.errors import ContractViolationError, DegenerateSubspaceError
from dtnlab.linalg import (
    DEFAULT_TOL,
    Subspace,
    TolerancePolicy,
    WeightedSpace,
    euclidean_space,
    numeric_kernel,
    observed_order,
    orthogonal_projection,
    orthonormalize,
    principal_angles,
    weighted_adjoint,
)
from dtnlab.pairs import build_interval_pair


def test_tolerance_policy_rejects_nonpositive():
    with pytest.raises(ContractViolationError):
        TolerancePolicy(rank_rel_tol=0.0)
    with pytest.raises(ContractViolationError):
        TolerancePolicy(asymptotic_order_window=0)


def test_weighted_space_rejects_indefinite_gram():
    with pytest.raises(ContractViolationError):
        WeightedSpace(2, np.diag([1.0, -1.0]))
    with pytest.raises(ContractViolationError):
        WeightedSpace(2, np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_weighted_adjoint_identity_and_euclidean():
    e2 = euclidean_space(2)
    assert_allclose(weighted_adjoint(np.eye(2), e2, e2), np.eye(2))
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert_allclose(weighted_adjoint(a, e2, e2), a.conj().T)


def test_weighted_adjoint_pairing_oracle_on_interval_gradient():
    # dense pairing oracle: (G x, y)_H1 = (x, G^* y)_H0 over all basis pairs
    pair = build_interval_pair(2)
    gstar = weighted_adjoint(pair.G.toarray(), pair.h0, pair.h1)
    for i in range(pair.h0.dim):
        x = np.eye(pair.h0.dim)[:, i]
        for j in range(pair.h1.dim):
            y = np.eye(pair.h1.dim)[:, j]
            lhs = pair.h1.inner(pair.G @ x, y)
            rhs = pair.h0.inner(x, gstar @ y)
            assert abs(lhs - rhs) <= 1e-13


def test_weighted_adjoint_shape_contract():
    e2, e3 = euclidean_space(2), euclidean_space(3)
    with pytest.raises(ContractViolationError):
        weighted_adjoint(np.eye(2), e3, e2)


def test_numeric_kernel_examples():
    assert numeric_kernel(np.eye(3)).dim == 0
    assert numeric_kernel(np.zeros((2, 2))).dim == 2
    ker = numeric_kernel(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert ker.dim == 1
    expected = np.array([1.0, -1.0]) / np.sqrt(2.0)
    ang = principal_angles(ker, Subspace(None, expected.reshape(-1, 1)))
    assert ang[0] <= 1e-12


def test_numeric_kernel_complements_adjoint_range():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((4, 6))
    ker = numeric_kernel(a)
    assert ker.dim + np.linalg.matrix_rank(a) == a.shape[1]


def _gram_schmidt(vectors, gram):
    """Dense modified Gram-Schmidt oracle in a weighted inner product."""
    out = []
    for v in vectors.T:
        w = v.astype(complex)
        for q in out:
            w = w - q * np.vdot(q, gram @ w)
        nrm = np.sqrt(np.vdot(w, gram @ w).real)
        out.append(w / nrm)
    return np.column_stack(out)


def test_orthogonal_projection_examples():
    e2 = euclidean_space(2)
    whole = Subspace(e2, np.eye(2))
    assert_allclose(orthogonal_projection(whole), np.eye(2), atol=1e-13)
    line = Subspace(e2, np.array([[1.0], [0.0]]))
    assert_allclose(orthogonal_projection(line), np.diag([1.0, 0.0]), atol=1e-13)


def test_projection_against_gram_schmidt_oracle_on_bd_space():
    pair = build_interval_pair(2)
    wg = (pair.h0.gram + pair.G.conj().T @ (pair.h1.gram @ pair.G)).toarray()
    # complement of the interior nodes in the graph inner product
    e0 = pair.interior_basis0().toarray()
    import scipy.linalg as sla

    raw = sla.null_space(e0.conj().T @ wg)
    q = _gram_schmidt(raw, wg)
    p_oracle = q @ (q.conj().T @ wg)
    p = orthogonal_projection(Subspace(None, raw), wg)
    assert_allclose(p, p_oracle, atol=1e-11)
    assert np.max(np.abs(p @ p - p)) <= DEFAULT_TOL.identity_tol
    herm = wg @ p
    assert np.max(np.abs(herm - herm.conj().T)) <= 1e-11


def test_projection_rejects_rank_deficient_basis():
    with pytest.raises(DegenerateSubspaceError):
        Subspace(None, np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_principal_angles_examples():
    e2 = euclidean_space(2)
    u = Subspace(e2, np.array([[1.0], [0.0]]))
    v = Subspace(e2, np.array([[1.0], [1.0]]) / np.sqrt(2.0))
    w = Subspace(e2, np.array([[0.0], [1.0]]))
    assert principal_angles(u, u)[0] <= 1e-13
    assert_allclose(principal_angles(u, w)[0], np.pi / 2, atol=1e-12)
    assert_allclose(principal_angles(u, v)[0], np.pi / 4, atol=1e-12)


def test_principal_angles_resolve_tiny_angles():
    eps = 1e-9
    u = Subspace(None, np.array([[1.0], [0.0]]))
    v = Subspace(None, np.array([[np.cos(eps)], [np.sin(eps)]]))
    ang = principal_angles(u, v)[0]
    assert abs(ang - eps) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 1000))
def test_adjoint_pairing_property(dim, seed):
    rng = np.random.default_rng(seed)
    w0 = rng.standard_normal((dim, dim))
    w0 = w0 @ w0.T + dim * np.eye(dim)
    w1 = rng.standard_normal((dim + 1, dim + 1))
    w1 = w1 @ w1.T + dim * np.eye(dim + 1)
    s0, s1 = WeightedSpace(dim, w0), WeightedSpace(dim + 1, w1)
    a = rng.standard_normal((dim + 1, dim)) + 1j * rng.standard_normal((dim + 1, dim))
    astar = weighted_adjoint(a, s0, s1)
    x = rng.standard_normal(dim)
    y = rng.standard_normal(dim + 1)
    lhs = s1.inner(a @ x, y)
    rhs = s0.inner(x, astar @ y)
    scale = np.linalg.norm(a) * np.linalg.norm(x) * np.linalg.norm(y)
    assert abs(lhs - rhs) <= 1e-9 * max(scale, 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(1, 4), st.integers(0, 1000))
def test_projection_property(dim, k, seed):
    rng = np.random.default_rng(seed)
    k = min(k, dim)
    w = rng.standard_normal((dim, dim))
    w = w @ w.T + dim * np.eye(dim)
    basis = rng.standard_normal((dim, k))
    p = orthogonal_projection(Subspace(None, basis), w)
    assert np.max(np.abs(p @ p - p)) <= 1e-9
    herm = w @ p
    assert np.max(np.abs(herm - herm.conj().T)) <= 1e-9


def test_orthonormalize_orientation_deterministic():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((5, 2))
    q1 = orthonormalize(b, None)
    q2 = orthonormalize(-b, None)
    # first clearly nonzero entry is real positive regardless of input sign
    for q in (q1, q2):
        for j in range(q.shape[1]):
            lead = q[np.argmax(np.abs(q[:, j]) > 1e-12 * np.max(np.abs(q[:, j]))), j]
            assert lead.real > 0


def test_observed_order_recovers_slope():
    hs = [0.1, 0.05, 0.025, 0.0125]
    vals = [2.0 * h**2 for h in hs]
    assert abs(observed_order(hs, vals) - 2.0) <= 1e-10
