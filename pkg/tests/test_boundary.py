import numpy as np
import pytest
import scipy.linalg as sla
from numpy.testing import assert_allclose

from dtnlab.boundary import bd_space, d_dot, g_dot, phi_pairing, project_bd
from dtnlab.linalg import observed_order, to_dense
from dtnlab.pairs import build_interval_pair, build_rectangle_pair


@pytest.fixture(scope="module")
def p2():
    return build_interval_pair(2)


def test_bd_dimensions(p2):
    assert bd_space(p2, "G").dim == 2
    assert bd_space(p2, "D").dim == 2
    prect = build_rectangle_pair(2, 2)
    assert bd_space(prect, "G").dim == prect.b0
    assert bd_space(prect, "D").dim == prect.b1


def test_bd_graph_orthogonality_oracle(p2):
    # every basis vector satisfies (u,v)_H0 + (Gu,Gv)_H1 = 0 for interior v
    bdg = bd_space(p2, "G")
    for k in range(bdg.dim):
        u = bdg.basis[:, k]
        for idx in p2.interior0:
            v = np.eye(p2.h0.dim)[:, idx]
            val = p2.h0.inner(u, v) + p2.h1.inner(p2.G @ u, p2.G @ v)
            assert abs(val) <= 1e-12


def test_relaxed_kernel_identity(p2):
    # interior components of (I - DG)u vanish for u in BD(G)
    bdg = bd_space(p2, "G")
    for k in range(bdg.dim):
        u = bdg.basis[:, k]
        r = u - p2.D @ (p2.G @ u)
        assert np.max(np.abs(r[p2.interior0])) <= 1e-12


def test_decomposition_dims_add(p2):
    assert bd_space(p2, "G").dim + len(p2.interior0) == p2.h0.dim
    assert bd_space(p2, "D").dim + p2.interior1.shape[1] == p2.h1.dim


def test_project_bd_examples(p2):
    e0 = p2.interior_basis0().toarray()
    x_int = e0 @ np.array([2.0, -1.0])
    assert np.max(np.abs(project_bd(p2, "G", x_int))) <= 1e-12
    bdg = bd_space(p2, "G")
    u = bdg.basis[:, 0]
    assert_allclose(project_bd(p2, "G", u), u, atol=1e-12)


def test_project_bd_against_normal_equations_oracle(p2):
    # pi x = x - E0 c with (E0^H Wg E0) c = E0^H Wg x (least-squares oracle)
    wg = to_dense(p2.graph_gram("G"))
    e0 = p2.interior_basis0().toarray()
    x = np.eye(p2.h0.dim)[:, 0]  # left boundary node
    c = sla.solve(e0.conj().T @ wg @ e0, e0.conj().T @ wg @ x)
    oracle = x - e0 @ c
    assert_allclose(project_bd(p2, "G", x), oracle, atol=1e-12)


def test_projection_complement_is_interior(p2):
    rng = np.random.default_rng(5)
    x = rng.standard_normal(p2.h0.dim)
    r = x - project_bd(p2, "G", x)
    assert np.max(np.abs(p2.trace0 @ r)) <= 1e-11


def test_g_dot_zero(p2):
    assert np.max(np.abs(g_dot(p2, np.zeros(p2.h0.dim)))) == 0.0


def test_g_dot_image_and_unitarity_decay():
    defects, units, hs = [], [], []
    for n in (16, 32, 64, 128):
        p = build_interval_pair(n)
        bdg = bd_space(p, "G")
        worst = 0.0
        for k in range(bdg.dim):
            _, d = g_dot(p, bdg.basis[:, k], return_defect=True)
            worst = max(worst, d)
        defects.append(worst)
        comp = np.column_stack(
            [bdg.coords(d_dot(p, g_dot(p, bdg.basis[:, k]))) for k in range(bdg.dim)]
        )
        units.append(np.linalg.norm(comp - np.eye(bdg.dim), 2))
        hs.append(p.meshwidth)
    assert observed_order(hs, defects) >= 1.0
    assert observed_order(hs, units) >= 1.0


def test_phi_zero_and_interior_annihilation(p2):
    bdg = bd_space(p2, "G")
    assert phi_pairing(p2, np.zeros(p2.h1.dim), bdg.basis[:, 0]) == 0.0
    # boundary form vanishes on interior vectors exactly
    e0 = p2.interior_basis0().toarray()
    u_int = e0 @ np.array([1.0, 2.0])
    rng = np.random.default_rng(0)
    q = rng.standard_normal(p2.h1.dim)
    assert phi_pairing(p2, q, u_int) == 0.0


def test_phi_matches_defining_formula(p2):
    # phi(q)(u) = (Dq, u)_H0 + (q, Gu)_H1
    rng = np.random.default_rng(1)
    q = rng.standard_normal(p2.h1.dim)
    u = rng.standard_normal(p2.h0.dim)
    direct = p2.h0.inner(p2.D @ q, u) + p2.h1.inner(q, p2.G @ u)
    assert abs(phi_pairing(p2, q, u) - direct) <= 1e-12


def test_phi_vs_gdot_pairing_identity_decay():
    # |phi(q)(u) - (q, g_dot u)_BD(D)| decays with order >= 1 in h
    gaps, hs = [], []
    for n in (16, 32, 64, 128):
        p = build_interval_pair(n)
        bdg, bdd = bd_space(p, "G"), bd_space(p, "D")
        worst = 0.0
        for i in range(bdd.dim):
            q = bdd.basis[:, i]
            for j in range(bdg.dim):
                u = bdg.basis[:, j]
                lhs = phi_pairing(p, q, u)
                rhs = bdd.inner(g_dot(p, u), q)
                worst = max(worst, abs(lhs - rhs))
        gaps.append(worst)
        hs.append(p.meshwidth)
    assert observed_order(hs, gaps) >= 1.0


def test_strict_kernel_identity_defect_decay():
    defects, hs = [], []
    for n in (16, 32, 64, 128):
        p = build_interval_pair(n)
        bdg = bd_space(p, "G")
        worst = 0.0
        for k in range(bdg.dim):
            u = bdg.basis[:, k]
            r = u - p.D @ (p.G @ u)
            worst = max(worst, p.h0.norm(r) / p.h0.norm(u))
        defects.append(worst)
        hs.append(p.meshwidth)
    assert observed_order(hs, defects) >= 1.0
    assert defects[-1] <= 2e-2
