import dataclasses

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from dtnlab.errors import ConfigError
from dtnlab.linalg import observed_order, to_dense
from dtnlab.pairs import (
    build_interval_pair,
    build_rectangle_pair,
    coefficient_from_matrix,
    coefficient_from_spec,
    validate_pair,
)


def test_interval_dimensions_n2():
    p = build_interval_pair(2)
    assert p.h0.dim == 4 and p.h1.dim == 3
    assert len(p.interior0) == 2
    assert p.interior1.shape[1] == 1


def test_interval_rejects_bad_size():
    with pytest.raises(ConfigError):
        build_interval_pair(0)
    with pytest.raises(ConfigError):
        build_rectangle_pair(0, 2)


def test_boundary_form_factorization_exact():
    p = build_interval_pair(2)
    lhs = to_dense(p.G.conj().T @ p.h1.gram) + to_dense(p.h0.gram @ p.D)
    rhs = to_dense(p.boundary_form())
    assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_interior_pairing_oracle():
    # (G u, q)_H1 = -(u, D q)_H0 for the interior vector u=(0,1,-1,0), all q
    p = build_interval_pair(2)
    u = np.array([0.0, 1.0, -1.0, 0.0])
    for k in range(p.h1.dim):
        q = np.eye(p.h1.dim)[:, k]
        lhs = p.h1.inner(p.G @ u, q)
        rhs = p.h0.inner(u, p.D @ q)
        assert abs(lhs + rhs) <= 1e-13


def test_interval_divergence_stencils():
    # interior rows are centered differences, boundary rows one-sided
    p = build_interval_pair(3)
    d = to_dense(p.D)
    h = p.meshwidth
    assert_allclose(d[1, :2] * h, [-1.0, 1.0], atol=1e-13)
    assert_allclose(d[0, :2] * h, [-1.0, 1.0], atol=1e-13)
    assert_allclose(d[-1, -2:] * h, [-1.0, 1.0], atol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 5, 16])
def test_interval_validates(n):
    rep = validate_pair(build_interval_pair(n))
    assert rep.passed, str(rep)
    assert rep.residual("boundary_form_residual") <= 1e-12


def test_rectangle_dimensions_1x1():
    p = build_rectangle_pair(1, 1)
    assert p.h0.dim == 9
    assert len(p.interior0) == 1
    assert p.b0 == 8
    assert np.max(np.abs(p.G @ np.ones(9))) == 0.0


@pytest.mark.parametrize("nx,ny", [(1, 1), (2, 2), (3, 2)])
def test_rectangle_validates(nx, ny):
    rep = validate_pair(build_rectangle_pair(nx, ny))
    assert rep.passed, str(rep)
    assert rep.residual("boundary_form_residual") <= 1e-12


def test_validate_flags_sign_flip():
    p = build_interval_pair(3)
    doctored = dataclasses.replace(p, D=-p.D, _cache={})
    rep = validate_pair(doctored)
    assert not rep.passed
    assert rep.residual("boundary_form_residual") > 1e-6


def test_validate_flags_boundary_node_in_interior():
    p = build_interval_pair(3)
    doctored = dataclasses.replace(
        p, interior0=np.concatenate([[0], p.interior0]), _cache={}
    )
    rep = validate_pair(doctored)
    assert not rep.passed


def test_boundary_form_rank():
    p = build_interval_pair(4)
    s = to_dense(p.boundary_form())
    assert np.linalg.matrix_rank(s, tol=1e-10) == 2
    p2 = build_rectangle_pair(2, 2)
    s2 = to_dense(p2.boundary_form())
    assert np.linalg.matrix_rank(s2, tol=1e-10) == p2.b0


@pytest.mark.parametrize("builder,args", [(build_interval_pair, (48,)), (build_rectangle_pair, (10, 12))])
def test_refinement_consistency_laplacian(builder, args):
    # (D G u) approximates the Laplacian at interior nodes to O(h^2)
    errs, hs = [], []
    for scale in (1, 2, 4):
        sized = tuple(a * scale for a in args)
        p = builder(*sized)
        if p.dofs0.shape[1] == 1:
            x = p.dofs0[:, 0]
            u = np.sin(np.pi * x)
            lap = -np.pi**2 * np.sin(np.pi * x)
        else:
            x, y = p.dofs0[:, 0], p.dofs0[:, 1]
            u = np.sin(np.pi * x) * np.cos(np.pi * y)
            lap = -2 * np.pi**2 * u
        dgu = p.D @ (p.G @ u)
        errs.append(np.max(np.abs((dgu - lap)[p.interior0])))
        hs.append(p.meshwidth)
    assert observed_order(hs, errs) >= 1.8


def test_coefficient_constant_identity():
    p = build_interval_pair(4)
    a = coefficient_from_spec(1.0, p, "a")
    assert a.coercivity_mu == 1.0
    assert a.norm_bound == 1.0
    assert np.max(np.abs(to_dense(a.matrix) - np.eye(p.h1.dim))) == 0.0


def test_coefficient_expression_sampling():
    p = build_interval_pair(16)
    a = coefficient_from_spec("2+sin(2*pi*x)", p, "a")
    vals = a.matrix.diagonal().real
    assert np.all(vals >= 1.0 - 1e-12) and np.all(vals <= 3.0 + 1e-12)
    assert abs(a.coercivity_mu - np.min(vals)) <= 1e-14
    # sampled at the midpoints
    assert_allclose(vals, 2.0 + np.sin(2 * np.pi * p.dofs1[:, 0]), atol=1e-14)


def test_coefficient_negative_flagged_noncoercive():
    p = build_interval_pair(4)
    m = coefficient_from_spec(-5.0, p, "m")
    assert m.coercivity_mu is None
    assert not m.is_coercive
    assert m.norm_bound == 5.0


def test_coefficient_per_dof_and_errors():
    p = build_interval_pair(4)
    vals = np.linspace(1.0, 2.0, p.h0.dim)
    m = coefficient_from_spec(vals, p, "m")
    assert_allclose(m.matrix.diagonal().real, vals)
    with pytest.raises(ConfigError):
        coefficient_from_spec(np.ones(3), p, "m")
    with pytest.raises(ConfigError):
        coefficient_from_spec("1/0*x", p, "m")  # non-finite sample
    with pytest.raises(ConfigError):
        coefficient_from_spec("1+y", p, "m")  # y on a 1D geometry


def test_coefficient_per_family_2d():
    p = build_rectangle_pair(2, 2)
    a = coefficient_from_spec({"x": 2.0, "y": "3+x"}, p, "a")
    fam = p.geometry["families"]
    vals = a.matrix.diagonal().real
    assert np.all(vals[fam["x"]] == 2.0)
    assert_allclose(vals[fam["y"]], 3.0 + p.dofs1[fam["y"], 0])


def test_dense_coefficient_metadata():
    p = build_interval_pair(3)
    mat = np.array(
        [[2.0, 0.5, 0, 0], [0.5, 2.0, 0, 0], [0, 0, 2.0, 0], [0, 0, 0, 2.0]]
    )
    c = coefficient_from_matrix(p.h1, mat)
    assert c.coercivity_mu is not None
    assert c.norm_bound >= 2.0
