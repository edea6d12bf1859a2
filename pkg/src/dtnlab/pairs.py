"""Discrete dual operator pairs (G, D) with exact boundary-form factorization.

A :class:`DualPair` is the finite-dimensional stand-in for a closed densely
defined operator pair with ``-G^* contained in D``.  The defining axioms are

* (A0) the Grams of ``H0`` and ``H1`` are Hermitian positive definite,
* (A1) ``ker(trace0) = interior0`` and ``ker(trace1) = interior1``,
* (A2) the boundary-form factorization
  ``G^H M1 + M0 D = trace0^H beta trace1`` holds entrywise,

so that ``(G u, q)_{H1} = -(u, D q)_{H0}`` exactly whenever ``u`` has zero
Dirichlet trace or ``q`` has zero flux trace.  The interior index sets play
the role of the minimal domains ``dom(G_int)`` and ``dom(D_int)``.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import ConfigError, ContractViolationError
from .expressions import parse_expression
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    TolerancePolicy,
    WeightedSpace,
    numeric_kernel,
    operator_norm_estimate,
    principal_angles,
    to_dense,
)

__all__ = [
    "DualPair",
    "CoefficientOp",
    "PairReport",
    "build_interval_pair",
    "build_rectangle_pair",
    "validate_pair",
    "coefficient_from_spec",
    "identity_coefficient",
]

_ANGLE_DENSE_LIMIT = 2000


@dataclass(frozen=True)
class DualPair:
    """A validated discrete dual pair.

    ``interior0`` / ``interior1`` are the index arrays of the minimal-domain
    degrees of freedom on the ``H0`` side and a sparse basis of
    ``ker(trace1)`` on the ``H1`` side.  ``dofs0`` / ``dofs1`` carry the
    physical coordinates of the degrees of freedom (used for coefficient
    sampling); ``meshwidth`` is the refinement parameter h.
    """

    h0: WeightedSpace
    h1: WeightedSpace
    G: object  # h1.dim x h0.dim
    D: object  # h0.dim x h1.dim
    interior0: np.ndarray  # indices into H0 dofs
    interior1: object  # sparse basis of ker(trace1), h1.dim x k1
    trace0: object  # B0 x h0.dim
    trace1: object  # B1 x h1.dim
    beta: np.ndarray  # B0 x B1
    meshwidth: float
    dofs0: np.ndarray = None
    dofs1: np.ndarray = None
    geometry: dict = field(default_factory=dict, compare=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def b0(self) -> int:
        return self.trace0.shape[0]

    @property
    def b1(self) -> int:
        return self.trace1.shape[0]

    def interior_basis0(self):
        """Sparse selection matrix of the interior H0 dofs (n0 x k0)."""
        if "E0" not in self._cache:
            n0 = self.h0.dim
            k0 = len(self.interior0)
            e0 = sp.csc_matrix(
                (np.ones(k0), (np.asarray(self.interior0), np.arange(k0))), shape=(n0, k0)
            )
            self._cache["E0"] = e0
        return self._cache["E0"]

    def interior_subspace0(self) -> Subspace:
        return Subspace(None, self.interior_basis0())

    def interior_subspace1(self) -> Subspace:
        return Subspace(None, self.interior1)

    def boundary_form(self):
        """The factorized boundary-form matrix ``trace0^H beta trace1``."""
        if "S" not in self._cache:
            self._cache["S"] = sp.csr_matrix(
                self.trace0.conj().T @ sp.csr_matrix(self.beta) @ self.trace1
            )
        return self._cache["S"]

    def graph_gram(self, side: str):
        """Explicit graph-inner-product Gram: M0 + G^H M1 G (or the D analog)."""
        key = f"Wg{side}"
        if key not in self._cache:
            if side == "G":
                w = self.h0.gram + self.G.conj().T @ (self.h1.gram @ self.G)
            elif side == "D":
                w = self.h1.gram + self.D.conj().T @ (self.h0.gram @ self.D)
            else:
                raise ContractViolationError("side must be 'G' or 'D'")
            self._cache[key] = sp.csr_matrix(w) if sp.issparse(w) else w
        return self._cache[key]


@dataclass(frozen=True)
class CoefficientOp:
    """A bounded operator coefficient (a on H1, m on H0) with metadata.

    ``coercivity_mu`` is the smallest eigenvalue of the Hermitian part with
    respect to the space inner product when positive, ``None`` otherwise
    (non-coercive).  ``norm_bound`` dominates the operator norm.
    """

    space: WeightedSpace
    matrix: object
    coercivity_mu: float | None
    norm_bound: float

    def __post_init__(self):
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise ContractViolationError("coefficient matrix does not match its space")

    @property
    def is_coercive(self) -> bool:
        return self.coercivity_mu is not None

    @property
    def is_diagonal(self) -> bool:
        m = self.matrix
        if sp.issparse(m):
            coo = m.tocoo()
            return bool(np.all(coo.row == coo.col))
        return bool(np.count_nonzero(to_dense(m) - np.diag(np.diagonal(to_dense(m)))) == 0)

    def apply(self, x):
        return self.matrix @ x

    def solve(self, x):
        """Apply the inverse coefficient (diagonal fast path, dense otherwise)."""
        if self.is_diagonal:
            d = self.matrix.diagonal()
            return (np.asarray(x).T / d).T
        return sla.solve(to_dense(self.matrix), np.asarray(x))

    def inverse_matrix(self):
        if self.is_diagonal:
            return sp.diags(1.0 / self.matrix.diagonal())
        return sla.inv(to_dense(self.matrix))

    def hermitian_adjoint(self):
        """The weighted-adjoint coefficient a^* (same space)."""
        w = self.space
        if self.is_diagonal and _diag_gram(w.gram) is not None:
            mat = sp.diags(np.conj(self.matrix.diagonal()))
        else:
            mat = w.solve_gram(to_dense(self.matrix).conj().T @ to_dense(w.gram))
        return CoefficientOp(w, mat, self.coercivity_mu, self.norm_bound)


def _diag_gram(g):
    if sp.issparse(g):
        coo = g.tocoo()
        if np.all(coo.row == coo.col):
            return g.diagonal()
        return None
    g = np.asarray(g)
    if np.count_nonzero(g - np.diag(np.diagonal(g))) == 0:
        return np.diagonal(g)
    return None


def _coefficient_metadata(space: WeightedSpace, matrix):
    """coercivity_mu and norm_bound of a coefficient w.r.t. the space."""
    d = _diag_gram(space.gram)
    if sp.issparse(matrix):
        coo = matrix.tocoo()
        diagonal = bool(np.all(coo.row == coo.col))
    else:
        m = to_dense(matrix)
        diagonal = np.count_nonzero(m - np.diag(np.diagonal(m))) == 0
    if diagonal and d is not None:
        vals = matrix.diagonal() if sp.issparse(matrix) else np.diagonal(to_dense(matrix))
        mu = float(np.min(vals.real))
        norm = float(np.max(np.abs(vals)))
    else:
        w = to_dense(space.gram)
        m = to_dense(matrix)
        herm = 0.5 * (w @ m + (w @ m).conj().T)
        mu = float(sla.eigh(herm, w, eigvals_only=True)[0])
        l = space.cholesky()
        white = l.conj().T @ m @ sla.solve_triangular(l.conj().T, np.eye(len(w)), lower=False)
        norm = float(sla.svd(white, compute_uv=False)[0])
    return (mu if mu > 0 else None), norm


def coefficient_from_matrix(space: WeightedSpace, matrix) -> CoefficientOp:
    """Wrap an explicit (possibly dense, non-diagonal) coefficient matrix."""
    mu, norm = _coefficient_metadata(space, matrix)
    return CoefficientOp(space, matrix, mu, norm)


def coefficient_from_spec(spec, pair: DualPair, which: str) -> CoefficientOp:
    """Build a coefficient operator from a constant, per-dof array, expression
    string, or (on H1) a per-family dict ``{"x": ..., "y": ...}``.

    Expressions are sampled pointwise at the dof coordinates (midpoints for
    the flux space), which keeps multiplication operators diagonal.
    """
    if which == "a":
        space, dofs = pair.h1, pair.dofs1
    elif which == "m":
        space, dofs = pair.h0, pair.dofs0
    else:
        raise ContractViolationError("which must be 'a' or 'm'")

    if isinstance(spec, CoefficientOp):
        if spec.space.dim != space.dim:
            raise ConfigError("coefficient operator does not match the pair")
        return spec

    if isinstance(spec, dict):
        if which != "a" or "families" not in pair.geometry:
            raise ConfigError("per-family coefficients only apply to the 2D flux space")
        values = np.empty(space.dim, dtype=complex)
        for fam, sl in pair.geometry["families"].items():
            if fam not in spec:
                raise ConfigError(f"missing coefficient for face family {fam!r}")
            values[sl] = _sample_values(spec[fam], dofs[sl])
        return _finish_diagonal(space, values)

    values = _sample_values(spec, dofs)
    return _finish_diagonal(space, values)


def _sample_values(spec, dofs):
    n = dofs.shape[0]
    if isinstance(spec, numbers.Number):
        return np.full(n, complex(spec))
    if callable(spec):
        vals = spec(*(dofs[:, k] for k in range(dofs.shape[1])))
        arr = np.asarray(vals, dtype=complex)
        if arr.shape != (n,):
            raise ConfigError("callable coefficient must return one value per dof")
        return arr
    if isinstance(spec, str):
        expr = parse_expression(spec)
        if dofs.shape[1] == 1:
            if "y" in expr.uses():
                raise ConfigError("expression uses 'y' on a 1D geometry")
            return expr.evaluate(dofs[:, 0]).astype(complex)
        return expr.evaluate(dofs[:, 0], dofs[:, 1]).astype(complex)
    arr = np.asarray(spec)
    if arr.shape != (n,):
        raise ConfigError(f"per-dof coefficient has length {arr.shape}, expected ({n},)")
    return arr.astype(complex)


def _finish_diagonal(space, values):
    if not np.all(np.isfinite(values)):
        raise ConfigError("coefficient sample is not finite")
    if np.all(values.imag == 0):
        values = values.real
    mu = float(np.min(np.real(values)))
    norm = float(np.max(np.abs(values)))
    return CoefficientOp(space, sp.diags(values), mu if mu > 0 else None, norm)


def identity_coefficient(space: WeightedSpace) -> CoefficientOp:
    return CoefficientOp(space, sp.identity(space.dim, format="csr"), 1.0, 1.0)


# ---------------------------------------------------------------------------
# 1D interval builder
# ---------------------------------------------------------------------------


def _interval_factors(n: int):
    """1D ingredients: grams, forward difference, traces, pairing."""
    h = 1.0 / (n + 1)
    w0 = h * np.ones(n + 2)
    w0[0] = w0[-1] = h / 2.0  # trapezoid weights
    w1 = h * np.ones(n + 1)
    main = -np.ones(n + 1) / h
    upper = np.ones(n + 1) / h
    G = sp.diags([main, upper], [0, 1], shape=(n + 1, n + 2), format="csr")
    T0 = sp.csr_matrix(
        (np.ones(2), ([0, 1], [0, n + 1])), shape=(2, n + 2)
    )
    # linear extrapolation of the staggered field to the endpoints
    T1 = sp.csr_matrix(
        (np.array([1.5, -0.5, -0.5, 1.5]), ([0, 0, 1, 1], [0, 1, n - 1, n])),
        shape=(2, n + 1),
    )
    beta = np.diag([-1.0, 1.0])
    return h, w0, w1, G, T0, T1, beta


def _interior1_interval(n: int):
    """Sparse basis of ker(trace1) for the interval: q1 = 3 q0, q_{n-1} = 3 q_n."""
    if n == 1:
        return sp.csc_matrix((2, 0))
    if n == 2:
        # both end constraints tie the same middle dof: one kernel vector
        return sp.csc_matrix(np.array([[1.0], [3.0], [1.0]]))
    rows = [0, 1]
    cols = [0, 0]
    vals = [1.0, 3.0]
    k = 1
    for j in range(2, n - 1):
        rows.append(j)
        cols.append(k)
        vals.append(1.0)
        k += 1
    rows += [n - 1, n]
    cols += [k, k]
    vals += [3.0, 1.0]
    k += 1
    return sp.csc_matrix((vals, (rows, cols)), shape=(n + 1, k))


def build_interval_pair(n_interior: int) -> DualPair:
    """Staggered mimetic pair on the unit interval with n interior nodes.

    Nodes ``x_i = i h`` for ``i = 0..n+1`` with ``h = 1/(n+1)``; fluxes live
    at the midpoints.  ``D`` is defined through the boundary-form
    factorization, which makes its interior rows centered differences and
    its boundary rows one-sided differences.
    """
    if not isinstance(n_interior, (int, np.integer)) or n_interior < 1:
        raise ConfigError("n_interior must be an integer >= 1")
    n = int(n_interior)
    h, w0, w1, G, T0, T1, beta = _interval_factors(n)
    m0 = sp.diags(w0)
    m1 = sp.diags(w1)
    S = sp.csr_matrix(T0.conj().T @ sp.csr_matrix(beta) @ T1)
    D = sp.csr_matrix(sp.diags(1.0 / w0) @ (S - G.conj().T @ m1))
    nodes = np.linspace(0.0, 1.0, n + 2).reshape(-1, 1)
    mids = ((np.arange(n + 1) + 0.5) * h).reshape(-1, 1)
    pair = DualPair(
        h0=WeightedSpace(n + 2, m0),
        h1=WeightedSpace(n + 1, m1),
        G=G,
        D=D,
        interior0=np.arange(1, n + 1),
        interior1=_interior1_interval(n),
        trace0=T0,
        trace1=T1,
        beta=beta,
        meshwidth=h,
        dofs0=nodes,
        dofs1=mids,
        geometry={"kind": "interval", "n": n},
    )
    report = validate_pair(pair)
    if not report.passed:
        raise ConfigError(f"interval pair failed validation:\n{report}")
    return pair


# ---------------------------------------------------------------------------
# 2D rectangle builder (tensor products of the 1D factors)
# ---------------------------------------------------------------------------


def build_rectangle_pair(nx: int, ny: int) -> DualPair:
    """Tensor-product pair on the unit square.

    ``H0`` holds the nodes of an ``(nx+2) x (ny+2)`` grid; ``H1`` is the
    direct sum of x-faces and y-faces.  Gradient, divergence and the traces
    are Kronecker compositions of the 1D factors, so the duality axioms hold
    exactly.  The Dirichlet trace enumerates each of the ``2(nx+ny)+4``
    boundary nodes once; the flux trace keeps one row per edge and family,
    so corners carry one x-flux and one y-flux value.
    """
    if min(nx, ny) < 1:
        raise ConfigError("nx and ny must be integers >= 1")
    nx, ny = int(nx), int(ny)
    hx, w0x, w1x, Gx, T0x, T1x, betax = _interval_factors(nx)
    hy, w0y, w1y, Gy, T0y, T1y, betay = _interval_factors(ny)
    Nx, Ny = nx + 2, ny + 2
    Ix = sp.identity(Nx, format="csr")
    Iy = sp.identity(Ny, format="csr")

    n0 = Nx * Ny
    nfx = (nx + 1) * Ny
    nfy = Nx * (ny + 1)
    m0 = sp.kron(sp.diags(w0x), sp.diags(w0y), format="csr")
    m1 = sp.block_diag(
        [sp.kron(sp.diags(w1x), sp.diags(w0y)), sp.kron(sp.diags(w0x), sp.diags(w1y))],
        format="csr",
    )
    G = sp.vstack([sp.kron(Gx, Iy), sp.kron(Ix, Gy)], format="csr")

    # stacked edge traces (corners appear in both stacks)
    T0x_stack = sp.kron(T0x, Iy, format="csr")  # 2*Ny rows: left/right edges
    T0y_stack = sp.kron(Ix, T0y, format="csr")  # 2*Nx rows: bottom/top edges
    T1_stack = sp.block_diag([sp.kron(T1x, Iy), sp.kron(Ix, T1y)], format="csr")
    beta_blk = sp.block_diag(
        [sp.kron(sp.csr_matrix(betax), sp.diags(w0y)), sp.kron(sp.diags(w0x), sp.csr_matrix(betay))],
        format="csr",
    )

    # distinct boundary nodes, one trace row each
    xs = np.linspace(0.0, 1.0, Nx)
    ys = np.linspace(0.0, 1.0, Ny)
    flat = lambda ix, iy: ix * Ny + iy
    boundary = []
    for ix in range(Nx):
        for iy in range(Ny):
            if ix in (0, Nx - 1) or iy in (0, Ny - 1):
                boundary.append(flat(ix, iy))
    boundary = np.array(boundary)
    B0 = len(boundary)
    T0 = sp.csr_matrix((np.ones(B0), (np.arange(B0), boundary)), shape=(B0, n0))

    # fold the stacked pairing onto the distinct-node trace:
    # T0_stacked = C T0 with C a 0/1 selection, so beta = C^H beta_blk.
    stacked = sp.vstack([T0x_stack, T0y_stack], format="csr")
    node_of_row = np.asarray(stacked.argmax(axis=1)).ravel()
    pos = {int(node): i for i, node in enumerate(boundary)}
    rows = np.arange(stacked.shape[0])
    cols = np.array([pos[int(nd)] for nd in node_of_row])
    C = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(stacked.shape[0], B0))
    beta = to_dense(C.conj().T @ beta_blk)

    S = sp.csr_matrix(T0.conj().T @ sp.csr_matrix(beta) @ T1_stack)
    D = sp.csr_matrix(sp.diags(1.0 / m0.diagonal()) @ (S - G.conj().T @ m1))

    interior0 = np.array(
        [flat(ix, iy) for ix in range(1, nx + 1) for iy in range(1, ny + 1)], dtype=int
    )
    interior1 = sp.block_diag(
        [sp.kron(_interior1_interval(nx), Iy), sp.kron(Ix, _interior1_interval(ny))],
        format="csc",
    )

    mx = (np.arange(nx + 1) + 0.5) * hx
    my = (np.arange(ny + 1) + 0.5) * hy
    dofs0 = np.array([(xs[ix], ys[iy]) for ix in range(Nx) for iy in range(Ny)])
    dofs_fx = np.array([(mx[i], ys[j]) for i in range(nx + 1) for j in range(Ny)])
    dofs_fy = np.array([(xs[i], my[j]) for i in range(Nx) for j in range(ny + 1)])
    pair = DualPair(
        h0=WeightedSpace(n0, m0),
        h1=WeightedSpace(nfx + nfy, m1),
        G=G,
        D=D,
        interior0=interior0,
        interior1=interior1,
        trace0=T0,
        trace1=T1_stack,
        beta=beta,
        meshwidth=max(hx, hy),
        dofs0=dofs0,
        dofs1=np.vstack([dofs_fx, dofs_fy]),
        geometry={
            "kind": "rectangle",
            "nx": nx,
            "ny": ny,
            "families": {"x": slice(0, nfx), "y": slice(nfx, nfx + nfy)},
        },
    )
    report = validate_pair(pair)
    if not report.passed:
        raise ConfigError(f"rectangle pair failed validation:\n{report}")
    return pair


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class PairReport:
    """Residuals of the dual-pair axioms; failures never raise here."""

    rows: list  # (check_name, residual, tol, passed)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, _, ok in self.rows)

    def residual(self, name: str) -> float:
        for check, value, _, _ in self.rows:
            if check == name:
                return value
        raise KeyError(name)

    def __str__(self):
        lines = []
        for name, value, tol, ok in self.rows:
            lines.append(f"{'PASS' if ok else 'FAIL'}  {name:<28s} {value:.3e} (tol {tol:.1e})")
        return "\n".join(lines)


def _sparse_max(a) -> float:
    if sp.issparse(a):
        a = a.tocoo()
        return float(np.max(np.abs(a.data))) if a.nnz else 0.0
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def validate_pair(pair: DualPair, tol: TolerancePolicy = DEFAULT_TOL) -> PairReport:
    """Check axioms (A0)-(A2), kernel identifications and trace surjectivity.

    Returns a report; failures are recorded, not raised.
    """
    rows = []

    # (A0) Grams Hermitian positive definite (inherited from WeightedSpace,
    # but re-measured so a doctored pair is caught too)
    for name, space in (("gram0", pair.h0), ("gram1", pair.h1)):
        herm = space._hermitian_defect()
        rows.append((f"{name}_hermitian", herm, 1e-13, herm <= 1e-13))
        me = space.min_eig()
        rows.append((f"{name}_positive", -min(me, 0.0), 0.0, me > 0))

    # (A2) boundary-form factorization, entrywise relative
    GHM1 = pair.G.conj().T @ pair.h1.gram
    M0D = pair.h0.gram @ pair.D
    S = pair.boundary_form()
    resid = _sparse_max((GHM1 + M0D) - S)
    scale = max(_sparse_max(GHM1), _sparse_max(M0D), _sparse_max(S), 1e-300)
    rel = resid / scale
    rows.append(("boundary_form_residual", rel, 1e-12, rel <= 1e-12))

    # (A1) kernels of the traces are the interior subspaces
    e0 = pair.interior_basis0()
    t0e0 = _sparse_max(pair.trace0 @ e0)
    rows.append(("trace0_kills_interior0", t0e0, tol.identity_tol, t0e0 <= tol.identity_tol))
    t1e1 = _sparse_max(pair.trace1 @ pair.interior1)
    scale1 = max(_sparse_max(pair.trace1), 1.0)
    rows.append(
        ("trace1_kills_interior1", t1e1 / scale1, tol.identity_tol, t1e1 / scale1 <= tol.identity_tol)
    )

    s0 = sla.svd(to_dense(pair.trace0), compute_uv=False)
    surj0 = s0[-1] > tol.rank_rel_tol * s0[0]
    rows.append(("trace0_surjective", float(s0[-1] / s0[0]), tol.rank_rel_tol, surj0))
    s1 = sla.svd(to_dense(pair.trace1), compute_uv=False)
    surj1 = s1[-1] > tol.rank_rel_tol * s1[0]
    rows.append(("trace1_surjective", float(s1[-1] / s1[0]), tol.rank_rel_tol, surj1))

    dims0_ok = len(pair.interior0) + pair.b0 == pair.h0.dim
    rows.append(("dim_interior0_plus_b0", float(abs(len(pair.interior0) + pair.b0 - pair.h0.dim)), 0.5, dims0_ok))
    dims1_ok = pair.interior1.shape[1] + pair.b1 == pair.h1.dim
    rows.append(("dim_interior1_plus_b1", float(abs(pair.interior1.shape[1] + pair.b1 - pair.h1.dim)), 0.5, dims1_ok))

    # principal angles between trace kernels and interior subspaces (dense
    # null spaces; for large pairs containment + dimension already certify
    # equality, so the angle check is skipped)
    if pair.h0.dim <= _ANGLE_DENSE_LIMIT and surj0 and dims0_ok:
        ker0 = sla.null_space(to_dense(pair.trace0))
        ang = principal_angles(Subspace(None, ker0), pair.interior_subspace0())
        a0 = float(ang[0]) if ang.size else 0.0
        rows.append(("ker_trace0_vs_interior0", a0, tol.identity_tol, a0 <= tol.identity_tol))
    if pair.h1.dim <= _ANGLE_DENSE_LIMIT and surj1 and dims1_ok and pair.interior1.shape[1] > 0:
        ker1 = sla.null_space(to_dense(pair.trace1))
        ang = principal_angles(Subspace(None, ker1), pair.interior_subspace1())
        a1 = float(ang[0]) if ang.size else 0.0
        rows.append(("ker_trace1_vs_interior1", a1, tol.identity_tol, a1 <= tol.identity_tol))

    # skew pairing on interior vectors (deterministic probe)
    rng = np.random.default_rng(12345)
    k0 = len(pair.interior0)
    if k0:
        u = e0 @ rng.standard_normal(k0)
        q = rng.standard_normal(pair.h1.dim)
        lhs = complex(np.vdot(q, pair.h1.gram @ (pair.G @ u)))
        rhsv = complex(np.vdot(pair.D @ q, pair.h0.gram @ u))
        den = pair.h0.norm(u) * pair.h1.norm(q) + pair.h0.norm(u) * pair.h0.norm(pair.D @ q)
        val = abs(lhs + rhsv) / max(den, 1e-300)
        rows.append(("skew_pairing_interior", val, 1e-12, val <= 1e-12))

    return PairReport(rows)
