"""Dirichlet-to-Neumann operators: boundary-space level and pivot-space level.

Two representations are computed:

* ``dtn_bd``: the definitional map on boundary-data spaces, column by column
  through Dirichlet solves (``u0 -> pi_BD(D) a G u``), cross-checked against
  the first-order block formula.  Both routes produce the same flux, so they
  agree to solver precision on every instance.
* ``dtn_pivot``: the operator on a pivot space H obtained by the form
  method, i.e. the weighted Steklov/Schur complement of the weak-form matrix
  onto the boundary functionals.  This is the exact discrete algebra: its
  inverse, computed independently through the displayed first-order Neumann
  formula with the minimal divergence encoded as ``-G^*``, is the exact
  matrix inverse.

The correspondence between the two levels uses the unitarity of the boundary
gradient, which holds only asymptotically in the discrete model; the defect
is measured by :func:`pivot_bd_correspondence_defect` and decays with order
at least one in the mesh width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .boundary import bd_space, phi_matrix
from .bvp import _CACHE, _factorize, _solve_columns, solve_block, solve_dirichlet, weak_form_matrix
from .errors import ContractViolationError, NumericalFailureError
from .linalg import DEFAULT_TOL, WeightedSpace, to_dense
from .pairs import CoefficientOp, DualPair

__all__ = [
    "PivotSpace",
    "DtnOperator",
    "SectorReport",
    "boundary_functional_pivot",
    "default_pivot",
    "dtn_bd",
    "ntd_bd",
    "dtn_pivot",
    "dtn_pivot_inverse",
    "kappa_adjoint_lift",
    "pivot_embedding",
    "sector_report",
    "sector_constants",
    "pivot_bd_correspondence_defect",
]


@dataclass(frozen=True)
class PivotSpace:
    """Pivot Hilbert space H with the injection kappa from BD(G).

    ``kappa`` maps BD(G) *coordinates* (in the graph-orthonormal basis) to H
    coordinates; it must be injective with full row rank, which in finite
    dimensions forces dim H = dim BD(G).
    """

    space: WeightedSpace
    kappa: np.ndarray

    def __post_init__(self):
        if self.kappa.shape[0] != self.space.dim:
            raise ContractViolationError("kappa does not map into the pivot space")
        s = sla.svd(to_dense(self.kappa), compute_uv=False)
        if s.size == 0 or s[-1] <= DEFAULT_TOL.rank_rel_tol * s[0]:
            raise ContractViolationError("kappa must be injective with full row rank")
        if self.kappa.shape[0] != self.kappa.shape[1]:
            raise ContractViolationError(
                "kappa injective with dense range forces dim H = dim BD(G)"
            )


@dataclass(frozen=True)
class DtnOperator:
    """Assembled Dirichlet-to-Neumann data for one coefficient instance."""

    lambda_bd: np.ndarray  # BD(G) coords -> BD(D) coords
    lambda_h: np.ndarray  # pivot-space matrix
    vertex: float
    half_angle: float
    symmetric: bool
    pivot: PivotSpace
    pair: DualPair
    a: CoefficientOp
    m: CoefficientOp


def boundary_functional_pivot(pair: DualPair) -> PivotSpace:
    """Pivot space realizing BD(G) itself (kappa = identity on coordinates).

    With this pivot the operator maps Dirichlet data to its boundary
    *functional* values ``b(u, v_k)`` over the BD(G) basis; together with its
    inverse this realizes the boundary-level round trips exactly (the
    vector-level composition through pi_BD(D) is only asymptotic).
    """
    key = "bd_functional_pivot"
    if key in pair._cache:
        return pair._cache[key]
    bdg = bd_space(pair, "G")
    piv = PivotSpace(
        WeightedSpace(bdg.dim, sp.identity(bdg.dim, format="csr")), np.eye(bdg.dim)
    )
    pair._cache[key] = piv
    return piv


def default_pivot(pair: DualPair) -> PivotSpace:
    """Discrete analog of H = L2 of the boundary.

    H is indexed by the Dirichlet-trace dofs with the discrete boundary
    measure as Gram (1 per endpoint in 1D, edge-length weights in 2D) and
    kappa is the trace restricted to BD(G).
    """
    key = "default_pivot"
    if key in pair._cache:
        return pair._cache[key]
    bdg = bd_space(pair, "G")
    kappa = to_dense(pair.trace0 @ bdg.basis)
    b0 = pair.b0
    if pair.geometry.get("kind") == "interval":
        weights = np.ones(b0)
    else:
        weights = np.full(b0, pair.meshwidth)
    piv = PivotSpace(WeightedSpace(b0, sp.diags(weights)), kappa)
    pair._cache[key] = piv
    return piv


def pivot_embedding(pair: DualPair, piv: PivotSpace):
    """Matrix of j = kappa o pi_BD(G) acting on ambient H0 vectors.

    For the default pivot this is exactly the Dirichlet trace (the
    projection drops interior components, which the trace kills anyway).
    """
    bdg = bd_space(pair, "G")
    if piv is pair._cache.get("default_pivot"):
        return pair.trace0
    return piv.kappa @ to_dense(pair.graph_gram("G") @ bdg.basis).conj().T


def kappa_adjoint_lift(pair: DualPair, piv: PivotSpace, psi) -> np.ndarray:
    """kappa^* psi as an ambient BD(G) vector.

    Defined by ``(kappa^* psi, v)_graph = (psi, kappa v)_H`` for all
    v in BD(G); in coordinates ``kappa^H M_H psi``.
    """
    bdg = bd_space(pair, "G")
    c = piv.kappa.conj().T @ to_dense(piv.space.gram @ np.asarray(psi))
    return bdg.from_coords(c)


def dtn_bd(pair: DualPair, a: CoefficientOp, m: CoefficientOp, allow_indefinite=False) -> np.ndarray:
    """Boundary-space DtN matrix (BD(G) coords -> BD(D) coords).

    Column k is ``pi_BD(D) a G u`` for the Dirichlet solution lifting the
    k-th BD(G) basis vector; the same column is recomputed through the
    first-order block system and the two routes must agree to 1e-9.
    """
    bdg = bd_space(pair, "G")
    bdd = bd_space(pair, "D")
    cols_def = np.zeros((bdd.dim, bdg.dim), dtype=complex)
    cols_blk = np.zeros_like(cols_def)
    for k in range(bdg.dim):
        u0 = bdg.basis[:, k]
        sol = solve_dirichlet(pair, a, m, u0, allow_indefinite=allow_indefinite)
        cols_def[:, k] = bdd.coords(sol.q)
        blk = solve_block(
            pair,
            a,
            m,
            (-(m.matrix @ u0), pair.G @ u0),
            "dirichlet-block",
            allow_indefinite=allow_indefinite,
        )
        cols_blk[:, k] = bdd.coords(blk[pair.h0.dim :])
    dev = np.max(np.abs(cols_def - cols_blk)) / max(np.max(np.abs(cols_def)), 1e-300)
    if dev > 1e-9:
        raise NumericalFailureError(f"DtN dual-route deviation {dev:.3e} exceeds 1e-9")
    if np.max(np.abs(cols_def.imag)) == 0:
        cols_def = cols_def.real
    return cols_def


def ntd_bd(pair: DualPair, a: CoefficientOp, m: CoefficientOp, allow_indefinite=False) -> np.ndarray:
    """Neumann-to-Dirichlet matrix (BD(D) coords -> BD(G) coords).

    Realizes the inverse block formula: for a BD(D) datum the first-order
    Neumann system reduces exactly to ``K u = S q0`` and the output is
    ``pi_BD(G) u``.
    """
    bdg = bd_space(pair, "G")
    bdd = bd_space(pair, "D")
    out = np.zeros((bdg.dim, bdd.dim), dtype=complex)
    for k in range(bdd.dim):
        q0 = bdd.basis[:, k]
        blk = solve_block(
            pair,
            a,
            m,
            (pair.D @ q0, -a.solve(q0)),
            "neumann-block",
            allow_indefinite=allow_indefinite,
        )
        out[:, k] = bdg.coords(blk[: pair.h0.dim])
    if np.max(np.abs(out.imag)) == 0:
        out = out.real
    return out


def _lambda_h_matrix(pair, a, m, piv, allow_indefinite=False):
    """Assemble Lambda_H by the form method (harmonic lift + H-extraction)."""
    bdg = bd_space(pair, "G")
    B = piv.space.dim
    K = weak_form_matrix(pair, a, m)
    J = pivot_embedding(pair, piv)
    kappa_inv = sla.inv(to_dense(piv.kappa))
    cols = np.zeros((B, B), dtype=complex)
    # H-extraction: solve (J Wg^{-1} J^H) y = J Wg^{-1} (K u), psi = M_H^{-1} y
    from .boundary import _graph_space

    gsp = _graph_space(pair, "G")
    jwj = to_dense(J @ gsp.solve_gram(to_dense(J.conj().T)))
    jw_lu = sla.lu_factor(jwj)
    for k in range(B):
        phi = np.zeros(B)
        phi[k] = 1.0
        u0 = bdg.from_coords(kappa_inv @ phi)
        sol = solve_dirichlet(pair, a, m, u0, allow_indefinite=allow_indefinite)
        ku = K @ sol.u
        y = sla.lu_solve(jw_lu, J @ gsp.solve_gram(ku))
        cols[:, k] = piv.space.solve_gram(y)
    if np.max(np.abs(cols.imag)) == 0:
        cols = cols.real
    return cols


def dtn_pivot(
    pair: DualPair,
    a: CoefficientOp,
    m: CoefficientOp,
    piv: PivotSpace | None = None,
    samples: int | None = None,
    seed: int = 42,
    allow_indefinite: bool = False,
) -> DtnOperator:
    """The Dirichlet-to-Neumann operator in the pivot space H.

    For each H basis vector the harmonic lift is computed by a Dirichlet
    solve and the image is extracted from the boundary rows of the weak-form
    residual; the result is the weighted Steklov/Schur complement on H.
    Sector data comes from sampled Rayleigh quotients (``samples`` defaults
    to 50 per dimension).
    """
    if piv is None:
        piv = default_pivot(pair)
    lam_h = _lambda_h_matrix(pair, a, m, piv, allow_indefinite)
    lam_bd = dtn_bd(pair, a, m, allow_indefinite=allow_indefinite)
    mh = to_dense(piv.space.gram)
    wl = mh @ lam_h
    herm = np.max(np.abs(wl - wl.conj().T)) / max(np.max(np.abs(wl)), 1e-300)
    symmetric = bool(herm <= DEFAULT_TOL.identity_tol)
    vertex, half_angle = _empirical_sector(lam_h, mh, samples or 50 * piv.space.dim, seed)
    return DtnOperator(
        lambda_bd=lam_bd,
        lambda_h=lam_h,
        vertex=vertex,
        half_angle=half_angle,
        symmetric=symmetric,
        pivot=piv,
        pair=pair,
        a=a,
        m=m,
    )


def dtn_pivot_inverse(
    pair: DualPair,
    a: CoefficientOp,
    m: CoefficientOp,
    piv: PivotSpace | None = None,
    lambda_h: np.ndarray | None = None,
    allow_indefinite: bool = False,
) -> np.ndarray:
    """Lambda_H^{-1} through the displayed first-order Neumann formula.

    For each H basis vector psi the right-hand side is
    ``(kappa^* psi, -a^{-1} G kappa^* psi)`` and the Neumann block (square
    on H0 x H1 with the adjoint-encoded minimal divergence) is solved; the
    output is ``kappa pi_BD(G) u``.  The product with Lambda_H is verified
    to be the identity to 1e-8.
    """
    if piv is None:
        piv = default_pivot(pair)
    bdg = bd_space(pair, "G")
    B = piv.space.dim
    out = np.zeros((B, B), dtype=complex)
    for k in range(B):
        psi = np.zeros(B)
        psi[k] = 1.0
        ustar = kappa_adjoint_lift(pair, piv, psi)
        blk = solve_block(
            pair,
            a,
            m,
            (ustar, -a.solve(pair.G @ ustar)),
            "neumann-block",
            allow_indefinite=allow_indefinite,
        )
        out[:, k] = piv.kappa @ bdg.coords(blk[: pair.h0.dim])
    if np.max(np.abs(out.imag)) == 0:
        out = out.real
    if lambda_h is None:
        lambda_h = _lambda_h_matrix(pair, a, m, piv, allow_indefinite)
    resid = np.max(np.abs(lambda_h @ out - np.eye(B)))
    if resid > 1e-8:
        raise NumericalFailureError(f"Lambda_H * Lambda_H^-1 deviates from identity by {resid:.3e}")
    return out


# ---------------------------------------------------------------------------
# sectoriality
# ---------------------------------------------------------------------------


def _empirical_sector(lam_h, mh, samples, seed):
    rng = np.random.default_rng(seed)
    B = lam_h.shape[0]
    quots = _sample_quotients(lam_h, mh, samples, rng)
    vertex = float(np.min(quots.real))
    shifted = quots.real - min(vertex, 0.0) + 1e-300
    half_angle = float(np.max(np.arctan2(np.abs(quots.imag), shifted)))
    return vertex, half_angle


def _sample_quotients(lam_h, mh, samples, rng):
    B = lam_h.shape[0]
    wl = mh @ lam_h
    herm = 0.5 * (wl + wl.conj().T)
    _, vecs = sla.eigh(herm, mh)
    dirs = [vecs[:, j] for j in range(B)]
    while len(dirs) < samples:
        z = rng.standard_normal(B) + 1j * rng.standard_normal(B)
        dirs.append(z)
    vals = []
    for phi in dirs[:samples]:
        den = np.vdot(phi, mh @ phi).real
        vals.append(np.vdot(phi, wl @ phi) / den)
    return np.asarray(vals)


def sector_constants(
    pair: DualPair,
    a: CoefficientOp,
    m: CoefficientOp,
    piv: PivotSpace | None = None,
):
    """Computed sector constants (mu_tilde, omega, c) for one instance.

    Follows the uniform-sectoriality construction: with
    ``omega_tilde = mu_a + ||m||`` and ``eps = mu_a / (2 omega_tilde)``,
    the compactness surrogate constant ``omega_621`` is the largest
    generalized eigenvalue of ``||u||_{H0}^2 - eps ||u||_graph^2`` against
    ``||j(u)||_H^2`` over the weakly-harmonic subspace V(b); then
    ``omega = omega_tilde * omega_621`` and ``mu_tilde = mu_a / 2``.
    The continuity constant is ``c = ||a|| + ||m||``.
    """
    if piv is None:
        piv = default_pivot(pair)
    if not a.is_coercive:
        raise ContractViolationError("sector constants require coercive a")
    mu_a = a.coercivity_mu
    omega_tilde = mu_a + m.norm_bound
    eps = mu_a / (2.0 * omega_tilde)
    U = harmonic_subspace(pair, a, m)
    wg = pair.graph_gram("G")
    m0 = pair.h0.gram
    J = pivot_embedding(pair, piv)
    ju = to_dense(J @ U)
    a_v = U.conj().T @ (m0 @ U) - eps * (U.conj().T @ (wg @ U))
    b_v = ju.conj().T @ to_dense(piv.space.gram @ ju)
    a_v = 0.5 * (a_v + a_v.conj().T)
    b_v = 0.5 * (b_v + b_v.conj().T)
    evals = sla.eigh(to_dense(a_v), to_dense(b_v), eigvals_only=True)
    omega621 = max(0.0, float(evals[-1]))
    omega = omega_tilde * omega621
    mu_tilde = mu_a / 2.0
    c = a.norm_bound + m.norm_bound
    return mu_tilde, omega, c


def harmonic_subspace(pair: DualPair, a: CoefficientOp, m: CoefficientOp) -> np.ndarray:
    """Basis of V(b) = {u : b(u, v) = 0 for all interior v} via lifted solves.

    Requires the interior weak operator to be nonsingular (trivial kernel);
    raises :class:`NearSingularError` otherwise.
    """
    bdg = bd_space(pair, "G")
    cols = []
    for k in range(bdg.dim):
        sol = solve_dirichlet(pair, a, m, bdg.basis[:, k], allow_indefinite=True)
        cols.append(sol.u)
    return np.column_stack(cols)


@dataclass(frozen=True)
class SectorReport:
    vertex: float
    half_angle: float
    witnesses: np.ndarray  # sampled Rayleigh quotients
    apriori_vertex: float
    apriori_half_angle: float
    contained: bool


def sector_report(op: DtnOperator, samples: int, seed: int = 42) -> SectorReport:
    """Sample Rayleigh quotients of Lambda_H and verify sector containment.

    The a-priori sector has vertex ``-omega`` and half-angle
    ``arctan(c / mu_tilde)`` with the computed constants; every sampled
    quotient must satisfy ``|Im z| <= tan(angle) (Re z + omega)`` up to
    roundoff slack.
    """
    if samples < op.pivot.space.dim:
        raise ContractViolationError("samples must be at least dim H")
    mh = to_dense(op.pivot.space.gram)
    rng = np.random.default_rng(seed)
    quots = _sample_quotients(np.asarray(op.lambda_h, dtype=complex), mh, samples, rng)
    mu_tilde, omega, c = sector_constants(op.pair, op.a, op.m, op.pivot)
    tanang = c / mu_tilde
    scale = np.max(np.abs(quots))
    slack = 1e-10 * max(scale, 1.0)
    contained = bool(
        np.all(quots.real >= -omega - slack)
        and np.all(np.abs(quots.imag) <= tanang * (quots.real + omega) + slack)
    )
    vertex = float(np.min(quots.real))
    shifted = quots.real + omega + 1e-300
    half_angle = float(np.max(np.arctan2(np.abs(quots.imag), shifted)))
    return SectorReport(
        vertex=vertex,
        half_angle=half_angle,
        witnesses=quots,
        apriori_vertex=-omega,
        apriori_half_angle=float(np.arctan(tanang)),
        contained=contained,
    )


def pivot_bd_correspondence_defect(
    pair: DualPair, a: CoefficientOp, m: CoefficientOp, piv: PivotSpace | None = None
) -> float:
    """Defect between the pivot-route and BD-route DtN operators.

    The continuum identity ``Lambda u0 = (G o kappa^*)(Lambda_H kappa u0)``
    relies on the unitarity of the boundary gradient and is exact only in
    the limit; the returned relative defect decays with order >= 1 in h.
    """
    from .boundary import g_dot

    if piv is None:
        piv = default_pivot(pair)
    bdd = bd_space(pair, "D")
    lam_h = _lambda_h_matrix(pair, a, m, piv)
    lam_bd = dtn_bd(pair, a, m)
    kappa_inv = sla.inv(to_dense(piv.kappa))
    B = piv.space.dim
    route_pivot = np.zeros((bdd.dim, B), dtype=complex)
    for k in range(B):
        psi = lam_h[:, k]
        route_pivot[:, k] = bdd.coords(g_dot(pair, kappa_adjoint_lift(pair, piv, psi)))
    route_bd = lam_bd @ kappa_inv
    return float(np.max(np.abs(route_pivot - route_bd)) / max(np.max(np.abs(route_bd)), 1e-300))
