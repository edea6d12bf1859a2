"""Well-posed Dirichlet and Neumann solvers and the block first-order systems.

The weak form ``b(u, v) = (a G u, G v)_{H1} + (m u, v)_{H0}`` has matrix
``K = G^H M1 A G + M0 Mm`` (so ``b(u, v) = v^H K u``).  The two first-order
block systems of the theory are realized as follows:

* Dirichlet block ``(m, -D; -G_int, a^{-1})``: the minimal-domain constraint
  is imposed by basis substitution (unknown interior correction) and the
  first row is tested against the interior subspace.  This is exactly
  equivalent to the weak Dirichlet problem.
* Neumann block ``(m, -D_int; -G, a^{-1})``: the minimal divergence is
  encoded as ``D_int = -G^*`` (negative weighted adjoint of the maximal
  gradient), which makes the system square on ``H0 x H1`` with a genuinely
  skew-adjoint off-diagonal part.  Eliminating the flux recovers exactly
  ``K u = S q0`` with ``S`` the boundary-form matrix, i.e. the weak Neumann
  problem; no asymptotic identity enters.

Factorizations are cached per (pair, a, m) combination; cached entries are
immutable after creation, so concurrent readers are safe.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ContractViolationError, NearSingularError, NumericalFailureError
from .linalg import operator_norm_estimate, to_dense
from .pairs import CoefficientOp, DualPair

__all__ = [
    "BvpSolution",
    "weak_form_matrix",
    "solve_dirichlet",
    "solve_neumann",
    "solve_block",
    "clear_solver_cache",
]

_DENSE_SV_LIMIT = 800


@dataclass(frozen=True)
class BvpSolution:
    """Solution of a boundary value problem.

    ``q = a G u`` is the flux, ``interior_residual`` the relative size of the
    interior-tested weak equations at the solution, ``boundary_data_echo``
    the boundary data recovered from the solution (BD coordinates for the
    Dirichlet problem, boundary-pairing values for the Neumann problem).
    ``flux_defect`` is the Neumann trace defect ``|trace1(a G u - q0)|``,
    which vanishes only asymptotically.
    """

    u: np.ndarray
    q: np.ndarray
    interior_residual: float
    boundary_data_echo: np.ndarray
    flux_defect: float | None = None


class _SolverCache:
    """Keyed direct factorizations; keys hold strong references so object
    identity cannot be recycled while the cache lives."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries = {}

    def entry(self, pair: DualPair, a: CoefficientOp, m: CoefficientOp) -> dict:
        key = (id(pair), id(a), id(m))
        with self._lock:
            if key not in self._entries:
                self._entries[key] = {"refs": (pair, a, m)}
            return self._entries[key]

    def clear(self):
        with self._lock:
            self._entries.clear()


_CACHE = _SolverCache()


def clear_solver_cache():
    _CACHE.clear()


def weak_form_matrix(pair: DualPair, a: CoefficientOp, m: CoefficientOp):
    """K = G^H M1 A G + M0 Mm (sparse whenever the inputs are)."""
    entry = _CACHE.entry(pair, a, m)
    if "K" not in entry:
        G = pair.G
        K = G.conj().T @ (pair.h1.gram @ (a.matrix @ G)) + pair.h0.gram @ m.matrix
        entry["K"] = sp.csr_matrix(K) if sp.issparse(K) else np.asarray(K)
    return entry["K"]


def _smallest_sv(mat) -> tuple[float, float]:
    """(smallest, largest) singular value estimates of a square matrix."""
    n = mat.shape[0]
    if n <= _DENSE_SV_LIMIT:
        s = sla.svd(to_dense(mat), compute_uv=False)
        return float(s[-1]), float(s[0])
    largest = operator_norm_estimate(mat)
    try:
        lu = spla.splu(sp.csc_matrix(mat))
    except Exception:
        return 0.0, largest
    small = _sigma_min_from_lu(lu, n)
    return small, largest


def _sigma_min_from_lu(lu, n, iters: int = 6) -> float:
    """Inverse-power estimate of the smallest singular value from an LU."""
    rng = np.random.default_rng(0)
    dtype = complex if np.iscomplexobj(lu.L.data) else float
    z = rng.standard_normal(n).astype(dtype)
    z /= np.linalg.norm(z)
    lam = 0.0
    for _ in range(iters):
        w = lu.solve(lu.solve(z), trans="H")  # (A^{-1} A^{-H}) z
        lam = float(np.linalg.norm(w))
        if lam == 0.0 or not np.isfinite(lam):
            return 0.0
        z = w / lam
    return 1.0 / np.sqrt(lam)


def _factorize(entry: dict, name: str, mat, what: str):
    """LU-factorize with near-singularity detection at the rank tolerance."""
    if name in entry:
        return entry[name]
    n = mat.shape[0]
    try:
        if sp.issparse(mat):
            from .linalg import _complex_safe

            lu = spla.splu(sp.csc_matrix(mat))
            solver = _complex_safe(lu.solve, np.iscomplexobj(mat.data))
            small = _sigma_min_from_lu(lu, n)
            large = operator_norm_estimate(mat)
        else:
            dense = np.asarray(mat)
            lufac = sla.lu_factor(dense)
            solver = lambda b: sla.lu_solve(lufac, b)
            if n <= _DENSE_SV_LIMIT:
                s = sla.svd(dense, compute_uv=False)
                small, large = float(s[-1]), float(s[0])
            else:
                small, large = _smallest_sv(dense)
    except Exception as exc:
        small, large = _smallest_sv(mat)
        raise NearSingularError(
            f"{what} system is singular", smallest_sv=small, largest_sv=large
        ) from exc
    if small <= 1e-10 * large:
        raise NearSingularError(
            f"{what} system is near-singular (sv_min={small:.3e}, sv_max={large:.3e})",
            smallest_sv=small,
            largest_sv=large,
        )
    entry[name] = solver
    return solver


def _solve_columns(solver, b):
    b = np.asarray(b)
    if b.ndim == 1:
        return solver(b)
    return np.column_stack([solver(b[:, j]) for j in range(b.shape[1])])


def _check_coercive(a: CoefficientOp, m: CoefficientOp, allow_indefinite: bool):
    if not a.is_coercive:
        raise ContractViolationError("leading coefficient a must be coercive")
    if not m.is_coercive and not allow_indefinite:
        raise ContractViolationError(
            "m is not coercive; pass allow_indefinite=True to opt into graph mode"
        )


def _interior_residual(pair, K, u) -> float:
    e0 = pair.interior_basis0()
    r = e0.conj().T @ (K @ u)
    scale = operator_norm_estimate(K) * float(np.linalg.norm(u))
    return float(np.linalg.norm(r)) / max(scale, 1e-300)


def _energy_check(pair, a, m, u, rhs_pairing: float):
    """Coercive energy bound mu*||u||_graph^2 <= Re b(u) + |rhs pairing|."""
    if not (a.is_coercive and m.is_coercive):
        return
    wg = pair.graph_gram("G")
    gn2 = float(np.vdot(u, wg @ u).real)
    gu = pair.G @ u
    b_val = complex(np.vdot(gu, pair.h1.gram @ (a.matrix @ gu))) + complex(
        np.vdot(u, pair.h0.gram @ (m.matrix @ u))
    )
    mu = min(a.coercivity_mu, m.coercivity_mu)
    slack = 1e-9 * max(gn2, 1.0) + abs(rhs_pairing)
    if mu * gn2 > b_val.real + slack:
        raise NumericalFailureError("coercive energy bound violated")


def solve_dirichlet(
    pair: DualPair,
    a: CoefficientOp,
    m: CoefficientOp,
    u0,
    allow_indefinite: bool = False,
) -> BvpSolution:
    """Solve the Dirichlet problem: u - u0 interior and b(u, v) = 0 for all
    interior v.  ``u0`` is an ambient vector (normally in BD(G)).

    Raises :class:`NearSingularError` when the interior system is singular at
    the working tolerance (non-coercive m at a discrete eigenvalue); the
    graph machinery handles those instances.
    """
    _check_coercive(a, m, allow_indefinite)
    u0 = np.asarray(u0)
    entry = _CACHE.entry(pair, a, m)
    K = weak_form_matrix(pair, a, m)
    e0 = pair.interior_basis0()
    K00 = e0.conj().T @ (K @ e0)
    solver = _factorize(entry, "K_interior", K00, "interior Dirichlet")
    rhs = -(e0.conj().T @ (K @ u0))
    w = _solve_columns(solver, rhs)
    u = u0 + e0 @ w
    q = a.matrix @ (pair.G @ u)
    res = _interior_residual(pair, K, u)
    from .boundary import bd_coords

    echo = bd_coords(pair, "G", u)
    _energy_check(pair, a, m, u, 0.0)
    return BvpSolution(u=u, q=np.asarray(q), interior_residual=res, boundary_data_echo=echo)


def solve_neumann(
    pair: DualPair,
    a: CoefficientOp,
    m: CoefficientOp,
    q0,
    allow_indefinite: bool = False,
) -> BvpSolution:
    """Solve the weak Neumann problem b(u, v) = Phi(q0)(v) for all v.

    The right-hand side is the boundary pairing of ``q0`` (a BD(D) vector),
    i.e. ``K u = S q0`` with the boundary-form matrix ``S``; this is the
    exact discrete realization of the first-order Neumann block.  The
    strong flux condition ``trace1(a G u - q0) = 0`` holds only
    asymptotically and is reported through ``flux_defect``.
    """
    _check_coercive(a, m, allow_indefinite)
    q0 = np.asarray(q0)
    entry = _CACHE.entry(pair, a, m)
    K = weak_form_matrix(pair, a, m)
    solver = _factorize(entry, "K_full", K, "weak Neumann")
    S = pair.boundary_form()
    rhs = S @ q0
    u = _solve_columns(solver, rhs)
    q = np.asarray(a.matrix @ (pair.G @ u))
    res = _interior_residual(pair, K, u)
    from .boundary import bd_space

    bdg = bd_space(pair, "G")
    # recovered boundary pairings b(u, v_k); equal to Phi(q0)(v_k) exactly
    echo = bdg.basis.conj().T @ (K @ u)
    tq = pair.trace1 @ (q - q0)
    den = float(np.linalg.norm(pair.trace1 @ q0))
    defect = float(np.linalg.norm(tq)) / max(den, 1e-300)
    _energy_check(pair, a, m, u, abs(complex(np.vdot(u, rhs))))
    return BvpSolution(
        u=np.asarray(u),
        q=q,
        interior_residual=res,
        boundary_data_echo=np.asarray(echo),
        flux_defect=defect,
    )


def _block_matrices(pair: DualPair, a: CoefficientOp, m: CoefficientOp, variant: str):
    """Assemble the weighted (symmetrically tested) block system."""
    M0, M1 = pair.h0.gram, pair.h1.gram
    ainv = a.inverse_matrix()
    if variant == "dirichlet-block":
        e0 = pair.interior_basis0()
        A11 = e0.conj().T @ (M0 @ (m.matrix @ e0))
        A12 = -(e0.conj().T @ (M0 @ pair.D))
        A21 = -(M1 @ (pair.G @ e0))
        A22 = M1 @ ainv
    elif variant == "neumann-block":
        # D_int = -G^*: M0-row  M0 m u + G^H M1 q  (exactly -M0 D_int = G^H M1)
        A11 = M0 @ m.matrix
        A12 = pair.G.conj().T @ M1
        A21 = -(M1 @ pair.G)
        A22 = M1 @ ainv
    else:
        raise ContractViolationError("variant must be 'dirichlet-block' or 'neumann-block'")
    if any(not sp.issparse(x) for x in (A11, A12, A21, A22)):
        top = np.hstack([to_dense(A11), to_dense(A12)])
        bot = np.hstack([to_dense(A21), to_dense(A22)])
        return np.vstack([top, bot])
    return sp.bmat([[A11, A12], [A21, A22]], format="csc")


def solve_block(
    pair: DualPair,
    a: CoefficientOp,
    m: CoefficientOp,
    rhs,
    variant: str = "dirichlet-block",
    allow_indefinite: bool = False,
) -> np.ndarray:
    """Solve one of the two constrained first-order block systems.

    ``rhs`` is an ``H0 x H1`` vector ``(f0, f1)`` (stacked or a pair).  For
    the Dirichlet block the first equation is tested against the interior
    subspace and the returned ``u``-part lies in it; for the Neumann block
    the system is square on the full product space.  Returns the stacked
    solution ``(u, q)`` of length ``h0.dim + h1.dim``.
    """
    _check_coercive(a, m, allow_indefinite)
    n0, n1 = pair.h0.dim, pair.h1.dim
    if isinstance(rhs, (tuple, list)):
        f0, f1 = np.asarray(rhs[0]), np.asarray(rhs[1])
    else:
        rhs = np.asarray(rhs)
        if rhs.shape[0] != n0 + n1:
            raise ContractViolationError("rhs must have length h0.dim + h1.dim")
        f0, f1 = rhs[:n0], rhs[n0:]
    entry = _CACHE.entry(pair, a, m)
    mat = _block_matrices(pair, a, m, variant)
    solver = _factorize(entry, f"block_{variant}", mat, variant)
    if variant == "dirichlet-block":
        e0 = pair.interior_basis0()
        b = np.concatenate([e0.conj().T @ (pair.h0.gram @ f0), pair.h1.gram @ f1])
        sol = solver(b)
        k0 = e0.shape[1]
        u = e0 @ sol[:k0]
        q = sol[k0:]
    else:
        b = np.concatenate([pair.h0.gram @ f0, pair.h1.gram @ f1])
        sol = solver(b)
        u, q = sol[:n0], sol[n0:]
    return np.concatenate([np.asarray(u), np.asarray(q)])
