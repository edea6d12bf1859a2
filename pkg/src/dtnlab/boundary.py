"""Boundary data spaces BD(G), BD(D) and the maps between them.

BD(G) is *defined* as the graph-orthogonal complement of the interior
subspace inside dom(G) (here all of H0 carrying the graph inner product
``(u,v) + (Gu,Gv)``), and likewise on the D side.  The kernel identity
``BD(G) = ker(I - DG)`` of the continuum theory survives only in a relaxed
form: the residual ``(I - DG)u`` of a BD(G) vector is supported on the
boundary dofs exactly, and its size decays with the mesh width.  All
asymptotic-versus-exact distinctions in this module are spelled out in the
docstrings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolationError, NumericalFailureError
from .linalg import DEFAULT_TOL, TolerancePolicy, orthonormalize, to_dense
from .pairs import DualPair

__all__ = [
    "BoundarySpace",
    "bd_space",
    "project_bd",
    "bd_coords",
    "bd_from_coords",
    "g_dot",
    "d_dot",
    "phi_pairing",
    "phi_matrix",
]


@dataclass(frozen=True)
class BoundarySpace:
    """Graph-orthonormal basis of BD(G) or BD(D) with its projection.

    ``basis`` columns are orthonormal in the graph inner product
    ``graph_gram``; the projector is available as a dense matrix through
    :attr:`projector` and cheaply through :meth:`project`.
    """

    side: str
    basis: np.ndarray
    graph_gram: object
    pair: DualPair

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, x):
        """Graph-orthogonal projection of an ambient vector onto the space."""
        return self.basis @ (self.basis.conj().T @ (self.graph_gram @ np.asarray(x)))

    @property
    def projector(self) -> np.ndarray:
        """Dense projector matrix (prefer :meth:`project` on large pairs)."""
        return self.basis @ to_dense(self.graph_gram @ self.basis).conj().T

    def coords(self, x):
        """Coordinates of the projection of ``x`` in the orthonormal basis."""
        return self.basis.conj().T @ (self.graph_gram @ np.asarray(x))

    def from_coords(self, c):
        return self.basis @ np.asarray(c)

    def inner(self, x, y):
        """Graph inner product of two ambient vectors."""
        return complex(np.vdot(np.asarray(y), self.graph_gram @ np.asarray(x)))

    def norm(self, x):
        return float(np.sqrt(max(self.inner(x, x).real, 0.0)))


def bd_space(pair: DualPair, side: str, tol: TolerancePolicy = DEFAULT_TOL) -> BoundarySpace:
    """Compute BD(G) (side='G') or BD(D) (side='D') for a validated pair.

    The complement of a trace kernel in the graph inner product is spanned by
    ``Wg^{-1} trace^H``, so only one sparse factorization and a small
    Cholesky/QR orthonormalization are needed.  The dimension always equals
    the number of boundary dofs of the corresponding trace.
    """
    key = f"bd{side}"
    if key in pair._cache:
        return pair._cache[key]
    if side == "G":
        trace = pair.trace0
    elif side == "D":
        trace = pair.trace1
    else:
        raise ContractViolationError("side must be 'G' or 'D'")
    wg = pair.graph_gram(side)
    wspace = _graph_space(pair, side)
    raw = wspace.solve_gram(to_dense(trace.conj().T))
    try:
        basis = orthonormalize(raw, wg, tol)
    except Exception as exc:  # degenerate graph gram
        raise NumericalFailureError(f"BD({side}) orthonormalization failed: {exc}") from exc
    if basis.shape[1] != trace.shape[0]:
        raise NumericalFailureError(
            f"BD({side}) has dimension {basis.shape[1]}, expected {trace.shape[0]}"
        )
    space = BoundarySpace(side, basis, wg, pair)
    pair._cache[key] = space
    return space


def _graph_space(pair: DualPair, side: str):
    """WeightedSpace wrapper around a graph Gram (cached on the pair)."""
    from .linalg import WeightedSpace

    key = f"graphspace{side}"
    if key not in pair._cache:
        wg = pair.graph_gram(side)
        pair._cache[key] = WeightedSpace(wg.shape[0], wg)
    return pair._cache[key]


def project_bd(pair: DualPair, side: str, x):
    """Graph-orthogonal projection onto BD(side); x - Px is interior."""
    return bd_space(pair, side).project(x)


def bd_coords(pair: DualPair, side: str, x):
    return bd_space(pair, side).coords(x)


def bd_from_coords(pair: DualPair, side: str, c):
    return bd_space(pair, side).from_coords(c)


def g_dot(pair: DualPair, u, return_defect: bool = False):
    """The boundary gradient: project G u onto BD(D).

    In the continuum ``Gu`` of a BD(G) vector already lies in BD(D)
    (Corollary-level identity); discretely the projection defect
    ``norm(Gu - pi Gu)_graph / norm(Gu)_graph`` is nonzero and decays with
    order >= 1 in the mesh width.  Set ``return_defect=True`` to obtain it.
    """
    bdd = bd_space(pair, "D")
    gu = pair.G @ np.asarray(u)
    pgu = bdd.project(gu)
    if not return_defect:
        return pgu
    den = bdd.norm(gu)
    defect = bdd.norm(gu - pgu) / den if den > 0 else 0.0
    return pgu, defect


def d_dot(pair: DualPair, q, return_defect: bool = False):
    """The boundary divergence: project D q onto BD(G)."""
    bdg = bd_space(pair, "G")
    dq = pair.D @ np.asarray(q)
    pdq = bdg.project(dq)
    if not return_defect:
        return pdq
    den = bdg.norm(dq)
    defect = bdg.norm(dq - pdq) / den if den > 0 else 0.0
    return pdq, defect


def phi_matrix(pair: DualPair):
    """Matrix of the boundary pairing: phi(q)(u) = u^H S q with
    S = trace0^H beta trace1 (= G^H M1 + M0 D by axiom (A2))."""
    return pair.boundary_form()


def phi_pairing(pair: DualPair, q, u) -> complex:
    """The sesquilinear boundary pairing Phi(q)(u) = (Dq,u)_H0 + (q,Gu)_H1.

    Vanishes exactly whenever ``u`` is interior (the discrete analog of the
    flux/trace duality); the factorized form ``u^H trace0^H beta trace1 q``
    is used so the interior case is a structural zero.
    """
    return complex(np.vdot(np.asarray(u), pair.boundary_form() @ np.asarray(q)))
