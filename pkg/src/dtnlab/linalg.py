"""Weighted-inner-product linear algebra shared by all modules.

Every space in the laboratory is a finite-dimensional complex Hilbert space
represented by a Hermitian positive-definite Gram matrix ``W``; the inner
product is ``(x, y) = y^H W x`` (linear in the first argument).  This module
provides adjoints with respect to such Gram matrices, numeric kernels and
ranges, orthogonal projections, principal angles between subspaces and the
tolerance policy used everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ContractViolationError, DegenerateSubspaceError, NumericalFailureError

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "WeightedSpace",
    "Subspace",
    "euclidean_space",
    "to_dense",
    "weighted_adjoint",
    "numeric_kernel",
    "numeric_range",
    "orthonormalize",
    "orthogonal_projection",
    "principal_angles",
    "observed_order",
    "operator_norm_estimate",
]

_DENSE_LIMIT = 4000  # largest dimension at which dense fallbacks are allowed


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical tolerances shared across the laboratory.

    rank_rel_tol
        Relative singular-value threshold for all rank decisions.
    identity_tol
        Absolute tolerance for identities that hold exactly in the discrete
        algebra (projector idempotence, adjoint pairing, ...).
    asymptotic_order_window
        Number of refinement levels used when estimating convergence orders.
    """

    rank_rel_tol: float = 1e-10
    identity_tol: float = 1e-11
    asymptotic_order_window: int = 3

    def __post_init__(self):
        if self.rank_rel_tol <= 0 or self.identity_tol <= 0:
            raise ContractViolationError("tolerances must be strictly positive")
        if self.asymptotic_order_window <= 0:
            raise ContractViolationError("order window must be a positive integer")


DEFAULT_TOL = TolerancePolicy()


def to_dense(a) -> np.ndarray:
    """Return ``a`` as a dense ndarray (sparse matrices are materialized)."""
    if sp.issparse(a):
        return a.toarray()
    return np.asarray(a)


def _complex_safe(solver, factor_is_complex):
    """Wrap a real-valued factorization so complex right-hand sides work."""
    if factor_is_complex:
        return solver

    def solve(b):
        b = np.asarray(b)
        if np.iscomplexobj(b):
            return solver(b.real) + 1j * solver(b.imag)
        return solver(b)

    return solve


def _is_diagonal(a) -> bool:
    if sp.issparse(a):
        coo = a.tocoo()
        return bool(np.all(coo.row == coo.col))
    a = np.asarray(a)
    return bool(np.count_nonzero(a - np.diag(np.diagonal(a))) == 0)


@dataclass(frozen=True)
class WeightedSpace:
    """A finite-dimensional inner-product space ``(C^dim, gram)``.

    The Gram matrix must be Hermitian (to 1e-13 relative) and positive
    definite.  Diagonal Grams (the common case for quadrature weights) are
    detected and handled without densifying.
    """

    dim: int
    gram: object  # ndarray or scipy sparse
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise ContractViolationError("dimension must be a positive integer")
        if self.gram.shape != (self.dim, self.dim):
            raise ContractViolationError(
                f"gram has shape {self.gram.shape}, expected {(self.dim, self.dim)}"
            )
        herm = self._hermitian_defect()
        if herm > 1e-13:
            raise ContractViolationError(f"gram is not Hermitian (relative defect {herm:.3e})")
        if self.min_eig() <= 0:
            raise ContractViolationError("gram is not positive definite")

    def _hermitian_defect(self) -> float:
        g = self.gram
        if sp.issparse(g):
            diff = (g - g.conj().T).tocoo()
            num = np.max(np.abs(diff.data)) if diff.nnz else 0.0
            den = np.max(np.abs(g.tocoo().data)) if g.nnz else 1.0
        else:
            g = np.asarray(g)
            num = np.max(np.abs(g - g.conj().T)) if g.size else 0.0
            den = max(np.max(np.abs(g)), 1e-300)
        return float(num / max(den, 1e-300))

    def min_eig(self) -> float:
        """Smallest eigenvalue of the Gram matrix."""
        if "min_eig" not in self._cache:
            g = self.gram
            if _is_diagonal(g):
                d = g.diagonal() if sp.issparse(g) else np.diagonal(np.asarray(g))
                val = float(np.min(d.real))
            elif self.dim <= _DENSE_LIMIT:
                val = float(sla.eigvalsh(to_dense(g))[0])
            else:
                val = _sparse_extreme_eig(g.tocsc())
            self._cache["min_eig"] = val
        return self._cache["min_eig"]

    def inner(self, x, y) -> complex:
        """Inner product ``(x, y) = y^H W x``."""
        return complex(np.vdot(np.asarray(y), self.gram @ np.asarray(x)))

    def norm(self, x) -> float:
        val = self.inner(x, x).real
        return float(np.sqrt(max(val, 0.0)))

    def solve_gram(self, b):
        """Apply the inverse Gram matrix to the columns of ``b``."""
        b = np.asarray(b)
        g = self.gram
        if _is_diagonal(g):
            d = g.diagonal() if sp.issparse(g) else np.diagonal(np.asarray(g))
            return (b.T / d).T
        if sp.issparse(g):
            if "factor" not in self._cache:
                self._cache["factor"] = spla.factorized(g.tocsc())
            fac = self._cache["factor"]
            solve1 = _complex_safe(fac, np.iscomplexobj(g.data))
            if b.ndim == 1:
                return solve1(b)
            return np.column_stack([solve1(b[:, j]) for j in range(b.shape[1])])
        if "factor" not in self._cache:
            self._cache["factor"] = sla.lu_factor(np.asarray(g))
        return sla.lu_solve(self._cache["factor"], b)

    def cholesky(self) -> np.ndarray:
        """Dense lower Cholesky factor of the Gram matrix."""
        if "chol" not in self._cache:
            if self.dim > _DENSE_LIMIT:
                raise NumericalFailureError(
                    f"dense Cholesky of a {self.dim}-dimensional gram refused"
                )
            self._cache["chol"] = sla.cholesky(to_dense(self.gram), lower=True)
        return self._cache["chol"]


def _sparse_extreme_eig(g, iters: int = 30) -> float:
    """Eigenvalue of smallest magnitude of a sparse Hermitian matrix, signed.

    Inverse power iteration on an LU factorization; for a positive-definite
    Gram this is the smallest eigenvalue.  Returns 0.0 when the matrix is
    numerically singular.
    """
    try:
        lu = spla.splu(g)
    except Exception:
        return 0.0
    rng = np.random.default_rng(1)
    dtype = complex if np.iscomplexobj(g.data) else float
    z = rng.standard_normal(g.shape[0]).astype(dtype)
    z /= np.linalg.norm(z)
    for _ in range(iters):
        w = lu.solve(z)
        nrm = np.linalg.norm(w)
        if nrm == 0.0 or not np.isfinite(nrm):
            return 0.0
        z = w / nrm
    return float(np.vdot(z, g @ z).real)


def euclidean_space(dim: int) -> WeightedSpace:
    """The standard complex Euclidean space of the given dimension."""
    return WeightedSpace(dim, sp.identity(dim, format="csr"))


def _resolve_gram(inner):
    """Accept a WeightedSpace, a Gram matrix, or None (Euclidean)."""
    if inner is None:
        return None
    if isinstance(inner, WeightedSpace):
        return inner.gram
    return inner


@dataclass(frozen=True)
class Subspace:
    """A subspace given by a basis of column vectors.

    ``ambient`` carries the inner product (``None`` means Euclidean).  The
    basis must have full column rank at the working rank tolerance; it does
    not need to be orthonormal.
    """

    ambient: WeightedSpace | None
    basis: object  # ndarray or scipy sparse, shape (n, k)

    def __post_init__(self):
        n, k = self.basis.shape
        if self.ambient is not None and self.ambient.dim != n:
            raise ContractViolationError("basis does not live in the ambient space")
        if k == 0:
            return
        g = self._small_gram()
        evals = sla.eigvalsh(g)
        if evals[0] <= (DEFAULT_TOL.rank_rel_tol ** 2) * max(evals[-1], 1e-300):
            raise DegenerateSubspaceError(
                f"basis is rank deficient ({evals[0]:.3e} vs {evals[-1]:.3e})"
            )

    def _small_gram(self) -> np.ndarray:
        b = self.basis
        if self.ambient is None:
            return to_dense(b.conj().T @ b)
        return to_dense(b.conj().T @ (self.ambient.gram @ b))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    def dense_basis(self) -> np.ndarray:
        return to_dense(self.basis)


def weighted_adjoint(A, from_space: WeightedSpace, to_space: WeightedSpace):
    """Adjoint of ``A : from -> to`` with respect to the space inner products.

    Satisfies ``(A x, y)_to = (x, A^* y)_from`` for all vectors; algebraically
    ``A^* = W_from^{-1} A^H W_to``.
    """
    if A.shape != (to_space.dim, from_space.dim):
        raise ContractViolationError(
            f"operator has shape {A.shape}, expected {(to_space.dim, from_space.dim)}"
        )
    rhs = A.conj().T @ to_space.gram
    if sp.issparse(rhs):
        rhs = rhs.toarray()
    return from_space.solve_gram(np.asarray(rhs))


def numeric_kernel(A, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Euclid-orthonormal basis of the numeric right null space of ``A``.

    Singular values below ``rank_rel_tol`` times the largest singular value
    are treated as zero.  Returns a 0-dimensional subspace when ``A`` is
    injective at that tolerance.
    """
    A = to_dense(A)
    m, n = A.shape
    if m == 0 or n == 0 or not np.any(A):
        return Subspace(None, np.eye(n))
    _, s, vh = sla.svd(A, full_matrices=True)
    cutoff = tol.rank_rel_tol * s[0] if s.size else 0.0
    rank = int(np.sum(s > cutoff))
    return Subspace(None, vh[rank:].conj().T.copy())


def numeric_range(A, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Euclid-orthonormal basis of the numeric column space of ``A``."""
    A = to_dense(A)
    if A.shape[1] == 0 or not np.any(A):
        return Subspace(None, np.zeros((A.shape[0], 0)))
    u, s, _ = sla.svd(A, full_matrices=False)
    cutoff = tol.rank_rel_tol * s[0]
    rank = int(np.sum(s > cutoff))
    return Subspace(None, u[:, :rank].copy())


def _fix_orientation(q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Scale each column so its first clearly-nonzero entry is real positive.

    Makes orthonormal bases reproducible across BLAS builds (deterministic
    CSV output relies on this).
    """
    q = np.array(q)
    for j in range(q.shape[1]):
        col = q[:, j]
        mags = np.abs(col)
        big = mags > tol * (mags.max() if mags.size else 1.0)
        if not np.any(big):
            continue
        lead = col[np.argmax(big)]
        q[:, j] = col * (np.conj(lead) / abs(lead))
    return q


def orthonormalize(basis, inner=None, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Inner-product-orthonormal basis spanning the same space.

    Uses the small Gram matrix ``B^H W B`` (Cholesky) so only k x k dense
    work is needed; falls back to an eigendecomposition when the basis is
    ill conditioned.  Column orientation follows the first-nonzero-positive
    convention.
    """
    gram = _resolve_gram(inner)
    b = basis
    small = b.conj().T @ (b if gram is None else gram @ b)
    small = to_dense(small)
    small = 0.5 * (small + small.conj().T)
    if small.shape[0] == 0:
        return np.zeros((b.shape[0], 0))
    # Cholesky of the small Gram: columns B L^{-H}
    try:
        L = sla.cholesky(small, lower=True)
        q = to_dense(b @ sla.solve_triangular(L.conj().T, np.eye(L.shape[0]), lower=False))
    except sla.LinAlgError:
        evals, evecs = sla.eigh(small)
        keep = evals > (tol.rank_rel_tol ** 2) * max(evals[-1], 1e-300)
        if not np.all(keep):
            raise DegenerateSubspaceError("basis is rank deficient; cannot orthonormalize")
        q = to_dense(b @ (evecs / np.sqrt(evals)))
    return _fix_orientation(q)


def orthogonal_projection(target: Subspace, inner=None) -> np.ndarray:
    """Matrix of the orthogonal projection onto ``target``.

    Idempotent and self-adjoint with respect to the given inner product;
    raises :class:`DegenerateSubspaceError` for rank-deficient bases.
    """
    gram = _resolve_gram(inner if inner is not None else target.ambient)
    n = target.ambient_dim
    if target.dim == 0:
        return np.zeros((n, n))
    q = orthonormalize(target.basis, gram)
    if gram is None:
        return q @ q.conj().T
    return q @ to_dense(gram @ q).conj().T


def principal_angles(U: Subspace, V: Subspace, inner=None) -> np.ndarray:
    """Principal angles between two subspaces, nonincreasing, in [0, pi/2].

    Small angles are computed with the sine-based variant so that angles
    near zero are resolved to machine precision rather than sqrt(eps).
    All angles below tolerance certify equality of the subspaces.
    """
    if U.ambient_dim != V.ambient_dim:
        raise ContractViolationError("subspaces live in different ambient spaces")
    gram = _resolve_gram(inner if inner is not None else U.ambient)
    if U.dim == 0 or V.dim == 0:
        return np.zeros(0)
    qu = orthonormalize(U.basis, gram)
    qv = orthonormalize(V.basis, gram)
    wqv = qv if gram is None else to_dense(gram @ qv)
    c = qu.conj().T @ wqv
    cosines = np.clip(sla.svd(c, compute_uv=False), 0.0, 1.0)
    k = min(U.dim, V.dim)
    cosines = np.sort(cosines)[::-1][:k]
    # residual of V against U, measured in the inner product
    resid = qv - qu @ (qu.conj().T @ wqv)
    if gram is None:
        sines = sla.svd(resid, compute_uv=False)
    else:
        small = resid.conj().T @ to_dense(gram @ resid)
        small = 0.5 * (small + small.conj().T)
        sines = np.sqrt(np.clip(sla.eigvalsh(small), 0.0, None))[::-1]
    sines = np.clip(np.sort(sines)[::-1], 0.0, 1.0)
    sines = np.pad(sines, (0, max(0, k - sines.size)))[:k]
    angles = np.empty(k)
    for i in range(k):
        cosv = cosines[i]
        sinv = sines[k - 1 - i]  # largest cosine pairs with smallest sine
        if cosv ** 2 >= 0.5:
            angles[i] = np.arcsin(min(sinv, 1.0))
        else:
            angles[i] = np.arccos(cosv)
    return np.sort(angles)[::-1]


def observed_order(hs, defects) -> float:
    """Least-squares slope of log(defect) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    defects = np.asarray(defects, dtype=float)
    if np.any(defects <= 0):
        defects = np.maximum(defects, 1e-300)
    coeffs = np.polyfit(np.log(hs), np.log(defects), 1)
    return float(coeffs[0])


def operator_norm_estimate(A) -> float:
    """Cheap upper estimate of the spectral norm (max-row-sum based)."""
    if sp.issparse(A):
        a = abs(A)
        r = np.max(np.asarray(a.sum(axis=1)).ravel()) if A.shape[0] else 0.0
        c = np.max(np.asarray(a.sum(axis=0)).ravel()) if A.shape[1] else 0.0
        return float(np.sqrt(max(r, 1e-300) * max(c, 1e-300)))
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    r = np.max(np.sum(np.abs(A), axis=1))
    c = np.max(np.sum(np.abs(A), axis=0))
    return float(np.sqrt(r * c))
