"""Dense complex linear algebra kernel.

Every factorization here is a deterministic LAPACK call (no randomized
sketching), so repeated runs produce bit-identical output.  Rank decisions go
through :class:`RankPolicy`; at finite dimension every range is closed, so the
interesting quantity is always the explicit singular-value margin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp


class LinalgError(Exception):
    """Base class for numerical failures raised by the kernel."""


class NotHermitian(LinalgError):
    pass


class NotPositiveDefinite(LinalgError):
    pass


class SpaceMismatch(LinalgError):
    pass


class SingularBlock(LinalgError):
    def __init__(self, which: str, sigma_min: float, cutoff: float):
        self.which = which
        self.sigma_min = sigma_min
        self.cutoff = cutoff
        super().__init__(
            f"block {which} is numerically singular: sigma_min={sigma_min:.3e} "
            f"<= cutoff={cutoff:.3e}"
        )


class DegenerateTolerance(UserWarning):
    """A singular value sits inside the +-10% band around the rank cutoff."""


# name used by frame construction code
AmbiguousRank = DegenerateTolerance


@dataclass(frozen=True)
class RankPolicy:
    """Decides which singular values count as zero.

    A singular value ``s`` is zero when ``s < max(relative_threshold * smax,
    absolute_floor)``.  Values within ``ambiguity`` (relative) of that cutoff
    trigger a :class:`DegenerateTolerance` warning.
    """

    relative_threshold: float = 1e-10
    absolute_floor: float = 1e-14
    ambiguity: float = 0.1

    def __post_init__(self):
        if not (self.relative_threshold > 0 and self.absolute_floor > 0):
            raise ValueError("RankPolicy thresholds must be strictly positive")

    def cutoff(self, scale: float) -> float:
        return max(self.relative_threshold * float(scale), self.absolute_floor)

    def rank(self, s: np.ndarray, scale: float | None = None) -> tuple[int, float, bool]:
        """Return ``(rank, cutoff, ambiguous)`` for descending singular values ``s``."""
        s = np.asarray(s, dtype=float)
        if scale is None:
            scale = s[0] if s.size else 0.0
        cut = self.cutoff(scale)
        r = int(np.count_nonzero(s >= cut))
        lo, hi = (1 - self.ambiguity) * cut, (1 + self.ambiguity) * cut
        ambiguous = bool(np.any((s > lo) & (s < hi)))
        return r, cut, ambiguous


DEFAULT_POLICY = RankPolicy()


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A complex matrix tagged with domain and codomain space labels.

    ``entries`` is a dense ``complex128`` array or a scipy sparse matrix of the
    same dtype (grid operators are assembled sparse).
    """

    entries: np.ndarray | sp.spmatrix
    domain: str = "X"
    codomain: str = "X"

    def __post_init__(self):
        e = self.entries
        if sp.issparse(e):
            e = sp.csr_matrix(e, dtype=complex)
            data = e.data
        else:
            e = np.array(e, dtype=complex, copy=True)
            if e.ndim != 2:
                raise ValueError(f"LinearMap needs a 2-d array, got shape {e.shape}")
            data = e
        if not np.all(np.isfinite(data)):
            raise ValueError("LinearMap entries must be finite")
        object.__setattr__(self, "entries", e)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.entries)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.entries.toarray()
        return self.entries

    @property
    def H(self) -> "LinearMap":
        e = self.entries
        adj = e.conj().T.tocsr() if sp.issparse(e) else e.conj().T
        return LinearMap(adj, self.codomain, self.domain)

    def __matmul__(self, other):
        if isinstance(other, LinearMap):
            if other.codomain != self.domain:
                raise SpaceMismatch(
                    f"cannot compose {self.domain}->{self.codomain} after "
                    f"{other.domain}->{other.codomain}"
                )
            return LinearMap(self.entries @ other.entries, other.domain, self.codomain)
        return self.entries @ other

    def __repr__(self) -> str:
        kind = "sparse" if self.is_sparse else "dense"
        return f"LinearMap({self.domain}->{self.codomain}, shape={self.shape}, {kind})"


def as_array(M) -> np.ndarray:
    """Dense complex array view of a LinearMap, sparse matrix or array."""
    if isinstance(M, LinearMap):
        return M.dense()
    if sp.issparse(M):
        return M.toarray().astype(complex)
    return np.asarray(M, dtype=complex)


def as_map(M, domain: str = "X", codomain: str | None = None) -> LinearMap:
    if isinstance(M, LinearMap):
        return M
    return LinearMap(M, domain, domain if codomain is None else codomain)


def identity(n: int, label: str = "X") -> LinearMap:
    return LinearMap(np.eye(n), label, label)


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal column frame of a subspace of the space ``space_label``."""

    columns: np.ndarray
    space_label: str = "X"
    tol_used: float = 0.0
    ambiguous: bool = False
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        q = np.asarray(self.columns)
        if q.ndim != 2:
            raise ValueError("SubspaceBasis columns must be 2-d")
        if q.shape[1] > q.shape[0]:
            raise ValueError("more basis vectors than ambient dimension")
        object.__setattr__(self, "columns", q)

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def orthonormality_defect(self) -> float:
        q = self.columns
        return float(np.linalg.norm(q.conj().T @ q - np.eye(q.shape[1])))

    def projector(self) -> np.ndarray:
        q = self.columns
        return q @ q.conj().T

    def project(self, x: np.ndarray) -> np.ndarray:
        q = self.columns
        return q @ (q.conj().T @ x)

    def complement(self) -> "SubspaceBasis":
        return orthogonal_complement(self)

    def embedding(self, domain: str | None = None) -> LinearMap:
        """The inclusion map from coordinates into the ambient space."""
        return LinearMap(self.columns, domain or f"{self.space_label}|sub", self.space_label)


def _svd(M: np.ndarray, full: bool):
    # real input takes the (much faster) real LAPACK path; frames stay real
    if np.iscomplexobj(M) and not np.any(M.imag):
        M = M.real
    return np.linalg.svd(M, full_matrices=full)


def _warn_ambiguous(what: str, cut: float):
    warnings.warn(
        f"{what}: singular value within 10% of rank cutoff {cut:.3e}; rank is ambiguous",
        DegenerateTolerance,
        stacklevel=3,
    )


def split_range_kernel(M, policy: RankPolicy = DEFAULT_POLICY, labels: tuple[str, str] | None = None):
    """One full SVD giving all four fundamental subspaces of ``M``.

    Returns ``(ran_M, ker_MH, ran_MH, ker_M, s, rank)``: the first two live in
    the codomain, the last two in the domain.  ``s`` holds all singular
    values in descending order.
    """
    if isinstance(M, LinearMap):
        dom, cod = M.domain, M.codomain
    else:
        dom, cod = labels or ("X", "X")
    A = as_array(M)
    m, n = A.shape
    if A.size == 0:
        s = np.zeros(0)
        r, cut, amb = 0, policy.absolute_floor, False
        U, Vh = np.eye(m, dtype=complex), np.eye(n, dtype=complex)
    else:
        U, s, Vh = _svd(A, full=True)
        r, cut, amb = policy.rank(s)
    if amb:
        _warn_ambiguous("split_range_kernel", cut)
    V = Vh.conj().T
    mk = dict(tol_used=cut, ambiguous=amb, singular_values=s)
    return (
        SubspaceBasis(U[:, :r], cod, **mk),
        SubspaceBasis(U[:, r:], cod, **mk),
        SubspaceBasis(V[:, :r], dom, **mk),
        SubspaceBasis(V[:, r:], dom, **mk),
        s,
        r,
    )


def range_basis(M, policy: RankPolicy = DEFAULT_POLICY) -> SubspaceBasis:
    """Orthonormal basis of the numerical range of ``M``."""
    cod = M.codomain if isinstance(M, LinearMap) else "X"
    A = as_array(M)
    if A.size == 0:
        return SubspaceBasis(np.zeros((A.shape[0], 0), complex), cod)
    U, s, _ = _svd(A, full=False)
    r, cut, amb = policy.rank(s)
    if amb:
        _warn_ambiguous("range_basis", cut)
    return SubspaceBasis(U[:, :r], cod, cut, amb, s)


def kernel_basis(M, policy: RankPolicy = DEFAULT_POLICY) -> SubspaceBasis:
    """Orthonormal basis of the numerical kernel of ``M``."""
    dom = M.domain if isinstance(M, LinearMap) else "X"
    A = as_array(M)
    n = A.shape[1]
    if A.size == 0:
        return SubspaceBasis(np.eye(n, dtype=complex), dom)
    _, s, Vh = _svd(A, full=True)
    r, cut, amb = policy.rank(s)
    if amb:
        _warn_ambiguous("kernel_basis", cut)
    return SubspaceBasis(Vh[r:].conj().T, dom, cut, amb, s)


def orthogonal_complement(B: SubspaceBasis) -> SubspaceBasis:
    q = B.columns
    m, k = q.shape
    if k == 0:
        return SubspaceBasis(np.eye(m, dtype=q.dtype), B.space_label)
    if k == m:
        return SubspaceBasis(np.zeros((m, 0), dtype=q.dtype), B.space_label)
    # trailing left singular vectors of an orthonormal frame span its complement
    U, _, _ = np.linalg.svd(q, full_matrices=True)
    return SubspaceBasis(U[:, k:], B.space_label, B.tol_used)


def orthonormalize(X: np.ndarray, label: str = "X", policy: RankPolicy = DEFAULT_POLICY) -> SubspaceBasis:
    """Orthonormal basis of the span of the columns of ``X``.

    ``X`` is kept in its own dtype, so real frames stay real.
    """
    X = np.asarray(X)
    m, k = X.shape
    if k == 0:
        return SubspaceBasis(np.zeros((m, 0), dtype=X.dtype), label)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    r, cut, amb = policy.rank(s)
    return SubspaceBasis(U[:, :r], label, cut, amb, s)


def subspace_sum(B1: SubspaceBasis, B2: SubspaceBasis, policy: RankPolicy = DEFAULT_POLICY) -> SubspaceBasis:
    if B1.space_label != B2.space_label:
        raise SpaceMismatch(f"{B1.space_label} vs {B2.space_label}")
    return orthonormalize(np.hstack([B1.columns, B2.columns]), B1.space_label, policy)


def subspace_intersection(B1: SubspaceBasis, B2: SubspaceBasis, policy: RankPolicy = DEFAULT_POLICY) -> SubspaceBasis:
    """Orthonormal basis of ``span(B1) & span(B2)``.

    The intersection is the annihilator of ``B1^perp + B2^perp``.  Rather than
    forming both complements explicitly (an ``m x m`` problem) we use the
    equivalent test ``x in B1`` and ``(I - P2) x = 0``: the singular values of
    ``(I - P2) B1`` are the sines of the principal angles, and their numerical
    kernel gives exactly the vectors annihilated by ``B2^perp`` inside ``B1``.
    Singular values are measured on the unit scale of orthonormal frames.
    """
    if B1.space_label != B2.space_label:
        raise SpaceMismatch(f"{B1.space_label} vs {B2.space_label}")
    if B1.ambient_dim != B2.ambient_dim:
        raise SpaceMismatch("ambient dimensions differ")
    if B1.dim > B2.dim:
        B1, B2 = B2, B1
    q1, q2 = B1.columns, B2.columns
    dtype = np.result_type(q1, q2)
    m = B1.ambient_dim
    if B1.dim == 0 or B2.dim == 0:
        return SubspaceBasis(np.zeros((m, 0), dtype=dtype), B1.space_label)
    W = q1 - q2 @ (q2.conj().T @ q1)
    _, s, Vh = np.linalg.svd(W, full_matrices=True)
    cut = policy.cutoff(1.0)
    rank = int(np.count_nonzero(s >= cut))
    amb = bool(np.any((s > (1 - policy.ambiguity) * cut) & (s < (1 + policy.ambiguity) * cut)))
    if amb:
        _warn_ambiguous("subspace_intersection", cut)
    Y = Vh[rank:].conj().T
    X = q1 @ Y
    # re-orthonormalize to clean the O(eps) drift of q1 @ Y
    Q = np.linalg.qr(X)[0] if X.shape[1] else X
    return SubspaceBasis(Q, B1.space_label, cut, amb, s)


class SqrtPair(NamedTuple):
    root: LinearMap
    inverse: LinearMap


def is_hermitian(A: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = max(np.linalg.norm(A), 1.0)
    return float(np.linalg.norm(A - A.conj().T)) <= rtol * scale


def hermitian_sqrt(M, policy: RankPolicy = DEFAULT_POLICY) -> SqrtPair:
    """Positive square root of a Hermitian positive definite map and its inverse."""
    Mm = as_map(M)
    A = Mm.dense()
    if A.shape[0] != A.shape[1] or not is_hermitian(A):
        raise NotHermitian("hermitian_sqrt needs a square Hermitian matrix")
    if np.count_nonzero(A - np.diag(np.diag(A))) == 0:
        w = np.diag(A).real
        if w.min() < policy.absolute_floor:
            raise NotPositiveDefinite(f"smallest eigenvalue {w.min():.3e} below floor")
        r = np.sqrt(w)
        root, inv = np.diag(r), np.diag(1.0 / r)
    else:
        w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
        if w[0] < policy.absolute_floor:
            raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} below floor")
        r = np.sqrt(w)
        root = (V * r) @ V.conj().T
        inv = (V / r) @ V.conj().T
        root = 0.5 * (root + root.conj().T)
        inv = 0.5 * (inv + inv.conj().T)
    return SqrtPair(
        LinearMap(root, Mm.domain, Mm.codomain),
        LinearMap(inv, Mm.codomain, Mm.domain),
    )


def singular_values(M) -> np.ndarray:
    A = as_array(M)
    if A.size == 0:
        return np.zeros(0)
    if not np.any(A.imag):
        A = A.real
    return np.linalg.svd(A, compute_uv=False)


def min_singular_value(M) -> float:
    """Smallest singular value from a full dense SVD."""
    s = singular_values(M)
    if s.size == 0:
        raise ValueError("min_singular_value of an empty map")
    return float(s[-1])


def block_inverse_antitriangular(A, B, C, policy: RankPolicy = DEFAULT_POLICY) -> LinearMap:
    """Inverse of ``[[A, B], [C, 0]]`` with ``B`` and ``C`` invertible.

    Uses the closed form ``[[0, C^-1], [B^-1, -B^-1 A C^-1]]``.
    """
    a, b, c = as_array(A), as_array(B), as_array(C)
    n0 = a.shape[0]
    if a.shape != (n0, n0) or b.shape[0] != n0 or c.shape[1] != n0 or b.shape[1] != c.shape[0]:
        raise SpaceMismatch(f"non-conformal blocks A{a.shape} B{b.shape} C{c.shape}")
    for name, blk in (("B", b), ("C", c)):
        if blk.shape[0] != blk.shape[1]:
            raise SingularBlock(name, 0.0, policy.absolute_floor)
        s = np.linalg.svd(blk, compute_uv=False)
        cut = policy.cutoff(s[0]) if s.size else policy.absolute_floor
        if s.size and s[-1] < cut:
            raise SingularBlock(name, float(s[-1]), cut)
    c_inv = np.linalg.inv(c)
    b_inv = np.linalg.inv(b)
    n1 = b.shape[1]
    out = np.zeros((n0 + n1, n0 + n1), dtype=complex)
    out[:n0, n0:] = c_inv
    out[n0:, :n0] = b_inv
    out[n0:, n0:] = -b_inv @ a @ c_inv
    return LinearMap(out)


def quadratic_form_real_parts(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``Re <A x, x> / ||x||^2`` for every column ``x`` of ``X``."""
    AX = A @ X
    num = np.real(np.einsum("ij,ij->j", X.conj(), AX))
    return num / np.real(np.einsum("ij,ij->j", X.conj(), X))
