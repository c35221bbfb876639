"""Imaginary-axis diagnostics: resolvent margins, kernels, spectral gaps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..linalg import DEFAULT_POLICY, RankPolicy, SubspaceBasis, as_array, kernel_basis, orthogonal_complement


def default_lambda_grid(kmin: int = -6, kmax: int = 3) -> list[float]:
    """``{0} + {+-2^k : kmin <= k <= kmax}``, sorted."""
    pos = [2.0 ** k for k in range(kmin, kmax + 1)]
    return sorted([-p for p in pos] + [0.0] + pos)


@dataclass
class ResolventScan:
    lambdas: list
    margins: list
    kernel_dims: list
    cutoffs: list = field(default_factory=list)

    def __post_init__(self):
        if not (len(self.lambdas) == len(self.margins) == len(self.kernel_dims)):
            raise ValueError("scan columns must have equal length")

    def margin_at(self, lam: float) -> float:
        return self.margins[self.lambdas.index(lam)]

    def interior_margin(self) -> float:
        """Smallest margin over the nonzero frequencies."""
        vals = [m for l, m in zip(self.lambdas, self.margins) if l != 0.0]
        return min(vals) if vals else float("nan")


def _real_if_possible(M: np.ndarray) -> np.ndarray:
    return M.real if not np.any(M.imag) else M


def resolvent_scan(A, lambdas, policy: RankPolicy = DEFAULT_POLICY) -> ResolventScan:
    """``sigma_min(i*lambda - A)`` and the numerical kernel dimension per lambda.

    The rank cutoff is taken relative to ``max(sigma_max, 1)`` so that the
    zero matrix has a full kernel rather than an undefined one.
    """
    M = as_array(A)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("resolvent_scan needs a square operator")
    lams, margins, kdims, cuts = [], [], [], []
    eye = np.eye(n)
    for lam in lambdas:
        lam = float(lam)
        R = 1j * lam * eye - M if lam != 0.0 else _real_if_possible(-M)
        s = np.linalg.svd(R, compute_uv=False)
        cut = policy.cutoff(max(float(s[0]), 1.0))
        lams.append(lam)
        margins.append(float(s[-1]))
        kdims.append(int(np.count_nonzero(s < cut)))
        cuts.append(cut)
    return ResolventScan(lams, margins, kdims, cuts)


def restrict_to_kernel_complement(A, policy: RankPolicy = DEFAULT_POLICY):
    """Compress ``A`` onto ``ker(A)^perp``.

    Because ``ker A = ker A^*`` for the systems considered here, ``ker(A)^perp``
    is invariant and the compression is the restriction ``A_0``.  Returns
    ``(A0, Q, K)`` with ``Q`` a frame of ``ker(A)^perp`` and ``K`` of ``ker A``.
    """
    M = as_array(A)
    K = kernel_basis(M, policy)
    Q = orthogonal_complement(K)
    q = Q.columns
    return q.conj().T @ M @ q, Q, K


def spectral_abscissa(A) -> float:
    """``max Re(spectrum)`` from a dense eigenvalue computation."""
    M = _real_if_possible(as_array(A))
    if M.size == 0:
        return float("-inf")
    w = sla.eigvals(M, check_finite=False)
    return float(np.max(w.real))


def spectral_gap(A) -> float:
    """``-spectral_abscissa(A)``; positive means uniform exponential decay."""
    return -spectral_abscissa(A)


@dataclass(frozen=True)
class KernelAdjointReport:
    dim_ker: int
    dim_ker_adj: int
    residual_ker_in_adj: float
    residual_adj_in_ker: float

    @property
    def ok(self) -> bool:
        return (self.dim_ker == self.dim_ker_adj
                and self.residual_ker_in_adj <= 1e-8 and self.residual_adj_in_ker <= 1e-8)


def containment_residual(X: SubspaceBasis, Y: SubspaceBasis) -> float:
    """``||(I - P_Y) X||_2``: zero iff ``span X`` lies in ``span Y``."""
    x, y = X.columns, Y.columns
    if x.shape[1] == 0:
        return 0.0
    R = x - y @ (y.conj().T @ x) if y.shape[1] else x
    return float(np.linalg.norm(R, 2))


def kernel_adjoint_check(A, policy: RankPolicy = DEFAULT_POLICY) -> KernelAdjointReport:
    M = as_array(A)
    K = kernel_basis(M, policy)
    Ks = kernel_basis(M.conj().T, policy)
    return KernelAdjointReport(K.dim, Ks.dim, containment_residual(K, Ks), containment_residual(Ks, K))
