"""Discrete Helmholtz frames for an operator pair ``(C, C*)``.

A single SVD ``C = U S V^H`` gives all four fundamental subspaces:

    ran C  = U[:, :r]     ker C* = U[:, r:]     (in H1)
    ran C* = V[:, :r]     ker C  = V[:, r:]     (in H0)

and the reduced operator ``iota_1^* C iota_0`` is exactly ``diag(S[:r])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_POLICY,
    LinearMap,
    RankPolicy,
    SpaceMismatch,
    SubspaceBasis,
    as_array,
    split_range_kernel,
)


@dataclass(frozen=True, eq=False)
class HelmholtzFrame:
    """Orthonormal frames of ``H0 = ran C* + ker C`` and ``H1 = ran C + ker C*``.

    Attributes
    ----------
    ran_Cstar, ker_C : SubspaceBasis
        Frames in ``H0``; their columns are the embeddings ``iota_0``, ``kappa_0``.
    ran_C, ker_Cstar : SubspaceBasis
        Frames in ``H1``; embeddings ``iota_1``, ``kappa_1``.
    margin_C, margin_Cstar : float
        Smallest retained singular value of ``C`` (and of ``C*``; they coincide).
    singular_values : ndarray
        All singular values of ``C``.
    """

    ran_Cstar: SubspaceBasis
    ker_C: SubspaceBasis
    ran_C: SubspaceBasis
    ker_Cstar: SubspaceBasis
    margin_C: float
    margin_Cstar: float
    singular_values: np.ndarray
    rank: int
    ambiguous: bool = False

    @property
    def iota0(self) -> np.ndarray:
        return self.ran_Cstar.columns

    @property
    def kappa0(self) -> np.ndarray:
        return self.ker_C.columns

    @property
    def iota1(self) -> np.ndarray:
        return self.ran_C.columns

    @property
    def kappa1(self) -> np.ndarray:
        return self.ker_Cstar.columns

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(dim ran C*, dim ran C, dim ker C)``: block sizes of B(lambda)."""
        return self.ran_Cstar.dim, self.ran_C.dim, self.ker_C.dim

    def completeness_defect(self) -> tuple[float, float]:
        """Frobenius defects of ``ii* + kk* = I`` on ``H0`` and on ``H1``."""
        i0, k0, i1, k1 = self.iota0, self.kappa0, self.iota1, self.kappa1
        d0 = np.linalg.norm(i0 @ i0.conj().T + k0 @ k0.conj().T - np.eye(i0.shape[0]))
        d1 = np.linalg.norm(i1 @ i1.conj().T + k1 @ k1.conj().T - np.eye(i1.shape[0]))
        return float(d0), float(d1)


def build_frame(C, policy: RankPolicy = DEFAULT_POLICY) -> HelmholtzFrame:
    """Helmholtz frame of ``C`` from one full SVD.

    Ambiguous rank decisions emit :class:`~blockstab.linalg.AmbiguousRank`
    (a warning) and are recorded on the frame.
    """
    C = C if isinstance(C, LinearMap) else LinearMap(C, "H0", "H1")
    ran_C, ker_Cs, ran_Cs, ker_C, s, r = split_range_kernel(C, policy)
    margin = float(s[r - 1]) if r > 0 else 0.0
    return HelmholtzFrame(
        ran_Cstar=ran_Cs,
        ker_C=ker_C,
        ran_C=ran_C,
        ker_Cstar=ker_Cs,
        margin_C=margin,
        margin_Cstar=margin,
        singular_values=s,
        rank=r,
        ambiguous=ran_C.ambiguous,
    )


def compress(M, left: SubspaceBasis, right: SubspaceBasis) -> LinearMap:
    """``L^H M R`` for orthonormal frames ``L`` (codomain) and ``R`` (domain)."""
    if isinstance(M, LinearMap):
        if M.codomain != left.space_label or M.domain != right.space_label:
            raise SpaceMismatch(
                f"cannot compress {M.domain}->{M.codomain} between "
                f"{right.space_label} and {left.space_label}"
            )
        Mm = M.entries
    else:
        Mm = np.asarray(M)
    L, R = left.columns, right.columns
    if Mm.shape != (L.shape[0], R.shape[0]):
        raise SpaceMismatch(f"shape {Mm.shape} vs frames {L.shape[0]}x{R.shape[0]}")
    out = L.conj().T @ np.asarray(Mm @ R)
    return LinearMap(
        np.asarray(out, dtype=complex),
        f"{right.space_label}|sub",
        f"{left.space_label}|sub",
    )


@dataclass(frozen=True)
class MarginReport:
    margin: float
    zero_operator: bool
    rank: int
    dim: int


def closed_range_report(gamma, frame: HelmholtzFrame, policy: RankPolicy = DEFAULT_POLICY) -> MarginReport:
    """Smallest nonzero singular value of ``kappa_0^* gamma kappa_0``."""
    k = frame.ker_C
    if k.dim == 0:
        return MarginReport(0.0, True, 0, 0)
    g = as_array(gamma)
    K = k.columns
    red = K.conj().T @ (g @ K)
    s = np.linalg.svd(red, compute_uv=False)
    if s[0] == 0.0:
        return MarginReport(0.0, True, 0, k.dim)
    r, _, _ = policy.rank(s)
    if r == 0:
        return MarginReport(0.0, True, 0, k.dim)
    return MarginReport(float(s[r - 1]), False, r, k.dim)


def closed_range_margin(gamma, frame: HelmholtzFrame, policy: RankPolicy = DEFAULT_POLICY) -> float:
    """Closed-range margin of the damping seen by ``ker C``.

    Zero means the compressed operator vanishes identically.
    """
    return closed_range_report(gamma, frame, policy).margin
