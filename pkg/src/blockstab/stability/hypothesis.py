"""Structural checks on the damping operator and their consequences."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..linalg import (
    DEFAULT_POLICY,
    RankPolicy,
    SubspaceBasis,
    as_array,
    kernel_basis,
    orthogonal_complement,
    subspace_intersection,
)
from .resolvent import containment_residual


class HypothesisViolated(Exception):
    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        self.detail = detail
        super().__init__(f"validate_gamma failed ({clause}): {detail}")


class NoAngleFound(Exception):
    pass


@dataclass(frozen=True)
class GammaReport:
    """Outcome of :func:`validate_gamma`.

    ``clause`` names the first violated condition (``"off-diagonal"``,
    ``"accretive-U"``, ``"hermitian-perp"``, ``"nonnegative-perp"``) or is
    ``None`` when the structure holds.
    """

    passed: bool
    clause: str | None
    c: float
    offdiag: float
    hermitian_defect: float
    min_eig_perp: float
    im_norm_U: float
    message: str = ""

    def raise_if_failed(self):
        if not self.passed:
            raise HypothesisViolated(self.clause, self.message)


def default_U(gamma) -> SubspaceBasis:
    """Fallback decomposition when none is supplied.

    A Hermitian nonnegative ``gamma`` fits the structure with ``U = {0}``;
    anything else is tested against ``U = H0``.
    """
    g = as_array(gamma)
    n = g.shape[0]
    herm = np.linalg.norm(g - g.conj().T) <= 1e-12 * max(1.0, np.linalg.norm(g))
    if herm and np.linalg.eigvalsh(0.5 * (g + g.conj().T))[0] >= -1e-10:
        return SubspaceBasis(np.zeros((n, 0)), "H0")
    return SubspaceBasis(np.eye(n), "H0")


def validate_gamma(gamma, U_basis: SubspaceBasis | None = None, tol: float = 1e-10) -> GammaReport:
    """Check the block structure of ``gamma`` in ``U + U^perp`` coordinates.

    Requires vanishing couplings, ``Re gamma_U >= c > 0`` and
    ``gamma_{U^perp}`` Hermitian nonnegative.  Failures are returned, not
    raised; see :meth:`GammaReport.raise_if_failed`.
    """
    g = as_array(gamma)
    if U_basis is None:
        U_basis = default_U(g)
    U = U_basis.columns
    W = orthogonal_complement(U_basis).columns
    scale = max(1.0, float(np.linalg.norm(g, 2)))
    gUW = U.conj().T @ g @ W
    gWU = W.conj().T @ g @ U
    off = max(float(np.abs(gUW).max(initial=0.0)), float(np.abs(gWU).max(initial=0.0)))
    gU = U.conj().T @ g @ U
    gW = W.conj().T @ g @ W
    if gU.size:
        c = float(np.linalg.eigvalsh(0.5 * (gU + gU.conj().T))[0])
        im_norm = float(np.linalg.norm(0.5 * (gU - gU.conj().T), 2))
    else:
        c, im_norm = math.inf, 0.0
    herm = float(np.abs(gW - gW.conj().T).max(initial=0.0))
    lo = float(np.linalg.eigvalsh(0.5 * (gW + gW.conj().T))[0]) if gW.size else 0.0

    clause, msg = None, ""
    if off > tol * scale:
        clause, msg = "off-diagonal", f"coupling between U and U^perp of size {off:.3e}"
    elif gU.size and not c > tol:
        clause, msg = "accretive-U", f"Re gamma_U has smallest eigenvalue {c:.3e}"
    elif herm > tol * scale:
        clause, msg = "hermitian-perp", f"gamma on U^perp not Hermitian (defect {herm:.3e})"
    elif lo < -tol * scale:
        clause, msg = "nonnegative-perp", f"gamma on U^perp has eigenvalue {lo:.3e}"
    return GammaReport(clause is None, clause, c, off, herm, lo, im_norm, msg)


@dataclass(frozen=True)
class KernelIdentityReport:
    dim_plus: int
    dim_minus: int
    dim_intersection: int
    dim_oracle: int
    residuals: dict

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def ok(self) -> bool:
        d = {self.dim_plus, self.dim_minus, self.dim_intersection, self.dim_oracle}
        return len(d) == 1 and self.max_residual <= 1e-8


def kernel_identity_check(gamma, Askew, U_basis: SubspaceBasis | None = None,
                          policy: RankPolicy = DEFAULT_POLICY, skew_tol: float = 1e-10) -> KernelIdentityReport:
    """Compare ``ker(gamma + S)``, ``ker(gamma - S)`` and ``ker gamma & ker S``.

    ``S`` must be skew (``Re <Sx, x> = 0``).  The intersection is also
    recomputed as the null space of the stacked matrix ``[gamma; S]``, which
    does not go through :func:`subspace_intersection`.
    """
    g, S = as_array(gamma), as_array(Askew)
    if np.linalg.norm(S + S.conj().T) > skew_tol * max(1.0, np.linalg.norm(S)):
        raise ValueError("Askew is not skew-Hermitian")
    validate_gamma(g, U_basis).raise_if_failed()
    Kp = kernel_basis(g + S, policy)
    Km = kernel_basis(g - S, policy)
    X = subspace_intersection(kernel_basis(g, policy), kernel_basis(S, policy), policy)
    O = kernel_basis(np.vstack([g, S]), policy)
    res = {}
    names = {"plus": Kp, "minus": Km, "intersection": X, "oracle": O}
    keys = list(names)
    for a in keys:
        for b in keys:
            if a != b:
                res[f"{a}<={b}"] = containment_residual(names[a], names[b])
    return KernelIdentityReport(Kp.dim, Km.dim, X.dim, O.dim, res)


@dataclass(frozen=True)
class AccretivityCertificate:
    alpha: float
    c_tilde: float
    min_real_part: float
    sigma_min: float
    halvings: int

    @property
    def ok(self) -> bool:
        tol = 1e-10 * max(1.0, self.c_tilde)
        return self.min_real_part >= self.c_tilde - tol and self.sigma_min >= self.c_tilde - tol


def rotated_accretivity(gamma, lam: float, V_basis: SubspaceBasis,
                        U_basis: SubspaceBasis | None = None, max_halvings: int = 60) -> AccretivityCertificate:
    """Rotation angle and certified lower bound for ``i*lambda + V^* gamma V``.

    The angle starts at ``-sign(lambda) * pi/4`` and is halved until
    ``cos(a) c - |sin a| (|lambda| + ||Im gamma_U||) > 0``; then
    ``c_tilde = min(that bound, |sin a| |lambda|)`` bounds
    ``Re(e^{ia}(i*lambda + gamma))`` from below on all of ``H0``, hence on
    every compression.  The certificate is checked against dense
    eigenvalue and SVD computations of the compressed operator.
    """
    lam = float(lam)
    if lam == 0.0:
        raise ValueError("rotated_accretivity needs lambda != 0")
    g = as_array(gamma)
    rep = validate_gamma(g, U_basis)
    if not rep.passed:
        raise NoAngleFound(f"gamma violates the structure hypothesis: {rep.message}")
    U_dim = U_basis.dim if U_basis is not None else (0 if rep.c == math.inf else g.shape[0])
    n = g.shape[0]
    a = -math.copysign(math.pi / 4, lam)
    for k in range(max_halvings + 1):
        sa, ca = abs(math.sin(a)), math.cos(a)
        bound_U = ca * rep.c - sa * (abs(lam) + rep.im_norm_U) if U_dim else math.inf
        if bound_U > 0:
            break
        a *= 0.5
    else:
        raise NoAngleFound(
            f"no admissible angle after {max_halvings} halvings "
            f"(c={rep.c:.3e}, lambda={lam:g}, ||Im gamma_U||={rep.im_norm_U:.3e})"
        )
    bound_perp = sa * abs(lam) if U_dim < n else math.inf
    c_tilde = min(bound_U, bound_perp)
    V = V_basis.columns
    T = 1j * lam * np.eye(V.shape[1]) + V.conj().T @ g @ V
    R = np.exp(1j * a) * T
    min_re = float(np.linalg.eigvalsh(0.5 * (R + R.conj().T))[0]) if T.size else math.inf
    smin = float(np.linalg.svd(T, compute_uv=False)[-1]) if T.size else math.inf
    return AccretivityCertificate(a, c_tilde, min_re, smin, k)
