"""Block operator assembly for the damped system

    (alpha u)' = -gamma u + C* v,        (beta v)' = -C u,

its normalized form, the shifted operator ``B(lambda)`` in Helmholtz frame
coordinates, and the Schur eliminations used to analyse its range.

Frame coordinates are ``(x1, x2, x3) = (iota_0^* u, iota_1^* v, kappa_0^* u)``
on ``ran(C*) + ran(C) + ker(C)``.  In these coordinates ``B(lambda)`` is the
matrix of ``i*lambda - A`` restricted to the state space ``H0 + ran(C)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .helmholtz import HelmholtzFrame, build_frame
from .linalg import (
    DEFAULT_POLICY,
    LinalgError,
    LinearMap,
    RankPolicy,
    SqrtPair,
    as_array,
    block_inverse_antitriangular,
    hermitian_sqrt,
)


class NotNormalized(LinalgError):
    pass


class ShiftSingular(LinalgError):
    def __init__(self, lam: float, sigma_min: float):
        self.lam = lam
        self.sigma_min = sigma_min
        super().__init__(
            f"i*lambda + kappa0^* gamma kappa0 is numerically singular at "
            f"lambda={lam:g} (sigma_min={sigma_min:.3e})"
        )


class NotDissipative(LinalgError):
    pass


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """Data of the damped system.

    ``C`` maps ``H0 -> H1``; ``gamma`` and ``alpha`` act on ``H0``, ``beta`` on
    ``H1``.  A normalized system has ``alpha = beta = I``; it keeps the square
    roots of the original coefficients in ``scaling`` so that states can be
    mapped back to physical variables.
    """

    C: LinearMap
    gamma: LinearMap
    alpha: LinearMap
    beta: LinearMap
    normalized: bool = False
    scaling: tuple[SqrtPair, SqrtPair] | None = None
    label: str = ""

    def __post_init__(self):
        n1, n0 = self.C.shape
        if self.gamma.shape != (n0, n0) or self.alpha.shape != (n0, n0):
            raise ValueError("gamma and alpha must be square on H0")
        if self.beta.shape != (n1, n1):
            raise ValueError("beta must be square on H1")
        g = as_array(self.gamma)
        re = 0.5 * (g + g.conj().T)
        lo = float(np.linalg.eigvalsh(re)[0]) if n0 else 0.0
        if lo < -1e-10 * max(1.0, float(np.abs(g).max(initial=0.0))):
            raise NotDissipative(f"Re gamma has eigenvalue {lo:.3e} < 0")

    @property
    def n0(self) -> int:
        return self.C.shape[1]

    @property
    def n1(self) -> int:
        return self.C.shape[0]

    @classmethod
    def from_arrays(cls, C, gamma, alpha=None, beta=None, label: str = "") -> "BlockSystem":
        C = np.asarray(C.toarray() if hasattr(C, "toarray") else C, dtype=complex)
        n1, n0 = C.shape
        alpha = np.eye(n0) if alpha is None else alpha
        beta = np.eye(n1) if beta is None else beta
        return cls(
            LinearMap(C, "H0", "H1"),
            LinearMap(gamma, "H0", "H0"),
            LinearMap(alpha, "H0", "H0"),
            LinearMap(beta, "H1", "H1"),
            label=label,
        )


def normalize(sys: BlockSystem) -> BlockSystem:
    """Change variables so that ``alpha = beta = I``.

    ``C <- beta^{-1/2} C alpha^{-1/2}`` and
    ``gamma <- alpha^{-1/2} gamma alpha^{-1/2}``.
    """
    if sys.normalized:
        return sys
    sa = hermitian_sqrt(sys.alpha)
    sb = hermitian_sqrt(sys.beta)
    ai, bi = sa.inverse.dense(), sb.inverse.dense()
    C = bi @ as_array(sys.C) @ ai
    g = ai @ as_array(sys.gamma) @ ai
    return BlockSystem(
        LinearMap(C, "H0", "H1"),
        LinearMap(g, "H0", "H0"),
        LinearMap(np.eye(sys.n0), "H0", "H0"),
        LinearMap(np.eye(sys.n1), "H1", "H1"),
        normalized=True,
        scaling=(sa, sb),
        label=sys.label,
    )


def _require_normalized(sys: BlockSystem):
    if not sys.normalized:
        raise NotNormalized("operation needs a normalized system; call normalize() first")


def assemble_A(sys: BlockSystem, frame: HelmholtzFrame | None = None) -> LinearMap:
    """Generator ``A = -[[gamma, 0], [0, 0]] - [[0, -C*], [C, 0]]``.

    Without a frame ``A`` acts on ``H0 + H1``.  With a frame it is returned on
    the reduced state space ``H0 + ran(C)`` in coordinates ``(u, iota_1^* v)``.
    """
    _require_normalized(sys)
    C = as_array(sys.C)
    g = as_array(sys.gamma)
    n0 = sys.n0
    if frame is None:
        n1 = sys.n1
        A = np.zeros((n0 + n1, n0 + n1), dtype=complex)
        A[:n0, :n0] = -g
        A[:n0, n0:] = C.conj().T
        A[n0:, :n0] = -C
        return LinearMap(A, "H", "H")
    i1 = frame.iota1
    r = i1.shape[1]
    Ci = i1.conj().T @ C  # ran(C)-coordinates of C
    A = np.zeros((n0 + r, n0 + r), dtype=complex)
    A[:n0, :n0] = -g
    A[:n0, n0:] = Ci.conj().T
    A[n0:, :n0] = -Ci
    return LinearMap(A, "Hred", "Hred")


def reduced_embedding(sys: BlockSystem, frame: HelmholtzFrame) -> np.ndarray:
    """Isometry from reduced coordinates ``(u, iota_1^* v)`` into ``H0 + H1``."""
    n0, n1 = sys.n0, sys.n1
    r = frame.iota1.shape[1]
    J = np.zeros((n0 + n1, n0 + r), dtype=complex)
    J[:n0, :n0] = np.eye(n0)
    J[n0:, n0:] = frame.iota1
    return J


@dataclass(frozen=True, eq=False)
class ShiftedSystem:
    """``B(lambda)`` in frame coordinates plus the Schur transforms.

    ``T1``, ``T2`` and ``X_inv = (i*lambda + kappa_0^* gamma kappa_0)^{-1}``
    are ``None`` at ``lambda = 0``.
    """

    lam: float
    B: LinearMap
    T1: LinearMap | None
    T2: LinearMap | None
    dims: tuple[int, int, int]
    blocks: dict
    X_inv: np.ndarray | None = None


def _frame_blocks(sys: BlockSystem, frame: HelmholtzFrame) -> dict:
    g = as_array(sys.gamma)
    C = as_array(sys.C)
    i0, k0, i1 = frame.iota0, frame.kappa0, frame.iota1
    return {
        "g00": i0.conj().T @ g @ i0,
        "g02": i0.conj().T @ g @ k0,
        "g20": k0.conj().T @ g @ i0,
        "g22": k0.conj().T @ g @ k0,
        "c10": i1.conj().T @ C @ i0,            # iota_1^* C iota_0
        "cs01": i0.conj().T @ C.conj().T @ i1,  # iota_0^* C* iota_1
    }


def _place(dims, entries: dict) -> np.ndarray:
    n = sum(dims)
    off = np.cumsum((0,) + tuple(dims))
    M = np.zeros((n, n), dtype=complex)
    for (i, j), blk in entries.items():
        M[off[i]:off[i + 1], off[j]:off[j + 1]] = blk
    return M


def assemble_B(sys: BlockSystem, frame: HelmholtzFrame, lam: float,
               policy: RankPolicy = DEFAULT_POLICY) -> ShiftedSystem:
    """Assemble ``B(lambda)`` and, for ``lambda != 0``, the transforms ``T1, T2``."""
    _require_normalized(sys)
    lam = float(lam)
    dims = frame.dims
    b = _frame_blocks(sys, frame)
    n = sum(dims)
    B = 1j * lam * np.eye(n) + _place(dims, {
        (0, 0): b["g00"], (0, 2): b["g02"], (2, 0): b["g20"], (2, 2): b["g22"],
        (0, 1): -b["cs01"], (1, 0): b["c10"],
    })
    T1 = T2 = X_inv = None
    if lam != 0.0:
        X = 1j * lam * np.eye(dims[2]) + b["g22"]
        if dims[2]:
            s = np.linalg.svd(X, compute_uv=False)
            if s[-1] < policy.absolute_floor:
                raise ShiftSingular(lam, float(s[-1]))
            X_inv = np.linalg.inv(X)
        else:
            X_inv = np.zeros((0, 0), dtype=complex)
        eye = {(k, k): np.eye(d) for k, d in enumerate(dims)}
        T1 = _place(dims, {**eye, (0, 2): -b["g02"] @ X_inv})
        T2 = _place(dims, {**eye, (2, 0): -X_inv @ b["g20"]})
        T1, T2 = LinearMap(T1, "B", "B"), LinearMap(T2, "B", "B")
    return ShiftedSystem(lam, LinearMap(B, "B", "B"), T1, T2, dims, b, X_inv)


@dataclass(frozen=True)
class SchurReport:
    residual: float
    gamma_schur: np.ndarray
    decoupled33: np.ndarray
    expected: np.ndarray


def schur_identity_check(shift: ShiftedSystem) -> SchurReport:
    """Compare ``T1 B T2`` against the decoupled form

    ``i*lambda + diag(gamma_schur, 0, kappa_0^* gamma kappa_0) + C-blocks``
    with ``gamma_schur = g00 - g02 (i*lambda + g22)^{-1} g20``.
    """
    if shift.lam == 0.0 or shift.T1 is None:
        raise ValueError("the Schur identity is stated for lambda != 0; use schur_reduce_B0")
    b, dims = shift.blocks, shift.dims
    gs = b["g00"] - b["g02"] @ shift.X_inv @ b["g20"]
    expected = 1j * shift.lam * np.eye(sum(dims)) + _place(dims, {
        (0, 0): gs, (2, 2): b["g22"], (0, 1): -b["cs01"], (1, 0): b["c10"],
    })
    got = shift.T1.dense() @ shift.B.dense() @ shift.T2.dense()
    off = np.cumsum((0,) + tuple(dims))
    return SchurReport(
        residual=float(np.linalg.norm(got - expected)),
        gamma_schur=gs,
        decoupled33=got[off[2]:, off[2]:],
        expected=expected,
    )


@dataclass(frozen=True)
class B0Report:
    d: LinearMap
    a_inv: np.ndarray
    a_inv_11_norm: float       # from an independent numerical inverse of a
    inverse_residual: float    # closed-form block inverse vs a
    schur_deviation: float     # || (d - c a^{-1} b) - d ||


def schur_reduce_B0(sys: BlockSystem, frame: HelmholtzFrame, policy: RankPolicy = DEFAULT_POLICY,
                    return_report: bool = False):
    """Reduce ``B(0)`` to ``d = kappa_0^* gamma kappa_0``.

    ``B(0) = [[a, b], [c, d]]`` with ``a`` acting on ``ran(C*) + ran(C)``.  The
    anti-triangular inverse of ``a`` has a zero ``(1,1)`` block, and since ``b``
    and ``c`` only touch the first component, ``c a^{-1} b = 0``.  The zero
    block is re-measured on an independent LU inverse of ``a`` rather than
    read off the closed form.
    """
    _require_normalized(sys)
    b = _frame_blocks(sys, frame)
    n0r, n1r, nk = frame.dims
    a_inv = block_inverse_antitriangular(b["g00"], -b["cs01"], b["c10"], policy).dense()
    a = np.block([[b["g00"], -b["cs01"]], [b["c10"], np.zeros((n1r, n1r))]])
    inv_res = float(np.linalg.norm(a @ a_inv - np.eye(n0r + n1r))) if a.size else 0.0
    a_num = np.linalg.inv(a) if a.size else a
    a11 = float(np.linalg.norm(a_num[:n0r, :n0r])) if a.size else 0.0
    bb = np.vstack([b["g02"], np.zeros((n1r, nk))])
    cc = np.hstack([b["g20"], np.zeros((nk, n1r))])
    d = b["g22"]
    schur = d - cc @ a_num @ bb if a.size else d
    dev = float(np.linalg.norm(schur - d))
    dmap = LinearMap(d, "H0|ker", "H0|ker")
    if return_report:
        return B0Report(dmap, a_inv, a11, inv_res, dev)
    return dmap


def frame_synthesis(frame: HelmholtzFrame, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map frame coordinates ``(x1, x2, x3)`` back to ``(u, v)``."""
    n0r, n1r, _ = frame.dims
    x1, x2, x3 = x[:n0r], x[n0r:n0r + n1r], x[n0r + n1r:]
    return frame.iota0 @ x1 + frame.kappa0 @ x3, frame.iota1 @ x2


def frame_analysis(frame: HelmholtzFrame, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.concatenate([frame.iota0.conj().T @ f, frame.iota1.conj().T @ g, frame.kappa0.conj().T @ f])


def solve_equivalence(sys: BlockSystem, frame: HelmholtzFrame, lam: float, f, g) -> dict:
    """Solve ``(i*lambda - A)(u, v) = (f, g)`` directly and through ``B(lambda)``."""
    A = assemble_A(sys).dense()
    n = A.shape[0]
    rhs = np.concatenate([f, g])
    direct = np.linalg.solve(1j * lam * np.eye(n) - A, rhs)
    shift = assemble_B(sys, frame, lam)
    x = np.linalg.solve(shift.B.dense(), frame_analysis(frame, f, g))
    u, v = frame_synthesis(frame, x)
    via = np.concatenate([u, v])
    return {
        "direct": direct,
        "frame": via,
        "relative_error": float(np.linalg.norm(direct - via) / max(np.linalg.norm(direct), 1e-300)),
    }


def with_gamma(sys: BlockSystem, gamma) -> BlockSystem:
    return replace(sys, gamma=LinearMap(as_array(gamma), "H0", "H0"))


def default_frame(sys: BlockSystem, policy: RankPolicy = DEFAULT_POLICY) -> HelmholtzFrame:
    return build_frame(sys.C, policy)
