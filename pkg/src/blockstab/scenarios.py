"""Ready-made systems: discrete TE Maxwell on the unit square, the
counterexample family, and random abstract systems.

Each builder returns a :class:`Scenario` holding the raw system, its
normalized form, the Helmholtz frame, and the reduced generator on
``H0 + ran(C)``, together with the subspace ``U`` on which the damping is
strictly accretive (in normalized coordinates).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blockop import BlockSystem, assemble_A, normalize
from .grid import (
    GridSpec,
    MaterialField,
    RegionMask,
    build_curl_pair,
    build_projector,
    sample_materials,
)
from .helmholtz import HelmholtzFrame, build_frame
from .linalg import LinearMap, SubspaceBasis, as_array
from .stability.counterexample import counterexample_U, counterexample_system

CENTER_SQUARE = [(0.25, 0.25, 0.75, 0.75)]


@dataclass(eq=False)
class Scenario:
    name: str
    system: BlockSystem
    normalized: BlockSystem
    frame: HelmholtzFrame
    A: LinearMap                     # reduced generator on H0 + ran(C)
    U_basis: SubspaceBasis           # accretive part of gamma, in H0
    grid: GridSpec | None = None
    region: RegionMask | None = None
    materials: MaterialField | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n0(self) -> int:
        return self.normalized.n0

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def gamma_state(self) -> np.ndarray:
        """``diag(gamma, 0)`` on the reduced state space."""
        n0, n = self.n0, self.dim
        G = np.zeros((n, n), dtype=complex)
        G[:n0, :n0] = as_array(self.normalized.gamma)
        return G

    def skew_state(self) -> np.ndarray:
        """Skew part ``-[[0, -C*], [C, 0]]`` of the reduced generator."""
        return as_array(self.A) + self.gamma_state()

    def U_state(self) -> SubspaceBasis:
        Q = np.zeros((self.dim, self.U_basis.dim), dtype=self.U_basis.columns.dtype)
        Q[: self.n0] = self.U_basis.columns
        return SubspaceBasis(Q, "Hred")

    def physical_energy(self, states: np.ndarray) -> np.ndarray:
        """``<alpha u, u> + <beta v, v>`` after undoing the normalization.

        ``states`` holds reduced normalized coordinates as columns.
        """
        X = np.atleast_2d(np.asarray(states).T).T
        n0 = self.n0
        u_t = X[:n0]
        v_t = self.frame.iota1 @ X[n0:]
        if self.normalized.scaling is None:
            return np.real(np.sum(X.conj() * X, axis=0))
        sa, sb = self.normalized.scaling
        u = sa.inverse.entries @ u_t
        v = sb.inverse.entries @ v_t
        al, be = as_array(self.system.alpha), as_array(self.system.beta)
        Eu = np.real(np.sum(u.conj() * (al @ u), axis=0))
        Ev = np.real(np.sum(v.conj() * (be @ v), axis=0))
        return Eu + Ev


def _finish(name, system, U_basis, **kw) -> Scenario:
    nsys = normalize(system)
    frame = build_frame(nsys.C)
    A = assemble_A(nsys, frame)
    return Scenario(name, system, nsys, frame, A, U_basis, **kw)


def maxwell_scenario(n: int, rects=None, sigma=1.0, sigma_outside=0.0, eps=1.0, mu=1.0,
                     name: str | None = None, ny: int | None = None) -> Scenario:
    """TE Maxwell on an ``n x ny`` grid of the unit square.

    ``rects=None`` damps everywhere.  The conductivity is ``sigma`` on edges
    in the region and ``sigma_outside`` elsewhere.
    """
    grid = GridSpec(n, ny or n)
    region = RegionMask.full(grid) if rects is None else RegionMask.from_rectangles(grid, rects)
    P = build_projector(grid, region)
    mid = grid.edge_midpoints()
    inside = region.edges

    def conductivity(x, y):
        s_in = sigma(x, y) if callable(sigma) else np.broadcast_to(np.asarray(sigma, complex), x.shape)
        s_out = (sigma_outside(x, y) if callable(sigma_outside)
                 else np.broadcast_to(np.asarray(sigma_outside, complex), x.shape))
        # edge order and midpoint order coincide, so the mask applies directly
        return np.where(inside, s_in, s_out)

    mats = sample_materials(grid, eps=eps, mu=mu, sigma=conductivity)
    C, _ = build_curl_pair(grid)
    system = BlockSystem(
        LinearMap(C.dense(), "H0", "H1"),
        LinearMap(mats.sigma.dense(), "H0", "H0"),
        LinearMap(mats.eps.dense(), "H0", "H0"),
        LinearMap(mats.mu.dense(), "H1", "H1"),
        label=name or f"maxwell{n}",
    )
    sig_in = np.asarray(mats.sigma.entries.diagonal())[inside]
    damped = inside if np.all(sig_in.real > 0) else np.zeros_like(inside)
    Ub = np.eye(grid.n_edges)[:, damped]
    scn = _finish(name or f"maxwell{n}", system, SubspaceBasis(Ub, "H0"),
                  grid=grid, region=region, materials=mats)
    scn.meta.update({"projector": P, "midpoints": mid})
    return scn


def full_damping(n: int = 8, sigma=1.0) -> Scenario:
    return maxwell_scenario(n, None, sigma=sigma, name=f"full{n}")


def partial_damping(n: int = 8, rects=CENTER_SQUARE, sigma=1.0) -> Scenario:
    return maxwell_scenario(n, rects, sigma=sigma, name=f"partial{n}")


def undamped(n: int = 8) -> Scenario:
    return maxwell_scenario(n, None, sigma=0.0, name=f"undamped{n}")


def anisotropic_partial(n: int = 8) -> Scenario:
    """Variable diagonal permittivity, variable permeability, complex sigma on D."""
    def eps(x, y):
        out = np.zeros((x.size, 2, 2))
        out[:, 0, 0] = 1.0 + 0.5 * x
        out[:, 1, 1] = 2.0 - y
        return out

    def mu(x, y):
        return 1.0 + 0.3 * np.sin(np.pi * x) * np.sin(np.pi * y)

    def sigma(x, y):
        return (1.0 + 0.5 * y) + 0.4j * x

    return maxwell_scenario(n, CENTER_SQUARE, sigma=sigma, eps=eps, mu=mu, name=f"aniso{n}")


def counterexample_scenario(N: int = 16) -> Scenario:
    sys = counterexample_system(N)
    return _finish(f"counterexample{N}", sys, counterexample_U(N))


def random_spd(rng: np.random.Generator, n: int, log_spread: float = 1.0) -> np.ndarray:
    """``Q diag(exp(s)) Q^T`` with centred ``s``, so the spectrum straddles 1."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = rng.uniform(-log_spread, log_spread, n)
    s -= s.mean()
    return (Q * np.exp(s)) @ Q.T


def abstract_scenario(seed: int = 0, n0: int = 14, n1: int = 10, rank: int = 6,
                      dim_U: int = 5) -> Scenario:
    """Random system with rank-deficient ``C`` and structured damping.

    The normalized damping ``gt`` is built block diagonal in ``U + U^perp``
    with ``Re gt_U >= 1/2`` and ``gt_{U^perp}`` Hermitian nonnegative; the raw
    damping is ``alpha^{1/2} gt alpha^{1/2}`` so normalization recovers it.
    """
    rng = np.random.default_rng(seed)
    alpha = random_spd(rng, n0)
    beta = random_spd(rng, n1)
    C = (rng.standard_normal((n1, rank)) + 1j * rng.standard_normal((n1, rank))) @ (
        rng.standard_normal((rank, n0)) + 1j * rng.standard_normal((rank, n0))) / np.sqrt(n0)
    Q, _ = np.linalg.qr(rng.standard_normal((n0, n0)) + 1j * rng.standard_normal((n0, n0)))
    U, W = Q[:, :dim_U], Q[:, dim_U:]
    Z = rng.standard_normal((dim_U, dim_U)) + 1j * rng.standard_normal((dim_U, dim_U))
    skew = 0.5 * (Z - Z.conj().T)
    gU = 0.5 * np.eye(dim_U) + 0.2 * (Z @ Z.conj().T) / dim_U + skew
    Y = rng.standard_normal((n0 - dim_U, 2)) + 1j * rng.standard_normal((n0 - dim_U, 2))
    gW = Y @ Y.conj().T / n0       # rank 2, so gamma has a kernel
    gt = U @ gU @ U.conj().T + W @ gW @ W.conj().T
    evals, evecs = np.linalg.eigh(alpha)
    ra = (evecs * np.sqrt(evals)) @ evecs.T
    gamma = ra @ gt @ ra
    sys = BlockSystem.from_arrays(C, gamma, alpha, beta, label=f"abstract{seed}")
    # U is preserved by normalization because gamma~ is given in those coordinates
    scn = _finish(f"abstract{seed}", sys, SubspaceBasis(U, "H0"))
    scn.meta["gamma_normalized"] = gt
    return scn


def standard_scenarios() -> list[Scenario]:
    """The fixed scenario set used by the invariant suite."""
    return [
        full_damping(8),
        partial_damping(8),
        anisotropic_partial(8),
        counterexample_scenario(16),
        abstract_scenario(0),
    ]
