"""Geometric damping constant for a conductivity supported on a region ``D``.

Everything here lives inside ``ran(grad0)``, which is ``ker(curl0)`` on the
simply connected rectangle.  Let ``G`` be the Dirichlet gradient.  The
generalized symmetric eigenproblem

    G^T 1_D G x = mu G^T G x

diagonalizes the restriction ``1_D`` on ``ran G``: the fields ``U = G x`` are
orthonormal and ``||1_D U||^2 = mu ||U||^2``.  Its spectrum splits ``ran G``
into gradients living in ``D^c`` (``mu = 0``), gradients living in ``D``
(``mu = 1``) and the mixed part ``H2`` (``0 < mu < 1``).  We work in real
arithmetic throughout: all stencils are real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from ..grid import (
    EmptyRegion,
    GridSpec,
    RegionMask,
    build_grad0,
    build_grad_full,
    interior_vertices_of,
)
from ..linalg import DEFAULT_POLICY, LinearMap, RankPolicy, SubspaceBasis, orthonormalize, subspace_intersection


@dataclass(frozen=True)
class GradientFrame:
    """Generalized eigendecomposition of the masked gradient Gram matrix."""

    mu: np.ndarray          # ascending, in [0, 1]
    fields: np.ndarray      # (n_edges, n_vertices), orthonormal columns G x
    mu_tol: float


def gradient_frame(grid: GridSpec, mask: RegionMask, mu_tol: float = 1e-8) -> GradientFrame:
    G = build_grad0(grid).entries.real.tocsr()
    d = mask.edges.astype(float)
    K = (G.T @ G).toarray()
    GD = G.multiply(d[:, None]).tocsr()
    M = (GD.T @ GD).toarray()
    mu, X = sla.eigh(M, K, check_finite=False)
    U = np.asarray(G @ X)
    return GradientFrame(np.clip(mu, 0.0, 1.0), U, mu_tol)


@dataclass(frozen=True, eq=False)
class DampingGeometry:
    """Subspaces and constants attached to a damping region.

    Attributes
    ----------
    H0_basis
        Gradient fields orthogonal to those vanishing on ``D`` (edge coordinates).
    H2_basis
        The mixed part of ``H0_basis``: neither supported in ``D`` nor in ``D^c``.
    H3_basis, H3t_basis
        Harmonic gradients of ``D`` (``D``-edge coordinates), and their
        intersection with ``1_D[ran grad0]``.
    c0
        Smallest ``c`` with ``||U|| <= c ||1_D U||`` on ``H0_basis``.
    T_matrix
        ``1_D`` from ``H2`` to ``H3t`` in the two orthonormal frames.
    """

    mask: RegionMask
    H0_basis: SubspaceBasis
    H2_basis: SubspaceBasis
    H3_basis: SubspaceBasis
    H3t_basis: SubspaceBasis
    c0: float
    T_matrix: LinearMap
    sigma_min_T: float
    surjectivity_residual: float
    ep_margin: float
    dims: dict = field(default_factory=dict)

    def inequality_slack(self) -> np.ndarray:
        """``c0 ||1_D U|| - ||U||`` for each ``H0`` basis vector (should be >= 0)."""
        U = self.H0_basis.columns
        d = self.mask.edges
        return self.c0 * np.linalg.norm(U[d], axis=0) - np.linalg.norm(U, axis=0)


def harmonic_dimension(grid: GridSpec, region: RegionMask, n_supported: int) -> int:
    """``dim H(omega) = dim(ran G & L2(omega)) - #(vertices interior to omega)``.

    Gradients of potentials carried by vertices whose whole star lies in
    ``omega`` form the discrete ``grad H_0^1(omega)``; ``G`` is injective so
    its dimension is the vertex count.
    """
    return n_supported - interior_vertices_of(grid, region).size


def damping_constant(grid: GridSpec, mask: RegionMask, frame_grad: GradientFrame | None = None,
                     policy: RankPolicy = DEFAULT_POLICY) -> DampingGeometry:
    """Build the damping geometry and the restriction constant ``c0``."""
    if mask.is_empty():
        raise EmptyRegion("damping region contains no edge degrees of freedom")
    gf = frame_grad if frame_grad is not None else gradient_frame(grid, mask)
    mu, U, tol = gf.mu, gf.fields, gf.mu_tol
    d = mask.edges
    in_Dc = mu <= tol
    in_D = mu >= 1.0 - tol
    mixed = ~in_Dc & ~in_D
    keep = ~in_Dc

    H0 = SubspaceBasis(U[:, keep], "H0", tol)
    H2 = SubspaceBasis(U[:, mixed], "H0", tol)
    mins = float(mu[keep].min()) if keep.any() else 0.0
    ep_margin = math.sqrt(mins) if mins > 0 else 0.0
    c0 = 1.0 / ep_margin if ep_margin > 0 else math.inf

    # D-coordinates -------------------------------------------------------
    nD = int(d.sum())
    SD = U[d][:, in_D]                              # gradients supported in D
    SD_b = SubspaceBasis(SD, "L2D")
    WD = SD_b.complement()                          # L2(D) minus S_D
    Gfull = build_grad_full(grid).tocsr()[d]
    touched = np.flatnonzero(np.asarray(abs(Gfull).sum(axis=0)).ravel() > 0)
    ranGD = orthonormalize(Gfull[:, touched].toarray(), "L2D", policy)
    H3 = subspace_intersection(ranGD, WD, policy)
    G = build_grad0(grid).entries.real.tocsr()
    RD = orthonormalize(G[d].toarray(), "L2D", policy)   # 1_D[ran grad0], independent SVD
    H3t = subspace_intersection(H3, RD, policy)

    Y = U[d][:, mixed]                              # 1_D H2 in D-coordinates
    Q3 = H3t.columns
    T = Q3.T @ Y if Q3.size and Y.size else np.zeros((Q3.shape[1], Y.shape[1]))
    sT = np.linalg.svd(T, compute_uv=False) if T.size else np.zeros(0)
    sigma_min_T = float(sT[-1]) if sT.size else (math.inf if H2.dim == 0 else 0.0)
    if Q3.shape[1] == 0:
        surj = 0.0
    elif Y.shape[1] == 0:
        surj = 1.0
    else:
        QY = Y / np.linalg.norm(Y, axis=0)
        QY = orthonormalize(QY, "L2D", policy).columns
        surj = float(np.linalg.norm(Q3 - QY @ (QY.T @ Q3), 2))

    vD = interior_vertices_of(grid, mask).size
    dims = {
        "n_edges": grid.n_edges,
        "n_D": nD,
        "ranG": U.shape[1],
        "S_D": int(in_D.sum()),
        "S_Dc": int(in_Dc.sum()),
        "H0": H0.dim,
        "H2": H2.dim,
        "H3": H3.dim,
        "H3t": H3t.dim,
        "harm_D": int(in_D.sum()) - vD,
        "harm_Dc": harmonic_dimension(grid, mask.complement(), int(in_Dc.sum())),
    }
    return DampingGeometry(
        mask=mask,
        H0_basis=H0,
        H2_basis=H2,
        H3_basis=H3,
        H3t_basis=H3t,
        c0=c0,
        T_matrix=LinearMap(T.astype(complex), "H2", "H3t"),
        sigma_min_T=sigma_min_T,
        surjectivity_residual=surj,
        ep_margin=ep_margin,
        dims=dims,
    )
