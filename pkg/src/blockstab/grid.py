"""Staggered (Yee-type) operators for the 2D TE reduction on a rectangle.

Layout on an ``nx x ny`` cell grid with perfectly conducting walls:

* scalar potentials live on interior vertices (zero Dirichlet trace),
* the electric field ``E = (Ex, Ey)`` lives on interior edges; tangential
  boundary edges are removed, which is the PEC condition,
* the magnetic field ``H`` is a scalar on cell centres.

Stencil weights are ``nx/lx`` and ``ny/ly``.  On the unit square these are
integers, so ``curl0 @ grad0`` cancels exactly in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .linalg import LinearMap, hermitian_sqrt

H0 = "H0"  # electric field space (edges)
H1 = "H1"  # magnetic field space (cells)
POT = "P"  # interior-vertex potentials


class EmptyRegion(ValueError):
    pass


class IndefiniteMaterial(ValueError):
    def __init__(self, which: str, node: int, position, eigenvalue: float):
        self.which = which
        self.node = node
        self.position = position
        self.eigenvalue = eigenvalue
        super().__init__(
            f"{which} is not positive definite at node {node} "
            f"(x={position[0]:.4g}, y={position[1]:.4g}): eigenvalue {eigenvalue:.4g}"
        )


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ValueError("cell counts must be integers")
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs nx, ny >= 3, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("side lengths must be positive")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def inv_hx(self) -> float:
        return self.nx / self.lx

    @property
    def inv_hy(self) -> float:
        return self.ny / self.ly

    @property
    def n_xedges(self) -> int:
        return self.nx * (self.ny - 1)

    @property
    def n_yedges(self) -> int:
        return (self.nx - 1) * self.ny

    @property
    def n_edges(self) -> int:
        return self.n_xedges + self.n_yedges

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_vertices(self) -> int:
        return (self.nx - 1) * (self.ny - 1)

    # index maps -------------------------------------------------------
    def xedge(self, i, j):
        """x-edge from vertex (i, j) to (i+1, j); i in [0, nx), j in [1, ny)."""
        return (np.asarray(j) - 1) * self.nx + np.asarray(i)

    def yedge(self, i, j):
        """y-edge from vertex (i, j) to (i, j+1); i in [1, nx), j in [0, ny)."""
        return self.n_xedges + np.asarray(j) * (self.nx - 1) + (np.asarray(i) - 1)

    def vertex(self, i, j):
        """Interior vertex (i, j), i in [1, nx), j in [1, ny)."""
        return (np.asarray(j) - 1) * (self.nx - 1) + (np.asarray(i) - 1)

    def cell(self, i, j):
        return np.asarray(j) * self.nx + np.asarray(i)

    def edge_midpoints(self) -> np.ndarray:
        """(n_edges, 2) array of edge midpoints in domain coordinates."""
        i, j = np.meshgrid(np.arange(self.nx), np.arange(1, self.ny), indexing="xy")
        xm = np.column_stack([(i.ravel() + 0.5) * self.hx, j.ravel() * self.hy])
        i, j = np.meshgrid(np.arange(1, self.nx), np.arange(self.ny), indexing="xy")
        ym = np.column_stack([i.ravel() * self.hx, (j.ravel() + 0.5) * self.hy])
        return np.vstack([xm, ym])

    def edge_is_x(self) -> np.ndarray:
        out = np.zeros(self.n_edges, dtype=bool)
        out[: self.n_xedges] = True
        return out

    def cell_centers(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="xy")
        return np.column_stack([(i.ravel() + 0.5) * self.hx, (j.ravel() + 0.5) * self.hy])

    def vertex_positions(self) -> np.ndarray:
        i, j = np.meshgrid(np.arange(1, self.nx), np.arange(1, self.ny), indexing="xy")
        return np.column_stack([i.ravel() * self.hx, j.ravel() * self.hy])


def _edge_vertex_incidence(grid: GridSpec, all_vertices: bool = False) -> sp.csr_matrix:
    """Integer incidence (+1 head, -1 tail) from vertices to interior edges.

    With ``all_vertices`` every vertex of the closed grid gets a column
    (index ``j*(nx+1) + i``); otherwise only interior vertices appear and
    boundary potentials are dropped (Dirichlet).
    """
    nx, ny = grid.nx, grid.ny
    rows, cols, vals = [], [], []

    def vid(i, j):
        if all_vertices:
            return j * (nx + 1) + i
        return grid.vertex(i, j)

    def interior(i, j):
        return all_vertices | ((i >= 1) & (i <= nx - 1) & (j >= 1) & (j <= ny - 1))

    i, j = np.meshgrid(np.arange(nx), np.arange(1, ny), indexing="xy")
    i, j = i.ravel(), j.ravel()
    e = grid.xedge(i, j)
    for di, sign in ((1, 1.0), (0, -1.0)):
        keep = interior(i + di, j)
        rows.append(e[keep]); cols.append(vid(i[keep] + di, j[keep])); vals.append(np.full(keep.sum(), sign))
    i, j = np.meshgrid(np.arange(1, nx), np.arange(ny), indexing="xy")
    i, j = i.ravel(), j.ravel()
    e = grid.yedge(i, j)
    for dj, sign in ((1, 1.0), (0, -1.0)):
        keep = interior(i, j + dj)
        rows.append(e[keep]); cols.append(vid(i[keep], j[keep] + dj)); vals.append(np.full(keep.sum(), sign))
    ncols = (nx + 1) * (ny + 1) if all_vertices else grid.n_vertices
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_edges, ncols),
    )


def _edge_metric(grid: GridSpec) -> sp.dia_matrix:
    w = np.empty(grid.n_edges)
    w[: grid.n_xedges] = grid.inv_hx
    w[grid.n_xedges :] = grid.inv_hy
    return sp.diags(w)


def build_grad0(grid: GridSpec) -> LinearMap:
    """Gradient with zero Dirichlet trace: interior vertices -> interior edges."""
    G = _edge_metric(grid) @ _edge_vertex_incidence(grid)
    return LinearMap(sp.csr_matrix(G, dtype=complex), POT, H0)


def build_grad_full(grid: GridSpec) -> sp.csr_matrix:
    """Real gradient from all vertices of the closed grid (no boundary condition)."""
    return sp.csr_matrix(_edge_metric(grid) @ _edge_vertex_incidence(grid, all_vertices=True))


def build_curl_pair(grid: GridSpec) -> tuple[LinearMap, LinearMap]:
    """``(C, Cstar)`` with ``C = curl0`` from edge fields to cell scalars.

    ``(C E)_cell = (Ey_right - Ey_left)/hx - (Ex_top - Ex_bottom)/hy``, with
    tangential boundary edges absent.  ``Cstar`` is the conjugate transpose.
    """
    nx, ny = grid.nx, grid.ny
    rows, cols, vals = [], [], []
    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    ci, cj = ci.ravel(), cj.ravel()
    cell = grid.cell(ci, cj)
    # vertical sides: y-edges at i and i+1
    for di, w in ((1, grid.inv_hx), (0, -grid.inv_hx)):
        ii = ci + di
        keep = (ii >= 1) & (ii <= nx - 1)
        rows.append(cell[keep]); cols.append(grid.yedge(ii[keep], cj[keep])); vals.append(np.full(keep.sum(), w))
    # horizontal sides: x-edges at j and j+1
    for dj, w in ((1, -grid.inv_hy), (0, grid.inv_hy)):
        jj = cj + dj
        keep = (jj >= 1) & (jj <= ny - 1)
        rows.append(cell[keep]); cols.append(grid.xedge(ci[keep], jj[keep])); vals.append(np.full(keep.sum(), w))
    C = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_cells, grid.n_edges),
        dtype=complex,
    )
    C = LinearMap(C, H0, H1)
    return C, C.H


# regions -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RegionMask:
    """Damping set ``D`` as a boolean field over the edge (E) degrees of freedom."""

    grid: GridSpec
    edges: np.ndarray
    description: str = ""

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=bool)
        if e.shape != (self.grid.n_edges,):
            raise ValueError(f"edge mask must have shape ({self.grid.n_edges},)")
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_rectangles(cls, grid: GridSpec, rects: Sequence[Sequence[float]]) -> "RegionMask":
        """Union of closed axis-aligned rectangles ``(x0, y0, x1, y1)``.

        An edge belongs to ``D`` when its midpoint lies in one of them.
        """
        mid = grid.edge_midpoints()
        tol = 1e-12 * max(grid.lx, grid.ly)
        inside = np.zeros(grid.n_edges, dtype=bool)
        for r in rects:
            x0, y0, x1, y1 = (float(v) for v in r)
            if x1 < x0 or y1 < y0:
                raise ValueError(f"degenerate rectangle {r}")
            inside |= (
                (mid[:, 0] >= x0 - tol) & (mid[:, 0] <= x1 + tol)
                & (mid[:, 1] >= y0 - tol) & (mid[:, 1] <= y1 + tol)
            )
        desc = "; ".join(" ".join(f"{float(v):g}" for v in r) for r in rects)
        return cls(grid, inside, desc)

    @classmethod
    def full(cls, grid: GridSpec) -> "RegionMask":
        return cls(grid, np.ones(grid.n_edges, dtype=bool), "all")

    @classmethod
    def from_bitmap(cls, grid: GridSpec, bitmap, description: str = "bitmap") -> "RegionMask":
        return cls(grid, np.asarray(bitmap, dtype=bool), description)

    def complement(self) -> "RegionMask":
        return RegionMask(self.grid, ~self.edges, f"complement({self.description})")

    @property
    def count(self) -> int:
        return int(self.edges.sum())

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.edges)

    def is_empty(self) -> bool:
        return not self.edges.any()


def build_projector(grid: GridSpec, region: RegionMask) -> LinearMap:
    """Diagonal 0/1 projector ``1_D`` on the edge degrees of freedom."""
    if region.grid != grid:
        raise ValueError("region belongs to a different grid")
    if region.is_empty():
        raise EmptyRegion("damping region contains no edge degrees of freedom")
    P = sp.diags(region.edges.astype(complex)).tocsr()
    return LinearMap(P, H0, H0)


def interior_vertices_of(grid: GridSpec, region: RegionMask) -> np.ndarray:
    """Interior vertices all of whose incident edges lie in ``region``.

    Potentials supported there have gradients supported in the region: the
    discrete ``H_0^1`` of the region.
    """
    inc = _edge_vertex_incidence(grid).tocsc()
    outside = (~region.edges).astype(float)
    touches_outside = np.asarray(abs(inc).T @ outside).ravel() > 0
    return np.flatnonzero(~touches_outside)


# materials -----------------------------------------------------------------

Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _tensor_field(spec, x, y) -> np.ndarray:
    """Evaluate a coefficient description to an (n, 2, 2) tensor array.

    ``spec`` may be a number, a callable ``f(x, y)`` returning a scalar field
    or an (n, 2, 2) field, or a constant 2x2 matrix.
    """
    n = x.shape[0]
    val = spec(x, y) if callable(spec) else spec
    arr = np.asarray(val, dtype=complex)
    if arr.ndim == 0 or arr.shape == (n,):
        out = np.zeros((n, 2, 2), dtype=complex)
        s = np.broadcast_to(arr, (n,))
        out[:, 0, 0] = s
        out[:, 1, 1] = s
        return out
    if arr.shape == (2, 2):
        return np.broadcast_to(arr, (n, 2, 2)).copy()
    if arr.shape == (n, 2, 2):
        return arr
    raise ValueError(f"coefficient has unsupported shape {arr.shape}")


def _scalar_field(spec, x, y) -> np.ndarray:
    n = x.shape[0]
    val = spec(x, y) if callable(spec) else spec
    return np.broadcast_to(np.asarray(val, dtype=complex), (n,)).copy()


@dataclass(frozen=True, eq=False)
class MaterialField:
    """Sampled permittivity, permeability and conductivity.

    ``eps_nodes`` and ``sigma_nodes`` hold the 2x2 tensors at edge midpoints;
    ``mu_nodes`` the scalar permeability at cell centres.  The assembled maps
    are diagonal: an x-edge carries the ``xx`` entry, a y-edge the ``yy``.
    """

    grid: GridSpec
    eps_nodes: np.ndarray
    mu_nodes: np.ndarray
    sigma_nodes: np.ndarray
    eps: LinearMap
    mu: LinearMap
    sigma: LinearMap
    c_mat: float
    notes: dict = field(default_factory=dict)


def _component_diagonal(grid: GridSpec, tensors: np.ndarray) -> np.ndarray:
    isx = grid.edge_is_x()
    return np.where(isx, tensors[:, 0, 0], tensors[:, 1, 1])


def sample_materials(grid: GridSpec, eps=1.0, mu=1.0, sigma=0.0) -> MaterialField:
    """Sample coefficient descriptions on the staggered grid and validate them.

    ``eps`` and ``sigma`` are evaluated at edge midpoints (as 2x2 tensors),
    ``mu`` at cell centres.  Off-diagonal tensor entries would couple
    non-collocated field components and are rejected.  Raises
    :class:`IndefiniteMaterial` at the first node where ``eps`` or ``mu`` fails
    to be Hermitian positive definite.  Conductivity structure is checked by
    ``stability.validate_gamma``, not here.
    """
    mid = grid.edge_midpoints()
    cc = grid.cell_centers()
    E = _tensor_field(eps, mid[:, 0], mid[:, 1])
    S = _tensor_field(sigma, mid[:, 0], mid[:, 1])
    M = _scalar_field(mu, cc[:, 0], cc[:, 1])

    for name, T in (("eps", E), ("sigma", S)):
        if np.any(np.abs(T[:, 0, 1]) > 0) or np.any(np.abs(T[:, 1, 0]) > 0):
            raise ValueError(
                f"{name}: off-diagonal tensor entries couple Ex and Ey, which are not "
                "collocated on the staggered grid; only diagonal tensors are supported"
            )
    herm_defect = np.abs(E - np.conj(np.swapaxes(E, 1, 2))).max(axis=(1, 2))
    bad = np.flatnonzero(herm_defect > 1e-12 * np.maximum(1.0, np.abs(E).max(axis=(1, 2))))
    if bad.size:
        k = int(bad[0])
        raise IndefiniteMaterial("eps", k, mid[k], float("nan"))
    w = np.linalg.eigvalsh(E)[:, 0]
    k = int(np.argmin(w))
    if not w[k] > 0:
        raise IndefiniteMaterial("eps", k, mid[k], float(w[k]))
    if np.any(np.abs(M.imag) > 1e-12 * np.maximum(1.0, np.abs(M))):
        k = int(np.argmax(np.abs(M.imag)))
        raise IndefiniteMaterial("mu", k, cc[k], float("nan"))
    km = int(np.argmin(M.real))
    if not M.real[km] > 0:
        raise IndefiniteMaterial("mu", km, cc[km], float(M.real[km]))
    c_mat = float(min(w.min(), M.real.min()))

    eps_map = LinearMap(sp.diags(_component_diagonal(grid, E)).tocsr(), H0, H0)
    mu_map = LinearMap(sp.diags(M.real.astype(complex)).tocsr(), H1, H1)
    sig_map = LinearMap(sp.diags(_component_diagonal(grid, S)).tocsr(), H0, H0)
    return MaterialField(grid, E, M.real, S, eps_map, mu_map, sig_map, c_mat)


def conductivity_lower_bound(materials: MaterialField, region: RegionMask) -> float:
    """Smallest eigenvalue of ``Re sigma`` over the 2x2 tensors at D-nodes."""
    S = materials.sigma_nodes[region.edges]
    if S.shape[0] == 0:
        raise EmptyRegion("damping region contains no edge degrees of freedom")
    re = 0.5 * (S + np.conj(np.swapaxes(S, 1, 2)))
    return float(np.linalg.eigvalsh(re)[:, 0].min())


def material_sqrt(materials: MaterialField):
    """Square roots of ``eps`` and ``mu`` (with inverses) for normalization."""
    return hermitian_sqrt(materials.eps), hermitian_sqrt(materials.mu)
