import numpy as np
import pytest

from blockstab.grid import (
    EmptyRegion,
    GridSpec,
    IndefiniteMaterial,
    RegionMask,
    build_curl_pair,
    build_grad0,
    build_projector,
    conductivity_lower_bound,
    interior_vertices_of,
    sample_materials,
)
from blockstab.linalg import hermitian_sqrt, kernel_basis, range_basis


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(2, 8)
    with pytest.raises(ValueError):
        GridSpec(8, 8, lx=0.0)
    g = GridSpec(8, 4, 2.0, 1.0)
    assert (g.hx, g.hy) == (0.25, 0.25)
    assert g.n_edges == 8 * 3 + 7 * 4


def test_grad_of_zero_is_zero():
    G = build_grad0(GridSpec(5, 5))
    assert not np.any(G @ np.zeros(G.shape[1]))


def test_single_node_stencil():
    g = GridSpec(3, 3)
    phi = np.zeros(g.n_vertices)
    phi[g.vertex(1, 1)] = 1.0
    e = build_grad0(g) @ phi
    expect = {int(g.xedge(0, 1)): 3.0, int(g.xedge(1, 1)): -3.0,
              int(g.yedge(1, 0)): 3.0, int(g.yedge(1, 1)): -3.0}
    nz = np.flatnonzero(e)
    assert set(nz) == set(expect)
    for k, v in expect.items():
        assert e[k] == v


@pytest.mark.parametrize("n", [8, 16])
def test_poincare_constant_matches_analytic(n):
    g = GridSpec(n, n)
    s = np.linalg.svd(build_grad0(g).dense(), compute_uv=False)[-1]
    # discrete Dirichlet Laplacian: lowest eigenvalue of the 5-point stencil
    lam = 4 / g.hx**2 * np.sin(np.pi * g.hx / 2) ** 2 + 4 / g.hy**2 * np.sin(np.pi * g.hy / 2) ** 2
    assert s == pytest.approx(np.sqrt(lam), rel=1e-12)


def test_poincare_trend():
    s = [np.linalg.svd(build_grad0(GridSpec(n, n)).dense(), compute_uv=False)[-1] for n in (4, 8, 16)]
    assert all(v > 0 for v in s)
    assert s[0] < s[1] < s[2] < np.sqrt(2) * np.pi


@pytest.mark.parametrize("nx,ny", [(3, 3), (3, 7), (8, 8), (13, 5), (32, 17), (64, 64)])
def test_exact_complex_and_adjoint(nx, ny):
    g = GridSpec(nx, ny)
    C, Cs = build_curl_pair(g)
    G = build_grad0(g)
    assert abs(C.entries @ G.entries).max() == 0
    assert abs(C.entries.conj().T - Cs.entries).max() == 0


def test_transpose_identity(rng):
    g = GridSpec(7, 5)
    C, Cs = build_curl_pair(g)
    u = rng.standard_normal(g.n_edges) + 1j * rng.standard_normal(g.n_edges)
    v = rng.standard_normal(g.n_cells) + 1j * rng.standard_normal(g.n_cells)
    lhs = np.vdot(v, C @ u)
    rhs = np.vdot(Cs @ v, u)
    assert abs(lhs - rhs) <= 1e-14 * np.linalg.norm(u) * np.linalg.norm(v) * 10


@pytest.mark.parametrize("n", [4, 8])
def test_ker_curl_is_ran_grad(n):
    g = GridSpec(n, n)
    C, _ = build_curl_pair(g)
    G = build_grad0(g).dense()
    K = kernel_basis(C.dense())
    R = range_basis(G)
    assert K.dim == R.dim == g.n_vertices
    # same subspace, not just same dimension
    assert np.linalg.norm(R.columns - K.project(R.columns)) < 1e-10
    # the range of curl0 misses exactly the constants
    assert range_basis(C.dense()).dim == g.n_cells - 1


class TestRegions:
    def test_full_is_identity(self):
        g = GridSpec(4, 4)
        P = build_projector(g, RegionMask.full(g)).dense()
        np.testing.assert_array_equal(P, np.eye(g.n_edges))

    def test_empty_rejected(self):
        g = GridSpec(4, 4)
        with pytest.raises(EmptyRegion):
            build_projector(g, RegionMask(g, np.zeros(g.n_edges, bool)))
        mask = RegionMask.from_rectangles(g, [(2.0, 2.0, 3.0, 3.0)])
        assert mask.is_empty()

    def test_left_half_count_by_enumeration(self):
        g = GridSpec(8, 6)
        P = build_projector(g, RegionMask.from_rectangles(g, [(0, 0, 0.5, 1)])).dense()
        count = 0
        for j in range(1, g.ny):
            for i in range(g.nx):
                count += (i + 0.5) * g.hx <= 0.5
        for j in range(g.ny):
            for i in range(1, g.nx):
                count += i * g.hx <= 0.5
        assert np.trace(P).real == count

    def test_projector_exact(self):
        g = GridSpec(6, 6)
        P = build_projector(g, RegionMask.from_rectangles(g, [(0.2, 0.1, 0.7, 0.6)])).entries
        assert abs(P @ P - P).max() == 0
        assert abs(P.conj().T - P).max() == 0

    def test_complement(self):
        g = GridSpec(6, 6)
        m = RegionMask.from_rectangles(g, [(0, 0, 0.5, 1)])
        assert m.count + m.complement().count == g.n_edges

    def test_interior_vertices(self):
        g = GridSpec(8, 8)
        assert interior_vertices_of(g, RegionMask.full(g)).size == g.n_vertices
        m = RegionMask.from_rectangles(g, [(0.25, 0.25, 0.75, 0.75)])
        # vertices strictly inside the square: x, y in {3/8, 1/2, 5/8}
        assert interior_vertices_of(g, m).size == 9


class TestMaterials:
    def test_unit(self):
        g = GridSpec(4, 4)
        m = sample_materials(g, 1.0, 1.0, 0.0)
        np.testing.assert_array_equal(m.eps.dense(), np.eye(g.n_edges))
        np.testing.assert_array_equal(m.mu.dense(), np.eye(g.n_cells))
        assert not np.any(m.sigma.dense())
        assert m.c_mat == 1.0

    def test_eps_four(self):
        g = GridSpec(4, 4)
        m = sample_materials(g, eps=np.diag([4.0, 4.0]))
        np.testing.assert_allclose(hermitian_sqrt(m.eps).root.dense(), 2 * np.eye(g.n_edges))

    def test_sigma_on_region_nodewise(self):
        g = GridSpec(8, 8)
        mask = RegionMask.from_rectangles(g, [(0.25, 0.25, 0.75, 0.75)])
        sig = np.where(mask.edges, 1.0, 0.0)
        m = sample_materials(g, sigma=lambda x, y: sig)
        # per-node eigenvalue check of Re sigma on D
        for T in m.sigma_nodes[mask.edges]:
            assert np.linalg.eigvalsh(0.5 * (T + T.conj().T))[0] >= 1.0
        assert conductivity_lower_bound(m, mask) == 1.0

    def test_indefinite_reports_node(self):
        g = GridSpec(4, 4)

        def eps(x, y):
            return np.where((x > 0.6) & (y > 0.6), -0.5, 1.0)

        with pytest.raises(IndefiniteMaterial) as exc:
            sample_materials(g, eps=eps)
        e = exc.value
        assert e.which == "eps" and e.eigenvalue == -0.5
        assert e.position[0] > 0.6 and e.position[1] > 0.6

    def test_mu_must_be_positive(self):
        with pytest.raises(IndefiniteMaterial):
            sample_materials(GridSpec(4, 4), mu=0.0)

    def test_off_diagonal_rejected(self):
        with pytest.raises(ValueError, match="off-diagonal"):
            sample_materials(GridSpec(4, 4), eps=np.array([[2.0, 0.5], [0.5, 2.0]]))

    def test_anisotropic_components(self):
        g = GridSpec(4, 4)
        m = sample_materials(g, eps=np.diag([2.0, 3.0]))
        d = m.eps.entries.diagonal().real
        assert np.all(d[: g.n_xedges] == 2.0) and np.all(d[g.n_xedges:] == 3.0)
