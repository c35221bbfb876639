"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` or through pytest.
"""

import functools
import math
import sys
from pathlib import Path

import numpy as np
import pytest

from blockstab.blockop import BlockSystem, assemble_B, normalize, schur_identity_check, schur_reduce_B0, solve_equivalence
from blockstab.cli import main
from blockstab.grid import GridSpec, RegionMask, build_curl_pair, build_grad0
from blockstab.helmholtz import build_frame, closed_range_margin, closed_range_report
from blockstab.scenarios import (
    CENTER_SQUARE,
    counterexample_scenario,
    full_damping,
    random_spd,
    standard_scenarios,
    undamped,
)
from blockstab.semigroup import CayleyStepper, energy, evolve_oracle, project_initial, simulate
from blockstab.stability import (
    SeriesPoint,
    classify,
    damping_constant,
    default_lambda_grid,
    kernel_adjoint_check,
    kernel_identity_check,
    resolvent_scan,
    restrict_to_kernel_complement,
    spectral_gap,
)


@functools.lru_cache(maxsize=None)
def scenarios():
    return tuple(standard_scenarios()) + (undamped(8),)


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def test_criterion_01_exact_complex(capsys):
    worst = 0.0
    for nx in (8, 16, 32):
        for ny in (8, 16, 32):
            g = GridSpec(nx, ny)
            C, Cs = build_curl_pair(g)
            G = build_grad0(g)
            worst = max(worst, abs(C.entries @ G.entries).max(), abs(C.entries.conj().T - Cs.entries).max())
    report(capsys, 1, worst == 0, f"max |curl0 grad0|, |C^H - C*| over 9 grids = {worst:g}")


def test_criterion_02_dissipativity(capsys):
    rng = np.random.default_rng(2)
    worst = -np.inf
    for scn in scenarios():
        A = scn.A.dense()
        X = rng.standard_normal((A.shape[0], 1000)) + 1j * rng.standard_normal((A.shape[0], 1000))
        q = np.real(np.einsum("ij,ij->j", X.conj(), A @ X)) / np.real(np.einsum("ij,ij->j", X.conj(), X))
        worst = max(worst, q.max())
    report(capsys, 2, worst <= 1e-10, f"max Re<Ax,x>/|x|^2 over {len(scenarios())} scenarios = {worst:.3e}")


def test_criterion_03_equivalence(capsys):
    rng = np.random.default_rng(3)
    worst = 0.0
    for scn in scenarios():
        for _ in range(20):
            lam = rng.uniform(0.1, 4.0) * rng.choice([-1.0, 1.0])
            f = rng.standard_normal(scn.n0) + 1j * rng.standard_normal(scn.n0)
            r = scn.frame.rank
            g = scn.frame.iota1 @ (rng.standard_normal(r) + 1j * rng.standard_normal(r))
            worst = max(worst, solve_equivalence(scn.normalized, scn.frame, lam, f, g)["relative_error"])
    report(capsys, 3, worst <= 1e-8, f"max relative deviation direct vs B(lambda) = {worst:.3e}")


def test_criterion_04_schur(capsys):
    res, a11, dev = 0.0, 0.0, 0.0
    for scn in scenarios():
        for lam in (0.1, -0.1, 1.0, -1.0, 4.0, -4.0):
            res = max(res, schur_identity_check(assemble_B(scn.normalized, scn.frame, lam)).residual)
        r0 = schur_reduce_B0(scn.normalized, scn.frame, return_report=True)
        a11, dev = max(a11, r0.a_inv_11_norm), max(dev, r0.schur_deviation)
    ok = res <= 1e-9 and a11 <= 1e-12 and dev <= 1e-10
    report(capsys, 4, ok, f"Schur residual {res:.3e}, |(a^-1)_11| {a11:.3e}, deviation {dev:.3e}")


def test_criterion_05_kernels(capsys):
    worst, dims_ok = 0.0, True
    for scn in scenarios():
        ki = kernel_identity_check(scn.gamma_state(), scn.skew_state(), scn.U_state())
        ka = kernel_adjoint_check(scn.A)
        dims_ok &= ki.ok and ka.ok
        worst = max(worst, ki.max_residual, ka.residual_ker_in_adj, ka.residual_adj_in_ker)
    report(capsys, 5, dims_ok and worst <= 1e-8, f"dimensions agree: {dims_ok}, max containment residual {worst:.3e}")


def test_criterion_06_normalization_invariance(capsys):
    rng = np.random.default_rng(6)
    n0, n1, r = 12, 8, 5
    failures = []
    for trial in range(10):
        alpha = random_spd(rng, n0, 1.5)
        beta = random_spd(rng, n1, 1.5)
        C = rng.standard_normal((n1, r)) @ rng.standard_normal((r, n0))
        Y = rng.standard_normal((n0, n0))
        f_raw = build_frame(C)
        Pr = f_raw.iota0 @ f_raw.iota0.T
        cases = {
            "pd": Y @ Y.T + 0.1 * np.eye(n0),
            "low-rank": Y[:, :3] @ Y[:, :3].T,
            "ran-Cstar": Pr @ (Y @ Y.T) @ Pr,
        }
        lo, hi = np.linalg.eigvalsh(alpha)[[0, -1]]
        for name, gamma in cases.items():
            before = closed_range_report(gamma, f_raw)
            nsys = normalize(BlockSystem.from_arrays(C, gamma, alpha, beta))
            after = closed_range_report(nsys.gamma, build_frame(nsys.C))
            nz_b, nz_a = before.margin > 0, after.margin > 0
            if nz_b != nz_a or (name == "ran-Cstar" and nz_b):
                failures.append(f"trial {trial} {name}: {before.margin:.3e} vs {after.margin:.3e}")
                continue
            if nz_b:
                q = after.margin / before.margin
                if not (1 / (hi / lo) <= q <= hi / lo):
                    failures.append(f"trial {trial} {name}: ratio {q:.3e} outside cond(alpha) band")
                if not (before.margin / hi * (1 - 1e-9) <= after.margin <= before.margin / lo * (1 + 1e-9)):
                    failures.append(f"trial {trial} {name}: outside [m/lmax, m/lmin]")
    report(capsys, 6, not failures, "; ".join(failures) or "30 cases, zero/nonzero pattern and cond bound hold")


def test_criterion_07_counterexample(capsys):
    Ns = (8, 16, 32, 64)
    pts, err, kernels = [], 0.0, True
    for N in Ns:
        scn = counterexample_scenario(N)
        m = closed_range_margin(scn.normalized.gamma, scn.frame)
        sc = resolvent_scan(scn.A.dense(), default_lambda_grid())
        err = max(err, abs(m - 1 / N), abs(sc.margin_at(0.0) - 1 / N))
        kernels &= all(k == 0 for k in sc.kernel_dims)
        pts.append(SeriesPoint(N, m, spectral_gap(scn.A.dense()), sc.interior_margin(), kernels))
    cl = classify(pts)
    ok = err <= 1e-12 and cl.label == "strong-only-trend" and abs(cl.margin_exponent + 1) <= 0.1 and kernels
    report(capsys, 7, ok, f"max |margin - 1/N| {err:.2e}, {cl.label}, exponent {cl.margin_exponent:.4f}")


def _series_point(scn, level, lambdas):
    A0, _, _ = restrict_to_kernel_complement(scn.A.dense().real)
    sc = resolvent_scan(A0, lambdas)
    return SeriesPoint(level, closed_range_margin(scn.normalized.gamma, scn.frame), spectral_gap(A0),
                       sc.interior_margin(), all(k == 0 for k in sc.kernel_dims)), A0


def test_criterion_08_full_damping(capsys):
    rng = np.random.default_rng(8)
    rates, fails, pts = {}, [], []
    for n in (8, 12, 16):
        scn = full_damping(n)
        pt, A0 = _series_point(scn, n, default_lambda_grid())
        pts.append(pt)
        if n == 12:
            continue
        A = scn.A.dense().real
        x = project_initial(rng.standard_normal(A.shape[0]), A)
        x /= np.linalg.norm(x)
        rep = simulate(A, x, 0.05 * scn.grid.hx, 30.0)
        target = 2 * pt.spectral_gap
        rates[n] = (rep.fit_exponential[0], target)
        if abs(rep.fit_exponential[0] - target) > 0.05 * target:
            fails.append(n)
    cl = classify(pts)
    ok = not fails and cl.label == "exponential-trend"
    txt = ", ".join(f"{n}x{n}: rate {a:.4f} vs 2*gap {b:.4f}" for n, (a, b) in rates.items())
    report(capsys, 8, ok, f"{txt}; {cl.label}")


def test_criterion_09_conservative(capsys):
    scn = undamped(8)
    A = scn.A.dense().real
    x = project_initial(np.random.default_rng(9).standard_normal(A.shape[0]), A)
    st = CayleyStepper(A, 0.5 * scn.grid.hx)
    e0 = float(energy(x))
    for _ in range(10_000):
        x = st.step(x)
    drift = abs(float(energy(x)) - e0) / e0
    report(capsys, 9, drift <= 1e-10, f"relative energy drift after 1e4 steps {drift:.3e}")


def test_criterion_10_damping_constant(capsys):
    c0s, fails = [], []
    for n in (12, 24, 48):
        g = GridSpec(n, n)
        geo = damping_constant(g, RegionMask.from_rectangles(g, CENTER_SQUARE))
        c0s.append(geo.c0)
        if geo.inequality_slack().min() < -1e-9:
            fails.append(f"{n}: inequality")
        if not geo.sigma_min_T > 0 or geo.surjectivity_residual > 1e-8:
            fails.append(f"{n}: T sigma_min {geo.sigma_min_T:.3e} surj {geo.surjectivity_residual:.3e}")
    spread = (max(c0s) - min(c0s)) / min(c0s)
    ok = not fails and spread < 0.2
    rep = ", ".join(f"{v:.4f}" for v in c0s)
    report(capsys, 10, ok, f"c0 = {rep} (spread {spread:.1%}) {'; '.join(fails)}")


def test_criterion_11_integrator_order(capsys):
    rng = np.random.default_rng(11)
    n = 256
    Z = rng.standard_normal((n, n)) / math.sqrt(n)
    Y = rng.standard_normal((n, n // 4)) / math.sqrt(n)
    A = -Y @ Y.T + 1.5 * (Z - Z.T)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    T = 2.0
    ref = evolve_oracle(A, x, [T])[:, 0]
    errs = []
    for dt in (0.04, 0.02, 0.01, 0.005):
        k = int(round(T / dt))
        _, U = CayleyStepper(A, dt).run(x, k, record_every=k)
        errs.append(np.linalg.norm(U[:, -1] - ref))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(3.5 <= q <= 4.5 for q in ratios)
    report(capsys, 11, ok, "error ratios " + ", ".join(f"{q:.4f}" for q in ratios))


CFG = {
    "simulate": "[experiment]\nseed = 5\n[region]\nrectangles = 0.25 0.25 0.75 0.75\n"
                "[simulate]\ntime_horizon = 12\n[refinement]\nlevels = 6 8\n",
    "scan": "[experiment]\nseed = 5\n[region]\nrectangles = 0.25 0.25 0.75 0.75\n[refinement]\nlevels = 6 8 10\n",
    "constant": "[region]\nrectangles = 0.25 0.25 0.75 0.75\n[refinement]\nlevels = 8 12\n",
    "counterexample": "[experiment]\nscenario = counterexample\n[refinement]\nlevels = 8 16 32\n",
    "verify": "[experiment]\nseed = 5\n[region]\nrectangles = 0.25 0.25 0.75 0.75\n[refinement]\nlevels = 8\n",
}


def test_criterion_12_determinism(tmp_path, capsys):
    diffs, count = [], 0
    for cmd, text in CFG.items():
        cfg = tmp_path / f"{cmd}.ini"
        cfg.write_text(text)
        outs = []
        for run in ("a", "b"):
            out = tmp_path / run / cmd
            assert main([cmd, "--config", str(cfg), "--out", str(out)]) == 0
            outs.append(out)
        files = sorted(p.name for p in outs[0].glob("*.csv"))
        if files != sorted(p.name for p in outs[1].glob("*.csv")) or not files:
            diffs.append(f"{cmd}: file sets differ")
        for name in files:
            count += 1
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                diffs.append(f"{cmd}/{name}")
    report(capsys, 12, not diffs, f"{count} CSV files compared" + ("; differ: " + ", ".join(diffs) if diffs else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-q"]))
