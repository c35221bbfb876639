"""Command line runner: ``blockstab {simulate,scan,constant,counterexample,verify}``.

Exit codes: 0 ok, 1 invariant violation, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, coefficient, eps_description, grid_for_level, load_config
from .grid import EmptyRegion, IndefiniteMaterial, RegionMask
from .helmholtz import closed_range_margin
from .linalg import LinalgError, as_array
from .scenarios import Scenario, abstract_scenario, counterexample_scenario, maxwell_scenario
from .semigroup import DecompositionFailure, NonPositiveEnergy, project_initial, simulate
from .stability import (
    ClassifyThresholds,
    HypothesisViolated,
    InsufficientSeries,
    NoAngleFound,
    SeriesPoint,
    classify,
    damping_constant,
    default_lambda_grid,
    resolvent_scan,
    restrict_to_kernel_complement,
    spectral_gap,
)
from .verify import run_checks

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def build_scenario(cfg: ExperimentConfig, level: int) -> Scenario:
    if cfg.scenario == "counterexample":
        return counterexample_scenario(int(level))
    if cfg.scenario == "abstract":
        p = dict(cfg.abstract)
        n0 = p.get("n0", int(level))
        return abstract_scenario(
            cfg.seed, n0=n0, n1=p.get("n1", max(2, (7 * n0) // 10)),
            rank=p.get("rank", max(1, n0 // 2)), dim_U=p.get("dim_u", max(1, n0 // 3)),
        )
    g = grid_for_level(cfg, level)
    rects = None if cfg.region == "all" else cfg.rectangles
    scn = maxwell_scenario(
        g.nx, rects,
        sigma=coefficient(cfg.sigma), sigma_outside=coefficient(cfg.sigma_outside),
        eps=eps_description(cfg), mu=coefficient(cfg.mu),
        name=f"maxwell2d_{g.nx}x{g.ny}", ny=g.ny,
    )
    return scn


def _dt(cfg: ExperimentConfig, scn: Scenario, A: np.ndarray) -> float:
    if cfg.dt is not None:
        return cfg.dt
    if scn.grid is not None:
        return cfg.dt_factor * min(scn.grid.hx, scn.grid.hy)
    return cfg.dt_factor / max(1.0, float(np.linalg.norm(A, 2)))


def _real(A: np.ndarray) -> np.ndarray:
    return A.real if not np.any(A.imag) else A


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    rows = []
    for lvl in cfg.levels():
        scn = build_scenario(cfg, lvl)
        A = _real(as_array(scn.A))
        rng = np.random.default_rng(cfg.seed)
        x = rng.standard_normal(A.shape[0])
        U0 = project_initial(x, A)
        U0 = _real(U0) if not np.iscomplexobj(A) else U0
        nrm = np.linalg.norm(U0)
        if nrm == 0:
            raise NonPositiveEnergy("initial data vanishes after projection onto ker(A)^perp")
        U0 = U0 / nrm
        dt = _dt(cfg, scn, A)
        rep = simulate(A, U0, dt, cfg.time_horizon, cfg.samples, physical=scn.physical_energy)
        write_csv(out / f"trajectory_{lvl}.csv", ["t", "energy", "energy_physical"],
                  zip(rep.times, rep.energies, rep.energies_physical))
        rows.append([
            scn.name, lvl, dt, rep.notes["steps"], rep.fit_exponential[0], rep.fit_exponential[1],
            rep.fit_algebraic[0], rep.fit_algebraic[1], rep.selected_model, rep.graph_norm_initial,
            rep.energies[0], rep.energies[-1], rep.notes["relative_change"],
        ])
        print(f"{scn.name}: model={rep.selected_model} rate={rep.fit_exponential[0]:.6g}")
    write_csv(out / "decay_report.csv", [
        "scenario", "refinement", "dt", "steps", "rate", "r2_exponential", "exponent",
        "r2_algebraic", "selected_model", "graph_norm_initial", "energy_initial", "energy_final",
        "relative_change"], rows)
    return EXIT_OK


def _scan_level(cfg: ExperimentConfig, lvl: int):
    scn = build_scenario(cfg, lvl)
    A0, _, K = restrict_to_kernel_complement(_real(as_array(scn.A)))
    lams = cfg.lambda_grid or default_lambda_grid()
    sc = resolvent_scan(A0, lams)
    point = SeriesPoint(
        refinement=float(lvl),
        margin_at_0=closed_range_margin(scn.normalized.gamma, scn.frame),
        spectral_gap=spectral_gap(A0),
        interior_margin=sc.interior_margin() if any(l != 0 for l in lams) else None,
        kernels_trivial=all(k == 0 for k in sc.kernel_dims),
    )
    return scn, sc, point, K.dim


def _write_trend(cfg, out: Path, points) -> str | None:
    write_csv(out / "trend.csv", ["refinement", "margin_at_0", "spectral_gap", "interior_margin", "kernels_trivial"],
              [[p.refinement, p.margin_at_0, p.spectral_gap,
                p.interior_margin if p.interior_margin is not None else "nan", p.kernels_trivial] for p in points])
    try:
        cl = classify(points, ClassifyThresholds(cfg.ratio, cfg.exponent))
    except InsufficientSeries:
        return None
    write_csv(out / "classification.csv",
              ["label", "margin_exponent", "gap_exponent", "margin_ratio", "gap_ratio"],
              [[cl.label, cl.margin_exponent, cl.gap_exponent, cl.margin_ratio, cl.gap_ratio]])
    return cl.label


def cmd_scan(cfg: ExperimentConfig, out: Path) -> int:
    rows, points = [], []
    for lvl in cfg.levels():
        scn, sc, point, kdim = _scan_level(cfg, lvl)
        points.append(point)
        for lam, m, k in zip(sc.lambdas, sc.margins, sc.kernel_dims):
            rows.append([lam, m, k, lvl])
        print(f"{scn.name}: dim ker(A)={kdim} min margin={min(sc.margins):.6g}")
    write_csv(out / "scan.csv", ["lambda", "margin", "kernel_dim", "refinement"], rows)
    label = _write_trend(cfg, out, points)
    if label:
        print(f"classification: {label}")
    return EXIT_OK


def cmd_constant(cfg: ExperimentConfig, out: Path) -> int:
    if cfg.scenario != "maxwell2d":
        raise ConfigError("the damping constant needs scenario = maxwell2d", "experiment", "scenario")
    rows = []
    for lvl in cfg.levels():
        g = grid_for_level(cfg, lvl)
        mask = RegionMask.full(g) if cfg.region == "all" else RegionMask.from_rectangles(g, cfg.rectangles)
        geo = damping_constant(g, mask)
        d = geo.dims
        rows.append([lvl, geo.c0, geo.sigma_min_T, geo.surjectivity_residual, geo.ep_margin,
                     d["H0"], d["H2"], d["H3t"], d["harm_D"], d["harm_Dc"]])
        print(f"{g.nx}x{g.ny}: c0={geo.c0:.6g} sigma_min(T)={geo.sigma_min_T:.6g}")
    write_csv(out / "constant.csv", ["refinement", "c0", "sigma_min_T", "surjectivity_residual", "ep_margin",
                                     "dim_H0", "dim_H2", "dim_H3t", "dim_harm_D", "dim_harm_Dc"], rows)
    return EXIT_OK


def cmd_counterexample(cfg: ExperimentConfig, out: Path) -> int:
    cfg = replace(cfg, scenario="counterexample")
    if not cfg.refinements:
        cfg = replace(cfg, refinements=[8, 16, 32, 64])
    rows, points = [], []
    for N in cfg.levels():
        scn, sc, point, kdim = _scan_level(cfg, N)
        points.append(point)
        rows.append([N, point.margin_at_0, sc.margin_at(0.0) if 0.0 in sc.lambdas else "nan",
                     point.interior_margin if point.interior_margin is not None else "nan",
                     max(sc.kernel_dims), kdim, point.spectral_gap])
    write_csv(out / "counterexample.csv", ["N", "margin_at_0", "sigma_min_A", "interior_margin",
                                           "max_kernel_dim", "dim_ker_A", "spectral_gap"], rows)
    label = _write_trend(cfg, out, points)
    if label:
        print(f"classification: {label}")
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, out: Path) -> int:
    rows = []
    for lvl in cfg.levels():
        try:
            scn = build_scenario(cfg, lvl)
        except IndefiniteMaterial as exc:
            print(f"FAIL IndefiniteMaterial: {exc}", file=sys.stderr)
            write_csv(out / "verify.csv", ["scenario", "invariant", "passed", "value", "detail"],
                      rows + [[f"level{lvl}", "IndefiniteMaterial", False, exc.eigenvalue, str(exc)]])
            return EXIT_INVARIANT
        try:
            checks = run_checks(scn, cfg.seed)
        except HypothesisViolated as exc:
            print(f"FAIL validate_gamma: {exc}", file=sys.stderr)
            return EXIT_INVARIANT
        for c in checks:
            rows.append([scn.name, c.name, c.passed, c.value, c.detail])
            print(f"{'ok  ' if c.passed else 'FAIL'} {scn.name} {c.name} {c.value:.3e}")
            if not c.passed:
                write_csv(out / "verify.csv", ["scenario", "invariant", "passed", "value", "detail"], rows)
                print(f"invariant violated: {c.name} ({c.detail})", file=sys.stderr)
                return EXIT_INVARIANT
    write_csv(out / "verify.csv", ["scenario", "invariant", "passed", "value", "detail"], rows)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "constant": cmd_constant,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockstab", description="Damped block-system stability laboratory")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, default=None, help="experiment config (INI)")
    p.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")
    p.add_argument("--refine", type=int, default=None, metavar="K",
                   help="run a single refinement level K instead of the configured list")
    p.add_argument("--seed", type=int, default=None)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.refine is not None:
            if args.refine < 2:
                raise ConfigError("--refine must be >= 2")
            cfg = replace(cfg, refinements=[args.refine])
        out = args.out if args.out is not None else Path(cfg.output_dir)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IndefiniteMaterial, EmptyRegion) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LinalgError, NonPositiveEnergy, DecompositionFailure, NoAngleFound, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
