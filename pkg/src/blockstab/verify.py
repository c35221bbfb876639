"""Cross-module invariant suite run by ``blockstab verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .blockop import assemble_B, schur_identity_check, schur_reduce_B0, solve_equivalence
from .grid import build_curl_pair, build_grad0
from .helmholtz import compress
from .linalg import as_array
from .scenarios import Scenario
from .semigroup import CayleyStepper, energy, is_nonincreasing
from .stability import (
    default_lambda_grid,
    kernel_adjoint_check,
    kernel_identity_check,
    rotated_accretivity,
    validate_gamma,
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    detail: str = ""


def _dissipativity(scn: Scenario, rng) -> Check:
    A = as_array(scn.A)
    n = A.shape[0]
    X = rng.standard_normal((n, 1000)) + 1j * rng.standard_normal((n, 1000))
    q = np.real(np.einsum("ij,ij->j", X.conj(), A @ X)) / np.real(np.einsum("ij,ij->j", X.conj(), X))
    v = float(q.max())
    return Check("dissipativity", v <= 1e-10, v, "max Re<Ax,x>/|x|^2")


def _exactness(scn: Scenario, rng) -> Check:
    if scn.grid is None:
        return Check("exactness", True, 0.0, "no grid")
    G = build_grad0(scn.grid).entries
    C, Cs = build_curl_pair(scn.grid)
    v = max(abs(C.entries @ G).max(), abs(C.entries.conj().T - Cs.entries).max())
    return Check("exactness", v == 0, float(v), "max|curl0 grad0|, max|C^H - C*|")


def _gamma(scn: Scenario, rng) -> Check:
    rep = validate_gamma(scn.normalized.gamma, scn.U_basis)
    return Check("validate_gamma", rep.passed, rep.c, rep.message or f"c={rep.c:.6g}")


def _frame(scn: Scenario, rng) -> Check:
    d0, d1 = scn.frame.completeness_defect()
    v = max(d0, d1)
    return Check("frame_completeness", v <= 1e-9, v)


def _equivalence(scn: Scenario, rng) -> Check:
    worst = 0.0
    for _ in range(20):
        lam = float(rng.uniform(0.1, 4.0) * rng.choice([-1.0, 1.0]))
        f = rng.standard_normal(scn.n0) + 1j * rng.standard_normal(scn.n0)
        g = scn.frame.iota1 @ (rng.standard_normal(scn.frame.rank) + 1j * rng.standard_normal(scn.frame.rank))
        worst = max(worst, solve_equivalence(scn.normalized, scn.frame, lam, f, g)["relative_error"])
    return Check("equivalence_3x3", worst <= 1e-8, worst)


def _schur(scn: Scenario, rng) -> Check:
    res = max(schur_identity_check(assemble_B(scn.normalized, scn.frame, lam)).residual
              for lam in (0.1, -0.1, 1.0, -1.0, 4.0, -4.0))
    r0 = schur_reduce_B0(scn.normalized, scn.frame, return_report=True)
    ok = res <= 1e-9 and r0.a_inv_11_norm <= 1e-12 and r0.schur_deviation <= 1e-10
    return Check("schur_identity", ok, max(res, r0.a_inv_11_norm, r0.schur_deviation))


def _kernels(scn: Scenario, rng) -> Check:
    ki = kernel_identity_check(scn.gamma_state(), scn.skew_state(), scn.U_state())
    ka = kernel_adjoint_check(scn.A)
    return Check("kernel_identity", ki.ok and ka.ok, max(ki.max_residual, ka.residual_ker_in_adj),
                 f"dims {ki.dim_plus}/{ki.dim_minus}/{ki.dim_intersection}/{ki.dim_oracle}, ker A {ka.dim_ker}")


def _accretivity(scn: Scenario, rng) -> Check:
    K = scn.frame.ker_C
    g22 = compress(as_array(scn.normalized.gamma), K, K).dense()
    worst = np.inf
    ok = True
    for lam in default_lambda_grid():
        if lam == 0.0:
            continue
        cert = rotated_accretivity(scn.normalized.gamma, lam, K, scn.U_basis)
        smin = np.linalg.svd(1j * lam * np.eye(K.dim) + g22, compute_uv=False)[-1] if K.dim else np.inf
        ok &= cert.ok and smin >= cert.c_tilde * (1 - 1e-10)
        worst = min(worst, smin - cert.c_tilde)
    return Check("rotated_accretivity", bool(ok), float(worst), "min sigma_min - c_tilde")


def _cayley(scn: Scenario, rng) -> Check:
    A = as_array(scn.A)
    st = CayleyStepper(A, 0.05)
    _, U = st.run(rng.standard_normal(A.shape[0]), 200)
    E = energy(U)
    return Check("cayley_monotone", is_nonincreasing(E), float(np.max(np.diff(E) / E[:-1])))


CHECKS: list[Callable] = [
    _exactness, _gamma, _dissipativity, _frame, _equivalence, _schur, _kernels, _accretivity, _cayley,
]


def run_checks(scn: Scenario, seed: int = 0, stop_on_failure: bool = True) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for fn in CHECKS:
        c = fn(scn, rng)
        out.append(c)
        if stop_on_failure and not c.passed:
            break
    return out
