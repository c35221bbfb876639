"""Time evolution ``U' = AU``: Cayley stepping, a dense oracle, decay fits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .linalg import LinalgError, SubspaceBasis, as_array, kernel_basis


class SolveFailure(LinalgError):
    pass


class DecompositionFailure(LinalgError):
    pass


class NonPositiveEnergy(ValueError):
    pass


def project_initial(U0: np.ndarray, kernel: SubspaceBasis | np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``U0`` onto ``ker(A)^perp``.

    ``kernel`` is a kernel frame, or the generator itself (its kernel is then
    computed here).
    """
    if not isinstance(kernel, SubspaceBasis):
        kernel = kernel_basis(as_array(kernel))
    K = kernel.columns
    U0 = np.asarray(U0, dtype=complex)
    if K.shape[1] == 0:
        return U0.copy()
    return U0 - K @ (K.conj().T @ U0)


def energy(U: np.ndarray) -> np.ndarray:
    """Squared norm; works column-wise on a trajectory ``(n, m)``."""
    return np.real(np.sum(U.conj() * U, axis=0))


class CayleyStepper:
    """Trapezoidal rule ``(I - dt/2 A)^{-1} (I + dt/2 A)`` with a cached LU.

    Every solve is checked: a relative residual above ``residual_tol`` raises
    :class:`SolveFailure`.
    """

    def __init__(self, A, dt: float, residual_tol: float = 1e-10):
        if not dt > 0:
            raise ValueError("dt must be positive")
        M = as_array(A)
        n = M.shape[0]
        if not np.any(M.imag):
            M = M.real
        self.A = M
        self.dt = float(dt)
        self.residual_tol = residual_tol
        self._L = np.eye(n) - 0.5 * dt * M
        self._R = np.eye(n) + 0.5 * dt * M
        self._lu = sla.lu_factor(self._L, check_finite=False)

    def step(self, U: np.ndarray) -> np.ndarray:
        rhs = self._R @ U
        x = sla.lu_solve(self._lu, rhs, check_finite=False)
        res = np.linalg.norm(self._L @ x - rhs)
        scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
        if res > self.residual_tol * scale:
            raise SolveFailure(f"Cayley solve residual {res / scale:.3e} exceeds {self.residual_tol:g}")
        return x

    def run(self, U0: np.ndarray, n_steps: int, record_every: int = 1):
        """Return ``(times, states)`` with states as columns, including ``t = 0``."""
        U = np.asarray(U0)
        dtype = np.result_type(U, self.A)
        U = U.astype(dtype)
        times = [0.0]
        states = [U]
        for k in range(1, n_steps + 1):
            U = self.step(U)
            if k % record_every == 0 or k == n_steps:
                times.append(k * self.dt)
                states.append(U)
        return np.array(times), np.column_stack(states)


def step_cayley(A, U: np.ndarray, dt: float) -> np.ndarray:
    """One Cayley step; for repeated stepping use :class:`CayleyStepper`."""
    return CayleyStepper(A, dt).step(np.asarray(U))


def evolve_oracle(A, U0: np.ndarray, times, cond_limit: float = 1e8) -> np.ndarray:
    """Reference ``exp(tA) U0`` for each ``t``, as columns.

    Uses an eigendecomposition when the eigenvector matrix is well
    conditioned and falls back to the complex Schur form otherwise.
    """
    M = as_array(A)
    n = M.shape[0]
    if n > 4096:
        raise DecompositionFailure(f"dense oracle limited to dim <= 4096, got {n}")
    U0 = np.asarray(U0, dtype=complex)
    times = np.asarray(times, dtype=float)
    try:
        w, V = np.linalg.eig(M)
        cond = np.linalg.cond(V)
    except np.linalg.LinAlgError as exc:
        raise DecompositionFailure(str(exc)) from exc
    if np.isfinite(cond) and cond < cond_limit:
        c = np.linalg.solve(V, U0)
        return V @ (np.exp(np.outer(w, times)) * c[:, None])
    try:
        T, Z = sla.schur(M, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DecompositionFailure(str(exc)) from exc
    y0 = Z.conj().T @ U0
    out = np.empty((n, times.size), dtype=complex)
    for k, t in enumerate(times):
        out[:, k] = Z @ (sla.expm(t * T) @ y0)
    return out


@dataclass
class DecayReport:
    """Energy trajectory with exponential and algebraic fits.

    ``fit_exponential = (rate, R^2)`` for ``E ~ exp(-rate t)``;
    ``fit_algebraic = (p, R^2)`` for ``E ~ t^p``.
    """

    times: np.ndarray
    energies: np.ndarray
    fit_exponential: tuple[float, float]
    fit_algebraic: tuple[float, float]
    selected_model: str
    graph_norm_initial: float = float("nan")
    energies_physical: np.ndarray | None = None
    window: tuple[float, float] = (0.0, 0.0)
    classification: str | None = None
    notes: dict = field(default_factory=dict)


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and ``R^2`` of the least-squares line through ``(x, y)``."""
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), r2


def fit_decay(times, energies, window_fraction: float = 0.5, min_samples: int = 32,
              conservative_tol: float = 1e-8) -> DecayReport:
    """Fit ``log E`` against ``t`` and against ``log t`` on the trailing window.

    A run whose energy changes by less than ``conservative_tol`` (relative)
    is labelled ``"conservative"`` with rate 0.  Underflowed (non-positive)
    energies truncate the series with a warning; :class:`NonPositiveEnergy`
    is raised if fewer than ``min_samples`` remain in the window.
    """
    t = np.asarray(times, dtype=float)
    E = np.asarray(energies, dtype=float)
    if t.shape != E.shape or t.ndim != 1:
        raise ValueError("times and energies must be 1-d of equal length")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    bad = np.flatnonzero(~(E > 0))
    if bad.size:
        warnings.warn(f"energy non-positive from sample {bad[0]} on; truncating fit window", RuntimeWarning)
        t, E = t[: bad[0]], E[: bad[0]]
    if t.size == 0:
        raise NonPositiveEnergy("no positive energy samples")
    t0 = t[0] + (1.0 - window_fraction) * (t[-1] - t[0])
    sel = t >= t0
    if t0 <= 0:
        sel &= t > 0  # log t needs t > 0
    if sel.sum() < min_samples:
        raise NonPositiveEnergy(f"only {int(sel.sum())} usable samples in the fit window (need {min_samples})")
    tw, Ew = t[sel], E[sel]
    logE = np.log(Ew)
    slope_e, r2_e = _linfit(tw, logE)
    slope_a, r2_a = _linfit(np.log(tw), logE)

    change = abs(E[0] - E[-1]) / E[0]
    if change < conservative_tol:
        model = "conservative"
        rate = 0.0
    else:
        rate = -slope_e
        model = "exponential" if r2_e >= r2_a else "algebraic"
    return DecayReport(
        times=np.asarray(times, dtype=float),
        energies=np.asarray(energies, dtype=float),
        fit_exponential=(float(rate), float(r2_e)),
        fit_algebraic=(float(slope_a), float(r2_a)),
        selected_model=model,
        window=(float(tw[0]), float(tw[-1])),
        notes={"relative_change": float(change)},
    )


def graph_norm(A, U0: np.ndarray) -> float:
    """``||U0|| + ||A U0||``."""
    return float(np.linalg.norm(U0) + np.linalg.norm(as_array(A) @ U0))


def simulate(A, U0: np.ndarray, dt: float, t_end: float, n_samples: int = 400,
             physical=None, window_fraction: float = 0.5) -> DecayReport:
    """Cayley trajectory from ``U0`` to ``t_end`` with a fitted decay report.

    ``physical``, if given, maps a state matrix (columns) to physical energies.
    """
    n_steps = max(1, int(round(t_end / dt)))
    every = max(1, n_steps // n_samples)
    stepper = CayleyStepper(A, dt)
    t, U = stepper.run(U0, n_steps, every)
    E = energy(U)
    rep = fit_decay(t, E, window_fraction)
    rep.graph_norm_initial = graph_norm(A, U0)
    if physical is not None:
        rep.energies_physical = physical(U)
    rep.notes.update({"dt": dt, "steps": n_steps})
    return rep


def is_nonincreasing(E: np.ndarray, rel: float = 1e-12) -> bool:
    E = np.asarray(E)
    if E.size < 2:
        return True
    return bool(np.all(np.diff(E) <= rel * E[:-1]))


def default_dt(hx: float, hy: float, factor: float = 0.5) -> float:
    return factor * min(hx, hy)


__all__ = [
    "CayleyStepper", "DecayReport", "DecompositionFailure", "NonPositiveEnergy", "SolveFailure",
    "default_dt", "energy", "evolve_oracle", "fit_decay", "graph_norm", "is_nonincreasing",
    "project_initial", "simulate", "step_cayley",
]
