"""A family that is strongly stable at every size but loses its margin at 0."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blockop import BlockSystem
from ..linalg import LinearMap, SubspaceBasis


@dataclass(frozen=True)
class CounterexampleSpec:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"counterexample needs integer N >= 2, got {self.N}")

    @property
    def D_diag(self) -> np.ndarray:
        return np.arange(1, self.N + 1, dtype=float)

    @property
    def gamma00(self) -> np.ndarray:
        return np.eye(self.N)

    @property
    def gamma22(self) -> np.ndarray:
        return np.diag(1.0 / self.D_diag)


def counterexample_system(N: int) -> BlockSystem:
    """Normalized system on ``H0 = C^N + C^N`` (ran C* first, ker C second).

    ``C = [diag(1..N), 0]`` and ``gamma = diag(I, diag(1/k))``.  Then
    ``kappa_0^* gamma kappa_0 = diag(1/k)`` whose smallest singular value is
    exactly ``1/N``.
    """
    spec = CounterexampleSpec(N)
    n = spec.N
    C = np.hstack([np.diag(spec.D_diag), np.zeros((n, n))])
    g = np.zeros((2 * n, 2 * n))
    g[:n, :n] = spec.gamma00
    g[n:, n:] = spec.gamma22
    return BlockSystem(
        LinearMap(C, "H0", "H1"),
        LinearMap(g, "H0", "H0"),
        LinearMap(np.eye(2 * n), "H0", "H0"),
        LinearMap(np.eye(n), "H1", "H1"),
        normalized=True,
        label=f"counterexample N={n}",
    )


def counterexample_U(N: int) -> SubspaceBasis:
    """The accretive part ``U`` of the damping: the first ``N`` coordinates."""
    Q = np.zeros((2 * N, N))
    Q[:N, :N] = np.eye(N)
    return SubspaceBasis(Q, "H0")
