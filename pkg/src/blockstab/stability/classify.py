"""Refinement-trend classification of decay behaviour.

At a fixed discretization every range is closed, so the strong versus
semi-uniform versus exponential distinction only shows up in how margins
behave along a refinement series.  Thresholds are explicit and configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence


class InsufficientSeries(ValueError):
    pass


@dataclass(frozen=True)
class SeriesPoint:
    refinement: float
    margin_at_0: float
    spectral_gap: float | None = None
    interior_margin: float | None = None
    kernels_trivial: bool = True


@dataclass(frozen=True)
class ClassifyThresholds:
    ratio: float = 0.5
    exponent: float = -0.5


@dataclass(frozen=True)
class Classification:
    label: str
    margin_exponent: float
    gap_exponent: float | None
    margin_ratio: float
    gap_ratio: float | None
    details: dict = field(default_factory=dict)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = [math.log(v) for v in x]
    ly = [math.log(v) for v in y]
    n = len(lx)
    mx, my = sum(lx) / n, sum(ly) / n
    sxx = sum((a - mx) ** 2 for a in lx)
    sxy = sum((a - mx) * (b - my) for a, b in zip(lx, ly))
    return sxy / sxx


def _as_point(p) -> SeriesPoint:
    if isinstance(p, SeriesPoint):
        return p
    return SeriesPoint(*p)


def classify(series, thresholds: ClassifyThresholds = ClassifyThresholds()) -> Classification:
    """Label a refinement series.

    ``series`` holds :class:`SeriesPoint` entries or tuples
    ``(refinement, margin_at_0, spectral_gap[, interior_margin[, kernels_trivial]])``.

    Rules, in order:

    * ``exponential-trend``: margin at 0 and spectral gap both keep at least
      ``ratio`` of their first value;
    * ``semi-uniform-trend``: the margin at 0 keeps its ratio and every
      interior imaginary-axis margin is positive;
    * ``strong-only-trend``: the log-log exponent of the margin at 0 is below
      ``exponent`` and all kernels are trivial;
    * ``indeterminate`` otherwise.
    """
    pts = sorted((_as_point(p) for p in series), key=lambda p: p.refinement)
    if len(pts) < 3:
        raise InsufficientSeries(f"classification needs >= 3 refinement levels, got {len(pts)}")
    ref = [p.refinement for p in pts]
    m = [p.margin_at_0 for p in pts]
    if any(v <= 0 for v in m):
        m_exp = -math.inf
        m_ratio = 0.0 if m[0] > 0 else math.nan
    else:
        m_exp = loglog_slope(ref, m)
        m_ratio = m[-1] / m[0]
    gaps = [p.spectral_gap for p in pts]
    if all(g is not None for g in gaps):
        g_ratio = gaps[-1] / gaps[0] if gaps[0] > 0 else 0.0
        g_exp = loglog_slope(ref, gaps) if all(g > 0 for g in gaps) else -math.inf
    else:
        g_ratio = g_exp = None
    interior = [p.interior_margin for p in pts]
    interior_pos = all(v is not None and v > 0 for v in interior)
    trivial = all(p.kernels_trivial for p in pts)

    r = thresholds.ratio
    if m_ratio >= r and g_ratio is not None and g_ratio >= r:
        label = "exponential-trend"
    elif m_ratio >= r and interior_pos:
        label = "semi-uniform-trend"
    elif m_exp < thresholds.exponent and trivial:
        label = "strong-only-trend"
    else:
        label = "indeterminate"
    return Classification(
        label, m_exp, g_exp, m_ratio, g_ratio,
        {"interior_positive": interior_pos, "kernels_trivial": trivial, "n": len(pts)},
    )
