"""Stability diagnostics: resolvent scans, damping structure, geometry, trends."""

from .classify import (
    Classification,
    ClassifyThresholds,
    InsufficientSeries,
    SeriesPoint,
    classify,
    loglog_slope,
)
from .counterexample import CounterexampleSpec, counterexample_U, counterexample_system
from .damping import DampingGeometry, GradientFrame, damping_constant, gradient_frame
from .hypothesis import (
    AccretivityCertificate,
    GammaReport,
    HypothesisViolated,
    KernelIdentityReport,
    NoAngleFound,
    default_U,
    kernel_identity_check,
    rotated_accretivity,
    validate_gamma,
)
from .resolvent import (
    KernelAdjointReport,
    ResolventScan,
    containment_residual,
    default_lambda_grid,
    kernel_adjoint_check,
    resolvent_scan,
    restrict_to_kernel_complement,
    spectral_abscissa,
    spectral_gap,
)

__all__ = [
    "AccretivityCertificate", "Classification", "ClassifyThresholds", "CounterexampleSpec",
    "DampingGeometry", "GammaReport", "GradientFrame", "HypothesisViolated", "InsufficientSeries",
    "KernelAdjointReport", "KernelIdentityReport", "NoAngleFound", "ResolventScan", "SeriesPoint",
    "classify", "containment_residual", "counterexample_U", "counterexample_system",
    "damping_constant", "default_U", "default_lambda_grid", "gradient_frame",
    "kernel_adjoint_check", "kernel_identity_check", "loglog_slope", "resolvent_scan",
    "restrict_to_kernel_complement", "rotated_accretivity", "spectral_abscissa", "spectral_gap",
    "validate_gamma",
]
