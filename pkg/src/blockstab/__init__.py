"""blockstab: finite-dimensional laboratory for damped block operator systems.

The package assembles discrete operator pairs ``(C, C*)``, their Helmholtz
frames and the shifted block operator ``B(lambda)``, measures closed-range
margins and damping constants, and simulates energy decay.
"""

from .blockop import BlockSystem, ShiftedSystem, assemble_A, assemble_B, normalize, schur_identity_check, schur_reduce_B0
from .grid import GridSpec, MaterialField, RegionMask, build_curl_pair, build_grad0, build_projector, sample_materials
from .helmholtz import HelmholtzFrame, build_frame, closed_range_margin, compress
from .linalg import LinearMap, RankPolicy, SubspaceBasis

__version__ = "0.1.0"

__all__ = [
    "BlockSystem", "GridSpec", "HelmholtzFrame", "LinearMap", "MaterialField", "RankPolicy",
    "RegionMask", "ShiftedSystem", "SubspaceBasis", "assemble_A", "assemble_B", "build_curl_pair",
    "build_frame", "build_grad0", "build_projector", "closed_range_margin", "compress", "normalize",
    "sample_materials", "schur_identity_check", "schur_reduce_B0",
]
