"""Free-energy diminishing DDFV solver for drift-diffusion equations."""

from .fields import DiscreteField, TensorSpec
from .mesh import (
    DDFVMesh,
    PrimalMesh,
    QualityReport,
    build_ddfv,
    gen_kershaw,
    gen_quad_fvca,
    gen_uniform_quad,
    quality,
    read_mesh,
    write_mesh,
)
from .scheme import (
    Assembly,
    SchemeParams,
    StateRecord,
    dissipation,
    energy,
    fisher_norm,
    jacobian,
    project_initial,
    project_potential,
    relative_energy,
    residual,
    stationary_state,
)
from .solver import NewtonConfig, NewtonStats, linear_solve, newton_solve

__version__ = "0.1.0"

__all__ = [
    "DiscreteField", "TensorSpec",
    "DDFVMesh", "PrimalMesh", "QualityReport",
    "build_ddfv", "gen_kershaw", "gen_quad_fvca", "gen_uniform_quad",
    "quality", "read_mesh", "write_mesh",
    "Assembly", "SchemeParams", "StateRecord",
    "dissipation", "energy", "fisher_norm", "jacobian",
    "project_initial", "project_potential", "relative_energy", "residual",
    "stationary_state",
    "NewtonConfig", "NewtonStats", "linear_solve", "newton_solve",
    "__version__",
]
