"""Ground states and constraint minimizers for a planar Schrodinger-Poisson energy
with logarithmic convolution and external potential ``ln(1 + |x|^2)``."""

from .asymptotics import (
    SweepRow,
    centering_check,
    decay_check,
    nonexistence_probe,
    rescale_to_w,
    run_sweep,
)
from .energy import (
    EnergyBreakdown,
    el_residual,
    evaluate_energy,
    gn_ratio,
    lagrange_multiplier,
    norms,
)
from .grid import Field2D, Grid2D, integrate, make_grid
from .groundstate import RadialProfile, cached_profile, embed_Q, kernel_residual, shoot_Q
from .logconv import KernelTable, build_log_kernel, log_potential, v_functionals
from .minimizer import SolveConfig, SolveResult, minimize, scaling_energy, uniqueness_probe

__version__ = "0.1.0"

__all__ = [
    "Grid2D",
    "Field2D",
    "make_grid",
    "integrate",
    "RadialProfile",
    "shoot_Q",
    "cached_profile",
    "embed_Q",
    "kernel_residual",
    "KernelTable",
    "build_log_kernel",
    "log_potential",
    "v_functionals",
    "EnergyBreakdown",
    "evaluate_energy",
    "el_residual",
    "lagrange_multiplier",
    "gn_ratio",
    "norms",
    "SolveConfig",
    "SolveResult",
    "minimize",
    "scaling_energy",
    "uniqueness_probe",
    "SweepRow",
    "run_sweep",
    "rescale_to_w",
    "centering_check",
    "decay_check",
    "nonexistence_probe",
]
