"""Wiener amalgam norms, dispersive kernels, and exponent-region checks."""

__version__ = "0.1.0"

from .grid import (
    GridSpec,
    NormResult,
    SampledField,
    SpaceTimeField,
    make_grid,
    transform,
    lebesgue_norm,
    mixed_lebesgue_norm,
)
from .wiener import (
    WindowSpec,
    amalgam_norm,
    holder_pairing,
    inclusion_check,
    interpolate_exponents,
    spacetime_amalgam_norm,
    unit_cube_partition,
    weak_lorentz_norm,
)
from .propagator import (
    DecayProfile,
    KernelSamples,
    adjoint_accumulate,
    evolve,
    evolve_series,
    hsigma_norm,
    kernel_amalgam_profile,
    kernel_bound,
    kernel_eval,
    kernel_on_grid,
    profile_times,
)
from .exponents import (
    ExponentTuple,
    RegionReport,
    classical_sobolev_line,
    is_schrodinger_admissible,
    predicted_kernel_decay,
    sample_region,
    satisfies_cn2,
    satisfies_corollary,
    satisfies_prop_kernel,
    satisfies_theorem,
)

__all__ = [name for name in dir() if not name.startswith("_")]
