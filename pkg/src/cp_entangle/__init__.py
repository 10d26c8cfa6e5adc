"""Surface-modified collective decay and steady-state entanglement of two emitters.

The package computes the dissipative (Gamma_12) and coherent (Omega_12)
dipole-dipole couplings of two identical emitters near a planar half-space
from dyadic Green's tensors, propagates the resulting master equation, and
quantifies the entanglement (concurrence) that survives when the
subradiant decay channel D = Gamma - Gamma_12 closes.
"""

__version__ = "0.1.0"

from .media import (
    C_LIGHT,
    MU_0,
    GOLD,
    NIOBIUM,
    Drude,
    FreeSpace,
    FresnelPair,
    PerfectConductor,
    Superconductor,
    SurfaceModel,
    fresnel,
    fresnel_nonretarded_superconductor,
    permittivity,
    surface_mode_wavenumber,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    IntegralResult,
    QuadratureError,
    QuadratureSpec,
    bessel_j,
    integrate_evanescent,
    integrate_finite,
)
from .greens import (
    Coupling,
    CouplingSet,
    Geometry,
    MIN_SCALED_HEIGHT,
    PositivityError,
    coupling_set,
    gamma_pair,
    gamma_self,
    greens_free,
    greens_scattering,
    omega_pair,
    pair_coupling,
)
from .dynamics import (
    RelativeDecay,
    StepControlError,
    SymmetricAntisymmetricView,
    TwoQubitState,
    concurrence,
    evolve_analytical,
    evolve_numerical,
    relative_decay,
    steady_state,
)
from .sweeps import (
    BracketError,
    ConcurrenceAt,
    OptimalHeight,
    SweepResult,
    SweepSpec,
    TraceResult,
    concurrence_trace,
    decay_map,
    find_optimal_z,
    sweep_grid,
)

__all__ = [
    "__version__",
    # media
    "C_LIGHT",
    "MU_0",
    "GOLD",
    "NIOBIUM",
    "Drude",
    "FreeSpace",
    "FresnelPair",
    "PerfectConductor",
    "Superconductor",
    "SurfaceModel",
    "fresnel",
    "fresnel_nonretarded_superconductor",
    "permittivity",
    "surface_mode_wavenumber",
    # numerics
    "DEFAULT_QUADRATURE",
    "IntegralResult",
    "QuadratureError",
    "QuadratureSpec",
    "bessel_j",
    "integrate_evanescent",
    "integrate_finite",
    # greens
    "Coupling",
    "CouplingSet",
    "Geometry",
    "MIN_SCALED_HEIGHT",
    "PositivityError",
    "coupling_set",
    "gamma_pair",
    "gamma_self",
    "greens_free",
    "greens_scattering",
    "omega_pair",
    "pair_coupling",
    # dynamics
    "RelativeDecay",
    "StepControlError",
    "SymmetricAntisymmetricView",
    "TwoQubitState",
    "concurrence",
    "evolve_analytical",
    "evolve_numerical",
    "relative_decay",
    "steady_state",
    # sweeps
    "BracketError",
    "ConcurrenceAt",
    "OptimalHeight",
    "SweepResult",
    "SweepSpec",
    "TraceResult",
    "concurrence_trace",
    "decay_map",
    "find_optimal_z",
    "sweep_grid",
]
