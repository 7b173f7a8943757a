"""Pseudospectral solvers with successive rescaling for Burgers and Euler blow-up studies."""

from .burgers import BurgersModel, BurgersState, burgers_rhs, cosine_initial, max_gradient_location
from .diagnostics import (
    BlowupFit,
    FitResult,
    StructureFunctionTable,
    average_over_cycles,
    bkm_integral,
    core_range,
    fit_blowup_exponent,
    fit_power_law,
    structure_function_1d,
    structure_function_3d,
    translate_to_original_scale,
)
from .errors import *  # noqa: F401,F403
from .euler import (
    EulerModel,
    EulerState,
    euler_rhs,
    leray_project,
    max_vorticity_location,
    taylor_green,
    taylor_scale,
    vorticity,
)
from .integrate import IntegratorConfig, integrate_until
from .rescale import (
    CycleLedger,
    RescaleConfig,
    RescaleParams,
    apply_fringe,
    extract_box,
    rescale_parameters,
    run_cascade,
    stretch_respawn,
)
from .spectral import (
    Grid,
    PhysicalField,
    SpectralField,
    dealiased_product,
    energy_ratio,
    forward_transform,
    inverse_transform,
    shell_energies,
    spectral_derivative,
)

__version__ = "0.1.0"
