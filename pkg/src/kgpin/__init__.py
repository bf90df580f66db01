"""Screened-Poisson (time-independent Klein-Gordon) Green kernels on
generalized Moebius strips and Klein bottles.

The free-space fundamental solution of Delta - alpha^2 is periodized into
pin-character-twisted kernels of the flat non-orientable quotients; the
two-point orbit sums serve as Green kernels for boundary-value problems, and
on the compact Klein-bottle geometry fields with isolated poles are finite
combinations of translated derivative kernels, which this package builds and
fits.
"""

from .calculus import (
    BoxDomain,
    QuadratureRule,
    gradient,
    kg_residual,
    normal_derivative,
    surface_integral,
    volume_integral,
)
from .bvp import green_reproduce, newton_potential, solve_dirichlet
from .errors import (
    IllConditionedWarning,
    KGPinError,
    NonIntegerOrderWarning,
    NotCertifiedError,
    OverflowGuardError,
    RankDeficientWarning,
    SingularPointError,
)
from .kernels import (
    CertifiedValue,
    PeriodizedKernel,
    TruncationPolicy,
    eval_many_x,
    eval_many_y,
    grad_y_many,
    green_klein,
    green_mobius,
    kernel_derivative,
    partial_sums,
    periodized,
    wp_klein,
    wp_mobius,
)
from .lattice import (
    KLEIN,
    MOBIUS,
    LatticeShell,
    ManifoldSpec,
    PinCharacter,
    all_characters,
    character_value,
    deck_apply,
    deck_compose,
    orbit_distance,
    reduce_to_cell,
    shell,
    shell_count,
    sign_of,
    singular_distance,
)
from .poles import (
    ExpansionField,
    FitResult,
    OrderEstimate,
    PoleExpansion,
    build_expansion,
    fit_expansion,
    multi_indices,
    singularity_order,
)
from .specfun import (
    KernelParams,
    RadialKernelValue,
    bessel_k,
    gamma_half,
    sphere_area,
    tail_bound,
    yukawa,
    yukawa_profile,
    yukawa_radial_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "KGPinError",
    "SingularPointError",
    "NotCertifiedError",
    "OverflowGuardError",
    "IllConditionedWarning",
    "RankDeficientWarning",
    "NonIntegerOrderWarning",
    "KernelParams",
    "RadialKernelValue",
    "gamma_half",
    "sphere_area",
    "bessel_k",
    "yukawa",
    "yukawa_radial_derivative",
    "yukawa_profile",
    "tail_bound",
    "MOBIUS",
    "KLEIN",
    "ManifoldSpec",
    "PinCharacter",
    "LatticeShell",
    "sign_of",
    "character_value",
    "shell",
    "shell_count",
    "deck_apply",
    "deck_compose",
    "reduce_to_cell",
    "singular_distance",
    "orbit_distance",
    "all_characters",
    "TruncationPolicy",
    "PeriodizedKernel",
    "CertifiedValue",
    "wp_mobius",
    "wp_klein",
    "green_mobius",
    "green_klein",
    "kernel_derivative",
    "periodized",
    "partial_sums",
    "eval_many_x",
    "eval_many_y",
    "grad_y_many",
    "BoxDomain",
    "QuadratureRule",
    "kg_residual",
    "gradient",
    "normal_derivative",
    "surface_integral",
    "volume_integral",
    "green_reproduce",
    "newton_potential",
    "solve_dirichlet",
    "PoleExpansion",
    "ExpansionField",
    "FitResult",
    "OrderEstimate",
    "multi_indices",
    "build_expansion",
    "fit_expansion",
    "singularity_order",
]
