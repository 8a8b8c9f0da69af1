"""Norm estimators and empirical operator-norm probes."""

from .family import ProbeFunction, probe_family
from .norms import (
    AliasingWarning,
    NormSpec,
    besov_levels,
    besov_quasinorm,
    combine_levels,
    grid_norm,
    h_s_multiplier,
    h_s_norm,
    holder_norm,
    holder_seminorm,
    level_shares,
    lp_norm,
    lp_symbols,
    lp_window,
    sobolev_norm,
)
from .probes import (
    DecompositionWitness,
    NormProbeReport,
    adjoint_duality,
    adjoint_flatness,
    boundary_smoothness_report,
    dilation_growth_probe,
    extension_samples,
    extension_window,
    neg_sobolev_upper,
    operator_norm_probe,
    transport_witness,
    witness_cost,
)
from .quadrature import LogQuadrature, callable_inner, callable_lp_norm, callable_sobolev_norm

__all__ = [
    "AliasingWarning",
    "DecompositionWitness",
    "LogQuadrature",
    "NormProbeReport",
    "NormSpec",
    "ProbeFunction",
    "adjoint_duality",
    "adjoint_flatness",
    "besov_levels",
    "besov_quasinorm",
    "boundary_smoothness_report",
    "callable_inner",
    "callable_lp_norm",
    "callable_sobolev_norm",
    "combine_levels",
    "dilation_growth_probe",
    "extension_samples",
    "extension_window",
    "grid_norm",
    "h_s_multiplier",
    "h_s_norm",
    "holder_norm",
    "holder_seminorm",
    "level_shares",
    "lp_norm",
    "lp_symbols",
    "lp_window",
    "neg_sobolev_upper",
    "operator_norm_probe",
    "probe_family",
    "sobolev_norm",
    "transport_witness",
    "witness_cost",
]
