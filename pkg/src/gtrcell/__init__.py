"""Average spectral efficiency of PPP downlink cellular networks under
generalized two-ray fading, with a Monte-Carlo cross-check."""

from .ase import AseResult, LinkConfig, average_se, conditional_se, serving_distance_pdf
from .errors import ConfigError, DomainError, GtrCellError, NumericError
from .fading import (
    GtrParams,
    SevereParams,
    Truncated,
    Uniform,
    VonMises,
    rayleigh,
    rician,
    signal_lt,
    zeta1,
    zeta1_prime,
    zeta2,
    zeta3,
)
from .interference import (
    LtEvaluation,
    NetworkParams,
    lt_interference_direct,
    lt_interference_exact,
    lt_interference_lower_bound,
    lt_interference_severe,
)
from .montecarlo import AseEstimate, SimConfig, realize_network, simulate_ase, simulate_conditional_se

__all__ = [
    "AseEstimate", "AseResult", "ConfigError", "DomainError", "GtrCellError", "GtrParams",
    "LinkConfig", "LtEvaluation", "NetworkParams", "NumericError", "SevereParams", "SimConfig",
    "Truncated", "Uniform", "VonMises", "average_se", "conditional_se", "lt_interference_direct",
    "lt_interference_exact", "lt_interference_lower_bound", "lt_interference_severe",
    "rayleigh", "realize_network", "rician", "serving_distance_pdf", "signal_lt",
    "simulate_ase", "simulate_conditional_se", "zeta1", "zeta1_prime", "zeta2", "zeta3",
]
