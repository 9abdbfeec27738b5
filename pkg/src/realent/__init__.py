"""Topological entropy of real quadratic rational maps in the (mu, t) normal form."""

from .bifurcation import BifurcationConfig, bifurcation_sweep, detect_attracting_cycle
from .bones import BoneCurve, critical_orbit_residual, trace_bones
from .entropy import EntropyConfig, entropy, entropy_batch, entropy_fpnf
from .exceptions import (
    ConfigurationError,
    DegenerateMapError,
    DomainError,
    RealEntError,
    SingularInputError,
    UnsupportedModalityError,
)
from .kneading import kneading_entropy_unimodal, kneading_sequence
from .preimages import preimage_count_entropy
from .qmap import (
    INFINITY,
    ModuliPoint,
    NormalFormMap,
    ParameterPoint,
    eval_map,
    moduli_fiber,
    moduli_from_mixed,
    moduli_project,
)
from .regions import Region, classify, family_domain, inside_parabola, trivial_entropy
from .results import EntropyEstimate, Method, Status
from .sweep import isentrope_connectivity, project_to_moduli, sweep_entropy

__version__ = "0.1.0"

__all__ = [
    "BifurcationConfig",
    "BoneCurve",
    "ConfigurationError",
    "DegenerateMapError",
    "DomainError",
    "EntropyConfig",
    "EntropyEstimate",
    "INFINITY",
    "Method",
    "ModuliPoint",
    "NormalFormMap",
    "ParameterPoint",
    "RealEntError",
    "Region",
    "SingularInputError",
    "Status",
    "UnsupportedModalityError",
    "bifurcation_sweep",
    "classify",
    "critical_orbit_residual",
    "detect_attracting_cycle",
    "entropy",
    "entropy_batch",
    "entropy_fpnf",
    "eval_map",
    "family_domain",
    "inside_parabola",
    "isentrope_connectivity",
    "kneading_entropy_unimodal",
    "kneading_sequence",
    "moduli_fiber",
    "moduli_from_mixed",
    "moduli_project",
    "preimage_count_entropy",
    "project_to_moduli",
    "sweep_entropy",
    "trace_bones",
    "trivial_entropy",
]
