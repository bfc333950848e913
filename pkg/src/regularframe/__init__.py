"""Regular-frame toolkit: Lorentzian frame algebra, regular charts, metric
interpolation, Klein-Gordon transport, mass-shell synthesis and truncated
Fock space checks."""
from .chart import RegularChart, build_regular_chart, cover_region
from .errors import RegularFrameError
from .fock import CategoryRegistry, Particle, ParticleSystem, TruncatedFock, gamma, transport_representation
from .interpolation import InterpolatedMetric, TransitionFunction, interpolated_metric_at, verify_interpolation
from .kg import FieldState, GridSpec, evolve, kg_inner_product, kg_norm2
from .lorentz import block_decompose, check_regular, normal_vector
from .mass_shell import j_transform, shell_measure, synthesize
from .metrics import SpacetimePoint, metric_from_spec
from .transport import TransportScenario, gram_matrix, round_trip

__version__ = "0.1.0"

__all__ = [
    "CategoryRegistry", "FieldState", "GridSpec", "InterpolatedMetric", "Particle", "ParticleSystem",
    "RegularChart", "RegularFrameError", "SpacetimePoint", "TransitionFunction", "TransportScenario",
    "TruncatedFock", "block_decompose", "build_regular_chart", "check_regular", "cover_region", "evolve",
    "gamma", "gram_matrix", "interpolated_metric_at", "j_transform", "kg_inner_product", "kg_norm2",
    "metric_from_spec", "normal_vector", "round_trip", "shell_measure", "synthesize",
    "transport_representation", "verify_interpolation", "__version__",
]
