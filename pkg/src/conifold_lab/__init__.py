"""Numerical laboratory for conifold transitions of knot conormal bundles."""
from .conifold import ct_point, ct_unknot_oracle, resolve_lift, torus_trace
from .conormal import conormal_point, frame_at, perturbation_field, perturbed_conormal_point
from .geom import PhasePoint, ProjPoint, Tolerances
from .knots import fourier_knot, parse_knot_spec, torus_knot, unknot

__version__ = "0.1.0"

__all__ = [
    "ct_point", "ct_unknot_oracle", "resolve_lift", "torus_trace", "conormal_point",
    "frame_at", "perturbation_field", "perturbed_conormal_point", "PhasePoint", "ProjPoint",
    "Tolerances", "fourier_knot", "parse_knot_spec", "torus_knot", "unknot",
]
