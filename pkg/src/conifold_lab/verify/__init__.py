"""Sampling-based verification engines."""
from .curvature import (IITensor, covariant_hessian, gauss_sectional, holomorphic_hessian,
                        intrinsic_sectional, second_fundamental_form)
from .engines import (SampledBound, bilipschitz_bounds, form_restriction_max, tameness_bounds,
                      totally_real_angle)
from .handles import (EUCLIDEAN, G_HAT, OMEGA, OMEGA_HAT, FormHandle, GridSpec, MetricHandle,
                      SubmanifoldSampler, omega_tilde, pushforward_omega)
from .stokes import LIOUVILLE, Disc, OneFormHandle, stokes_check

__all__ = [
    "IITensor", "covariant_hessian", "gauss_sectional", "holomorphic_hessian",
    "intrinsic_sectional", "second_fundamental_form", "SampledBound", "bilipschitz_bounds",
    "form_restriction_max", "tameness_bounds", "totally_real_angle", "EUCLIDEAN", "G_HAT",
    "OMEGA", "OMEGA_HAT", "FormHandle", "GridSpec", "MetricHandle", "SubmanifoldSampler",
    "omega_tilde", "pushforward_omega", "LIOUVILLE", "Disc", "OneFormHandle", "stokes_check",
]
