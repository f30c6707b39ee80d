"""Recover convex support boundaries from blurred, noisy images by cube probing."""

from ._errors import ConfigurationError, NumericalError
from .estimator import (
    EstimatorConfig,
    GridObservation,
    OracleObservation,
    Reconstruction,
    SupportEstimate,
    delta_star,
    estimate_probe,
    estimate_support,
    observe,
    psi_norm,
    psi_on_grid,
    reconstruct_body,
    theta_star,
)
from .field import GridSpec, ObservationField, exact_gaussian_probe_draws, integrate_against, simulate_grid_field
from .geometry import (
    Disk,
    Ellipse,
    Polygon,
    SlabSpec,
    SupportProfile,
    direction_grid,
    halfplane_intersection,
    hausdorff_distance,
    lp_support_metric,
    support_function,
)
from .kernel import BlurKernel, blur_on_grid, kernel_fourier, validate_assumption1
from .mollifier import MollifierSpec, ProbeLocation, phi_hat_tau_delta
from .scene import IntensityModel, fit_alpha, probe_functional_exact, window_functional

__all__ = [
    "ConfigurationError",
    "NumericalError",
    "EstimatorConfig",
    "GridObservation",
    "OracleObservation",
    "Reconstruction",
    "SupportEstimate",
    "delta_star",
    "estimate_probe",
    "estimate_support",
    "observe",
    "psi_norm",
    "psi_on_grid",
    "reconstruct_body",
    "theta_star",
    "GridSpec",
    "ObservationField",
    "exact_gaussian_probe_draws",
    "integrate_against",
    "simulate_grid_field",
    "Disk",
    "Ellipse",
    "Polygon",
    "SlabSpec",
    "SupportProfile",
    "direction_grid",
    "halfplane_intersection",
    "hausdorff_distance",
    "lp_support_metric",
    "support_function",
    "BlurKernel",
    "blur_on_grid",
    "kernel_fourier",
    "validate_assumption1",
    "MollifierSpec",
    "ProbeLocation",
    "phi_hat_tau_delta",
    "IntensityModel",
    "fit_alpha",
    "probe_functional_exact",
    "window_functional",
]

__version__ = "0.1.0"
