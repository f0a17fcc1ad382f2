"""Projected mean curvature flow in the base SU(2): sphere ODE and profile PDE."""

from ._backend import BACKEND
from .monitors import (
    convexity_certificate,
    extinction_bound,
    monitors,
    pinching_extinction_report,
    volume_law_check,
    volume_law_refinement,
)
from .profile import (
    AxisymmetricProfile,
    max_stable_dt,
    profile_flow_solve,
    profile_flow_step,
    profile_geometry,
)
from .sphere import (
    SphereFlowState,
    analytic_extinction_time,
    analytic_radius,
    sphere_area,
    sphere_flow_solve,
    sphere_flow_step,
    sphere_mean_curvature,
)
from .suite import convex_suite, random_convex_profile
from .trajectory import ConvexityCertificate, FlowTrajectory, MonitorVector

__all__ = [
    "BACKEND",
    "AxisymmetricProfile",
    "ConvexityCertificate",
    "FlowTrajectory",
    "MonitorVector",
    "SphereFlowState",
    "analytic_extinction_time",
    "analytic_radius",
    "convexity_certificate",
    "extinction_bound",
    "max_stable_dt",
    "monitors",
    "pinching_extinction_report",
    "profile_flow_solve",
    "profile_flow_step",
    "profile_geometry",
    "sphere_area",
    "sphere_flow_solve",
    "sphere_flow_step",
    "sphere_mean_curvature",
    "volume_law_check",
    "volume_law_refinement",
    "convex_suite",
    "random_convex_profile",
]
