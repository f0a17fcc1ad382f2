"""Curvature monitors and post-run checks for the projected flow."""

from dataclasses import dataclass

import numpy as np

from ..errors import IncompleteRun
from .trajectory import ConvexityCertificate, MonitorVector

DIM = 2


def monitors_from_geometry(g, delta=0.25, b=0.01):
    lam_lo, lam_hi = g.lambda_min, g.lambda_max
    norm_A2 = g.lambda1**2 + g.lambda2**2
    psi_delta = (norm_A2 - g.H**2 / DIM) / g.H ** (2.0 - delta)
    grad2 = g.grad_H**2
    return MonitorVector(
        H_min=float(np.min(g.H)),
        H_max=float(np.max(g.H)),
        lambda_min=float(np.min(lam_lo)),
        lambda_max=float(np.max(lam_hi)),
        psi_delta_max=float(np.max(psi_delta)),
        grad_H_sq_max=float(np.max(grad2)),
        volume=g.area,
        int_H2=g.int_H2,
        gradient_excess_max=float(np.max(grad2 - b * g.H**4)),
        pointwise_ratio_max=float(np.max(lam_hi / lam_lo)),
    )


def monitors(state, kappa=1.0, delta=0.25, b=0.01):
    """Monitor vector for a :class:`SphereFlowState` or an axisymmetric profile."""
    from .profile import AxisymmetricProfile, profile_geometry
    from .sphere import SphereFlowState, sphere_area

    if isinstance(state, SphereFlowState):
        H = state.H
        area = sphere_area(state.r, state.kappa)
        return MonitorVector(H, H, H / 2, H / 2, 0.0, 0.0, area, H * H * area, -b * H**4, 1.0)
    if isinstance(state, AxisymmetricProfile):
        return monitors_from_geometry(profile_geometry(state, kappa), delta, b)
    raise TypeError(f"cannot monitor {type(state).__name__}")


def convexity_certificate(g):
    return ConvexityCertificate(float(np.min(g.lambda_min / g.H)))


@dataclass(frozen=True)
class VolumeLawReport:
    max_relative_deviation: float
    samples: int


def volume_law_check(traj):
    """Compare the centred difference of area with ``-int H^2``."""
    t, area, ih2 = traj["t"], traj["area"], traj["int_H2"]
    if len(t) < 3:
        raise IncompleteRun("need at least three samples")
    steps = traj.columns.get("dt")
    span = t[2:] - t[:-2] if steps is None else steps[1:-1] + steps[2:]
    dA = (area[2:] - area[:-2]) / span
    target = -ih2[1:-1]
    scale = np.abs(target)
    dev = np.where(scale > 0, np.abs(dA - target) / np.where(scale > 0, scale, 1.0), np.abs(dA))
    return VolumeLawReport(float(np.max(dev)), int(dev.size))


@dataclass(frozen=True)
class ExtinctionReport:
    T: float
    bound: float
    passed: bool
    final_ratio: float
    final_psi_delta: float


def extinction_bound(H0_min, n=DIM):
    """A-priori lifespan ``n / (2 min H0^2)`` (infinite when ``min H0 <= 0``)."""
    if H0_min <= 0.0:
        return float("inf")
    return n / (2.0 * H0_min**2)


def pinching_extinction_report(traj, delta=0.25):
    bound = extinction_bound(float(traj["H_min"][0]))
    if np.isinf(bound):
        return ExtinctionReport(float("inf"), bound, True, float(traj["ratio"][-1]), 0.0)
    if not traj.extinct or traj.extinction_time is None:
        raise IncompleteRun("flow did not reach extinction")
    T = traj.extinction_time
    return ExtinctionReport(
        T, bound, T <= bound, float(traj["ratio"][-2]), float(traj["psi_delta_max"][-2])
    )


@dataclass(frozen=True)
class RefinementStudy:
    n_psi: tuple
    deviations: tuple
    rate: float


def volume_law_refinement(profile_func, n_psi=(51, 101, 201), t_end=0.02, kappa=1.0):
    """Volume-law deviation of the profile flow on successively finer grids.

    Every step is sampled, so the time step shrinks with the CFL limit and
    the deviation measures the combined space-time error.  ``rate`` is the
    least-squares slope of ``log(deviation)`` against ``log(1 / h)``.
    """
    from .profile import AxisymmetricProfile, profile_flow_solve

    devs = []
    for n in n_psi:
        p = AxisymmetricProfile.from_function(profile_func, n)
        traj = profile_flow_solve(p, kappa, every_step=True, t_end=t_end)
        devs.append(volume_law_check(traj).max_relative_deviation)
    h = np.pi / (np.asarray(n_psi, dtype=float) - 1.0)
    rate = float(np.polyfit(np.log(h), np.log(devs), 1)[0])
    return RefinementStudy(tuple(n_psi), tuple(devs), rate)
