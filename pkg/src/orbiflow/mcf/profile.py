"""Axially symmetric convex surfaces in S^3 evolving by mean curvature.

The surface is stored as a radial graph ``r(psi)`` over the geodesic sphere
directions at ``x0``, sampled on a uniform grid of ``[0, pi]``.  This is the
base picture of the flow: the evolving gauge-invariant hypersurface upstairs
projects to exactly this flow, so nothing infinite-dimensional is simulated.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import CFLViolation, LostConvexity, OutOfRange, SingularProfile
from . import _backend
from ._geometry import curvatures, stable_dt
from .monitors import monitors_from_geometry
from .trajectory import FlowTrajectory, extinction_time, profile_hash

CFL = 0.4
R_FLOOR = 1e-8
BALL_MARGIN = 1e-6


@dataclass(frozen=True)
class AxisymmetricProfile:
    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.ndim != 1 or r.size < 5:
            raise ValueError("profile needs at least five nodes")
        if not np.all(np.isfinite(r)) or np.min(r) <= 0.0:
            raise OutOfRange("profile radius must be positive")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_function(cls, func, n_psi):
        psi = np.linspace(0.0, np.pi, n_psi)
        return cls(func(psi))

    @classmethod
    def constant(cls, radius, n_psi):
        return cls(np.full(n_psi, float(radius)))

    @property
    def n_psi(self):
        return self.r.size

    @property
    def psi(self):
        return np.linspace(0.0, np.pi, self.n_psi)

    @property
    def h(self):
        return np.pi / (self.n_psi - 1)

    def check_ball(self, kappa):
        limit = np.pi / np.sqrt(kappa) - BALL_MARGIN
        if np.max(self.r) >= limit:
            raise OutOfRange(f"profile leaves the geodesic ball of radius {limit}")


@dataclass(frozen=True)
class ProfileGeometry:
    psi: np.ndarray
    H: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    # area density in psi after integrating out the rotation angle
    area_element: np.ndarray
    grad_H: np.ndarray
    sn: np.ndarray
    v: np.ndarray
    h: float

    @property
    def area(self):
        return float(np.trapezoid(self.area_element, dx=self.h))

    @property
    def int_H2(self):
        return float(np.trapezoid(self.H**2 * self.area_element, dx=self.h))

    @property
    def lambda_min(self):
        return np.minimum(self.lambda1, self.lambda2)

    @property
    def lambda_max(self):
        return np.maximum(self.lambda1, self.lambda2)


def profile_geometry(p, kappa=1.0):
    """Second-order finite-difference curvature quantities at every node."""
    p.check_ball(kappa)
    psi, h = p.psi, p.h
    sin_psi, cos_psi = np.sin(psi), np.cos(psi)
    sn, v, lam1, lam2 = curvatures(p.r, h, kappa, sin_psi, cos_psi)
    scale = np.max(sn)
    if np.min(v * sn) < 1e-6 * scale * scale or not np.all(np.isfinite(lam1 + lam2)):
        raise SingularProfile("graph metric degenerates")
    H = lam1 + lam2
    dH = np.zeros_like(H)
    dH[1:-1] = (H[2:] - H[:-2]) / (2.0 * h)
    area_element = 2.0 * np.pi * v * sn * sin_psi
    return ProfileGeometry(psi, H, lam1, lam2, area_element, np.abs(dH) / v, sn, v, h)


def max_stable_dt(p, kappa=1.0, cfl=CFL):
    g = profile_geometry(p, kappa)
    return stable_dt(g.sn, g.v, g.h, cfl)


def profile_flow_step(p, kappa, dt):
    """One explicit Euler step of ``dr/dt = -H sqrt(1 + r'^2 / sn^2)``.

    The square root converts the normal speed ``H`` into radial speed of the
    graph; for a constant profile it is one and the step reduces to the
    sphere ODE.  Negative ``dt`` runs the flow backwards.
    """
    g = profile_geometry(p, kappa)
    if np.min(g.lambda_min) <= 0.0:
        raise LostConvexity(f"minimum principal curvature {np.min(g.lambda_min):.3g}")
    limit = stable_dt(g.sn, g.v, g.h, CFL)
    if abs(dt) > limit * (1.0 + 1e-12):
        raise CFLViolation(f"|dt| = {abs(dt):.3g} exceeds the CFL limit {limit:.3g}")
    return AxisymmetricProfile(p.r - dt * g.H * g.v / g.sn)


def _sample(geometry, t, p, delta, b, columns, labels):
    mv = monitors_from_geometry(geometry, delta, b)
    eps = np.min(geometry.lambda_min / geometry.H)
    row = {
        "t": t,
        "H_min": mv.H_min,
        "H_max": mv.H_max,
        "ratio": mv.ratio,
        "lambda_min": mv.lambda_min,
        "lambda_max": mv.lambda_max,
        "psi_delta_max": mv.psi_delta_max,
        "grad_H_sq_max": mv.grad_H_sq_max,
        "gradient_excess_max": mv.gradient_excess_max,
        "pointwise_ratio_max": mv.pointwise_ratio_max,
        "epsilon": eps,
        "area": mv.volume,
        "int_H2": mv.int_H2,
        "r_max": float(np.max(p.r)),
        "r_mean": float(np.mean(p.r)),
    }
    for key, value in row.items():
        columns.setdefault(key, []).append(value)
    labels.append(profile_hash(p.r))


def profile_flow_solve(
    p,
    kappa=1.0,
    *,
    cfl=CFL,
    r_floor=R_FLOOR,
    t_end=None,
    delta=0.25,
    b=0.01,
    shrink=0.98,
    every_step=False,
    max_steps=None,
    snapshot_every=None,
    backend=None,
):
    """Run the profile flow to extinction (``max r <= r_floor``) or ``t_end``.

    Monitors are sampled each time ``max r`` shrinks by the factor ``shrink``
    (or after every step with ``every_step``).  ``snapshot_every`` stores the
    profile at every n-th sample.  Raises :class:`LostConvexity` if a principal
    curvature turns non-positive.
    """
    kern = _backend.get(backend)
    p.check_ball(kappa)
    r = np.array(p.r, dtype=float)
    h = p.h
    t = 0.0
    steps = 0
    columns, labels, snapshots = {}, [], []
    extinct = False

    spans = []

    def record(span=0.0):
        spans.append(span)
        prof = AxisymmetricProfile(r.copy())
        _sample(profile_geometry(prof, kappa), t, prof, delta, b, columns, labels)
        if snapshot_every and (len(labels) - 1) % snapshot_every == 0:
            snapshots.append((t, prof.r.copy()))

    if np.min(profile_geometry(AxisymmetricProfile(r.copy()), kappa).lambda_min) <= 0.0:
        raise LostConvexity("initial profile is not strictly convex")
    record()
    while True:
        if max_steps is not None and steps >= max_steps:
            break
        if t_end is not None and t >= t_end:
            break
        budget = 1 if every_step else (10**9 if max_steps is None else max_steps - steps)
        target = r_floor if every_step else max(r_floor, shrink * np.max(r))
        if t_end is not None and not every_step:
            budget = min(budget, 256)
        # elapsed time per chunk is kept apart from t, which stops resolving it near extinction
        elapsed, done, status, _ = kern.advance_profile(r, h, kappa, cfl, 0.0, target, budget)
        t += elapsed
        steps += done
        if status == 2:
            raise LostConvexity(f"principal curvature turned non-positive at t={t:.6g}")
        if status == 3:
            raise SingularProfile(f"profile degenerated at t={t:.6g}")
        if np.max(r) <= r_floor:
            extinct = True
            record(elapsed)
            break
        if done:
            record(elapsed)
    cols = {k: np.asarray(v) for k, v in columns.items()}
    cols["dt"] = np.asarray(spans)
    T = extinction_time(cols["t"], cols["area"], cols["dt"][1:]) if extinct else None
    traj = FlowTrajectory("profile", kappa, cols, extinct, T, snapshots, p.psi, labels)
    traj.steps = steps
    return traj
