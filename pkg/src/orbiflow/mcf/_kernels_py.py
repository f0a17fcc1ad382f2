"""Pure numpy implementation of the profile-flow stepping kernel."""

import numpy as np

from ._geometry import curvatures, stable_dt

STATUS_MAX_STEPS = 0
STATUS_REACHED = 1
STATUS_LOST_CONVEXITY = 2
STATUS_SINGULAR = 3


def advance_profile(r, h, kappa, cfl, t, r_stop, max_steps):
    """Advance ``r`` in place with explicit Euler steps at the CFL limit.

    Stops after ``max_steps`` steps or once ``max(r) <= r_stop``.  Returns
    ``(t, steps, status, last_dt)``.
    """
    n = r.shape[0]
    psi = np.linspace(0.0, np.pi, n)
    sin_psi, cos_psi = np.sin(psi), np.cos(psi)
    dt = 0.0
    for step in range(max_steps):
        if not np.all(np.isfinite(r)) or np.min(r) <= 0.0:
            return t, step, STATUS_SINGULAR, dt
        if np.max(r) <= r_stop:
            return t, step, STATUS_REACHED, dt
        sn, v, lam1, lam2 = curvatures(r, h, kappa, sin_psi, cos_psi)
        if min(np.min(lam1), np.min(lam2)) <= 0.0:
            return t, step, STATUS_LOST_CONVEXITY, dt
        dt = stable_dt(sn, v, h, cfl)
        r -= dt * (lam1 + lam2) * v / sn
        t += dt
    if np.max(r) <= r_stop:
        return t, max_steps, STATUS_REACHED, dt
    return t, max_steps, STATUS_MAX_STEPS, dt
