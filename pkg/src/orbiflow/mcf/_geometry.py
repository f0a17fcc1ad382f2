"""Curvatures of an axially symmetric radial graph in the round three-sphere.

The surface is ``{exp_x0(r(psi) * nu(psi, theta))}`` in geodesic polar
coordinates ``dr^2 + sn(r)^2 (dpsi^2 + sin^2 psi dtheta^2)`` with
``sn(r) = sin(k r) / k`` and ``k = sqrt(kappa)``.  With ``v = sqrt(r'^2 + sn^2)``:

    lam1 = (2 sn' r'^2 + sn' sn^2 - sn r'') / v^3        (meridian)
    lam2 = (sn' sn sin psi - r' cos psi) / (sn v sin psi)  (rotation)

Both are positive on geodesic spheres (outward normal).  At the poles
``r' = 0`` and ``r' cot psi -> r''``, which makes the two curvatures equal.
Mean curvature flow with normal speed ``-H`` moves the graph by
``dr/dt = -H v / sn``.
"""

import numpy as np


def grid(n_psi):
    psi = np.linspace(0.0, np.pi, n_psi)
    return psi, psi[1] - psi[0]


def derivatives(r, h):
    rp = np.zeros_like(r)
    rp[1:-1] = (r[2:] - r[:-2]) / (2.0 * h)
    rpp = np.empty_like(r)
    rpp[1:-1] = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (h * h)
    # even reflection across the axis enforces r' = 0 at both poles
    rpp[0] = 2.0 * (r[1] - r[0]) / (h * h)
    rpp[-1] = 2.0 * (r[-2] - r[-1]) / (h * h)
    return rp, rpp


def curvatures(r, h, kappa, sin_psi, cos_psi):
    """Return ``(sn, v, lam1, lam2)`` at every node."""
    k = np.sqrt(kappa)
    sn = np.sin(k * r) / k
    cs = np.cos(k * r)
    rp, rpp = derivatives(r, h)
    v = np.sqrt(rp * rp + sn * sn)
    lam1 = (2.0 * cs * rp * rp + cs * sn * sn - sn * rpp) / v**3
    lam2 = np.empty_like(r)
    inner = slice(1, -1)
    lam2[inner] = (cs[inner] * sn[inner] * sin_psi[inner] - rp[inner] * cos_psi[inner]) / (
        sn[inner] * v[inner] * sin_psi[inner]
    )
    for i in (0, -1):
        lam2[i] = (sn[i] * cs[i] - rpp[i]) / (sn[i] * sn[i])
    return sn, v, lam1, lam2


def stable_dt(sn, v, h, cfl):
    """Explicit Euler step bound ``cfl * h^2 / D``.

    ``D`` bounds the coefficient of ``r''`` (``1 / v^2``) plus the axis term
    ``r' cot(psi) / sn^2``, which behaves like a second diffusion near the poles.
    """
    diffusivity = np.max(1.0 / (v * v) + 1.0 / (sn * sn))
    return cfl * h * h / diffusivity
