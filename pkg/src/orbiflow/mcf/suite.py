"""Seeded families of convex axisymmetric starting surfaces."""

import numpy as np

from .profile import AxisymmetricProfile, profile_geometry


def random_convex_profile(rng, n_psi=401, base=0.6, max_amplitude=0.1, kappa=1.0):
    """``base + a2 cos(2 psi) + a4 cos(4 psi)`` with ``|a2| + |a4| <= max_amplitude``.

    Only even modes are used: the surface is then symmetric under the
    reflection ``psi -> pi - psi`` and shrinks onto ``x0`` itself, which keeps
    it a radial graph all the way to extinction.  Draws are rejected until
    both principal curvatures are positive.
    """
    psi = np.linspace(0.0, np.pi, n_psi)
    while True:
        total = rng.uniform(0.2, 1.0) * max_amplitude
        share = rng.uniform(0.0, 1.0)
        a2 = rng.choice([-1.0, 1.0]) * total * (1.0 - share)
        a4 = rng.choice([-1.0, 1.0]) * total * share * 0.25
        p = AxisymmetricProfile(base + a2 * np.cos(2 * psi) + a4 * np.cos(4 * psi))
        if np.min(profile_geometry(p, kappa).lambda_min) > 0.0:
            return p


def convex_suite(seed=0, count=20, n_psi=401, base=0.6, max_amplitude=0.1):
    rng = np.random.default_rng(seed)
    return [random_convex_profile(rng, n_psi, base, max_amplitude) for _ in range(count)]
