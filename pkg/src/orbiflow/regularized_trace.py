"""Regularized traces of isoparametric shape operators.

The spectrum is a union of branches ``{lam / (1 + b j) : j in Z}`` with
``b > 1``.  Positive and negative eigenvalues are summed in pairs, which for
one branch amounts to the symmetric sum over ``j`` and evaluates through the
partial-fraction expansion of the cotangent:
``sum_{j in Z} 1 / (1 + b j) = (pi / b) cot(pi / b)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PoleAtJ

POLE_TOL = 1e-12


@dataclass(frozen=True)
class SpectrumFamily:
    branches: tuple

    def __post_init__(self):
        branches = tuple((float(lam), float(b)) for lam, b in self.branches)
        for _, b in branches:
            if not b > 1.0:
                raise ValueError(f"branch constant b={b} must exceed one")
            inv = 1.0 / b
            if abs(inv - round(inv)) < POLE_TOL:
                raise PoleAtJ(f"1/b = {inv} is an integer: the spectrum has a pole")
        object.__setattr__(self, "branches", branches)

    @classmethod
    def single(cls, lam, b):
        return cls(((lam, b),))

    def scaled(self, alpha):
        return SpectrumFamily(tuple((alpha * lam, b) for lam, b in self.branches))

    def __or__(self, other):
        return SpectrumFamily(self.branches + other.branches)


def eigenvalue(fam, branch, j):
    lam, b = fam.branches[branch]
    denom = 1.0 + b * j
    if abs(denom) < POLE_TOL:
        raise PoleAtJ(f"1 + b j vanishes at j={j}")
    return lam / denom


def regularized_trace_partial(fam, N):
    """Symmetric partial sum over ``|j| <= N`` for every branch."""
    if N < 0:
        raise ValueError("N must be non-negative")
    j = np.arange(1, N + 1, dtype=float)
    total = 0.0
    for lam, b in fam.branches:
        # 1/(1+bj) + 1/(1-bj) = 2/(1 - b^2 j^2), summed smallest terms first
        pairs = 2.0 / (1.0 - (b * j) ** 2)
        total += lam * (1.0 + float(np.sum(pairs[::-1])))
    return total


def regularized_trace_closed(fam):
    total = 0.0
    for lam, b in fam.branches:
        x = np.pi / b
        total += lam * x * np.cos(x) / np.sin(x)
    return total


def minimality_check(fam, tol=1e-12):
    return abs(regularized_trace_closed(fam)) <= tol
