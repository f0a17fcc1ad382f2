"""Piecewise-constant connections on an interval and their gauge geometry.

A :class:`DiscretePath` is an ``m``-segment step function ``[0, a] -> su(2)``.
Its parallel transport is the ordered product of segment exponentials, which
solves ``g' = g u`` exactly for step data.  The gauge action is discretised on
the link variables ``exp(a/m * u_i)`` (``lattice`` scheme) so that the action
law and the equivariance ``phi(g.u) = g(0) phi(u) g(a)^-1`` hold to round-off.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import lie_group as lg
from .errors import BoundaryViolation, DimensionMismatch, TruncationTooLarge

BOUNDARY_TOL = 1e-9
JACOBIAN_STEP = 1e-6
HESSIAN_STEP = 1e-4


@dataclass(frozen=True)
class DiscretePath:
    a: float
    m: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1, 3)
        if self.m < 1 or values.shape[0] != self.m:
            raise DimensionMismatch(f"expected {self.m} segment values, got {values.shape[0]}")
        if not self.a > 0:
            raise ValueError("interval length must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def delta(self):
        return self.a / self.m

    @classmethod
    def zeros(cls, a, m):
        return cls(a, m, np.zeros((m, 3)))

    @classmethod
    def constant(cls, a, m, x):
        return cls(a, m, np.tile(np.asarray(x, dtype=float), (m, 1)))

    @classmethod
    def sample(cls, func, a, m):
        """Midpoint samples of ``func: s -> R^3``."""
        s = (np.arange(m) + 0.5) * (a / m)
        return cls(a, m, np.array([func(si) for si in s]))

    def flat(self):
        return self.values.ravel()

    def with_values(self, values):
        return DiscretePath(self.a, self.m, np.asarray(values).reshape(self.m, 3))

    def inner(self, other, metric=lg.UNIT):
        """L2 inner product ``(a/m) sum_i <u_i, v_i>_g``."""
        _check_same(self, other)
        return self.delta * float(np.sum(metric.inner_algebra(self.values, other.values)))

    def norm(self, metric=lg.UNIT):
        return np.sqrt(self.inner(self, metric))

    def __sub__(self, other):
        _check_same(self, other)
        return DiscretePath(self.a, self.m, self.values - other.values)

    def __add__(self, other):
        _check_same(self, other)
        return DiscretePath(self.a, self.m, self.values + other.values)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a", "m"])
            writer.writerow([format(float(self.a), ".17g"), self.m])
            writer.writerow(["x", "y", "z"])
            for row in self.values:
                writer.writerow([format(float(v), ".17g") for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != ["a", "m"] or rows[2] != ["x", "y", "z"]:
            raise ValueError(f"{path}: not a DiscretePath CSV")
        a, m = float(rows[1][0]), int(rows[1][1])
        return cls(a, m, np.array([[float(v) for v in r] for r in rows[3:]]))


@dataclass(frozen=True)
class GaugePath:
    """``m + 1`` nodes of an H1 path in G, read piecewise-geodesically."""

    a: float
    m: int
    nodes: np.ndarray

    def __post_init__(self):
        nodes = lg.normalize(np.array(self.nodes, dtype=float).reshape(-1, 4))
        if nodes.shape[0] != self.m + 1:
            raise DimensionMismatch(f"expected {self.m + 1} nodes, got {nodes.shape[0]}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def constant(cls, a, m, k):
        return cls(a, m, np.tile(np.asarray(k, dtype=float), (m + 1, 1)))

    @classmethod
    def from_function(cls, func, a, m):
        s = np.linspace(0.0, a, m + 1)
        return cls(a, m, np.array([func(si) for si in s]))

    def energy(self, metric=lg.UNIT):
        """Discrete H1 energy ``sum d(g_i, g_{i+1})^2 * m / a``."""
        d = lg.geodesic_distance(self.nodes[:-1], self.nodes[1:], metric)
        return float(np.sum(d * d)) * self.m / self.a

    def __mul__(self, other):
        if (self.a, self.m) != (other.a, other.m):
            raise DimensionMismatch("gauge paths live on different grids")
        return GaugePath(self.a, self.m, lg.multiply(self.nodes, other.nodes))


@dataclass(frozen=True)
class BoundarySubgroup:
    """Finite subgroup Gamma of SU(2) and the boundary rule it imposes.

    ``mode`` is ``"full"`` (no constraint), ``"based"`` (both ends at e, the
    based loop group) or ``"gamma_pair"`` (ends in Gamma x Gamma).
    """

    gamma: np.ndarray = field(default_factory=lambda: lg.identity((1,)))
    mode: str = "full"

    def __post_init__(self):
        gamma = lg.normalize(np.array(self.gamma, dtype=float).reshape(-1, 4))
        object.__setattr__(self, "gamma", gamma)
        if self.mode not in ("full", "based", "gamma_pair"):
            raise ValueError(f"unknown boundary mode {self.mode!r}")
        if not self.contains(lg.IDENTITY):
            raise ValueError("subgroup must contain the identity")
        for g in gamma:
            if not self.contains(lg.inverse(g)):
                raise ValueError("subgroup is not closed under inversion")
            for h in gamma:
                if not self.contains(lg.multiply(g, h)):
                    raise ValueError("subgroup is not closed under multiplication")

    @classmethod
    def cyclic(cls, order, mode="gamma_pair"):
        """Cyclic group of the given order on the circle ``exp(t i)``."""
        t = 2.0 * np.pi * np.arange(order) / order
        axis = np.zeros((order, 3))
        axis[:, 0] = t
        return cls(lg.exp_group(axis), mode)

    @classmethod
    def quaternion_group(cls, mode="gamma_pair"):
        eye = np.eye(4)
        return cls(np.concatenate([eye, -eye]), mode)

    @property
    def order(self):
        return self.gamma.shape[0]

    def distance_to(self, g):
        return float(np.min(lg.angle(lg.multiply(lg.inverse(self.gamma), g))))

    def contains(self, g, tol=BOUNDARY_TOL):
        return self.distance_to(g) <= tol


def _check_same(u, v):
    if (u.a, u.m) != (v.a, v.m):
        raise DimensionMismatch(f"grids differ: {(u.a, u.m)} vs {(v.a, v.m)}")


def _ordered_product(quats):
    """Prefix products ``P_0 = e, P_k = q_1 ... q_k`` along axis -2."""
    out = np.empty(quats.shape[:-2] + (quats.shape[-2] + 1, 4))
    out[..., 0, :] = lg.IDENTITY
    acc = out[..., 0, :]
    for k in range(quats.shape[-2]):
        acc = lg.multiply(acc, quats[..., k, :])
        out[..., k + 1, :] = acc
    return out


def segment_exponentials(u):
    return lg.exp_group(u.delta * u.values)


def parallel_transport(u):
    """Endpoint of the horizontal lift: ``exp(du_1) exp(du_2) ... exp(du_m)``."""
    return _ordered_product(segment_exponentials(u))[-1]


def holonomy(u):
    """Holonomy of the connection whose pull-back along the loop is ``u``."""
    return parallel_transport(u)


def gauge_act(g, u, scheme="lattice"):
    """Gauge transform ``(g.u) = Ad(g) u - g' g^-1`` on step data.

    ``lattice`` (default) acts on link variables,
    ``exp(d w_i) = g_{i-1} exp(d u_i) g_i^-1``: the action law and
    transport equivariance are exact, the L2 isometry holds to O(d^2).
    ``linear`` uses ``w_i = Ad(g_{i-1}) u_i + log(g_{i-1} g_i^-1) / d``,
    an exact affine isometry whose action law and equivariance hold to O(d).
    No scheme on a finite grid has all three exactly.
    """
    if (g.a, g.m) != (u.a, u.m):
        raise DimensionMismatch(f"gauge path grid {(g.a, g.m)} vs path grid {(u.a, u.m)}")
    d = u.delta
    left, right = g.nodes[:-1], g.nodes[1:]
    if scheme == "lattice":
        links = lg.multiply(lg.multiply(left, segment_exponentials(u)), lg.inverse(right))
        w = lg.log_group(links) / d
    elif scheme == "linear":
        w = lg.adjoint(left, u.values) + lg.log_group(lg.multiply(left, lg.inverse(right))) / d
    else:
        raise ValueError(f"unknown gauge scheme {scheme!r}")
    return DiscretePath(u.a, u.m, w)


def _transport_variations(u, phi, segments, perturbed):
    """``phi^-1 phi(u')`` where ``u'`` differs from ``u`` on one segment.

    ``perturbed[k]`` is the new exponential of segment ``segments[k]``.
    """
    prefix = _ordered_product(segment_exponentials(u))
    left = lg.multiply(lg.inverse(phi), prefix[segments])
    right = lg.multiply(lg.inverse(prefix[segments + 1]), phi)
    return lg.multiply(lg.multiply(left, perturbed), right)


def transport_jacobian(u, h=JACOBIAN_STEP):
    """Differential of transport as a ``(3, 3m)`` matrix, central differences.

    Columns follow ``u.flat()``; rows are left-trivialised coordinates at
    ``phi(u)`` obtained through ``log_group``.
    """
    phi = parallel_transport(u)
    n = 3 * u.m
    idx = np.arange(n)
    segments, comps = idx // 3, idx % 3
    cols = []
    for sign in (1.0, -1.0):
        vals = u.values[segments].copy()
        vals[idx, comps] += sign * h
        moved = _transport_variations(u, phi, segments, lg.exp_group(u.delta * vals))
        cols.append(lg.log_group(moved))
    return ((cols[0] - cols[1]) / (2.0 * h)).T


def horizontal_projector(u, jac=None):
    """Orthogonal projector onto ``ker(dphi)^perp`` for the L2 inner product."""
    jac = transport_jacobian(u) if jac is None else jac
    # <,>_0 is a multiple of the Euclidean product on u.flat(), so the
    # orthogonal complement of the kernel is the row space of jac
    return jac.T @ np.linalg.solve(jac @ jac.T, jac)


def horizontal_projection(u, v, jac=None):
    _check_same(u, v)
    return v.with_values(horizontal_projector(u, jac) @ v.flat())


def submersion_residual(u, h1, h2, metric=lg.UNIT, jac=None):
    """``|<dphi h1, dphi h2>_{G,a} - <h1, h2>_0|``."""
    jac = transport_jacobian(u) if jac is None else jac
    lhs = float(metric.inner(jac @ h1.flat(), jac @ h2.flat()))
    return abs(lhs - h1.inner(h2, metric))


def transport_hessian(u, h=HESSIAN_STEP):
    """Second derivative of ``log(phi(u)^-1 phi(u + .))`` as ``(3, 3m, 3m)``."""
    phi = parallel_transport(u)
    exps = segment_exponentials(u)
    prefix = _ordered_product(exps)
    inv_phi = lg.inverse(phi)
    n = 3 * u.m
    ia, ib = np.triu_indices(n)
    si, sj = ia // 3, ib // 3
    ca, cb = ia % 3, ib % 3
    same = si == sj
    d = u.delta
    out = np.zeros((3, n, n))
    stencil = {}
    for sa in (1.0, -1.0):
        for sb in (1.0, -1.0):
            va = u.values[si].copy()
            va[np.arange(len(ia)), ca] += sa * h
            vb = u.values[sj].copy()
            vb[np.arange(len(ib)), cb] += sb * h
            # both perturbations on one segment combine into one exponential
            va[same, cb[same]] += sb * h
            ea = lg.exp_group(d * va)
            eb = lg.exp_group(d * vb)
            q = lg.multiply(inv_phi, prefix[si])
            q = lg.multiply(q, ea)
            mid = lg.multiply(lg.inverse(prefix[si + 1]), prefix[sj])
            tail = lg.multiply(eb, lg.multiply(lg.inverse(prefix[sj + 1]), phi))
            q_split = lg.multiply(lg.multiply(q, mid), tail)
            q_same = lg.multiply(q, lg.multiply(lg.inverse(prefix[si + 1]), phi))
            q = np.where(same[:, None], q_same, q_split)
            stencil[sa, sb] = lg.log_group(q)
    second = (
        stencil[1.0, 1.0] - stencil[1.0, -1.0] - stencil[-1.0, 1.0] + stencil[-1.0, -1.0]
    ) / (4.0 * h * h)
    for k in range(3):
        out[k, ia, ib] = second[:, k]
        out[k, ib, ia] = second[:, k]
    return out


def paired_partial_trace(eigenvalues, trunc):
    """``sum_{i <= trunc} (mu+_i + mu-_i)``, largest positive with most negative."""
    eig = np.asarray(eigenvalues, dtype=float)
    pos = np.sort(eig[eig > 0])[::-1][:trunc]
    neg = np.sort(eig[eig < 0])[:trunc]
    return float(np.sum(pos) + np.sum(neg))


def fibre_shape_operator(u, normal=None, metric=lg.UNIT):
    """Shape operator of the fibre ``phi^-1(phi(u))`` at ``u``.

    Returned as a symmetric matrix on an orthonormal basis of the fibre's
    tangent space (dimension ``3m - 3``).  ``normal`` is an algebra vector
    selecting the unit normal along the horizontal lift of that direction.
    """
    w = u.delta * metric.scale
    jac = transport_jacobian(u) / np.sqrt(w)
    hess = transport_hessian(u) / w
    _, _, vt = np.linalg.svd(jac)
    tangent = vt[3:].T
    direction = np.array([1.0, 0.0, 0.0]) if normal is None else np.asarray(normal, float)
    xi = jac.T @ direction
    xi /= np.linalg.norm(xi)
    coeff = np.linalg.solve(jac @ jac.T, jac @ xi)
    second = -np.tensordot(coeff, hess, axes=1)
    shape = tangent.T @ second @ tangent
    return 0.5 * (shape + shape.T)


def fibre_mean_curvature_probe(u, mode=None, trunc=20, normal=None, metric=lg.UNIT):
    """Paired partial trace of the fibre shape operator at ``u``.

    The fibre of the ``P(G, Gamma x Gamma)`` action through ``u`` is a finite
    union of transport fibres, so ``mode`` does not change the local value.
    """
    if trunc < 0 or trunc > 3 * u.m:
        raise TruncationTooLarge(f"trunc={trunc} exceeds 3m={3 * u.m}")
    if trunc == 0:
        return 0.0
    if mode is not None and mode.mode == "gamma_pair" and not mode.contains(lg.IDENTITY):
        raise BoundaryViolation("boundary subgroup must contain e")
    eig = np.linalg.eigvalsh(fibre_shape_operator(u, normal, metric))
    return paired_partial_trace(eig, trunc)


def bridge_mu(samples, a=1.0, m=None):
    """Package connection values sampled along a loop as a step path."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise DimensionMismatch(f"samples must have shape (m, 3), got {samples.shape}")
    if m is not None and samples.shape[0] != m:
        raise DimensionMismatch(f"expected {m} samples, got {samples.shape[0]}")
    return DiscretePath(a, samples.shape[0], samples)


def lambda_bridge(g, subgroup=None):
    """Pulled-back gauge path, with the boundary rule of ``subgroup`` enforced."""
    if subgroup is not None and subgroup.mode != "full":
        ends = (g.nodes[0], g.nodes[-1])
        if subgroup.mode == "based":
            bad = [lg.angle(e) > BOUNDARY_TOL for e in ends]
        else:
            bad = [not subgroup.contains(e) for e in ends]
        if any(bad):
            raise BoundaryViolation(f"gauge path endpoints violate mode {subgroup.mode!r}")
    return GaugePath(g.a, g.m, g.nodes.copy())


def pure_gauge_samples(nodes, a):
    """Samples of the flat connection ``g^-1 dg`` along a closed or open node chain."""
    nodes = np.asarray(nodes, dtype=float)
    m = nodes.shape[0] - 1
    steps = lg.multiply(lg.inverse(nodes[:-1]), nodes[1:])
    return lg.log_group(steps) * (m / a)


def transitivity_witness(target, a, m):
    """Gauge path moving the zero connection to one with transport ``target``."""
    # phi(g.0) = g(0) g(a)^-1, so run g from e to target^-1 along a geodesic
    step = lg.log_group(lg.inverse(target))
    t = np.linspace(0.0, 1.0, m + 1)[:, None]
    return GaugePath(a, m, lg.exp_group(t * step))
