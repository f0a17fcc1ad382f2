"""SU(2) as unit quaternions with a bi-invariant metric.

Group elements are float arrays of shape ``(..., 4)`` ordered ``(w, x, y, z)``.
Algebra elements are arrays of shape ``(..., 3)``: the imaginary part of a pure
quaternion, so that ``exp_group`` is the ordinary quaternion exponential and
the Lie bracket is ``[x, y] = xy - yx = 2 x cross y``.  Every function
broadcasts over leading axes.

The metric is carried separately by :class:`MetricConvention`; algebra
coordinates never change with it, only inner products and distances do.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CutLocus, DegeneratePlane

CUT_LOCUS_TOL = 1e-9
_SERIES_CUTOFF = 1e-4

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class MetricConvention:
    """Scale of the bi-invariant metric.

    ``<x, y>_g = scale * (x . y)`` is the inner product on the Lie algebra and
    ``<x, y>_{G,a} = <x, y>_g / a`` the induced metric on the group.  The
    resulting constant sectional curvature is ``kappa = a / scale``; leaving
    ``scale`` unset picks ``scale = a`` so that the group is the unit round
    three-sphere.
    """

    a: float = 1.0
    scale: float | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if self.scale is None:
            object.__setattr__(self, "scale", float(self.a))
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def kappa(self):
        return self.a / self.scale

    def inner_algebra(self, x, y):
        """<x, y>_g, used by the L2 inner product on paths."""
        return self.scale * np.sum(np.asarray(x) * np.asarray(y), axis=-1)

    def inner(self, x, y):
        """<x, y>_{G,a} on left-trivialised tangent vectors."""
        return (self.scale / self.a) * np.sum(np.asarray(x) * np.asarray(y), axis=-1)

    def norm(self, x):
        return np.sqrt(self.inner(x, x))


UNIT = MetricConvention()


def identity(shape=()):
    return np.broadcast_to(IDENTITY, tuple(shape) + (4,)).copy()


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def _product(p, q):
    pw, pv = p[..., :1], p[..., 1:]
    qw, qv = q[..., :1], q[..., 1:]
    w = pw * qw - np.sum(pv * qv, axis=-1, keepdims=True)
    v = pw * qv + qw * pv + np.cross(pv, qv)
    return np.concatenate([w, v], axis=-1)


def multiply(g, h):
    """Quaternion product ``g h``, renormalised to unit length."""
    return normalize(_product(np.asarray(g, dtype=float), np.asarray(h, dtype=float)))


def inverse(g):
    g = np.asarray(g, dtype=float)
    return np.concatenate([g[..., :1], -g[..., 1:]], axis=-1)


def exp_group(x):
    """Group exponential ``cos|x| + sin|x| x/|x|``."""
    x = np.asarray(x, dtype=float)
    theta = np.linalg.norm(x, axis=-1, keepdims=True)
    small = theta < _SERIES_CUTOFF
    safe = np.where(small, 1.0, theta)
    t2 = theta * theta
    sinc = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(safe) / safe)
    return normalize(np.concatenate([np.cos(theta), sinc * x], axis=-1))


def log_group(g, check=True):
    """Principal logarithm; raises :class:`CutLocus` within 1e-9 of ``-e``."""
    g = np.asarray(g, dtype=float)
    if check:
        gap = np.linalg.norm(g + IDENTITY, axis=-1)
        if np.any(gap < CUT_LOCUS_TOL):
            raise CutLocus("logarithm requested at the antipode of the identity")
    w = g[..., :1]
    v = g[..., 1:]
    s = np.linalg.norm(v, axis=-1, keepdims=True)
    theta = np.arctan2(s, w)
    small = s < _SERIES_CUTOFF
    safe_s = np.where(small, 1.0, s)
    # atan(s/w)/s for w near 1; the w < 0 branch is the cut locus
    r2 = (s / np.where(small, w, 1.0)) ** 2
    series = (1.0 - r2 / 3.0 + r2 * r2 / 5.0) / np.where(small, w, 1.0)
    factor = np.where(small, series, theta / safe_s)
    return factor * v


def angle(g):
    """Rotation angle ``|log g|`` in [0, pi], valid everywhere including ``-e``."""
    g = np.asarray(g, dtype=float)
    return np.arctan2(np.linalg.norm(g[..., 1:], axis=-1), g[..., 0])


def geodesic_distance(g, h, metric=UNIT):
    """Riemannian distance ``|log(g^-1 h)|`` in the metric ``<,>_{G,a}``."""
    return angle(multiply(inverse(g), h)) / np.sqrt(metric.kappa)


def adjoint(g, x):
    """``Ad(g) x = g x g^-1`` acting on pure quaternions."""
    g = np.asarray(g, dtype=float)
    x = np.asarray(x, dtype=float)
    xq = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)
    return _product(_product(g, xq), inverse(g))[..., 1:]


def bracket(x, y):
    return 2.0 * np.cross(x, y)


def sectional_curvature_probe(x, y, metric=UNIT):
    """Sectional curvature of span{x, y} from the bi-invariant formula."""
    xx = metric.inner(x, x)
    yy = metric.inner(y, y)
    xy = metric.inner(x, y)
    gram = xx * yy - xy * xy
    if np.any(gram < 1e-14):
        raise DegeneratePlane("x and y do not span a plane")
    z = bracket(x, y)
    return 0.25 * metric.inner(z, z) / gram


def random_elements(rng, n=None):
    """Haar-distributed unit quaternions."""
    shape = (4,) if n is None else (n, 4)
    return normalize(rng.standard_normal(shape))
