"""Geometry of the base: closed surfaces in SU(2) = S^3 and its finite quotients.

Group elements are unit quaternions, i.e. points of the unit sphere in R^4,
so with the unit metric the geodesic distance is the great-circle angle.
Surfaces are triangle meshes with flat faces; curvature quantities come from
the cotangent Laplacian of the embedding and a least-squares fit of the
normal variation over each vertex star.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from . import lie_group as lg
from .errors import NotConvex, PreconditionViolated
from .path_space import BoundarySubgroup

BALL_MARGIN = 1e-6
MESH_TOL = 0.05
METRIC_TOL = 1e-6


@dataclass(frozen=True)
class OrbifoldQuotient:
    """Two-sided quotient ``gamma \\ G / gamma`` with local group order ``l`` at ``x0``."""

    gamma: BoundarySubgroup
    l: int = 1

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 1:
            raise ValueError("local group order must be a positive integer")
        if self.l > self.gamma.order**2:
            raise ValueError(f"local group order {self.l} exceeds |gamma|^2 = {self.gamma.order**2}")


@dataclass(frozen=True)
class SobolevParams:
    alpha: float = 0.5
    alpha_hat: float = 1.0
    n: int = 2
    omega_n: float = np.pi
    # sqrt of the ambient curvature bound; purely imaginary for negative bounds
    b: complex = 1.0
    l: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0 <= self.alpha_hat:
            raise ValueError("need 0 < alpha < 1 <= alpha_hat")
        if self.n < 2:
            raise ValueError("dimension must be at least two")
        b = complex(self.b)
        if b.real != 0.0 and b.imag != 0.0:
            raise ValueError("b must be real or purely imaginary")
        if int(self.l) != self.l or self.l < 1:
            raise ValueError("l must be a positive integer")

    @classmethod
    def for_quotient(cls, quotient, **kwargs):
        return cls(l=quotient.l, **kwargs)

    @property
    def b_squared(self):
        return (complex(self.b) ** 2).real

    @property
    def is_hyperbolic(self):
        return complex(self.b).imag != 0.0


def _cross3(u, v, w):
    """Vector in R^4 orthogonal to ``u, v, w`` (rows), with norm the 3-volume."""
    m = np.stack([u, v, w], axis=-2)
    out = np.empty(u.shape[:-1] + (4,))
    cols = [1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]
    for k, c in enumerate(cols):
        out[..., k] = (-1) ** k * np.linalg.det(m[..., c])
    return out


def _cot(u, v):
    dot = np.sum(u * v, axis=-1)
    cross = np.sqrt(np.maximum(np.sum(u * u, -1) * np.sum(v * v, -1) - dot * dot, 0.0))
    return dot / cross


@dataclass(frozen=True, eq=False)
class MeshedHypersurface:
    """Closed triangulated surface, either in S^3 (rows of length 4) or in R^3.

    ``center`` is a point the surface encloses; it fixes the outward normal
    (pointing away from ``center``).
    """

    vertices: np.ndarray
    faces: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        f = np.array(self.faces, dtype=np.int64)
        c = np.array(self.center, dtype=float)
        if v.ndim != 2 or v.shape[1] not in (3, 4) or f.ndim != 2 or f.shape[1] != 3:
            raise ValueError("vertices must be (V, 3) or (V, 4) and faces (F, 3)")
        if c.shape != (v.shape[1],):
            raise ValueError("center has the wrong dimension")
        if f.min() < 0 or f.max() >= len(v):
            raise ValueError("face index out of range")
        if v.shape[1] == 4:
            v = v / np.linalg.norm(v, axis=1, keepdims=True)
            c = c / np.linalg.norm(c)
        euler = len(v) - len(self._edges_of(f)) + len(f)
        if euler % 2 or 2 * len(self._edges_of(f)) != 3 * len(f):
            raise ValueError(f"mesh is not a closed orientable surface (chi = {euler})")
        for arr in (v, f, c):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        object.__setattr__(self, "center", c)
        if np.min(self.vertex_area) <= 0.0:
            raise ValueError("mesh has a vertex with non-positive area weight")

    @staticmethod
    def _edges_of(faces):
        e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @property
    def spherical(self):
        return self.vertices.shape[1] == 4

    @property
    def euler_characteristic(self):
        return len(self.vertices) - len(self.edges) + len(self.faces)

    @cached_property
    def edges(self):
        return self._edges_of(self.faces)

    @cached_property
    def face_area(self):
        p0, p1, p2 = (self.vertices[self.faces[:, k]] for k in range(3))
        e1, e2 = p1 - p0, p2 - p0
        g11, g22, g12 = np.sum(e1 * e1, 1), np.sum(e2 * e2, 1), np.sum(e1 * e2, 1)
        return 0.5 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0))

    @cached_property
    def _cotangents(self):
        """Cotangent of the angle at each corner, shape (F, 3)."""
        p = [self.vertices[self.faces[:, k]] for k in range(3)]
        return np.stack(
            [_cot(p[(k + 1) % 3] - p[k], p[(k + 2) % 3] - p[k]) for k in range(3)], axis=1
        )

    @cached_property
    def vertex_area(self):
        """Mixed Voronoi area: circumcentric cells, barycentric split at obtuse faces."""
        cot = self._cotangents
        p = [self.vertices[self.faces[:, k]] for k in range(3)]
        area = np.zeros(len(self.vertices))
        obtuse = np.any(cot < 0.0, axis=1)
        for k in range(3):
            i, j = (k + 1) % 3, (k + 2) % 3
            # Voronoi share of corner k: edges k-i and k-j, weighted by the opposite cotangents
            lij = np.sum((p[k] - p[i]) ** 2, 1)
            lik = np.sum((p[k] - p[j]) ** 2, 1)
            vor = (lij * cot[:, j] + lik * cot[:, i]) / 8.0
            share = np.where(
                obtuse,
                np.where(cot[:, k] < 0.0, self.face_area / 2.0, self.face_area / 4.0),
                vor,
            )
            np.add.at(area, self.faces[:, k], share)
        return area

    @cached_property
    def laplacian(self):
        """Cotangent stiffness matrix ``L`` with ``(L x)_i = sum w_ij (x_j - x_i)``."""
        cot = self._cotangents
        n = len(self.vertices)
        rows, cols, vals = [], [], []
        for k in range(3):
            i, j = self.faces[:, (k + 1) % 3], self.faces[:, (k + 2) % 3]
            rows += [i, j]
            cols += [j, i]
            vals += [0.5 * cot[:, k]] * 2
        w = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        ).tocsr()
        return w - sparse.diags(np.asarray(w.sum(axis=1)).ravel())

    @cached_property
    def _face_normal(self):
        """Area-weighted average of face normals, oriented outward."""
        v, f = self.vertices, self.faces
        p0, p1, p2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
        if self.spherical:
            fn = _cross3((p0 + p1 + p2) / 3.0, p1 - p0, p2 - p0)
        else:
            fn = np.cross(p1 - p0, p2 - p0)
        acc = np.zeros_like(v)
        for k in range(3):
            np.add.at(acc, f[:, k], fn)
        return self._orient(acc)

    def _orient(self, vec):
        if self.spherical:
            vec = vec - np.sum(vec * self.vertices, 1, keepdims=True) * self.vertices
        vec = vec / np.linalg.norm(vec, axis=1, keepdims=True)
        return vec * np.sign(np.sum(vec * self._outward_direction(), axis=1, keepdims=True))

    def _outward_direction(self):
        if self.spherical:
            return -self.center[None, :]
        return self.vertices - self.center

    @cached_property
    def _two_ring(self):
        n = len(self.vertices)
        i, j = self.edges.T
        adj = sparse.coo_matrix((np.ones(2 * len(i)), (np.r_[i, j], np.r_[j, i])), shape=(n, n)).tocsr()
        reach = (adj + adj @ adj).tocoo()
        keep = reach.row != reach.col
        return reach.row[keep], reach.col[keep]

    def _tangent_frame(self, nu):
        v = self.vertices
        seed = np.eye(v.shape[1])[np.argmin(np.abs(nu), axis=1)]
        t1 = seed - np.sum(seed * nu, 1, keepdims=True) * nu
        if self.spherical:
            t1 -= np.sum(t1 * v, 1, keepdims=True) * v
        t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
        t2 = _cross3(v, nu, t1) if self.spherical else np.cross(nu, t1)
        return t1, t2

    @cached_property
    def _shape_fit(self):
        """Least-squares shape operator and refined normal over each 2-ring.

        With ``d = x_j - x_i`` split into tangent part ``(u, v)`` and normal
        part ``w``, the model is ``2 w = -|d|^2 / |d_T|^2 * d_T^T S d_T - 2 g . d_T``;
        it holds exactly on geodesic spheres, and the tilt ``g`` corrects the
        normal between passes.
        """
        i, j = self._two_ring
        x = self.vertices
        d = x[j] - x[i]
        d2 = np.sum(d * d, 1)
        nu = self._face_normal
        n = len(x)
        for _ in range(3):
            t1, t2 = self._tangent_frame(nu)
            u = np.sum(d * t1[i], 1)
            v = np.sum(d * t2[i], 1)
            w = np.sum(d * nu[i], 1)
            scale = d2 / (u * u + v * v)
            basis = np.stack([-scale * u * u, -2.0 * scale * u * v, -scale * v * v, -2.0 * u, -2.0 * v], 1)
            gram = np.zeros((n, 5, 5))
            rhs = np.zeros((n, 5))
            np.add.at(gram, i, basis[:, :, None] * basis[:, None, :])
            np.add.at(rhs, i, basis * (2.0 * w)[:, None])
            s = np.linalg.solve(gram, rhs[..., None])[..., 0]
            nu = self._orient(nu - s[:, 3:4] * t1 - s[:, 4:5] * t2)
        mat = np.stack([np.stack([s[:, 0], s[:, 1]], -1), np.stack([s[:, 1], s[:, 2]], -1)], -2)
        return nu, np.linalg.eigvalsh(mat)

    @property
    def normal(self):
        """Unit outward normals, tangent to S^3 in the spherical case."""
        return self._shape_fit[0]

    @cached_property
    def mean_curvature(self):
        """``H = -<Delta x, nu>``; the ``-2x`` part of the R^4 Laplacian drops out."""
        lap = (self.laplacian @ self.vertices) / self.vertex_area[:, None]
        return -np.sum(lap * self.normal, axis=1)

    @property
    def principal_curvatures(self):
        """Principal curvatures, sorted ascending per vertex, shape (V, 2)."""
        return self._shape_fit[1]

    @property
    def area(self):
        return float(np.sum(self.face_area))

    def distance_from(self, x0):
        """Ambient geodesic (S^3) or Euclidean (R^3) distance of every vertex from ``x0``."""
        x0 = np.asarray(x0, dtype=float)
        if not self.spherical:
            return np.linalg.norm(self.vertices - x0, axis=1)
        x0 = x0 / np.linalg.norm(x0)
        dot = self.vertices @ x0
        perp = np.linalg.norm(self.vertices - dot[:, None] * x0, axis=1)
        return np.arctan2(perp, dot)

    def face_gradient(self, f):
        """Per-face gradient of the piecewise-linear interpolant of ``f``, shape (F, d)."""
        f = np.asarray(f, dtype=float)
        idx = self.faces
        p0 = self.vertices[idx[:, 0]]
        e1 = self.vertices[idx[:, 1]] - p0
        e2 = self.vertices[idx[:, 2]] - p0
        d1 = f[idx[:, 1]] - f[idx[:, 0]]
        d2 = f[idx[:, 2]] - f[idx[:, 0]]
        g11, g22, g12 = np.sum(e1 * e1, 1), np.sum(e2 * e2, 1), np.sum(e1 * e2, 1)
        det = g11 * g22 - g12 * g12
        c1 = (g22 * d1 - g12 * d2) / det
        c2 = (g11 * d2 - g12 * d1) / det
        return c1[:, None] * e1 + c2[:, None] * e2

    def support_volume(self, rho):
        """Area of the faces touching the support of ``rho``."""
        touch = np.any(np.asarray(rho)[self.faces] > 0.0, axis=1)
        return float(np.sum(self.face_area[touch]))


# mesh builders


def icosphere(level):
    """Unit sphere in R^3 from ``level`` midpoint subdivisions of the icosahedron."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    v = np.array(verts, dtype=float)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    f = np.array(faces, dtype=np.int64)
    for _ in range(level):
        edges = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        key, inv = np.unique(np.sort(edges, axis=1), axis=0, return_inverse=True)
        mid = v[key[:, 0]] + v[key[:, 1]]
        mid /= np.linalg.norm(mid, axis=1, keepdims=True)
        m = len(v) + inv.reshape(3, -1)
        a, b, c = f.T
        ab, bc, ca = m
        f = np.concatenate(
            [np.stack(x, 1) for x in ((a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca))]
        )
        v = np.concatenate([v, mid])
    return v, f


def _embed(center, directions, radii):
    """Points ``center * exp(r w)`` for unit directions ``w`` in the Lie algebra."""
    pts = np.concatenate([np.cos(radii)[:, None], np.sin(radii)[:, None] * directions], axis=1)
    return lg._product(np.asarray(center, dtype=float), pts)


def geodesic_sphere(radius, center=None, level=5):
    """Geodesic sphere of the given radius in the unit S^3."""
    center = lg.identity() if center is None else lg.normalize(np.asarray(center, dtype=float))
    w, f = icosphere(level)
    return MeshedHypersurface(_embed(center, w, np.full(len(w), float(radius))), f, center)


def ellipsoidal_surface(radius, axes=(1.0, 1.0, 1.0), center=None, level=5, rotation=None):
    """Radial graph ``r(w) = radius / |w / axes|`` in normal coordinates about ``center``.

    Axes close to one give a convex perturbation of the geodesic sphere.
    """
    center = lg.identity() if center is None else lg.normalize(np.asarray(center, dtype=float))
    w, f = icosphere(level)
    frame = w if rotation is None else w @ np.asarray(rotation).T
    r = radius / np.linalg.norm(frame / np.asarray(axes, dtype=float), axis=1)
    return MeshedHypersurface(_embed(center, w, r), f, center)


def euclidean_sphere(radius=1.0, level=5):
    """Round sphere in flat R^3, the model case of the diameter bound."""
    w, f = icosphere(level)
    return MeshedHypersurface(radius * w, f, np.zeros(3))


# conditions and inequalities


def check_ball_condition(mesh, x0, b):
    """True iff the mesh lies in the open geodesic ball of radius ``pi / b`` about ``x0``.

    Below that radius the exponential map of constant curvature ``b^2`` is
    injective, so only the containment is tested.  Purely imaginary ``b``
    (negative curvature) imposes no radius.
    """
    b = complex(b)
    if b.imag != 0.0 and b.real == 0.0:
        return True
    if not b.real > 0.0:
        raise ValueError("b must be positive or purely imaginary")
    return bool(np.max(mesh.distance_from(x0)) < np.pi / b.real - BALL_MARGIN)


def volume_condition_lhs(params, supp_volume):
    n = params.n
    return (
        params.b_squared
        * (1.0 - params.alpha) ** (-2.0 / n)
        * (params.l * supp_volume / params.omega_n) ** (2.0 / n)
    )


def check_volume_condition(mesh, params, supp_volume=None):
    """Smallness condition on the curvature bound and the (support) volume.

    ``supp_volume`` defaults to the area of the whole mesh.
    """
    vol = mesh.area if supp_volume is None else float(supp_volume)
    if not vol > 0.0:
        raise ValueError("support volume must be positive")
    return bool(volume_condition_lhs(params, vol) <= 1.0)


def sobolev_constant(params):
    n = params.n
    return (
        params.l ** (1.0 / n)
        * n / (n - 1.0)
        * (np.pi / 2.0)
        / params.alpha
        * params.alpha_hat ** (n - 2)
        * (1.0 - params.alpha) ** (-1.0 / n)
        * params.omega_n ** (-1.0 / n)
    )


@dataclass(frozen=True)
class SobolevReport:
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    supp_volume: float


def sobolev_test(mesh, rho, params, x0=None, mesh_tol=MESH_TOL, enforce_conditions=True):
    """Discrete check of ``|rho|_{n/(n-1)} <= C (int |grad rho| + int rho |H|)``.

    Both containment and the volume smallness (for the support of ``rho``)
    are required unless ``enforce_conditions`` is false.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (len(mesh.vertices),):
        raise ValueError("rho must have one value per vertex")
    if np.min(rho) < 0.0:
        raise ValueError("rho must be non-negative")
    x0 = mesh.center if x0 is None else x0
    supp = mesh.support_volume(rho)
    if enforce_conditions:
        if not params.is_hyperbolic and not check_ball_condition(mesh, x0, complex(params.b).real):
            raise PreconditionViolated("mesh leaves the admissible geodesic ball")
        if supp > 0.0 and not check_volume_condition(mesh, params, supp):
            lhs = volume_condition_lhs(params, supp)
            raise PreconditionViolated(f"volume condition fails: {lhs:.4g} > 1")
    n = params.n
    p = n / (n - 1.0)
    lhs = float(np.sum(rho**p * mesh.vertex_area) ** (1.0 / p))
    grad = np.linalg.norm(mesh.face_gradient(rho), axis=1)
    integral = np.sum(grad * mesh.face_area) + np.sum(rho * np.abs(mesh.mean_curvature) * mesh.vertex_area)
    rhs = float(sobolev_constant(params) * integral)
    ratio = lhs / rhs if rhs > 0.0 else (0.0 if lhs == 0.0 else np.inf)
    return SobolevReport(lhs, rhs, ratio, bool(lhs <= rhs * (1.0 + mesh_tol)), supp)


@dataclass(frozen=True)
class MyersReport:
    K: float
    diameter: float
    bound: float
    passed: bool


def _unfolded_edges(mesh):
    """Straight segments across each interior edge between opposite corners."""
    f = mesh.faces
    half = np.concatenate([f[:, [0, 1, 2]], f[:, [1, 2, 0]], f[:, [2, 0, 1]]])
    key = np.sort(half[:, :2], axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, half = key[order], half[order]
    same = np.all(key[:-1] == key[1:], axis=1)
    first, second = half[:-1][same], half[1:][same]
    a, b = first[:, 0], first[:, 1]
    c, d = first[:, 2], second[:, 2]
    v = mesh.vertices
    # place the two triangles in a common plane and measure |c d|
    e = v[b] - v[a]
    le = np.linalg.norm(e, axis=1)
    u = e / le[:, None]

    def planar(p):
        q = v[p] - v[a]
        x = np.sum(q * u, 1)
        y = np.linalg.norm(q - x[:, None] * u, axis=1)
        return x, y

    xc, yc = planar(c)
    xd, yd = planar(d)
    length = np.hypot(xc - xd, yc + yd)
    # only keep the segment if it actually crosses the shared edge
    s = yc / (yc + yd)
    xcross = xc + s * (xd - xc)
    keep = (xcross > 0.0) & (xcross < le)
    return c[keep], d[keep], length[keep]


def mesh_diameter(mesh, sources=4):
    """Intrinsic diameter estimated by shortest paths on edges and unfolded edge pairs.

    Repeated farthest-point sweeps from a few starting vertices.
    """
    v = mesh.vertices
    i, j = mesh.edges.T
    w = np.linalg.norm(v[i] - v[j], axis=1)
    c, d, lcd = _unfolded_edges(mesh)
    rows = np.concatenate([i, c])
    cols = np.concatenate([j, d])
    vals = np.concatenate([w, lcd])
    graph = sparse.coo_matrix((vals, (rows, cols)), shape=(len(v), len(v))).tocsr()
    graph = graph.maximum(graph.T)
    best = 0.0
    start = 0
    for _ in range(sources):
        dist = dijkstra(graph, directed=False, indices=start)
        far = int(np.argmax(dist))
        best = max(best, float(dist[far]))
        start = far
    return best


def myers_check(mesh, mesh_tol=MESH_TOL, sources=4):
    """Diameter against ``pi / sqrt(K)`` with ``K`` the least squared principal curvature.

    Curvatures at or below ``METRIC_TOL`` count as zero, so totally geodesic
    spheres are rejected despite rounding.
    """
    lam = mesh.principal_curvatures
    if np.min(lam[:, 0]) <= METRIC_TOL or np.min(mesh.mean_curvature) <= METRIC_TOL:
        raise NotConvex(f"minimum principal curvature {np.min(lam[:, 0]):.3g}")
    K = float(np.min(lam[:, 0]) ** 2)
    D = mesh_diameter(mesh, sources)
    bound = np.pi / np.sqrt(K)
    return MyersReport(K, D, bound, bool(D <= bound * (1.0 + mesh_tol)))


# divergence theorem on geodesic spheres


def _sphere_chart(center, radius, z, phi):
    """Embedding ``(z, phi) -> S^3`` of the geodesic sphere and its partials."""
    s = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    w = np.stack([s * np.cos(phi), s * np.sin(phi), z], -1)
    dw_dz = np.stack([-z / np.where(s > 0, s, 1.0) * np.cos(phi), -z / np.where(s > 0, s, 1.0) * np.sin(phi), np.ones_like(z)], -1)
    dw_dphi = np.stack([-s * np.sin(phi), s * np.cos(phi), np.zeros_like(z)], -1)
    zero = np.zeros(z.shape + (1,))
    sr, cr = np.sin(radius), np.cos(radius)
    x = lg._product(center, np.concatenate([np.full(z.shape + (1,), cr), sr * w], -1))
    xz = lg._product(center, np.concatenate([zero, sr * dw_dz], -1))
    xphi = lg._product(center, np.concatenate([zero, sr * dw_dphi], -1))
    return x, xz, xphi


def divergence_theorem_check(field, radius, n_z=1000, n_phi=64, center=None, order=1, fd_step=1e-5):
    """Quadrature of ``int div X dv`` over a geodesic sphere (or its cyclic quotient).

    ``field(x)`` maps points of S^3 (rows of length 4) to ambient vectors,
    which are projected onto the sphere.  The chart ``(z, phi)`` with
    ``z = cos(theta)`` has constant area density ``sin(radius)^2``, so the
    divergence is ``d_z X^z + d_phi X^phi``, evaluated by centred differences
    and integrated with the midpoint rule.  ``order`` restricts ``phi`` to
    ``[0, 2 pi / order)``; the field should be invariant under that rotation.

    The rule is periodic in ``phi`` and converges spectrally there, so the
    error is ``O(1 / n_z^2)`` once ``n_phi`` resolves the field.
    """
    center = lg.identity() if center is None else lg.normalize(np.asarray(center, dtype=float))
    period = 2.0 * np.pi / order
    z = -1.0 + (np.arange(n_z) + 0.5) * (2.0 / n_z)
    phi = (np.arange(n_phi) + 0.5) * (period / n_phi)
    Z, P = np.meshgrid(z, phi, indexing="ij")
    sr2 = np.sin(radius) ** 2

    def components(zz, pp):
        x, xz, xphi = _sphere_chart(center, radius, zz, pp)
        X = np.asarray(field(x.reshape(-1, 4)), dtype=float).reshape(x.shape)
        one_minus = 1.0 - zz * zz
        # inverse metric: g^zz = (1 - z^2) / sr2, g^phiphi = 1 / (sr2 (1 - z^2))
        xz_comp = one_minus / sr2 * np.sum(X * xz, -1)
        xphi_comp = np.sum(X * xphi, -1) / (sr2 * np.where(one_minus > 0, one_minus, 1.0))
        return xz_comp, xphi_comp

    h = fd_step
    zp, _ = components(np.minimum(Z + h, 1.0), P)
    zm, _ = components(np.maximum(Z - h, -1.0), P)
    dz = (np.minimum(Z + h, 1.0) - np.maximum(Z - h, -1.0))
    _, pp = components(Z, P + h)
    _, pm = components(Z, P - h)
    div = (zp - zm) / dz + (pp - pm) / (2.0 * h)
    return float(np.sum(div) * sr2 * (2.0 / n_z) * (period / n_phi))


def killing_field(axis, center=None):
    """Rotation about ``axis`` fixing ``center``: ``x -> c (0, axis x Im(c^-1 x))``."""
    center = lg.identity() if center is None else lg.normalize(np.asarray(center, dtype=float))
    axis = np.asarray(axis, dtype=float)
    cinv = lg.inverse(center)

    def field(x):
        y = lg._product(cinv, x)
        rot = np.cross(axis, y[..., 1:])
        return lg._product(center, np.concatenate([np.zeros(y.shape[:-1] + (1,)), rot], -1))

    return field


def gradient_field(grad_f, radius, center=None):
    """Tangential part of an ambient gradient on the geodesic sphere about ``center``.

    The normal direction at ``x`` is spanned by ``x`` and ``center`` within R^4.
    """
    center = lg.identity() if center is None else lg.normalize(np.asarray(center, dtype=float))

    def field(x):
        g = np.asarray(grad_f(x), dtype=float)
        g = g - np.sum(g * x, -1, keepdims=True) * x
        nu = x * np.cos(radius) - center
        nu = nu / np.linalg.norm(nu, axis=-1, keepdims=True)
        return g - np.sum(g * nu, -1, keepdims=True) * nu

    return field


# randomized inequality suite


def _bump(mesh, rng, full):
    """Random non-negative function: constant, smooth bump or compactly supported bump."""
    v = mesh.vertices
    if full:
        kind = rng.integers(3)
        if kind == 0:
            return np.full(len(v), rng.uniform(0.1, 3.0))
        p = v[rng.integers(len(v))]
        d = mesh.distance_from(p) if mesh.spherical else np.linalg.norm(v - p, axis=1)
        if kind == 1:
            return rng.uniform(0.1, 3.0) * np.exp(-((d / rng.uniform(0.05, 0.5)) ** 2))
        coef = rng.normal(size=v.shape[1]) * 0.3
        return np.maximum(1.0 + (v - mesh.center) @ coef, 0.0)
    p = v[rng.integers(len(v))]
    d = mesh.distance_from(p)
    s = rng.uniform(0.1, 0.5)
    return rng.uniform(0.1, 3.0) * np.maximum(1.0 - (d / s) ** 2, 0.0) ** rng.integers(1, 4)


def sobolev_suite(seed=0, count=1000, level=5, meshes=10):
    """Seeded ``(mesh, rho)`` pairs that satisfy both preconditions.

    Small spheres and ellipsoids carry functions of full support; larger
    spheres carry compactly supported bumps whose support is small enough.
    Draws violating a precondition are discarded and redrawn.
    """
    rng = np.random.default_rng(seed)
    params = SobolevParams()
    built = []
    for k in range(meshes):
        center = lg.random_elements(rng)
        if k % 3 == 0:
            built.append((geodesic_sphere(rng.uniform(0.1, 0.34), center, level), True))
        elif k % 3 == 1:
            axes = 1.0 + rng.uniform(-0.1, 0.1, 3)
            built.append((ellipsoidal_surface(rng.uniform(0.1, 0.3), axes, center, level), True))
        else:
            built.append((geodesic_sphere(rng.uniform(0.5, 1.2), center, level), False))
    out = []
    while len(out) < count:
        mesh, full = built[len(out) % meshes]
        rho = _bump(mesh, rng, full)
        supp = mesh.support_volume(rho)
        if supp > 0.0 and not check_volume_condition(mesh, params, supp):
            continue
        out.append((mesh, rho))
    return out

