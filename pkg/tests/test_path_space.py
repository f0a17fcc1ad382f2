import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from orbiflow import lie_group as lg
from orbiflow import path_space as ps
from orbiflow.errors import BoundaryViolation, DimensionMismatch, TruncationTooLarge


def left_matrix(q):
    """Real 4x4 matrix of left multiplication by the quaternion ``q``."""
    w, x, y, z = q
    return np.array([[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]])


def transport_by_matrices(values, a):
    """Ordered product of segment exponentials via matrix exponentials; accepts complex input."""
    m = len(values)
    acc = np.eye(4, dtype=values.dtype)
    for v in values:
        acc = acc @ expm((a / m) * left_matrix(np.r_[0.0, v]))
    return acc[:, 0]


def conj(q):
    return np.r_[q[0], -q[1:]]


def quat_mul(p, q):
    return left_matrix(p) @ q


def smooth_path(a, m, c=(0.2, -0.4, 0.9)):
    return ps.DiscretePath.sample(lambda s: np.array([np.sin(3 * s + c[0]), c[1] + s, c[2] * np.cos(s)]), a, m)


def test_transport_of_zero_and_constant():
    assert np.allclose(ps.parallel_transport(ps.DiscretePath.zeros(1.3, 10)), lg.IDENTITY)
    x = np.array([0.4, -1.1, 0.8])
    u = ps.DiscretePath.constant(1.3, 64, x)
    assert lg.angle(lg.multiply(ps.parallel_transport(u), lg.inverse(lg.exp_group(1.3 * x)))) <= 1e-10
    assert np.array_equal(ps.holonomy(u), ps.parallel_transport(u))


def test_transport_matches_matrix_exponentials(rng):
    u = ps.DiscretePath(0.8, 12, rng.normal(size=(12, 3)))
    assert np.allclose(ps.parallel_transport(u), transport_by_matrices(u.values, 0.8), atol=1e-13)


def test_jacobian_against_complex_step(rng):
    a, m = 1.0, 6
    u = ps.DiscretePath(a, m, rng.normal(size=(m, 3)))
    phi = transport_by_matrices(u.values, a)
    jac = ps.transport_jacobian(u)
    step = 1e-30
    for j in range(3 * m):
        vals = u.values.astype(complex).ravel()
        vals[j] += 1j * step
        dphi = transport_by_matrices(vals.reshape(m, 3), a).imag / step
        column = quat_mul(conj(phi), dphi)[1:]
        assert np.allclose(jac[:, j], column, atol=1e-8)


def test_jacobian_at_zero_on_constant_direction():
    a, m = 1.7, 20
    u = ps.DiscretePath.zeros(a, m)
    x = np.array([0.3, -0.2, 1.0])
    v = ps.DiscretePath.constant(a, m, x)
    jac = ps.transport_jacobian(u)
    assert np.allclose(jac @ v.flat(), a * x, atol=1e-9)
    assert np.allclose(jac @ np.zeros(3 * m), 0.0)


def test_jacobian_rank_three(rng):
    for _ in range(20):
        u = ps.DiscretePath(1.0, 16, rng.normal(size=(16, 3)) * 2)
        sv = np.linalg.svd(ps.transport_jacobian(u), compute_uv=False)
        assert sv[-1] > 1e-3 * sv[0]


def test_hessian_at_zero_matches_bch():
    # log(exp(d v_1) ... exp(d v_m)) = d sum v_i + (d^2 / 2) sum_{i<j} [v_i, v_j] + O(3)
    a, m = 1.0, 4
    d = a / m
    hess = ps.transport_hessian(ps.DiscretePath.zeros(a, m))
    eps = np.zeros((3, 3, 3))
    for (i, j, k), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        eps[i, j, k] = s
    oracle = np.zeros((3, 3 * m, 3 * m))
    for si in range(m):
        for sj in range(m):
            if si == sj:
                continue
            sign = 1.0 if si < sj else -1.0
            for p in range(3):
                for q in range(3):
                    # bracket is 2 x cross y, halved by the BCH coefficient
                    oracle[:, 3 * si + p, 3 * sj + q] = sign * d * d * eps[p, q, :]
    assert np.allclose(hess, oracle, atol=1e-6)


def test_hessian_symmetric(rng):
    u = ps.DiscretePath(1.0, 5, rng.normal(size=(5, 3)))
    hess = ps.transport_hessian(u)
    assert np.allclose(hess, np.transpose(hess, (0, 2, 1)))


def test_gauge_examples(rng):
    a, m = 1.0, 32
    u = smooth_path(a, m)
    k = lg.random_elements(rng)
    const = ps.gauge_act(ps.GaugePath.constant(a, m, k), u)
    assert np.allclose(const.values, lg.adjoint(k, u.values), atol=1e-12)
    ident = ps.gauge_act(ps.GaugePath.constant(a, m, lg.IDENTITY), u)
    assert np.allclose(ident.values, u.values, atol=1e-12)


def smooth_gauge(a, m, x=(0.5, -0.3, 0.8), y=(-0.4, 0.9, 0.2)):
    x, y = np.asarray(x), np.asarray(y)
    return ps.GaugePath.from_function(lambda s: lg.multiply(lg.exp_group(s * x), lg.exp_group(s * s * y)), a, m)


def test_lattice_action_law_and_equivariance_exact(rng):
    a, m = 1.0, 48
    u = smooth_path(a, m)
    g = smooth_gauge(a, m)
    h = smooth_gauge(a, m, (-0.2, 0.1, 0.6), (0.3, 0.3, -0.5))
    lhs = ps.gauge_act(g, ps.gauge_act(h, u))
    assert np.max(np.abs(lhs.values - ps.gauge_act(g * h, u).values)) <= 1e-12
    target = lg.multiply(lg.multiply(g.nodes[0], ps.parallel_transport(u)), lg.inverse(g.nodes[-1]))
    assert lg.angle(lg.multiply(ps.parallel_transport(ps.gauge_act(g, u)), lg.inverse(target))) <= 1e-13


def test_linear_scheme_is_exact_isometry_lattice_is_second_order():
    a = 1.0
    residual = {}
    for m in (32, 64):
        u, v = smooth_path(a, m), smooth_path(a, m, (1.0, 0.5, -0.3))
        g = smooth_gauge(a, m)
        lin = (ps.gauge_act(g, u, "linear") - ps.gauge_act(g, v, "linear")).norm()
        assert lin == pytest.approx((u - v).norm(), abs=1e-12)
        lat = (ps.gauge_act(g, u) - ps.gauge_act(g, v)).norm()
        residual[m] = abs(lat - (u - v).norm())
    assert residual[32] / residual[64] == pytest.approx(4.0, rel=0.1)


def test_equivariance_against_continuum_ode():
    """Continuum identity phi(g.u) = g(0) phi(u) g(a)^-1 by adaptive ODE integration,
    then the lattice transport of the discretised gauge transform at fine m."""
    a = 1.0
    x, y = np.array([0.5, -0.3, 0.8]), np.array([-0.4, 0.9, 0.2])

    def u_of(s):
        return np.array([np.sin(3 * s + 0.2), -0.4 + s, 0.9 * np.cos(s)])

    def g_of(s):
        return lg.multiply(lg.exp_group(s * x), lg.exp_group(s * s * y))

    def w_of(s):
        # Ad(g) u - g' g^-1 with g' g^-1 = x + Ad(exp(s x)) (2 s y)
        return lg.adjoint(g_of(s), u_of(s)) - x - lg.adjoint(lg.exp_group(s * x), 2 * s * y)

    def solve(field):
        def rhs(s, q):
            return quat_mul(q, np.r_[0.0, field(s)])
        sol = solve_ivp(rhs, (0.0, a), lg.IDENTITY.copy(), rtol=1e-12, atol=1e-13, method="DOP853")
        return sol.y[:, -1]

    phi_u, phi_w = solve(u_of), solve(w_of)
    target = quat_mul(quat_mul(g_of(0.0), phi_u), conj(g_of(a)))
    assert np.allclose(phi_w, target, atol=1e-9)
    m = 512
    g = ps.GaugePath.from_function(g_of, a, m)
    lattice = ps.parallel_transport(ps.gauge_act(g, ps.DiscretePath.sample(u_of, a, m)))
    assert lg.angle(lg.multiply(lattice, lg.inverse(lg.normalize(phi_w)))) <= 1e-5


def test_horizontal_projection(rng):
    u = ps.DiscretePath(1.0, 10, rng.normal(size=(10, 3)))
    jac = ps.transport_jacobian(u)
    v = u.with_values(rng.normal(size=(10, 3)))
    once = ps.horizontal_projection(u, v, jac)
    twice = ps.horizontal_projection(u, once, jac)
    assert np.max(np.abs(once.values - twice.values)) <= 1e-10
    _, _, vt = np.linalg.svd(jac)
    kernel = u.with_values(vt[5])
    assert np.max(np.abs(ps.horizontal_projection(u, kernel, jac).values)) <= 1e-10


def test_submersion_residual_shrinks_with_m():
    res = []
    for m in (16, 32, 64):
        u = smooth_path(1.0, m)
        jac = ps.transport_jacobian(u)
        h1 = ps.horizontal_projection(u, smooth_path(1.0, m, (1.0, 0.2, -0.5)), jac)
        h2 = ps.horizontal_projection(u, smooth_path(1.0, m, (-0.3, 0.7, 0.1)), jac)
        res.append(ps.submersion_residual(u, h1, h2, jac=jac))
    assert res[0] > 2 * res[1] > 4 * res[2]


def test_bridge_and_flat_loops(rng):
    zero = ps.bridge_mu(np.zeros((8, 3)))
    assert np.allclose(ps.holonomy(zero), lg.IDENTITY)
    with pytest.raises(DimensionMismatch):
        ps.bridge_mu(np.zeros((8, 2)))
    with pytest.raises(DimensionMismatch):
        ps.bridge_mu(np.zeros((8, 3)), m=9)
    nodes = lg.exp_group(0.4 * rng.normal(size=(17, 3)))
    nodes[-1] = nodes[0]
    flat = ps.bridge_mu(ps.pure_gauge_samples(nodes, 1.0))
    assert lg.angle(ps.holonomy(flat)) <= 1e-12


def test_bridge_equivariance(rng):
    a, m = 1.0, 16
    samples = rng.normal(size=(m, 3))
    g = smooth_gauge(a, m)
    lhs = ps.bridge_mu(ps.gauge_act(g, ps.DiscretePath(a, m, samples)).values, a)
    rhs = ps.gauge_act(ps.lambda_bridge(g), ps.bridge_mu(samples, a))
    assert np.allclose(lhs.values, rhs.values, atol=1e-14)


def test_lambda_bridge_modes():
    a, m = 1.0, 8
    e_path = ps.GaugePath.constant(a, m, lg.IDENTITY)
    for sub in (ps.BoundarySubgroup(), ps.BoundarySubgroup(mode="based"), ps.BoundarySubgroup.cyclic(4)):
        assert np.allclose(ps.lambda_bridge(e_path, sub).nodes, lg.IDENTITY)
    quat = ps.BoundarySubgroup.quaternion_group()
    ends = [np.array([0.0, 1.0, 0, 0]), np.array([0.0, 0, 0, -1.0])]
    path = ps.GaugePath.from_function(lambda s: lg.normalize((1 - s) * ends[0] + s * ends[1]), 1.0, m)
    assert ps.lambda_bridge(path, quat).m == m
    with pytest.raises(BoundaryViolation):
        ps.lambda_bridge(path, ps.BoundarySubgroup(mode="based"))
    off = smooth_gauge(a, m)
    with pytest.raises(BoundaryViolation):
        ps.lambda_bridge(off, ps.BoundarySubgroup.cyclic(3))


def test_boundary_subgroup_validation():
    assert ps.BoundarySubgroup.cyclic(6).order == 6
    assert ps.BoundarySubgroup.quaternion_group().order == 8
    with pytest.raises(ValueError):
        ps.BoundarySubgroup(lg.exp_group(np.array([[0.0, 0, 0], [0.3, 0, 0]])))


def test_transitivity_witness(rng):
    target = lg.random_elements(rng)
    g = ps.transitivity_witness(target, 1.0, 32)
    moved = ps.gauge_act(g, ps.DiscretePath.zeros(1.0, 32))
    assert lg.angle(lg.multiply(ps.parallel_transport(moved), lg.inverse(target))) <= 1e-12


def test_fibre_probe():
    u = ps.DiscretePath.zeros(1.0, 64)
    assert abs(ps.fibre_mean_curvature_probe(u, trunc=20)) <= 1e-3
    assert abs(ps.fibre_mean_curvature_probe(u, trunc=20, normal=[0.3, -1.0, 0.4])) <= 1e-3
    assert ps.fibre_mean_curvature_probe(u, trunc=0) == 0.0
    with pytest.raises(TruncationTooLarge):
        ps.fibre_mean_curvature_probe(u, trunc=3 * 64 + 1)


def test_fibre_shape_operator_spectrum_is_symmetric_at_zero():
    eig = np.linalg.eigvalsh(ps.fibre_shape_operator(ps.DiscretePath.zeros(1.0, 24)))
    assert np.allclose(np.sort(eig), -np.sort(eig)[::-1], atol=1e-6)
    assert np.max(np.abs(eig)) > 0.1


def test_paired_partial_trace():
    eig = np.array([3.0, -2.5, 1.0, -0.9, 0.1, 0.0])
    assert ps.paired_partial_trace(eig, 1) == pytest.approx(0.5)
    assert ps.paired_partial_trace(eig, 2) == pytest.approx(0.6)


def test_csv_round_trip(tmp_path, rng):
    u = ps.DiscretePath(0.7, 9, rng.normal(size=(9, 3)))
    path = tmp_path / "u.csv"
    u.to_csv(path)
    back = ps.DiscretePath.from_csv(path)
    assert back.a == u.a and back.m == u.m
    assert np.array_equal(back.values, u.values)


def test_inner_product_and_grids(rng):
    u = ps.DiscretePath(2.0, 4, rng.normal(size=(4, 3)))
    assert u.inner(u) == pytest.approx(0.5 * np.sum(u.values**2))
    with pytest.raises(DimensionMismatch):
        u - ps.DiscretePath.zeros(2.0, 5)
    with pytest.raises(DimensionMismatch):
        ps.gauge_act(smooth_gauge(2.0, 5), u)
