import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orbiflow import lie_group as lg
from orbiflow.errors import CutLocus, DegeneratePlane

vec3 = arrays(np.float64, 3, elements=st.floats(-2.5, 2.5))
quat = arrays(np.float64, 4, elements=st.floats(-1, 1)).filter(lambda q: np.linalg.norm(q) > 0.1)


def hamilton(p, q):
    """Quaternion product written out term by term, independent of the library."""
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def test_identity_and_inverse(rng):
    g = lg.random_elements(rng)
    assert np.allclose(lg.multiply(lg.identity(), g), g)
    assert np.allclose(lg.multiply(g, lg.inverse(g)), lg.IDENTITY, atol=1e-15)


def test_quarter_turns_compose_to_half_turn():
    q = lg.exp_group([np.pi / 4, 0, 0])
    assert np.allclose(lg.multiply(q, q), lg.exp_group([np.pi / 2, 0, 0]), atol=1e-15)
    assert np.allclose(lg.multiply(q, q), hamilton(q, q), atol=1e-15)


@given(quat, quat)
def test_product_matches_hamilton_table_and_stays_unit(p, q):
    p, q = lg.normalize(p), lg.normalize(q)
    out = lg.multiply(p, q)
    assert np.allclose(out, hamilton(p, q), atol=1e-14)
    assert abs(np.linalg.norm(out) - 1.0) <= 1e-12


def test_exp_zero_and_antipode():
    assert np.array_equal(lg.exp_group(np.zeros(3)), lg.IDENTITY)
    x = np.array([1.0, 2.0, -2.0]) / 3.0 * np.pi
    assert np.allclose(lg.exp_group(x), -lg.IDENTITY, atol=1e-15)


def test_exp_series_branch_matches_closed_form():
    x = np.array([3e-5, -1e-5, 2e-5])
    t = np.linalg.norm(x)
    expected = np.concatenate([[np.cos(t)], np.sin(t) / t * x])
    assert np.allclose(lg.exp_group(x), expected, rtol=0, atol=1e-17)


@given(vec3.filter(lambda x: np.linalg.norm(x) < np.pi - 1e-3))
def test_log_inverts_exp(x):
    assert np.allclose(lg.log_group(lg.exp_group(x)), x, atol=1e-11)


def test_log_small_and_identity():
    assert np.array_equal(lg.log_group(lg.IDENTITY), np.zeros(3))
    x = np.array([1e-7, -2e-7, 5e-8])
    assert np.allclose(lg.log_group(lg.exp_group(x)), x, rtol=1e-12, atol=0)


def test_log_cut_locus():
    with pytest.raises(CutLocus):
        lg.log_group(-lg.IDENTITY)
    near = lg.normalize(-lg.IDENTITY + np.array([0, 1e-10, 0, 0]))
    with pytest.raises(CutLocus):
        lg.log_group(near)


@pytest.mark.parametrize("a,scale", [(1.0, None), (2.0, 0.5), (0.3, 3.0)])
def test_diameter_is_pi_over_root_kappa(a, scale):
    metric = lg.MetricConvention(a, scale)
    assert lg.geodesic_distance(lg.IDENTITY, -lg.IDENTITY, metric) == pytest.approx(np.pi / np.sqrt(metric.kappa))


def test_distance_zero_and_bi_invariant(rng):
    g, h, k = lg.random_elements(rng, 3)
    assert lg.geodesic_distance(g, g) == pytest.approx(0.0, abs=1e-7)
    d = lg.geodesic_distance(g, h)
    assert lg.geodesic_distance(lg.multiply(k, g), lg.multiply(k, h)) == pytest.approx(d, abs=1e-14)
    assert lg.geodesic_distance(lg.multiply(g, k), lg.multiply(h, k)) == pytest.approx(d, abs=1e-14)


def test_distance_matches_chord_angle(rng):
    g, h = lg.random_elements(rng, 2)
    assert lg.geodesic_distance(g, h) == pytest.approx(np.arccos(np.clip(g @ h, -1, 1)), abs=1e-12)


def test_adjoint_properties(rng):
    g = lg.random_elements(rng)
    x, y = rng.normal(size=(2, 3))
    assert np.allclose(lg.adjoint(lg.IDENTITY, x), x)
    assert lg.UNIT.inner(lg.adjoint(g, x), lg.adjoint(g, y)) == pytest.approx(lg.UNIT.inner(x, y))
    assert np.allclose(lg.adjoint(lg.exp_group(0.7 * x), x), x, atol=1e-14)
    # Ad is the rotation matrix of the unit quaternion
    w, b, c, d = g
    rot = np.array([
        [1 - 2 * (c * c + d * d), 2 * (b * c - w * d), 2 * (b * d + w * c)],
        [2 * (b * c + w * d), 1 - 2 * (b * b + d * d), 2 * (c * d - w * b)],
        [2 * (b * d - w * c), 2 * (c * d + w * b), 1 - 2 * (b * b + c * c)],
    ])
    assert np.allclose(lg.adjoint(g, x), rot @ x, atol=1e-14)


def test_bracket_is_commutator():
    x, y = np.array([0.3, -1.0, 0.5]), np.array([1.2, 0.4, -0.7])
    xq, yq = np.r_[0.0, x], np.r_[0.0, y]
    comm = hamilton(xq, yq) - hamilton(yq, xq)
    assert np.allclose(lg.bracket(x, y), comm[1:])


@pytest.mark.parametrize("a,scale", [(1.0, None), (1.0, 4.0), (2.5, 0.5)])
def test_curvature_probe_constant(rng, a, scale):
    metric = lg.MetricConvention(a, scale)
    e = np.eye(3) / np.sqrt(metric.inner(np.eye(3)[0], np.eye(3)[0]))
    assert lg.sectional_curvature_probe(e[0], e[1], metric) == pytest.approx(metric.kappa, rel=1e-12)
    x, y = rng.normal(size=(2, 3))
    base = lg.sectional_curvature_probe(x, y, metric)
    assert lg.sectional_curvature_probe(x, 2 * x + y, metric) == pytest.approx(base, rel=1e-10)
    samples = [lg.sectional_curvature_probe(*rng.normal(size=(2, 3)), metric) for _ in range(50)]
    assert np.ptp(samples) <= 1e-10
    assert base == pytest.approx(metric.kappa, rel=1e-10)


def test_curvature_probe_degenerate():
    with pytest.raises(DegeneratePlane):
        lg.sectional_curvature_probe(np.array([1.0, 0, 0]), np.array([2.0, 0, 0]))


def test_metric_rejects_bad_values():
    with pytest.raises(ValueError):
        lg.MetricConvention(0.0)
    with pytest.raises(ValueError):
        lg.MetricConvention(1.0, -1.0)


# components either zero or large enough that squares do not underflow
component = st.one_of(st.just(0.0), st.floats(1e-100, 2.5), st.floats(-2.5, -1e-100))


@settings(max_examples=50)
@given(arrays(np.float64, 3, elements=component))
def test_inner_positive_definite(x):
    v = lg.UNIT.inner(x, x)
    assert v >= 0.0
    assert (v == 0.0) == (not np.any(x))
