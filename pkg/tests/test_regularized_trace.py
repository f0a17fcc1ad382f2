import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbiflow import regularized_trace as rt
from orbiflow.errors import PoleAtJ


def symmetric_sum_oracle(lam, b):
    """High-precision symmetric sum over j in Z via mpmath's series acceleration."""
    mpmath.mp.dps = 30
    tail = mpmath.nsum(lambda j: 2 / (1 - (b * j) ** 2), [1, mpmath.inf])
    return float(lam * (1 + tail))


def test_eigenvalues():
    fam = rt.SpectrumFamily.single(1.0, 2.0)
    assert rt.eigenvalue(fam, 0, 0) == 1.0
    assert rt.eigenvalue(fam, 0, 1) == pytest.approx(1 / 3)
    assert rt.eigenvalue(fam, 0, -1) == -1.0


def test_pole_guards():
    with pytest.raises(ValueError):
        rt.SpectrumFamily.single(1.0, 0.5)
    with pytest.raises(ValueError):
        rt.SpectrumFamily.single(1.0, 1.0)


def test_eigenvalue_pole_raises():
    fam = rt.SpectrumFamily.single(1.0, 2.0)
    object.__setattr__(fam, "branches", ((1.0, 0.5),))
    with pytest.raises(PoleAtJ):
        rt.eigenvalue(fam, 0, -2)


def test_partial_zero_is_lambda():
    assert rt.regularized_trace_partial(rt.SpectrumFamily.single(2.5, 3.0), 0) == 2.5


@pytest.mark.parametrize("lam,b", [(1, 2), (1, 3), (2, 2.5), (-0.7, 4.2)])
def test_closed_form_against_high_precision_sum(lam, b):
    fam = rt.SpectrumFamily.single(lam, b)
    assert rt.regularized_trace_closed(fam) == pytest.approx(symmetric_sum_oracle(lam, b), abs=1e-13)


def test_b3_partial_sum():
    fam = rt.SpectrumFamily.single(1.0, 3.0)
    assert abs(rt.regularized_trace_partial(fam, 10**5) - np.pi / (3 * np.sqrt(3))) <= 1e-4


def test_closed_values():
    assert abs(rt.regularized_trace_closed(rt.SpectrumFamily.single(1.0, 2.0))) <= 1e-14
    assert rt.regularized_trace_closed(rt.SpectrumFamily.single(1.0, 3.0)) == pytest.approx(0.6046, abs=1e-4)
    both = rt.SpectrumFamily.single(1.3, 3.7) | rt.SpectrumFamily.single(-1.3, 3.7)
    assert rt.regularized_trace_closed(both) == pytest.approx(0.0, abs=1e-15)


def test_minimality():
    assert rt.minimality_check(rt.SpectrumFamily.single(1.0, 2.0))
    assert not rt.minimality_check(rt.SpectrumFamily.single(1.0, 3.0), tol=1e-6)
    sym = rt.SpectrumFamily.single(2.0, 5.0) | rt.SpectrumFamily.single(-2.0, 5.0)
    assert rt.minimality_check(sym)


@given(st.floats(-3, 3), st.floats(1.05, 20).filter(lambda b: abs(1 / b - round(1 / b)) > 1e-6))
def test_trace_is_linear_in_lambda(lam, b):
    fam = rt.SpectrumFamily.single(1.0, b)
    assert rt.regularized_trace_closed(fam.scaled(lam)) == pytest.approx(lam * rt.regularized_trace_closed(fam), abs=1e-12)


def test_partial_sums_converge_like_one_over_n():
    fam = rt.SpectrumFamily.single(1.0, 3.0)
    closed = rt.regularized_trace_closed(fam)
    e1 = abs(rt.regularized_trace_partial(fam, 1000) - closed)
    e2 = abs(rt.regularized_trace_partial(fam, 2000) - closed)
    assert e1 / e2 == pytest.approx(2.0, rel=1e-2)
