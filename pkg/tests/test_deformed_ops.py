import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deformed_llg.deformed_ops import (
    LOW_FRACTIONALITY_CONSTANT,
    Sampled1DFunction,
    axiomatic_derivative,
    five_point_derivative,
    ml_eigenfunction,
    q_eigenfunction,
    scale_q_derivative,
    verify_alpha_eigenvalue,
    verify_q_eigenvalue,
)
from deformed_llg.errors import DomainError
from deformed_llg.specfun import DeformationQ, MLParams, ml


def test_five_point_derivative_of_sin():
    for x in (0.0, 0.3, 2.0, 10.0):
        assert five_point_derivative(math.sin, x) == pytest.approx(math.cos(x), abs=1e-9)


def test_five_point_rejects_bad_step():
    with pytest.raises(DomainError):
        five_point_derivative(math.sin, 0.0, step=0.0)


def test_scale_q_derivative_classical_is_plain_derivative():
    d = DeformationQ(1.0, lam=3.0)
    assert scale_q_derivative(math.exp, d, 0.5) == pytest.approx(math.exp(0.5), rel=1e-11)


def test_scale_q_derivative_prefactor():
    d = DeformationQ(0.5, lam=2.0)
    # D x^2 at x = 1: (1 + 0.5 * 2 * 1) * 2 = 4
    assert scale_q_derivative(lambda x: x * x, d, 1.0) == pytest.approx(4.0, rel=1e-10)


def test_q_eigenfunction_stencil_agrees_with_analytic():
    d = DeformationQ(0.7, lam=1j)
    f = q_eigenfunction(d)
    for x in (0.0, 1.0, 4.0):
        assert five_point_derivative(f, x) == pytest.approx(f.derivative(x), abs=1e-10)


@pytest.mark.parametrize("q", [0.5, 0.9, 1.1, 1.5])
@pytest.mark.parametrize("lam", [1.0, -1.0])
def test_q_eigenvalue_numerical_real(q, lam):
    r = verify_q_eigenvalue(DeformationQ(q, lam=lam), np.linspace(0, 1, 21), numerical=True)
    assert r.max_residual <= 1e-10 * max(1.0, r.scale)


@pytest.mark.parametrize("q", [0.5, 0.9, 1.1, 1.5])
@pytest.mark.parametrize("lam", [1j, -1j, 0.5 + 0.5j])
def test_q_eigenvalue_numerical_complex(q, lam):
    r = verify_q_eigenvalue(DeformationQ(q, lam=lam), np.linspace(0, 5, 26), numerical=True)
    assert r.max_residual <= 1e-10 * max(1.0, r.scale)


def test_q_eigenvalue_on_domain_of_example():
    # q = 1.5, lam = 1 has its pole at x = 2, so the grid stops short of it
    r = verify_q_eigenvalue(DeformationQ(1.5, lam=1.0), np.linspace(0, 1.9, 39))
    assert r.max_residual <= 1e-10 * r.scale


@given(st.floats(0.3, 1.7), st.floats(-1, 1), st.floats(0, 1))
def test_q_eigenvalue_property(q, lam, x):
    d = DeformationQ(q, lam=lam)
    if 1 + (1 - q) * lam * x < 0.05:
        return
    r = verify_q_eigenvalue(d, [x])
    assert r.max_residual <= 1e-12 * max(1.0, r.scale)


def test_q_eigenvalue_rejects_pole_and_cut():
    with pytest.raises(DomainError):
        verify_q_eigenvalue(DeformationQ(1.5, lam=1.0), np.linspace(0, 5, 11))
    with pytest.raises(DomainError):
        verify_q_eigenvalue(DeformationQ(1.5, lam=1.0), [])


def test_residual_report_echo_and_dict():
    r = verify_q_eigenvalue(DeformationQ(1.1, lam=1j), [0.0, 1.0])
    d = r.to_dict()
    assert d["config"]["q"] == 1.1
    assert d["config"]["lambda"] == [0.0, 1.0]
    assert len(d["residuals"]) == 2


def test_axiomatic_derivative_domain():
    with pytest.raises(DomainError):
        axiomatic_derivative(math.exp, 0.9, 0.0)
    with pytest.raises(DomainError):
        axiomatic_derivative(math.exp, 1.5, 1.0)


def test_axiomatic_derivative_of_power():
    # x^{1-a} d/dx x^a = a
    a = 0.8
    for x in (0.1, 1.0, 3.0):
        assert axiomatic_derivative(lambda t: t**a, a, x) == pytest.approx(a, rel=1e-9)


def test_ml_eigenfunction_derivative_against_stencil():
    f = ml_eigenfunction(0.9, 1.0)
    for x in (0.5, 2.0, 5.0):
        assert five_point_derivative(f.eval, x) == pytest.approx(f.derivative(x), rel=1e-9)


def test_alpha_one_is_exact():
    r = verify_alpha_eigenvalue(1.0, 1.0, np.linspace(0.5, 5, 10))
    assert r.ratio is None
    assert r.max_residual <= 1e-12 * r.scale
    assert r.in_regime


def test_alpha_residual_formula():
    alpha, lam, x = 0.9, 1.3, 2.0
    r = verify_alpha_eigenvalue(alpha, lam, [x])
    z = lam * x**alpha
    expected = abs(lam) * abs(ml(MLParams(alpha, alpha), z).value - ml(MLParams(alpha), z).value)
    assert r.max_residual == pytest.approx(expected, rel=1e-10)


def test_alpha_numerical_matches_analytic():
    g = np.linspace(0.5, 5, 10)
    a = verify_alpha_eigenvalue(0.95, 1.0, g)
    n = verify_alpha_eigenvalue(0.95, 1.0, g, numerical=True)
    assert n.max_residual == pytest.approx(a.max_residual, rel=1e-6)


@given(st.floats(0.95, 0.999))
def test_low_fractionality_bound(alpha):
    r = verify_alpha_eigenvalue(alpha, 1.0, np.linspace(0.5, 5, 19))
    assert r.max_relative_residual <= LOW_FRACTIONALITY_CONSTANT * (1 - alpha)
    assert r.in_regime


def test_far_from_one_leaves_regime():
    assert not verify_alpha_eigenvalue(0.7, 1.0, np.linspace(0.5, 5, 10)).in_regime


def test_alpha_grid_validation():
    with pytest.raises(DomainError):
        verify_alpha_eigenvalue(0.9, 1.0, [0.0, 1.0])
    with pytest.raises(DomainError):
        verify_alpha_eigenvalue(1.1, 1.0, [1.0])


def test_sampled_function_without_derivative_uses_stencil():
    f = Sampled1DFunction(eval=math.exp)
    assert scale_q_derivative(f, DeformationQ(1.0), 1.0) == pytest.approx(math.e, rel=1e-10)


def test_undefined_function_is_domain_error():
    with pytest.raises(DomainError):
        five_point_derivative(math.log, 0.0, step=1e-3)
