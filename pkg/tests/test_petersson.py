import mpmath
import pytest

from errors import PreconditionError
from lfun.completed import fe_residual
from lfun.newforms import NewformData, eta_product_expansion
from lfun.petersson import petersson_norm, quadrature_norm, rankin_selberg_norm, symmetric_square

DELTA_NORM = mpmath.mpf("1.035362056804320922347e-6")


@pytest.fixture(scope="module")
def delta():
    tau = eta_product_expansion({1: 24}, 300)
    return NewformData(1, 12, {n: tau[n] for n in range(1, 301)}, {}, "Delta")


@pytest.fixture(scope="module")
def f11():
    c = eta_product_expansion({1: 2, 11: 2}, 400)
    return NewformData(11, 2, {n: c[n] for n in range(1, 401)}, {11: -1}, "11a")


def test_symmetric_square_data(f11):
    L = symmetric_square(f11)
    assert L.conductor == 121
    assert L.reflection == 3
    assert L.gamma_factors == (("R", 0), ("C", 0))
    # a(2)^2 - 2 for the good prime 2, and 11^0 at the level prime
    b = L.coefficients(12)
    assert b[2] == 2
    assert b[11] == 1


def test_symmetric_square_needs_coefficients():
    short = NewformData(11, 2, {1: 1, 2: -2, 3: -1}, {11: -1}, "short")
    with pytest.raises(PreconditionError):
        rankin_selberg_norm(short)


def test_symmetric_square_functional_equation(f11):
    worst, _ = fe_residual(symmetric_square(f11), [0.2, 0.6, 1 + 0.5j])
    assert worst < 1e-6


@pytest.mark.slow
def test_delta_norm(delta):
    result = petersson_norm(delta, rel_prec=1e-6)
    assert abs(result.value - DELTA_NORM) < 1e-6 * DELTA_NORM
    assert abs(quadrature_norm(delta) - DELTA_NORM) < 1e-8 * DELTA_NORM


@pytest.mark.slow
def test_methods_agree_at_level_11(f11):
    result = petersson_norm(f11, rel_prec=1e-6)
    assert result.rel_diff < 1e-6
    assert result.value > 0
    assert result.label == "11a"


@pytest.mark.slow
def test_methods_agree_at_level_14():
    c = eta_product_expansion({1: 1, 2: 1, 7: 1, 14: 1}, 1000)
    form = NewformData(14, 2, {n: c[n] for n in range(1, 1001)}, {2: 1, 7: -1}, "14a")
    result = petersson_norm(form, rel_prec=1e-6)
    assert result.rel_diff < 1e-6
    assert result.value > 0
