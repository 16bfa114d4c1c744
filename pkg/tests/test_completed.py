import mpmath
import pytest

from lfun.completed import CompletedL, euler_coefficients, fe_residual, fit_conductor, gamma_c, gamma_r
from lfun.newforms import eta_product_expansion

L_11A_AT_1 = mpmath.mpf("0.2538418608559106843377589233")


def chi_4(n_max):
    return [0] + [(0, 1, 0, -1)[n % 4] for n in range(1, n_max + 1)]


def dirichlet_beta(sign=1, conductor=4):
    return CompletedL(
        coefficients=chi_4,
        gamma_factors=(("R", 1),),
        conductor=conductor,
        sign=sign,
        reflection=1,
        coefficient_exponent=0,
        label="chi_-4",
    )


def curve_11a(sign=1, conductor=11):
    return CompletedL(
        coefficients=lambda n_max: eta_product_expansion({1: 2, 11: 2}, n_max),
        gamma_factors=(("C", 0),),
        conductor=conductor,
        sign=sign,
        reflection=2,
        coefficient_exponent=0.5,
        label="11a",
    )


def test_gamma_kinds():
    assert abs(gamma_c(1) - 1 / (2 * mpmath.pi)) < 1e-25
    assert abs(gamma_r(1) - 1) < 1e-25
    assert abs(gamma_r(2) - 1 / mpmath.pi) < 1e-25


def test_euler_coefficients():
    assert euler_coefficients(lambda p: (1, -1), 6) == [0, 1, 1, 1, 1, 1, 1]
    assert euler_coefficients(lambda p: (1, -2, 1), 6) == [0, 1, 2, 2, 3, 2, 4]
    assert euler_coefficients(lambda p: (1,) if p == 2 else (1, -1), 6) == [0, 1, 0, 1, 0, 1, 0]


def test_dirichlet_beta_values():
    L = dirichlet_beta()
    at_one = L.lambda_value(1) / L.gamma(1)
    assert abs(at_one - mpmath.pi / 4) < 1e-7
    at_three = L.lambda_value(3) / L.gamma(3)
    assert abs(at_three - mpmath.pi**3 / 32) < 1e-7


def test_elliptic_curve_value():
    L = curve_11a()
    value = L.lambda_value(1) / L.gamma(1)
    assert abs(mpmath.im(value)) < 1e-10
    assert abs(mpmath.re(value) - L_11A_AT_1) < 1e-7 * L_11A_AT_1


def test_direct_sum_in_convergence_region():
    L = curve_11a()
    direct = L.direct_sum(5, 500)
    assert abs(L.lambda_value(5) - direct) < 1e-7 * abs(direct)


def test_functional_equation_residual():
    worst, rows = fe_residual(curve_11a(), [0.1, 0.3, 0.7, 1 + 1j])
    assert len(rows) == 4
    assert worst < 1e-6
    wrong, _ = fe_residual(curve_11a(sign=-1), [0.3, 0.7])
    assert wrong > 1e-2


def test_fit_conductor_prefers_true_data():
    fits = fit_conductor(
        lambda conductor, sign: curve_11a(sign, conductor),
        [(11, 1), (11, -1), (12, 1), (10, 1)],
        [0.3, 0.7],
    )
    assert (fits[0][1], fits[0][2]) == (11, 1)
    assert fits[0][0] < 1e-6


@pytest.mark.parametrize("split", [1, 1.15, 2])
def test_split_independence(split):
    L = dirichlet_beta()
    reference = L.completed_star(0.7)
    assert abs(L.completed_star(0.7, split=split) - reference) < 1e-7 * abs(reference)
