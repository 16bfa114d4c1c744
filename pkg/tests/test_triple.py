from math import gcd

import mpmath
import pytest
from sympy import divisors, primerange

from errors import PreconditionError
from lfun.newforms import NewformData, eta_product_expansion, extend_coefficients
from lfun.triple import (
    completed_l,
    conductor_candidates,
    dirichlet_coeffs,
    ensure_coefficients,
    factor_table,
    gamma_factor,
    gamma_poles,
    local_factor,
    local_roots_balanced,
    make_triple,
    sign_and_conductor,
)

AP_11 = {2: -2, 3: -1, 5: 1, 7: -2, 11: 1, 13: 4, 17: -2, 19: 0, 23: -1, 29: 0}
AP_14 = {2: -1, 3: -2, 5: 0, 7: 1, 11: 0, 13: -4, 17: 6, 19: 2, 23: 0, 29: -6}


def newform(level, weight, ap, al, label, n_max=30):
    return NewformData(level, weight, extend_coefficients(ap, level, weight, n_max), al, label)


@pytest.fixture
def f11():
    return newform(11, 2, AP_11, {11: -1}, "11a")


@pytest.fixture
def f14():
    return newform(14, 2, AP_14, {2: 1, 7: -1}, "14a")


@pytest.fixture
def cube(f11):
    return make_triple(f11, f11, f11)


def test_make_triple(cube):
    assert (cube.N, cube.G, cube.kappa) == (11, 11, 2)
    assert cube.label == "11a,11a,11a"


def test_make_triple_sorts_by_weight(f11):
    heavy = NewformData(11, 4, {1: 1}, {11: 1}, "11.4")
    triple = make_triple(f11, heavy, heavy)
    assert triple.weights == (4, 4, 2)
    assert triple.kappa == 4


def test_unbalanced_weights_rejected(f11):
    heavy = NewformData(5, 4, {1: 1}, {5: 1}, "5.4")
    with pytest.raises(PreconditionError, match="unbalanced"):
        make_triple(heavy, f11, f11)


def test_needs_three_squarefree_forms(f11):
    with pytest.raises(PreconditionError):
        make_triple(f11, f11)
    with pytest.raises(PreconditionError):
        make_triple(f11, f11, NewformData(44, 2, {1: 1}, {}, "44a"))


def test_sign_and_conductor(cube):
    w, Q, table = sign_and_conductor(cube)
    assert (w, Q, table) == (1, 11**5, {11: -1})


def test_sign_mixed_levels(f11, f14):
    triple = make_triple(f11, f11, f14)
    w, Q, table = sign_and_conductor(triple)
    assert triple.N == 154 and triple.G == 1
    assert table == {2: 1, 7: -1, 11: 1}
    assert w == 1
    assert Q == 154**4


def test_local_factor_all_levels(cube):
    factor = local_factor(11, cube)
    assert factor.case_tag == "IA"
    # (1 - X)(1 - 11 X)^2
    assert factor.inv_poly == (1, -23, 143, -121)


def test_local_factor_dispatch(f11, f14):
    triple = make_triple(f11, f11, f14)
    assert triple.factor(11).case_tag == "IB"
    assert triple.factor(11).degree == 4
    assert triple.factor(2).case_tag == "IC"
    assert triple.factor(7).degree == 4
    assert triple.factor(3).case_tag == "ID"
    assert triple.factor(3).degree == 8


def test_good_factor_roots_are_balanced(cube):
    factor = cube.factor(2)
    assert factor.case_tag == "ID"
    assert local_roots_balanced(factor, cube)


def test_dirichlet_coefficients(cube):
    b = dirichlet_coeffs(cube, 12)
    assert b[1] == 1
    assert b[2] == -8
    assert b[3] == -1
    assert b[6] == b[2] * b[3]
    assert b[11] == 23


def test_gamma_factor(cube):
    expected = (2 * mpmath.pi) ** -5
    assert abs(gamma_factor(cube, 2) - expected) < 1e-25
    assert gamma_poles(cube, 1) == [0, 0, 0]
    with pytest.raises(PreconditionError):
        gamma_factor(cube, 1)


def test_factor_table(f11, f14):
    table = factor_table(make_triple(f11, f11, f14))
    assert list(table["p"]) == [2, 7, 11]
    assert list(table["case"]) == ["IC", "IC", "IB"]


def test_ensure_coefficients(cube):
    with pytest.raises(PreconditionError):
        ensure_coefficients(cube, 40)
    grown = []

    def extender(form, n_max):
        grown.append(n_max)
        return NewformData(form.level, form.weight, {**{n: 0 for n in range(1, n_max + 1)}, 1: 1}, form.al_eigen, form.label)

    ensure_coefficients(cube, 40, extender)
    assert grown == [40, 40, 40]
    assert all(form.n_max == 40 for form in cube.forms)


def test_conductor_candidates_contain_truth(cube):
    assert (11**5, 1) in conductor_candidates(cube)


@pytest.mark.slow
def test_cube_functional_equation(cube):
    from lfun.completed import fe_residual
    from quaternion.eigenforms import extend_newform

    L = completed_l(cube, lambda form, n_max: extend_newform(form, n_max))
    worst, _ = fe_residual(L, [0.1, 0.3, 0.7, 1.5, 0.5 + 1j])
    assert worst < 1e-6


def eta_form(exponents, level, al, label, n_max):
    c = eta_product_expansion(exponents, n_max)
    return NewformData(level, 2, {n: c[n] for n in range(1, n_max + 1)}, al, label)


@pytest.fixture(scope="module")
def long_forms():
    return {
        "11a": eta_form({1: 2, 11: 2}, 11, {11: -1}, "11a", 500),
        "14a": eta_form({1: 1, 2: 1, 7: 1, 14: 1}, 14, {2: 1, 7: -1}, "14a", 500),
    }


@pytest.mark.slow
@pytest.mark.parametrize("names", [("11a", "11a", "11a"), ("11a", "11a", "14a")])
def test_coefficients_are_multiplicative(long_forms, names):
    forms = [long_forms[name] for name in names]
    triple = make_triple(*forms)
    b = dirichlet_coeffs(triple, 500)
    for n in range(2, 501):
        for m in divisors(n)[1:-1]:
            if gcd(m, n // m) == 1:
                assert b[n] == b[m] * b[n // m]
    for p in primerange(2, 501):
        if triple.N % p:
            assert b[p] == forms[0].a(p) * forms[1].a(p) * forms[2].a(p)


@pytest.mark.slow
def test_mixed_level_functional_equation():
    from lfun.completed import fe_residual
    from quaternion.eigenforms import extend_newform, newform_by_label

    f11 = newform_by_label("11.2.1")
    f33 = newform_by_label("33.2.1")
    L = completed_l(make_triple(f11, f11, f33), extend_newform)
    worst, _ = fe_residual(L, [0.1, 0.3, 0.7, 0.2j])
    assert worst < 1e-6


@pytest.mark.slow
def test_fit_recovers_cube_conductor(long_forms):
    from lfun.completed import fit_conductor

    def extender(form, n_max):
        return eta_form({1: 2, 11: 2}, 11, {11: -1}, form.label, n_max)

    def factory(conductor, sign):
        f = long_forms["11a"]
        return completed_l(make_triple(f, f, f), extender, conductor, sign)

    f = long_forms["11a"]
    candidates = [c for c in conductor_candidates(make_triple(f, f, f)) if c[0] <= 11**6]
    fits = fit_conductor(factory, candidates, [0.1, 0.3, 0.7, 0.2j])
    _, conductor, sign = fits[0]
    assert (conductor, sign) == (11**5, 1)
    wrong = [residual for residual, Q, w in fits if (Q, w) == (11**5, -1)]
    assert wrong and wrong[0] > 1e-2
