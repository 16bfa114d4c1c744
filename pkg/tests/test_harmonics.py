from fractions import Fraction

import numpy as np
import pytest

from errors import PreconditionError
from quaternion.algebra import make_algebra
from quaternion.harmonics import (
    X,
    HarmonicBasis,
    HarmonicPoly,
    c_factor,
    gegenbauer_1d,
    harmonic_project,
    inner_product,
    r_squared,
    reproducing_kernel,
    tau_action,
    trilinear_T0,
    weight_profile,
)

x1, x2, x3 = X


def test_gegenbauer():
    assert gegenbauer_1d(1, Fraction(1, 3)) == Fraction(2, 3)
    for t in (0, Fraction(1, 2), 1, 3):
        assert gegenbauer_1d(2, t) == 4 * Fraction(t) ** 2 - 1


def test_harmonic_projection_of_square():
    projected = harmonic_project(x1**2, 0, degree=2)
    assert projected.coeffs == {(0, 0, 0): Fraction(1, 3)}
    harmonic = harmonic_project(x1**2, 2)
    assert harmonic.laplacian().is_zero


def test_projection_parity_rejected():
    with pytest.raises(PreconditionError):
        harmonic_project(x1**2, 1, degree=2)


def test_trilinear_form():
    one = HarmonicPoly.from_expr(1, 0)
    linear = HarmonicPoly.from_expr(x1, 1)
    assert trilinear_T0(linear, linear, one) == Fraction(1, 3)
    assert trilinear_T0(linear, one, one) == 0


@pytest.mark.parametrize(
    "nu, point, expr",
    [
        (1, (1, 0, 0), x1),
        (2, (1, 1, 0), x1 * x2),
        (2, (1, 2, 3), x2 * x3),
    ],
)
def test_reproducing_kernel(nu, point, expr):
    kernel = reproducing_kernel(nu, point)
    P = HarmonicPoly.from_expr(expr, nu)
    assert inner_product(kernel, P) == P(point)


@pytest.mark.parametrize("M1, nu", [(2, 1), (2, 2), (11, 1)])
def test_basis_dimension_and_harmonicity(M1, nu):
    basis = HarmonicBasis(make_algebra(M1), nu)
    assert basis.dimension == 2 * nu + 1
    assert all(P.laplacian().is_zero for P in basis.polys)


def test_tau_of_scalar_is_identity():
    algebra = make_algebra(2)
    basis = HarmonicBasis(algebra, 2)
    identity = [[Fraction(int(r == c)) for c in range(5)] for r in range(5)]
    assert basis.tau_matrix(algebra.one()) == identity
    assert basis.tau_matrix(algebra.element(3, 0, 0, 0)) == identity


def test_tau_action_matches_matrix():
    algebra = make_algebra(2)
    basis = HarmonicBasis(algebra, 1)
    gamma = algebra.element(1, 1, 0, 0)
    matrix = basis.tau_matrix(gamma)
    for c, P in enumerate(basis.polys):
        image = basis.coordinates(tau_action(gamma, P))
        assert image == [matrix[r][c] for r in range(basis.dimension)]


@pytest.mark.parametrize(
    "weights, a, b, nu2, nu3",
    [
        ((2, 2, 2), 0, 0, 0, 0),
        ((4, 4, 2), 0, 2, 2, 0),
        ((2, 4, 4), 0, 2, 2, 0),
        ((6, 4, 4), 0, 4, 2, 2),
        ((4, 4, 4), 2, 0, 0, 0),
    ],
)
def test_weight_profile(weights, a, b, nu2, nu3):
    profile = weight_profile(*weights)
    assert (profile.a, profile.b, profile.nu2, profile.nu3) == (a, b, nu2, nu3)
    assert profile.k1 >= profile.k2 >= profile.k3


@pytest.mark.parametrize("weights", [(4, 2, 2), (3, 2, 2), (8, 4, 2), (2, 2)])
def test_weight_profile_rejected(weights):
    with pytest.raises(PreconditionError):
        weight_profile(*weights)


def test_c_factor():
    assert c_factor(weight_profile(4, 4, 2), 2) == Fraction(3, 10)
    assert c_factor(weight_profile(2, 2, 2), 5) == 1


def _random_gamma(algebra, rng):
    while True:
        coords = [int(c) for c in rng.integers(-3, 4, size=4)]
        if any(coords):
            return algebra.element(*coords)


def _random_harmonic(basis, rng):
    return basis.vector_to_poly([int(c) for c in rng.integers(-4, 5, size=basis.dimension)])


@pytest.mark.slow
@pytest.mark.parametrize("degrees", [(1, 1, 2), (2, 2, 2), (1, 2, 1)])
def test_trilinear_form_is_invariant(degrees):
    rng = np.random.default_rng(7)
    algebra = make_algebra(2)
    bases = [HarmonicBasis(algebra, nu) for nu in degrees]
    polys = [_random_harmonic(basis, rng) for basis in bases]
    value = trilinear_T0(*polys)
    for _ in range(20):
        gamma = _random_gamma(algebra, rng)
        moved = [tau_action(gamma, P) for P in polys]
        assert trilinear_T0(*moved) == value


@pytest.mark.parametrize("nu", [1, 2, 3, 4])
def test_kernel_reproduces_on_algebra_form(nu):
    rng = np.random.default_rng(nu)
    basis = HarmonicBasis(make_algebra(11), nu)
    for _ in range(10):
        point = tuple(
            Fraction(int(n), int(d))
            for n, d in zip(rng.integers(-5, 6, size=3), rng.integers(1, 6, size=3))
        )
        kernel = reproducing_kernel(nu, point, basis.form)
        for P in basis.polys:
            assert inner_product(kernel, P) == P(point)


def test_c_factor_is_one_at_zero():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 10:
        weights = [2 * int(k) for k in rng.integers(1, 9, size=3)]
        k1, k2, k3 = sorted(weights, reverse=True)
        if k1 >= k2 + k3:
            continue
        assert c_factor(weight_profile(*weights), 0) == 1
        checked += 1


@pytest.mark.parametrize("n1, n2, n3", [(3, 1, 0), (4, 1, 1), (4, 2, 0), (5, 1, 2)])
def test_product_has_no_low_components(n1, n2, n3):
    rng = np.random.default_rng(n1 * 10 + n2)
    algebra = make_algebra(11)
    P1 = _random_harmonic(HarmonicBasis(algebra, n1), rng)
    P2 = _random_harmonic(HarmonicBasis(algebra, n2), rng)
    product = HarmonicPoly(n1 + n2, P1.poly * P2.poly, P1.form)
    assert harmonic_project(product, n3).poly.is_zero


def test_trilinear_form_is_symmetric():
    rng = np.random.default_rng(11)
    algebra = make_algebra(2)
    P1 = _random_harmonic(HarmonicBasis(algebra, 2), rng)
    P2 = _random_harmonic(HarmonicBasis(algebra, 1), rng)
    P3 = _random_harmonic(HarmonicBasis(algebra, 3), rng)
    assert trilinear_T0(P1, P2, P3) == trilinear_T0(P2, P1, P3)


@pytest.mark.parametrize("nu", [1, 2, 3])
def test_projection_fixes_harmonics_and_kills_multiples_of_r_squared(nu):
    rng = np.random.default_rng(nu + 20)
    basis = HarmonicBasis(make_algebra(11), nu)
    P = _random_harmonic(basis, rng)
    assert harmonic_project(P, nu).poly == P.poly
    lifted = HarmonicPoly(nu + 2, r_squared(basis.form) * P.poly, basis.form)
    assert harmonic_project(lifted, nu + 2).poly.is_zero
    assert harmonic_project(lifted, nu).poly == P.poly
