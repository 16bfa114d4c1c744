from fractions import Fraction

import numpy as np
import pytest
from sympy import primefactors

from errors import PreconditionError
from quaternion.algebra import QuaternionAlgebra, hilbert_symbol, make_algebra, ramified_primes


def test_hilbert_symbol_hamilton():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, 3) == 1
    assert hilbert_symbol(-1, -1, "infinity") == -1


def test_hilbert_symbol_odd_prime():
    assert hilbert_symbol(-1, -11, 11) == -1
    assert hilbert_symbol(-1, -11, 2) == 1
    assert hilbert_symbol(2, 3, "infinity") == 1


def test_hilbert_symbol_rejects_zero():
    with pytest.raises(PreconditionError):
        hilbert_symbol(0, -1, 2)


@pytest.mark.parametrize(
    "M1, presentation",
    [
        (2, (-1, -1)),
        (11, (-1, -11)),
    ],
)
def test_make_algebra_presentation(M1, presentation):
    algebra = make_algebra(M1)
    assert (algebra.a_coef, algebra.b_coef) == presentation
    assert algebra.discriminant == M1


@pytest.mark.parametrize("M1", [3, 5, 7, 13, 30])
def test_make_algebra_ramification(M1):
    algebra = make_algebra(M1)
    assert algebra.discriminant == M1
    assert ramified_primes(algebra.a_coef, algebra.b_coef) == list(algebra.ramified_finite)


@pytest.mark.parametrize("M1", [1, 4, 6, 18])
def test_make_algebra_rejects_bad_discriminant(M1):
    with pytest.raises(PreconditionError):
        make_algebra(M1)


def test_indefinite_algebra_rejected():
    with pytest.raises(PreconditionError):
        QuaternionAlgebra(1, -1)


def test_multiplication_rules():
    algebra = make_algebra(11)
    one, i, j, k = algebra.basis()
    assert i * i == algebra.element(-1, 0, 0, 0)
    assert j * j == algebra.element(-11, 0, 0, 0)
    assert i * j == k
    assert j * i == -k


def test_norm_trace_conjugate():
    algebra = make_algebra(2)
    x = algebra.element(1, 2, 3, 4)
    assert x.nrd() == 30
    assert x.trd() == 2
    assert x * x.conj() == algebra.element(30, 0, 0, 0)
    assert x * x.inverse() == algebra.one()


def _random_element(algebra, rng):
    numerators = rng.integers(-9, 10, size=4)
    denominators = rng.integers(1, 5, size=4)
    return algebra.element(*(Fraction(int(n), int(d)) for n, d in zip(numerators, denominators)))


@pytest.mark.parametrize("M1", [2, 11, 30])
def test_norm_is_multiplicative(M1):
    rng = np.random.default_rng(M1)
    algebra = make_algebra(M1)
    for _ in range(25):
        x = _random_element(algebra, rng)
        y = _random_element(algebra, rng)
        assert (x * y).nrd() == x.nrd() * y.nrd()
        assert (x * y).conj() == y.conj() * x.conj()


def test_hilbert_product_formula():
    rng = np.random.default_rng(5)
    for _ in range(40):
        a, b = (int(v) for v in rng.integers(-60, 61, size=2))
        if a == 0 or b == 0:
            continue
        places = primefactors(2 * abs(a * b)) + ["infinity"]
        product = 1
        for p in places:
            product *= hilbert_symbol(a, b, p)
        assert product == 1
