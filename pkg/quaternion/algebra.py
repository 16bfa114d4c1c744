from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple

from sympy import factorint, legendre_symbol, primefactors

from errors import PreconditionError


def _square_free_part(value):
    """Integer with the same square class as the nonzero rational `value`."""
    value = Fraction(value)
    return value.numerator * value.denominator


def _split_p(value, p):
    exponent = 0
    while value % p == 0:
        value //= p
        exponent += 1
    return exponent, value


def hilbert_symbol(a, b, p):
    """
    Local Hilbert symbol (a, b)_p for nonzero rationals a, b.

    Parameters:
        a, b: nonzero rationals
        p: a prime, or the string "infinity"

    Returns:
        +1 if z^2 = a x^2 + b y^2 has a nontrivial solution over Q_p, else -1
    """
    if a == 0 or b == 0:
        raise PreconditionError("hilbert symbol of zero")
    if p == "infinity":
        return -1 if (a < 0 and b < 0) else 1

    a = _square_free_part(a)
    b = _square_free_part(b)
    alpha, u = _split_p(a, p)
    beta, v = _split_p(b, p)

    if p == 2:
        eps_u = ((u - 1) // 2) % 2
        eps_v = ((v - 1) // 2) % 2
        omega_u = ((u * u - 1) // 8) % 2
        omega_v = ((v * v - 1) // 8) % 2
        exponent = eps_u * eps_v + alpha * omega_v + beta * omega_u
        return -1 if exponent % 2 else 1

    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        sign *= legendre_symbol(u % p, p)
    if alpha % 2:
        sign *= legendre_symbol(v % p, p)
    return sign


@dataclass(frozen=True)
class QuaternionAlgebra:
    """
    Definite quaternion algebra (a, b) over Q: i^2 = a, j^2 = b, ij = -ji = k.
    """

    a_coef: int
    b_coef: int
    ramified_finite: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not (self.a_coef < 0 and self.b_coef < 0):
            raise PreconditionError(
                f"algebra ({self.a_coef}, {self.b_coef}) is not definite"
            )
        if not self.ramified_finite:
            object.__setattr__(
                self, "ramified_finite", tuple(ramified_primes(self.a_coef, self.b_coef))
            )

    @property
    def discriminant(self):
        product = 1
        for p in self.ramified_finite:
            product *= p
        return product

    def element(self, *coords):
        return QuatElement(self, tuple(Fraction(c) for c in coords))

    def one(self):
        return self.element(1, 0, 0, 0)

    def basis(self):
        return [
            self.element(1, 0, 0, 0),
            self.element(0, 1, 0, 0),
            self.element(0, 0, 1, 0),
            self.element(0, 0, 0, 1),
        ]

    def __str__(self):
        return f"({self.a_coef},{self.b_coef})"


def ramified_primes(a, b):
    """Finite primes where (a, b) ramifies; only primes dividing 2ab can."""
    candidates = sorted(set(primefactors(2 * abs(a) * abs(b))))
    return [p for p in candidates if hilbert_symbol(a, b, p) == -1]


@dataclass(frozen=True)
class QuatElement:
    algebra: QuaternionAlgebra
    coords: Tuple[Fraction, Fraction, Fraction, Fraction]

    def __add__(self, other):
        return QuatElement(
            self.algebra, tuple(x + y for x, y in zip(self.coords, other.coords))
        )

    def __sub__(self, other):
        return QuatElement(
            self.algebra, tuple(x - y for x, y in zip(self.coords, other.coords))
        )

    def __neg__(self):
        return QuatElement(self.algebra, tuple(-x for x in self.coords))

    def __mul__(self, other):
        if not isinstance(other, QuatElement):
            other = Fraction(other)
            return QuatElement(self.algebra, tuple(x * other for x in self.coords))
        a = self.algebra.a_coef
        b = self.algebra.b_coef
        x0, x1, x2, x3 = self.coords
        y0, y1, y2, y3 = other.coords
        return QuatElement(
            self.algebra,
            (
                x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
                x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
                x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
                x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
            ),
        )

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        return QuatElement(self.algebra, tuple(scalar * x for x in self.coords))

    def __truediv__(self, scalar):
        scalar = Fraction(scalar)
        return QuatElement(self.algebra, tuple(x / scalar for x in self.coords))

    def conj(self):
        x0, x1, x2, x3 = self.coords
        return QuatElement(self.algebra, (x0, -x1, -x2, -x3))

    def trd(self):
        return 2 * self.coords[0]

    def nrd(self):
        a = self.algebra.a_coef
        b = self.algebra.b_coef
        x0, x1, x2, x3 = self.coords
        return x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3

    def inverse(self):
        norm = self.nrd()
        if norm == 0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conj() / norm

    def is_zero(self):
        return not any(self.coords)

    def __str__(self):
        return "[" + " ".join(str(c) for c in self.coords) + "]"


def _presentation_candidates():
    n = 1
    while True:
        for first in range(1, n + 1):
            if n % first == 0 and first * first <= n:
                yield -first, -(n // first)
        n += 1


def make_algebra(M1):
    """
    Definite quaternion algebra ramified exactly at the primes of M1 (and at
    infinity). Presentations are tried by increasing |ab| and certified with
    the Hilbert symbol at every prime dividing 2ab.
    """
    M1 = int(M1)
    factors = factorint(M1) if M1 > 1 else {}
    if M1 < 1 or any(e > 1 for e in factors.values()):
        raise PreconditionError(f"M1 = {M1} is not squarefree")
    if len(factors) % 2 == 0:
        raise PreconditionError(
            f"M1 = {M1} has an even number of prime factors; no definite algebra"
        )

    target = sorted(factors)
    for a, b in _presentation_candidates():
        # odd ramified primes must divide ab
        if any(p != 2 and (a * b) % p for p in target):
            continue
        if ramified_primes(a, b) == target:
            return QuaternionAlgebra(a, b, tuple(target))
