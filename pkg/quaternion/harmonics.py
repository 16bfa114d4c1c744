"""
Harmonic polynomials on the trace-zero quaternions, their invariant inner
product, reproducing kernels, the invariant trilinear form and the quaternion
action by conjugation.

Coordinates x1, x2, x3 are taken on i, j, k. Harmonicity and the inner
product are relative to the diagonal form sum d_m x_m^2 (the reduced norm on
pure quaternions, d = (-a, -b, ab)); with d = (1, 1, 1) this is the usual
Euclidean setting.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, lcm
from typing import Tuple

import mpmath
from sympy import Matrix, Poly, QQ, Rational, symbols

from errors import PreconditionError
from quaternion.algebra import QuatElement

X = symbols("x1 x2 x3")
G = symbols("g0 g1 g2 g3")

EUCLIDEAN = (Fraction(1), Fraction(1), Fraction(1))


def _fraction(value):
    value = Rational(value)
    return Fraction(int(value.p), int(value.q))


def algebra_form(algebra):
    """Diagonal coefficients of the reduced norm on i, j, k."""
    a = algebra.a_coef
    b = algebra.b_coef
    return (Fraction(-a), Fraction(-b), Fraction(a * b))


@dataclass(frozen=True)
class HarmonicPoly:
    nu: int
    poly: Poly
    form: Tuple[Fraction, Fraction, Fraction] = EUCLIDEAN

    @classmethod
    def from_expr(cls, expr, nu, form=EUCLIDEAN):
        return cls(nu, Poly(expr, *X, domain=QQ), tuple(Fraction(d) for d in form))

    @property
    def coeffs(self):
        return {m: _fraction(c) for m, c in self.poly.terms()}

    def laplacian(self):
        return laplacian(self.poly, self.form)

    def __call__(self, point):
        values = {x: Rational(str(Fraction(c))) for x, c in zip(X, point)}
        return _fraction(self.poly.as_expr().subs(values))

    def __add__(self, other):
        return HarmonicPoly(self.nu, self.poly + other.poly, self.form)

    def scale(self, factor):
        return HarmonicPoly(self.nu, self.poly * Rational(str(Fraction(factor))), self.form)


def _poly(expr):
    return Poly(expr, *X, domain=QQ)


def r_squared(form):
    return _poly(sum(Rational(str(d)) * x**2 for d, x in zip(form, X)))


def laplacian(poly, form):
    result = _poly(0)
    for d, x in zip(form, X):
        result += poly.diff(x).diff(x) * Rational(str(1 / d))
    return result


def _monomials(degree):
    return [
        (e1, e2, degree - e1 - e2)
        for e1 in range(degree, -1, -1)
        for e2 in range(degree - e1, -1, -1)
    ]


def apolar(P, Q, form):
    """P(D)Q with D_m = (1/d_m) d/dx_m, for homogeneous P, Q of equal degree."""
    q_terms = dict(Q.terms())
    total = Fraction(0)
    for monomial, coefficient in P.terms():
        other = q_terms.get(monomial)
        if other is None:
            continue
        weight = Fraction(1)
        for exponent, d in zip(monomial, form):
            weight *= Fraction(factorial(exponent)) / d**exponent
        total += _fraction(coefficient) * _fraction(other) * weight
    return total


def inner_product(P, Q):
    """
    Invariant inner product <<P, Q>> = P(D)Q / nu!, normalised so that
    reproducing_kernel(nu, x') reproduces evaluation at x'.
    """
    if P.nu != Q.nu:
        raise PreconditionError(f"degree mismatch {P.nu} != {Q.nu}")
    if P.form != Q.form:
        raise PreconditionError("harmonic polynomials live on different forms")
    return apolar(P.poly, Q.poly, P.form) / factorial(P.nu)


@lru_cache(maxsize=None)
def _trace_solver(degree, form):
    """
    Matrix inverting T -> Laplacian(r^2 T) on homogeneous polynomials of
    degree `degree`, in the monomial basis.
    """
    monomials = _monomials(degree)
    rsq = r_squared(form)
    columns = []
    for monomial in monomials:
        image = laplacian(rsq * _poly(X[0] ** monomial[0] * X[1] ** monomial[1] * X[2] ** monomial[2]), form)
        image_terms = dict(image.terms())
        columns.append([image_terms.get(m, 0) for m in monomials])
    return monomials, Matrix(columns).T.inv()


def _split_harmonic(poly, degree, form):
    """Write poly = H + r^2 T with H harmonic; returns (H, T)."""
    if degree < 2:
        return poly, _poly(0)
    monomials, solver = _trace_solver(degree - 2, form)
    target = laplacian(poly, form)
    target_terms = dict(target.terms())
    rhs = Matrix([target_terms.get(m, 0) for m in monomials])
    solution = solver * rhs
    T = _poly(
        sum(
            solution[k] * X[0] ** m[0] * X[1] ** m[1] * X[2] ** m[2]
            for k, m in enumerate(monomials)
        )
    )
    return poly - r_squared(form) * T, T


def harmonic_project(P, target_degree, form=EUCLIDEAN, degree=None):
    """
    Degree-`target_degree` harmonic component h_d of the homogeneous P in
    P = sum_j r^(2j) h_(deg - 2j).
    """
    poly = P.poly if isinstance(P, HarmonicPoly) else _poly(P)
    if isinstance(P, HarmonicPoly):
        form = P.form
        degree = P.nu
    if degree is None:
        degree = poly.total_degree() if not poly.is_zero else target_degree
    if target_degree > degree or (degree - target_degree) % 2:
        raise PreconditionError(
            f"cannot project degree {degree} onto harmonic degree {target_degree}"
        )
    current = poly
    while degree > target_degree:
        _, current = _split_harmonic(current, degree, form)
        degree -= 2
    harmonic, _ = _split_harmonic(current, degree, form)
    return HarmonicPoly(target_degree, harmonic, form)


def gegenbauer_1d(mu, t):
    """
    2^mu * sum_j (-1)^j (mu-j)! / (j! (mu-2j)! 2^(2j)) t^(mu-2j), evaluated
    exactly for rational t.
    """
    t = Fraction(t)
    total = Fraction(0)
    for j in range(mu // 2 + 1):
        term = Fraction(factorial(mu - j), factorial(j) * factorial(mu - 2 * j) * 4**j)
        total += (-1) ** j * term * t ** (mu - 2 * j)
    return 2**mu * total


def reproducing_kernel(nu, x_prime, form=EUCLIDEAN):
    """K_nu(x, x'): the harmonic projection of B(x, x')^nu, B the polar form."""
    bilinear = sum(
        Rational(str(Fraction(d) * Fraction(c))) * x
        for d, c, x in zip(form, x_prime, X)
    )
    return harmonic_project(_poly(bilinear**nu) if nu else _poly(1), nu, form, degree=nu)


def trilinear_T0(P1, P2, P3):
    """
    Invariant trilinear form <<proj_(nu3)(P1 * P2), P3>>. Zero unless the
    degrees satisfy the triangle and parity conditions.
    """
    n1, n2, n3 = P1.nu, P2.nu, P3.nu
    if n3 > n1 + n2 or n3 < abs(n1 - n2) or (n1 + n2 - n3) % 2:
        return Fraction(0)
    product = HarmonicPoly(n1 + n2, P1.poly * P2.poly, P1.form)
    return inner_product(harmonic_project(product, n3), P3)


def _symbolic_conjugation(algebra, gamma_coords):
    """3x3 matrix of x -> conj(gamma) x gamma on pure quaternions."""
    gamma = QuatElement(algebra, tuple(gamma_coords))
    columns = []
    for m in range(1, 4):
        unit = [0, 0, 0, 0]
        unit[m] = 1
        image = gamma.conj() * QuatElement(algebra, tuple(unit)) * gamma
        columns.append(image.coords[1:])
    return [[columns[c][r] for c in range(3)] for r in range(3)]


def tau_action(gamma, P):
    """(tau(gamma) P)(x) = P(conj(gamma) x gamma) / nrd(gamma)^nu."""
    norm = gamma.nrd()
    if norm == 0:
        raise PreconditionError("tau action needs an invertible quaternion")
    if P.form != algebra_form(gamma.algebra):
        raise PreconditionError("polynomial form does not match the algebra")
    matrix = _symbolic_conjugation(gamma.algebra, [Rational(str(c)) for c in gamma.coords])
    images = [sum(matrix[r][c] * X[c] for c in range(3)) for r in range(3)]
    substituted = P.poly.as_expr().subs(dict(zip(X, images)), simultaneous=True)
    return HarmonicPoly(
        P.nu, _poly(substituted) * (Rational(1) / Rational(str(norm)) ** P.nu), P.form
    )


class HarmonicBasis:
    """
    Basis of the harmonic polynomials of degree nu for the norm form of an
    algebra: harmonic projections of the monomials with x3-degree at most 1.
    Vectors of U_nu are handled as coordinate lists on this basis.
    """

    def __init__(self, algebra, nu):
        self.algebra = algebra
        self.nu = nu
        self.form = algebra_form(algebra)
        self.monomials = [m for m in _monomials(nu) if m[2] <= 1]
        self.polys = [
            harmonic_project(_poly(X[0] ** m[0] * X[1] ** m[1] * X[2] ** m[2]), nu, self.form, degree=nu)
            for m in self.monomials
        ]
        table = Matrix(
            [[p.poly.nth(*m) for p in self.polys] for m in self.monomials]
        )
        self._coordinate_matrix = table.inv()
        self._conjugation = None

    @property
    def dimension(self):
        return len(self.polys)

    def coordinates(self, P):
        values = Matrix([P.poly.nth(*m) for m in self.monomials])
        return [_fraction(v) for v in self._coordinate_matrix * values]

    def vector_to_poly(self, vector):
        poly = _poly(0)
        for coefficient, basis_poly in zip(vector, self.polys):
            poly += basis_poly.poly * Rational(str(Fraction(coefficient)))
        return HarmonicPoly(self.nu, poly, self.form)

    def gram(self):
        return [[inner_product(p, q) for q in self.polys] for p in self.polys]

    def conjugation_polynomials(self):
        """
        Entries of the matrix of P -> P(conj(g) x g) (no normalisation) as
        integer polynomials in the standard coordinates g of the quaternion:
        returns (entries, denominator) with entries[r][c] a list of
        (coefficient, exponents) terms.
        """
        if self._conjugation is not None:
            return self._conjugation
        matrix = _symbolic_conjugation(self.algebra, G)
        images = [sum(matrix[r][c] * X[c] for c in range(3)) for r in range(3)]
        columns = []
        for basis_poly in self.polys:
            substituted = Poly(
                basis_poly.poly.as_expr().subs(dict(zip(X, images)), simultaneous=True),
                *X,
            )
            values = Matrix([substituted.nth(*m) for m in self.monomials])
            columns.append(list(self._coordinate_matrix * values))
        entries = [
            [Poly(columns[c][r], *G, domain=QQ).terms() for c in range(self.dimension)]
            for r in range(self.dimension)
        ]
        denominator = 1
        for row in entries:
            for terms in row:
                for _, coefficient in terms:
                    denominator = lcm(denominator, int(Rational(coefficient).q))
        integral = [
            [
                [(int(Rational(coefficient) * denominator), exponents) for exponents, coefficient in terms]
                for terms in row
            ]
            for row in entries
        ]
        self._conjugation = (integral, denominator)
        return self._conjugation

    def conjugation_matrix_integral(self, g):
        """Integer matrix of P -> denominator * P(conj(g) x g) for integer g."""
        entries, _ = self.conjugation_polynomials()
        result = []
        for row in entries:
            values = []
            for terms in row:
                total = 0
                for coefficient, exponents in terms:
                    term = coefficient
                    for base, exponent in zip(g, exponents):
                        if exponent:
                            term *= base**exponent
                    total += term
                values.append(total)
            result.append(values)
        return result

    def tau_matrix(self, gamma):
        """Matrix of tau(gamma) on this basis (columns are images of basis vectors)."""
        if self.nu == 0:
            return [[Fraction(1)]]
        denominator = lcm(*[c.denominator for c in gamma.coords])
        g = [int(c * denominator) for c in gamma.coords]
        integral = self.conjugation_matrix_integral(g)
        _, poly_denominator = self.conjugation_polynomials()
        scale = Fraction(1, poly_denominator * denominator ** (2 * self.nu)) / gamma.nrd() ** self.nu
        return [[entry * scale for entry in row] for row in integral]


@dataclass(frozen=True)
class WeightProfile:
    k1: int
    k2: int
    k3: int
    r: int
    a: int
    a_prime: int
    b: int
    nu2: int
    nu3: int


def weight_profile(*weights):
    """
    Sort weights k1 >= k2 >= k3 and derive a, a', b, nu2, nu3 (with r = 2).
    """
    if len(weights) != 3:
        raise PreconditionError("a triple needs three weights")
    k1, k2, k3 = sorted((int(k) for k in weights), reverse=True)
    if any(k < 2 or k % 2 for k in (k1, k2, k3)):
        raise PreconditionError(f"weights {k1}, {k2}, {k3} must be even and >= 2")
    if k1 >= k2 + k3:
        raise PreconditionError(f"unbalanced weights: {k1} >= {k2} + {k3}")
    r = 2
    a = k2 + k3 - k1 - r
    b = k1 - r - a
    return WeightProfile(k1, k2, k3, r, a, a // 2, b, k2 - r - a, k3 - r - a)


def c_factor(profile, s):
    """c_r(s) = (r + a')^[b] / (r + s + a')^[b] with rising factorials."""
    r, a_prime, b = profile.r, profile.a_prime, profile.b
    if isinstance(s, (int, Fraction)):
        s = Fraction(s)
        numerator = Fraction(1)
        denominator = Fraction(1)
        for m in range(b):
            numerator *= r + a_prime + m
            denominator *= r + s + a_prime + m
        if denominator == 0:
            raise PreconditionError(f"c_r has a pole at s = {s}")
        return numerator / denominator
    denominator = mpmath.rf(r + s + a_prime, b)
    if denominator == 0:
        raise PreconditionError(f"c_r has a pole at s = {s}")
    return mpmath.rf(r + a_prime, b) / denominator
