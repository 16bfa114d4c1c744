import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Tuple

import numpy as np
from sympy import Matrix, Rational

from errors import PreconditionError
from quaternion.algebra import QuaternionAlgebra, QuatElement


def _to_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.p), int(value.q))
    return Fraction(value)


def _lcm(values):
    return reduce(lambda x, y: x * y // math.gcd(x, y), values, 1)


def rational_gcd(values):
    """gcd of a list of rationals, as a nonnegative rational."""
    values = [Fraction(v) for v in values if v != 0]
    if not values:
        return Fraction(0)
    denominator = _lcm([v.denominator for v in values])
    numerator = reduce(math.gcd, [abs(int(v * denominator)) for v in values])
    return Fraction(numerator, denominator)


def _integer_hnf(rows, ncols):
    """
    Row-style Hermite normal form: upper triangular, positive pivots, entries
    above each pivot reduced into [0, pivot). Zero rows are dropped.
    """
    rows = [list(row) for row in rows if any(row)]
    rank = 0
    for col in range(ncols):
        while True:
            nonzero = [k for k in range(rank, len(rows)) if rows[k][col] != 0]
            if len(nonzero) <= 1:
                break
            smallest = min(nonzero, key=lambda k: abs(rows[k][col]))
            rows[rank], rows[smallest] = rows[smallest], rows[rank]
            pivot = rows[rank][col]
            for k in range(rank + 1, len(rows)):
                if rows[k][col]:
                    factor = rows[k][col] // pivot
                    rows[k] = [x - factor * y for x, y in zip(rows[k], rows[rank])]
        nonzero = [k for k in range(rank, len(rows)) if rows[k][col] != 0]
        if not nonzero:
            continue
        rows[rank], rows[nonzero[0]] = rows[nonzero[0]], rows[rank]
        if rows[rank][col] < 0:
            rows[rank] = [-x for x in rows[rank]]
        pivot = rows[rank][col]
        for k in range(rank):
            factor = rows[k][col] // pivot
            if factor:
                rows[k] = [x - factor * y for x, y in zip(rows[k], rows[rank])]
        rank += 1
    return [row for row in rows[:rank]]


def hermite_basis(generators, ncols=4):
    """Canonical basis of the Z-span of rational row vectors."""
    generators = [[Fraction(x) for x in row] for row in generators]
    denominator = _lcm([x.denominator for row in generators for x in row])
    integral = [[int(x * denominator) for x in row] for row in generators]
    return [
        tuple(Fraction(x, denominator) for x in row)
        for row in _integer_hnf(integral, ncols)
    ]


@dataclass(frozen=True)
class QuatLattice:
    """
    Rank-4 Z-lattice in a quaternion algebra. `basis` rows are coordinates on
    1, i, j, k and are kept in Hermite normal form so equal lattices compare
    equal. `scale` multiplies the norm form.
    """

    algebra: QuaternionAlgebra
    basis: Tuple[Tuple[Fraction, ...], ...]
    scale: Fraction = field(default=Fraction(1))

    @classmethod
    def from_generators(cls, algebra, generators, scale=1):
        rows = [g.coords if isinstance(g, QuatElement) else g for g in generators]
        basis = hermite_basis(rows)
        if len(basis) != 4:
            raise PreconditionError(f"lattice has rank {len(basis)}, expected 4")
        return cls(algebra, tuple(basis), Fraction(scale))

    def elements(self):
        return [QuatElement(self.algebra, row) for row in self.basis]

    def element(self, vector):
        """Element with integer coordinates `vector` on the lattice basis."""
        coords = [Fraction(0)] * 4
        for coefficient, row in zip(vector, self.basis):
            if coefficient:
                for m in range(4):
                    coords[m] += coefficient * row[m]
        return QuatElement(self.algebra, tuple(coords))

    @cached_property
    def _inverse(self):
        inverse = Matrix(self.basis).inv()
        return [[_to_fraction(inverse[r, c]) for c in range(4)] for r in range(4)]

    def coordinates(self, x):
        """Rational coordinates of x on the lattice basis."""
        inverse = self._inverse
        return [
            sum((x.coords[m] * inverse[m][c] for m in range(4)), Fraction(0))
            for c in range(4)
        ]

    def contains(self, x):
        return all(c.denominator == 1 for c in self.coordinates(x))

    def contains_lattice(self, other):
        return all(self.contains(x) for x in other.elements())

    def covolume(self):
        """Absolute determinant of the basis in 1, i, j, k coordinates."""
        return abs(_to_fraction(Matrix(self.basis).det()))

    def norm(self):
        """nrd(L): gcd of nrd over L, computed from the polarised norm form."""
        elements = self.elements()
        values = [x.nrd() for x in elements]
        for r in range(4):
            for c in range(r + 1, 4):
                values.append((elements[r] * elements[c].conj()).trd())
        return rational_gcd(values)

    def scaled(self, factor):
        """The lattice factor * L (same scale); sign of factor is irrelevant."""
        factor = abs(Fraction(factor))
        if factor == 0:
            raise PreconditionError("cannot scale a lattice by zero")
        return QuatLattice(
            self.algebra,
            tuple(tuple(factor * x for x in row) for row in self.basis),
            self.scale,
        )

    def with_scale(self, scale):
        return QuatLattice(self.algebra, self.basis, Fraction(scale))

    def normalized(self):
        """Same lattice with the norm form divided by nrd(L)."""
        return self.with_scale(1 / self.norm())

    def conj(self):
        return QuatLattice.from_generators(
            self.algebra, [x.conj() for x in self.elements()], self.scale
        )

    def left_multiply(self, gamma):
        return QuatLattice.from_generators(
            self.algebra, [gamma * x for x in self.elements()], self.scale
        )

    def right_multiply(self, gamma):
        return QuatLattice.from_generators(
            self.algebra, [x * gamma for x in self.elements()], self.scale
        )

    def __str__(self):
        rows = ["[" + " ".join(str(x) for x in row) + "]" for row in self.basis]
        return " ".join(rows)


def lattice_product(L1, L2):
    """Z-span of all products x*y, x in L1, y in L2."""
    generators = [x * y for x in L1.elements() for y in L2.elements()]
    return QuatLattice.from_generators(L1.algebra, generators)


def lattice_sum(L1, L2):
    return QuatLattice.from_generators(L1.algebra, L1.elements() + L2.elements())


def dual_lattice(L):
    """Dual of L under the standard coordinate pairing on Q^4."""
    inverse = Matrix(L.basis).inv().T
    rows = [[_to_fraction(inverse[r, c]) for c in range(4)] for r in range(4)]
    return QuatLattice.from_generators(L.algebra, rows)


def lattice_intersection(L1, L2):
    return dual_lattice(lattice_sum(dual_lattice(L1), dual_lattice(L2)))


def _multiplier_order(L, left):
    columns = []
    standard = L.algebra.basis()
    for b in L.elements():
        images = [L.coordinates(e * b if left else b * e) for e in standard]
        for c in range(4):
            columns.append([images[m][c] for m in range(4)])
    span = QuatLattice.from_generators(L.algebra, columns)
    return dual_lattice(span)


def left_order(L):
    """{x : x L in L}."""
    return _multiplier_order(L, left=True)


def right_order(L):
    """{x : L x in L}."""
    return _multiplier_order(L, left=False)


def gram_matrix(L):
    """
    Gram matrix of q(x) = scale * nrd(x) on the basis of L; entry (i, j) is
    scale * trd(b_i * conj(b_j)) / 2.
    """
    elements = L.elements()
    gram = [
        [L.scale * (x * y.conj()).trd() / 2 for y in elements] for x in elements
    ]
    if Matrix(gram).det() == 0:
        raise PreconditionError("degenerate lattice basis")
    return gram


def _ldl(gram):
    n = len(gram)
    q = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        diagonal = Fraction(gram[i][i]) - sum(
            (q[k][k] * q[k][i] * q[k][i] for k in range(i)), Fraction(0)
        )
        if diagonal <= 0:
            raise PreconditionError("Gram matrix is not positive definite")
        q[i][i] = diagonal
        for j in range(i + 1, n):
            off = Fraction(gram[i][j]) - sum(
                (q[k][k] * q[k][i] * q[k][j] for k in range(i)), Fraction(0)
            )
            q[i][j] = off / diagonal
    return q


def _fincke_pohst(q, bound, stop_level):
    """
    Yield (tail, remaining) where tail holds coordinates for indices
    stop_level..n-1 and remaining = bound - (their contribution).
    """
    n = len(q)
    x = [0] * n

    def descend(level, remaining):
        if level < stop_level:
            yield tuple(x[stop_level:]), remaining
            return
        center = sum((q[level][j] * x[j] for j in range(level + 1, n)), Fraction(0))
        radius = math.sqrt(max(float(remaining / q[level][level]), 0.0))
        low = math.floor(-float(center) - radius) - 1
        high = math.ceil(-float(center) + radius) + 1
        for value in range(low, high + 1):
            shifted = value + center
            used = q[level][level] * shifted * shifted
            if used <= remaining:
                x[level] = value
                yield from descend(level - 1, remaining - used)
        x[level] = 0

    yield from descend(n - 1, Fraction(bound))


def short_vectors(gram, bound):
    """
    All integer vectors x with x^T G x <= bound, including zero, as
    (vector, value) pairs in lexicographic order. Exact throughout.
    """
    q = _ldl(gram)
    bound = Fraction(bound)
    if bound < 0:
        return []
    found = [(vector, bound - remaining) for vector, remaining in _fincke_pohst(q, bound, 0)]
    found.sort()
    return found


def _integral_double(gram):
    doubled = [[2 * Fraction(entry) for entry in row] for row in gram]
    if any(entry.denominator != 1 for row in doubled for entry in row) or any(
        Fraction(gram[i][i]).denominator != 1 for i in range(len(gram))
    ):
        raise PreconditionError("theta series needs an integral quadratic form")
    return [[int(entry) for entry in row] for row in doubled]


def theta_series(gram, n_max):
    """
    Representation numbers r(n) = #{x : x^T G x = n} for 0 <= n <= n_max of an
    integral positive definite form. The innermost coordinate is swept with
    numpy integer arithmetic.
    """
    doubled = _integral_double(gram)
    n = len(gram)
    q = _ldl(gram)
    counts = np.zeros(n_max + 1, dtype=np.int64)
    g00 = doubled[0][0]
    for tail, remaining in _fincke_pohst(q, n_max, 1):
        full_tail = (0,) + tail
        linear = sum(doubled[0][j] * full_tail[j] for j in range(1, n))
        rest = sum(
            doubled[r][c] * full_tail[r] * full_tail[c]
            for r in range(1, n)
            for c in range(1, n)
        )
        center = -float(linear) / g00
        radius = math.sqrt(max(2.0 * float(remaining) / g00, 0.0)) + 1.0
        x0 = np.arange(math.floor(center - radius) - 1, math.ceil(center + radius) + 2, dtype=np.int64)
        values = (g00 * x0 * x0 + 2 * linear * x0 + rest) // 2
        values = values[(values >= 0) & (values <= n_max)]
        counts += np.bincount(values, minlength=n_max + 1)[: n_max + 1]
    return [int(c) for c in counts]


def vectors_of_value(L, value):
    """Elements x of L with scale * nrd(x) == value."""
    gram = gram_matrix(L)
    return [
        L.element(vector)
        for vector, found in short_vectors(gram, value)
        if found == value
    ]


def lattice_isometry(L1, L2):
    """
    Find gamma with gamma * L2 = L1, or None when the lattices are not
    left-equivalent. Candidates are the elements of L1 * conj(L2) of reduced
    norm nrd(L1) * nrd(L2).
    """
    n1 = L1.norm()
    n2 = L2.norm()
    transporter = lattice_product(L1, L2.conj()).with_scale(1 / (n1 * n2))
    for x in vectors_of_value(transporter, 1):
        gamma = x / n2
        if L2.left_multiply(gamma).basis == L1.basis:
            return gamma
    return None
