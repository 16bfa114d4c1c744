"""
Brandt matrices with harmonic weight and the Atkin-Lehner involutions on
functions over right ideal classes.

A form of weight nu is a tuple (phi(I_1), ..., phi(I_h)) of vectors in the
harmonic polynomials U_nu, invariant under the unit group of each left order.
Operators act on the stacked column vector of length h * (2 nu + 1).
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import List, Tuple

from sympy import Matrix, Rational

import config
from cache.utils import log, progress
from errors import ConsistencyError, PreconditionError
from quaternion.algebra import QuatElement
from quaternion.harmonics import HarmonicBasis
from quaternion.lattice import (
    gram_matrix,
    lattice_isometry,
    lattice_product,
    short_vectors,
    theta_series,
)
from quaternion.orders import ideal_transporter, two_sided_ideal


@dataclass(frozen=True)
class BrandtMatrix:
    n: int
    nu: int
    h: int
    blocks: Tuple[Tuple[Tuple[Tuple[Fraction, ...], ...], ...], ...]

    @property
    def dimension(self):
        return 2 * self.nu + 1

    def block(self, i, j):
        return self.blocks[i][j]

    def to_matrix(self):
        """Stacked (h * dim) square sympy matrix; block (i, j) at rows i*dim."""
        return stack_blocks(self.blocks, self.dimension)

    def row_sums(self):
        """Row sums of the nu = 0 matrix."""
        return [sum(block[0][0] for block in row) for row in self.blocks]


def stack_blocks(blocks, dimension):
    matrix = [
        [Rational(0)] * (len(blocks[0]) * dimension) for _ in range(len(blocks) * dimension)
    ]
    for i, row in enumerate(blocks):
        for j, block in enumerate(row):
            for r in range(dimension):
                for c in range(dimension):
                    value = block[r][c]
                    if value:
                        matrix[i * dimension + r][j * dimension + c] = Rational(
                            value.numerator, value.denominator
                        )
    return Matrix(matrix)


def _map_pairs(function, pairs):
    """Apply function over (i, j) pairs, threaded when config.THREADS > 1."""
    if config.THREADS <= 1:
        return [function(pair) for pair in pairs]
    with ThreadPoolExecutor(max_workers=config.THREADS) as executor:
        return list(executor.map(function, pairs))


class HeckeModule:
    """
    Data shared by every Brandt matrix of one class set and weight: the
    transporter lattices I_ij, their normalized Gram matrices and cached
    vector or theta enumerations up to the largest n requested so far.
    """

    def __init__(self, classes, nu):
        self.classes = classes
        self.nu = nu
        self.h = classes.h
        self.basis = HarmonicBasis(classes.order.algebra, nu)
        self.dimension = self.basis.dimension
        self.transporters = [
            [ideal_transporter(classes, i, j) for j in range(self.h)] for i in range(self.h)
        ]
        self.grams = [[gram_matrix(L) for L in row] for row in self.transporters]
        self._bound = {}
        self._enumerated = {}

    @classmethod
    def for_classes(cls, classes, nu):
        module = classes.hecke_modules.get(nu)
        if module is None:
            module = cls(classes, nu)
            classes.hecke_modules[nu] = module
        return module

    def _enumerate(self, pair, bound):
        i, j = pair
        if self._bound.get(pair, -1) >= bound:
            return self._enumerated[pair]
        if self.nu == 0:
            data = theta_series(self.grams[i][j], bound)
        else:
            data = {}
            for vector, value in short_vectors(self.grams[i][j], bound):
                if value:
                    data.setdefault(int(value), []).append(vector)
        self._bound[pair] = bound
        self._enumerated[pair] = data
        return data

    def prepare(self, bound, rows=None):
        """Enumerate every needed pair up to bound before matrices are read."""
        rows = range(self.h) if rows is None else rows
        pairs = [
            (i, j)
            for i in rows
            for j in range(self.h)
            if self._bound.get((i, j), -1) < bound
        ]
        if not pairs:
            return
        log(f"hecke {self.classes.order} nu={self.nu}: enumerating {len(pairs)} pairs to {bound}")
        _map_pairs(lambda pair: self._enumerate(pair, bound), list(progress(pairs, desc="pairs")))

    def _integral_basis(self, i, j):
        L = self.transporters[i][j]
        denominator = lcm(*[x.denominator for row in L.basis for x in row])
        return denominator, [[int(x * denominator) for x in row] for row in L.basis]

    def block(self, i, j, n):
        """Block (i, j) of B(n) as a tuple of rows of Fractions."""
        data = self._enumerate((i, j), max(n, self._bound.get((i, j), 0)))
        e_j = self.classes.unit_orders[j]
        if self.nu == 0:
            return ((Fraction(data[n], e_j),),)

        vectors = data.get(n, [])
        dimension = self.dimension
        total = [[0] * dimension for _ in range(dimension)]
        denominator, integral = self._integral_basis(i, j)
        for vector in vectors:
            g = [sum(c * row[m] for c, row in zip(vector, integral)) for m in range(4)]
            image = self.basis.conjugation_matrix_integral(g)
            for r in range(dimension):
                for c in range(dimension):
                    total[r][c] += image[r][c]
        _, poly_denominator = self.basis.conjugation_polynomials()
        norm = self.transporters[i][j].norm()
        scale = Fraction(1, poly_denominator * denominator ** (2 * self.nu) * e_j) / norm**self.nu
        return tuple(tuple(entry * scale for entry in row) for row in total)

    def matrix(self, n):
        if n < 1:
            raise PreconditionError(f"Brandt matrix index must be positive, got {n}")
        self.prepare(n)
        blocks = tuple(
            tuple(self.block(i, j, n) for j in range(self.h)) for i in range(self.h)
        )
        return BrandtMatrix(n, self.nu, self.h, blocks)

    def theta(self, i, j, bound):
        """Representation numbers of I_ij up to bound (nu = 0 only)."""
        return self._enumerate((i, j), max(bound, self._bound.get((i, j), 0)))

    def row(self, i, n):
        """Blocks (i, 0..h-1) of B(n) without building the other rows."""
        self.prepare(n, rows=[i])
        return [self.block(i, j, n) for j in range(self.h)]

    def inner_product_matrix(self):
        """Stacked matrix E with <phi, psi> = phi^T E psi."""
        gram = self.basis.gram()
        blocks = []
        for i in range(self.h):
            e_i = self.classes.unit_orders[i]
            row = []
            for j in range(self.h):
                if i == j:
                    row.append(tuple(tuple(Fraction(str(x)) / e_i for x in line) for line in gram))
                else:
                    row.append(tuple(tuple(Fraction(0) for _ in line) for line in gram))
            blocks.append(tuple(row))
        return stack_blocks(blocks, self.dimension)


def brandt_matrix(classes, n, nu=0):
    return HeckeModule.for_classes(classes, nu).matrix(n)


@dataclass(frozen=True)
class ALInvolution:
    """w_p: (w_p phi)(I_i) = tau(gamma_i) phi(I_target)."""

    p: int
    mapping: Tuple[Tuple[int, QuatElement], ...]

    def blocks(self, basis):
        return tuple(pullback_blocks(self.mapping, basis, len(self.mapping)))

    def to_matrix(self, basis):
        return stack_blocks(self.blocks(basis), basis.dimension)

    def permutation(self):
        return [target for target, _ in self.mapping]


def atkin_lehner_involution(classes, p):
    order = classes.order
    if order.level % p:
        raise PreconditionError(f"{p} does not divide the level of {order}")
    J = two_sided_ideal(order, p)
    mapping = []
    for i, rep in enumerate(classes.reps):
        translated = lattice_product(rep, J)
        for target, candidate in enumerate(classes.reps):
            gamma = lattice_isometry(translated, candidate)
            if gamma is not None:
                mapping.append((target, gamma))
                break
        else:
            raise ConsistencyError(f"w_{p}: class {i} of {order} has no image class")

    permutation = [target for target, _ in mapping]
    if any(permutation[permutation[i]] != i for i in range(len(permutation))):
        raise ConsistencyError(f"w_{p} on {order} is not an involution")
    return ALInvolution(p, tuple(mapping))


def pullback_blocks(mapping, basis, h_big):
    """
    Blocks of phi -> (phi(I_i R') twisted back), for a class_map from a finer
    order: row i has tau(gamma_i) in column j(i).
    """
    zero = tuple(tuple(Fraction(0) for _ in range(basis.dimension)) for _ in range(basis.dimension))
    rows: List[tuple] = []
    for target, gamma in mapping:
        tau = tuple(tuple(row) for row in basis.tau_matrix(gamma))
        rows.append(tuple(tau if j == target else zero for j in range(h_big)))
    return rows


def pullback_matrix(mapping, basis, h_big):
    return stack_blocks(pullback_blocks(mapping, basis, h_big), basis.dimension)
