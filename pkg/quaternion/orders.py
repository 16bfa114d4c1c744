import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import List

from sympy import Matrix, factorint, nextprime, primefactors

from cache.utils import log
from errors import ConsistencyError, PreconditionError
from quaternion.algebra import QuaternionAlgebra, make_algebra
from quaternion.lattice import (
    QuatLattice,
    gram_matrix,
    lattice_intersection,
    lattice_isometry,
    lattice_product,
    left_order,
    short_vectors,
    theta_series,
)

# Theta coefficients compared before attempting an isometry search
THETA_SIGNATURE_BOUND = 6


def eichler_mass(M1, M2):
    """Sum of 1/e_i over right ideal classes of an Eichler order R(M1, M2)."""
    mass = Fraction(1, 24)
    for p in primefactors(M1) if M1 > 1 else []:
        mass *= p - 1
    for p in primefactors(M2) if M2 > 1 else []:
        mass *= p + 1
    return mass


def _is_squarefree(n):
    return n >= 1 and all(e == 1 for e in factorint(n).values())


def reduced_discriminant(L):
    """sqrt |det(trd(b_i conj(b_j)))| for a lattice with scale 1."""
    elements = L.elements()
    gram = [[(x * y.conj()).trd() for y in elements] for x in elements]
    det = abs(Fraction(str(Matrix(gram).det())))
    numerator = isqrt(det.numerator)
    denominator = isqrt(det.denominator)
    if numerator * numerator != det.numerator or denominator * denominator != det.denominator:
        raise ConsistencyError(f"discriminant {det} is not a square")
    return Fraction(numerator, denominator)


def _is_integral(L):
    elements = L.elements()
    if any(x.nrd().denominator != 1 or x.trd().denominator != 1 for x in elements):
        return False
    return all(
        (x * y.conj()).trd().denominator == 1 for x in elements for y in elements
    )


def _ring_closure(algebra, generators):
    """
    Smallest lattice containing the generators and closed under products, or
    None once a non-integral element shows up.
    """
    L = QuatLattice.from_generators(algebra, generators)
    while True:
        if not _is_integral(L):
            return None
        elements = L.elements()
        products = [x * y for x in elements for y in elements]
        grown = QuatLattice.from_generators(algebra, elements + products)
        if grown.basis == L.basis:
            return L
        L = grown


def is_order(L):
    one = L.algebra.one()
    if not L.contains(one) or not _is_integral(L):
        return False
    elements = L.elements()
    return all(L.contains(x * y) for x in elements for y in elements)


@lru_cache(maxsize=None)
def maximal_order(algebra: QuaternionAlgebra):
    """
    Maximal order containing Z<1, i, j, k>: adjoin elements x/p with integral
    trace and norm while the discriminant is larger than that of the algebra.
    """
    order = QuatLattice.from_generators(algebra, algebra.basis())
    target = algebra.discriminant
    while True:
        discriminant = reduced_discriminant(order)
        if discriminant == target:
            return order
        excess = int(discriminant / target)
        enlarged = None
        for p in primefactors(excess):
            elements = order.elements()
            for digits in itertools.product(range(p), repeat=4):
                if not any(digits):
                    continue
                x = sum(
                    (e * d for e, d in zip(elements[1:], digits[1:])),
                    elements[0] * digits[0],
                )
                y = x / p
                if order.contains(y):
                    continue
                if y.trd().denominator != 1 or y.nrd().denominator != 1:
                    continue
                closure = _ring_closure(algebra, elements + [y])
                if closure is not None:
                    enlarged = closure
                    break
            if enlarged is not None:
                break
        if enlarged is None:
            raise ConsistencyError(
                f"cannot enlarge order of discriminant {discriminant} in {algebra}"
            )
        order = enlarged


def _projective_digits(p):
    """Coefficient vectors in [0, p)^4 whose first nonzero entry is 1."""
    for digits in itertools.product(range(p), repeat=4):
        nonzero = [d for d in digits if d]
        if nonzero and nonzero[0] == 1:
            yield digits


def neighbors(order_lattice, ideal, p):
    """
    Right ideals J of the order with p*I in J in I and [I : J] = p^2, i.e.
    J = x*R + p*I for x in I with p | nrd(x)/nrd(I).
    """
    algebra = ideal.algebra
    norm = ideal.norm()
    elements = ideal.elements()
    order_elements = order_lattice.elements()
    p_ideal = [x * p for x in elements]
    covolume = ideal.covolume() * p * p
    found = {}
    for digits in _projective_digits(p):
        x = sum(
            (e * d for e, d in zip(elements[1:], digits[1:])),
            elements[0] * digits[0],
        )
        value = x.nrd() / norm
        if value % p:
            continue
        J = QuatLattice.from_generators(
            algebra, [x * r for r in order_elements] + p_ideal
        )
        if J.covolume() == covolume and J.basis not in found:
            found[J.basis] = J
    return [found[key] for key in sorted(found)]


@lru_cache(maxsize=None)
def _level_ideal(algebra, p):
    """First right ideal of norm p of the maximal order (lexicographic)."""
    order = maximal_order(algebra)
    ideals = neighbors(order, order, p)
    if not ideals:
        raise ConsistencyError(f"no ideal of norm {p} in the maximal order")
    return ideals[0]


@dataclass(frozen=True)
class EichlerOrder:
    algebra: QuaternionAlgebra
    lattice: QuatLattice
    M1: int
    M2: int

    @property
    def level(self):
        return self.M1 * self.M2

    def __str__(self):
        return f"R({self.M1},{self.M2})"


@lru_cache(maxsize=None)
def eichler_order(algebra, M1, M2):
    """
    Eichler order R(M1, M2): the maximal order intersected with the left orders
    of a fixed norm-p right ideal for each p | M2. The fixed choice makes
    R(M1, d) contain R(M1, M2) for every d | M2.
    """
    if algebra.discriminant != M1:
        raise PreconditionError(
            f"algebra {algebra} is ramified at {algebra.ramified_finite}, not at M1 = {M1}"
        )
    if not _is_squarefree(M2) or gcd(M1, M2) != 1:
        raise PreconditionError(f"M2 = {M2} must be squarefree and coprime to M1 = {M1}")

    order = maximal_order(algebra)
    for p in primefactors(M2) if M2 > 1 else []:
        order = lattice_intersection(order, left_order(_level_ideal(algebra, p)))

    if reduced_discriminant(order) != M1 * M2:
        raise ConsistencyError(f"R({M1},{M2}) has wrong discriminant")
    return EichlerOrder(algebra, order, M1, M2)


def make_order(M1, M2):
    return eichler_order(make_algebra(M1), M1, M2)


def unit_count(order_lattice):
    """Number of elements of reduced norm 1."""
    gram = gram_matrix(order_lattice.with_scale(1))
    return sum(1 for _, value in short_vectors(gram, 1) if value == 1)


def theta_signature(ideal, bound=THETA_SIGNATURE_BOUND):
    return tuple(theta_series(gram_matrix(ideal.normalized()), bound))


@dataclass
class IdealClassSet:
    """
    Representatives I_1 = R, ..., I_h of the right ideal classes of R, with
    e_i = |O_L(I_i)^x|.
    """

    order: EichlerOrder
    reps: List[QuatLattice]
    unit_orders: List[int]
    left_orders: List[QuatLattice] = field(default_factory=list)
    # Hecke modules per weight, built lazily by quaternion.brandt
    hecke_modules: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.left_orders:
            self.left_orders = [left_order(rep) for rep in self.reps]

    @property
    def h(self):
        return len(self.reps)

    def mass(self):
        return sum((Fraction(1, e) for e in self.unit_orders), Fraction(0))


def _find_class(ideal, reps, signatures):
    signature = theta_signature(ideal)
    for index, (rep, rep_signature) in enumerate(zip(reps, signatures)):
        if signature != rep_signature:
            continue
        if lattice_isometry(ideal, rep) is not None:
            return index
    return None


def neighbor_prime(level):
    p = 2
    while level % p == 0:
        p = nextprime(p)
    return p


def right_ideal_classes(order, use_mass_stop=True):
    """
    Breadth-first p-neighbour search from R. With use_mass_stop the search ends
    as soon as sum 1/e_i reaches the Eichler mass; otherwise the neighbour
    graph is exhausted and the mass is only checked at the end.
    """
    name = f"classes {order}"
    log(f"{name}: start")
    target = eichler_mass(order.M1, order.M2)
    p = neighbor_prime(order.level)
    R = order.lattice

    reps = [R]
    signatures = [theta_signature(R)]
    units = [unit_count(R)]
    mass = Fraction(1, units[0])
    queue = [R]
    while queue and not (use_mass_stop and mass == target):
        current = queue.pop(0)
        for candidate in neighbors(R, current, p):
            if _find_class(candidate, reps, signatures) is not None:
                continue
            reps.append(candidate)
            signatures.append(theta_signature(candidate))
            units.append(unit_count(left_order(candidate)))
            mass += Fraction(1, units[-1])
            queue.append(candidate)
            log(f"{name}: class {len(reps)} found, e = {units[-1]}, mass {mass}")
            if use_mass_stop and mass == target:
                break

    if mass != target:
        raise ConsistencyError(f"{name}: mass {mass} differs from Eichler mass {target}")

    # canonical order: R first, then by theta signature and basis
    rest = sorted(
        zip(signatures[1:], [rep.basis for rep in reps[1:]], reps[1:], units[1:]),
        key=lambda item: (item[0], item[1]),
    )
    reps = [R] + [item[2] for item in rest]
    units = [units[0]] + [item[3] for item in rest]
    log(f"{name}: done, h = {len(reps)}")
    return IdealClassSet(order, reps, units)


def ideal_transporter(classes, i, j):
    """
    I_ij = I_i * conj(I_j) / nrd(I_j) with its norm form divided by nrd(I_ij),
    so elements of value n are the gamma with nrd(gamma) = n * nrd(I_ij).
    Indices are 0-based.
    """
    I_i = classes.reps[i]
    I_j = classes.reps[j]
    product = lattice_product(I_i, I_j.conj()).scaled(1 / I_j.norm())
    return product.normalized()


def class_map(small, big, classes_small, classes_big):
    """
    For each class I_i of the smaller order, the index j of the class of
    I_i * R_big and gamma with gamma * rep_j = I_i * R_big.
    """
    if not big.lattice.contains_lattice(small.lattice):
        raise PreconditionError(f"{small} is not contained in {big}")
    if small.level % big.level:
        raise PreconditionError(f"level of {big} does not divide level of {small}")

    signatures = [theta_signature(rep) for rep in classes_big.reps]
    result = []
    for ideal in classes_small.reps:
        extended = lattice_product(ideal, big.lattice)
        signature = theta_signature(extended)
        for index, rep in enumerate(classes_big.reps):
            if signatures[index] != signature:
                continue
            gamma = lattice_isometry(extended, rep)
            if gamma is not None:
                result.append((index, gamma))
                break
        else:
            raise ConsistencyError(f"no class of {big} matches an ideal of {small}")
    return result


@lru_cache(maxsize=None)
def two_sided_ideal(order, p):
    """The two-sided ideal of norm p of an order whose level p divides."""
    R = order.lattice
    for J in neighbors(R, R, p):
        if all(J.contains(r * x) for r in R.elements() for x in J.elements()):
            return J
    raise ConsistencyError(f"no two-sided ideal of norm {p} in {order}")
