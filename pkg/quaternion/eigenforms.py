"""
Simultaneous eigenforms of the Brandt matrices and Atkin-Lehner involutions,
their newform coefficients, and the weight-0 theta lift.
"""
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional

import mpmath
import sympy
from sympy import Matrix, Rational, factor_list, primefactors, primerange, symbols

import config
from cache.utils import log
from errors import ConsistencyError, PreconditionError
from lfun.newforms import (
    NewformData,
    bad_prime_coefficient,
    check_internal,
    extend_coefficients,
    sort_and_label,
    to_mpf,
)
from quaternion.algebra import make_algebra
from quaternion.brandt import (
    HeckeModule,
    atkin_lehner_involution,
    pullback_matrix,
)
from quaternion.orders import (
    EichlerOrder,
    IdealClassSet,
    class_map,
    eichler_order,
    right_ideal_classes,
)

T = symbols("t")

# Good primes used before any separation attempt
INITIAL_PRIMES = 3

# Relative size below which a float inner product counts as zero
ORTHOGONALITY_TOL = 1e-10


def _rational_matrix(rows):
    return Matrix([[Rational(x.numerator, x.denominator) for x in row] for row in rows])


def _simplify(value):
    if isinstance(value, sympy.Basic):
        return sympy.expand(sympy.radsimp(value))
    return value


def _is_zero(value, scale=1):
    if isinstance(value, sympy.Basic) and not value.free_symbols:
        if value.is_Number:
            return value == 0
        return sympy.simplify(value) == 0
    return abs(value) <= ORTHOGONALITY_TOL * max(1, abs(scale))


# Optional providers installed by the command line cache: "classes"(order)
# and "eigenforms"(classes, nu)
loaders = {}


def install_loaders(**providers):
    loaders.clear()
    loaders.update(providers)
    class_set.cache_clear()


@lru_cache(maxsize=None)
def class_set(order: EichlerOrder) -> IdealClassSet:
    loader = loaders.get("classes")
    return loader(order) if loader else right_ideal_classes(order)


def stored_eigenforms(classes, nu=0):
    """eigenforms() through the installed provider, if any."""
    loader = loaders.get("eigenforms")
    return loader(classes, nu) if loader else eigenforms(classes, nu)


class FormSpace:
    """
    Forms of weight nu on a class set: the stacked vectors whose class
    components are invariant under the left order units. `basis` has one
    column per basis form.
    """

    def __init__(self, classes, nu):
        self.classes = classes
        self.nu = nu
        self.module = HeckeModule.for_classes(classes, nu)
        dimension = self.module.dimension
        size = classes.h * dimension
        identity = self.module.matrix(1)
        columns = []
        for i in range(classes.h):
            projector = _rational_matrix(identity.block(i, i))
            for vector in projector.columnspace():
                column = sympy.zeros(size, 1)
                column[i * dimension : (i + 1) * dimension, 0] = vector
                columns.append(column)
        self.dimension = len(columns)
        if not columns:
            self.basis = sympy.zeros(size, 0)
            self._left_inverse = sympy.zeros(0, size)
        else:
            self.basis = Matrix.hstack(*columns)
            self._left_inverse = (self.basis.T * self.basis).inv() * self.basis.T
        self._al = {}
        self.inner = self.module.inner_product_matrix()

    def restrict(self, operator):
        return self._left_inverse * operator * self.basis

    def hecke(self, p):
        return self.restrict(self.module.matrix(p).to_matrix())

    def al_matrix(self, p):
        if p not in self._al:
            self._al[p] = atkin_lehner_involution(self.classes, p).to_matrix(self.module.basis)
        return self._al[p]

    def atkin_lehner(self, p):
        return self.restrict(self.al_matrix(p))


@dataclass
class QuatEigenform:
    order: EichlerOrder
    nu: int
    values: List[list]
    hecke_eigenvalues: Dict[int, object]
    al_eigenvalues: Dict[int, int]
    norm_sq: object
    exact: bool = True
    min_poly: Optional[str] = None
    essential: Dict[int, bool] = field(default_factory=dict)
    coordinates: Optional[list] = None

    @property
    def h(self):
        return len(self.values)

    @property
    def weight(self):
        return 2 + 2 * self.nu

    def stacked(self):
        return Matrix([x for vector in self.values for x in vector])

    def embedding(self):
        """Float values normalized to <phi, phi> = 1."""
        scale = mpmath.sqrt(to_mpf(self.norm_sq))
        return [[to_mpf(x) / scale for x in vector] for vector in self.values]

    @property
    def is_eisenstein(self):
        if self.nu:
            return False
        first = self.values[0][0]
        return all(_is_zero(vector[0] - first) for vector in self.values)

    @property
    def is_newform(self):
        return not self.is_eisenstein and all(self.essential.values())

    def pivot(self):
        """First (class, coordinate) with a nonzero value."""
        for i, vector in enumerate(self.values):
            for r, x in enumerate(vector):
                if not _is_zero(x):
                    return i, r
        raise ConsistencyError("eigenform is identically zero")


def _combination(operators, seed):
    rng = random.Random(seed)
    total = sympy.zeros(*operators[0].shape)
    for operator in operators:
        total += rng.randint(1, 97) * operator
    return total


def _separated_factors(combo):
    _, factors = factor_list(combo.charpoly(T).as_expr(), T)
    if any(multiplicity > 1 for _, multiplicity in factors):
        return None
    return [factor for factor, _ in factors]


def _eigenvectors(combo, factor):
    """(exact, vector) pairs spanning the eigenvectors for one factor."""
    degree = sympy.degree(factor, T)
    if degree == 1:
        value = sympy.solve(factor, T)[0]
        return [(True, v) for v in (combo - value * sympy.eye(combo.rows)).nullspace()]

    polynomial = sympy.Poly(factor, T)
    evaluated = sympy.zeros(*combo.shape)
    for (power,), coefficient in polynomial.terms():
        evaluated += coefficient * combo**power
    span = Matrix.hstack(*evaluated.nullspace())
    local = (span.T * span).inv() * span.T * combo * span

    if degree == 2:
        vectors = []
        for value in sympy.roots(polynomial, T):
            if local[0, 1] != 0:
                y = Matrix([local[0, 1], value - local[0, 0]])
            else:
                y = Matrix([value - local[1, 1], local[1, 0]])
            vectors.append((True, (span * y).applyfunc(sympy.expand)))
        return vectors

    floats = mpmath.matrix([[to_mpf(local[r, c]) for c in range(degree)] for r in range(degree)])
    _, right = mpmath.eig(floats)
    vectors = []
    for column in range(degree):
        y = [mpmath.re(right[r, column]) for r in range(degree)]
        vectors.append(
            (False, Matrix([sum(to_mpf(span[r, c]) * y[c] for c in range(degree)) for r in range(span.rows)]))
        )
    return vectors


def _eigenvalue(operator, y, pivot):
    image = operator * y
    if isinstance(y[pivot], sympy.Basic):
        return _simplify(image[pivot] / y[pivot])
    return to_mpf(image[pivot]) / to_mpf(y[pivot])


def _pivot(y):
    for index in range(y.rows):
        if not _is_zero(y[index]):
            return index
    raise ConsistencyError("zero eigenvector")


def good_primes(level, count, limit=None):
    limit = config.EIGEN_PRIME_LIMIT if limit is None else limit
    primes = [p for p in primerange(2, limit + 1) if level % p]
    return primes[:count]


def eigenforms(classes, nu=0, primes_used=None):
    """
    Simultaneous eigenbasis of the Brandt matrices at good primes and of the
    Atkin-Lehner involutions, tagged with essentiality at every p | M2.
    """
    order = classes.order
    name = f"eigenforms {order} nu={nu}"
    log(f"{name}: start")
    space = FormSpace(classes, nu)
    if space.dimension == 0:
        log(f"{name}: done, no forms")
        return []

    level_primes = primefactors(order.level) if order.level > 1 else []
    candidates = good_primes(order.level, 10**6)
    primes = list(primes_used) if primes_used else candidates[:INITIAL_PRIMES]
    if any(order.level % p == 0 for p in primes):
        raise PreconditionError(f"primes {primes} must be coprime to the level {order.level}")

    operators = {p: space.hecke(p) for p in primes}
    involutions = {q: space.atkin_lehner(q) for q in level_primes}
    factors = None
    while True:
        for seed in range(3):
            combo = _combination(list(operators.values()) + list(involutions.values()), seed)
            factors = _separated_factors(combo)
            if factors is not None:
                break
        if factors is not None:
            break
        remaining = [p for p in candidates if p not in operators]
        if not remaining:
            raise ConsistencyError(
                f"{name}: eigenspaces not separated by primes up to {config.EIGEN_PRIME_LIMIT}; needs more primes"
            )
        operators[remaining[0]] = space.hecke(remaining[0])
        log(f"{name}: adding prime {remaining[0]}")

    forms = []
    dimension = space.module.dimension
    for factor in factors:
        for exact, y in _eigenvectors(combo, factor):
            pivot = _pivot(y)
            hecke = {p: _eigenvalue(C, y, pivot) for p, C in operators.items()}
            al = {}
            for q, W in involutions.items():
                value = _eigenvalue(W, y, pivot)
                al[q] = 1 if to_mpf(value) > 0 else -1
            stacked = space.basis * y if exact else Matrix(
                [sum(to_mpf(space.basis[r, c]) * y[c] for c in range(y.rows)) for r in range(space.basis.rows)]
            )
            if exact:
                stacked = stacked.applyfunc(sympy.expand)
                norm_sq = _simplify((stacked.T * space.inner * stacked)[0, 0])
            else:
                norm_sq = sum(
                    to_mpf(stacked[r]) * to_mpf(space.inner[r, c]) * to_mpf(stacked[c])
                    for r in range(stacked.rows)
                    for c in range(stacked.rows)
                    if space.inner[r, c]
                )
            values = [
                [stacked[i * dimension + r] for r in range(dimension)] for i in range(classes.h)
            ]
            forms.append(
                QuatEigenform(
                    order,
                    nu,
                    values,
                    hecke,
                    al,
                    norm_sq,
                    exact=exact,
                    min_poly=None if exact else str(factor),
                    coordinates=list(y),
                )
            )

    for p in primefactors(order.M2) if order.M2 > 1 else []:
        _tag_essential(space, forms, p)
    log(f"{name}: done, {len(forms)} forms")
    return forms


def _old_space(space, p):
    """Columns spanning pullbacks from R(M1, M2/p) and their w_p images."""
    order = space.classes.order
    coarser = eichler_order(order.algebra, order.M1, order.M2 // p)
    coarse_classes = class_set(coarser)
    coarse_space = FormSpace(coarse_classes, space.nu)
    if coarse_space.dimension == 0:
        return None
    mapping = class_map(order, coarser, space.classes, coarse_classes)
    pulled = pullback_matrix(mapping, space.module.basis, coarse_classes.h) * coarse_space.basis
    return Matrix.hstack(pulled, space.al_matrix(p) * pulled)


def _tag_essential(space, forms, p):
    old = _old_space(space, p)
    for form in forms:
        if old is None:
            form.essential[p] = True
            continue
        phi = form.stacked()
        if form.exact:
            products = (old.T * space.inner * phi).applyfunc(_simplify)
            form.essential[p] = all(_is_zero(x) for x in products)
        else:
            scale = mpmath.sqrt(to_mpf(form.norm_sq))
            weighted = [to_mpf(x) for x in space.inner * phi]
            products = [
                sum(to_mpf(old[r, c]) * weighted[r] for r in range(old.rows))
                for c in range(old.cols)
            ]
            form.essential[p] = all(abs(x) <= ORTHOGONALITY_TOL * scale for x in products)


def hecke_eigenvalue(form, classes, p):
    """B(p) eigenvalue read off one row block."""
    module = HeckeModule.for_classes(classes, form.nu)
    i, r = form.pivot()
    total = 0
    for j, block in enumerate(module.row(i, p)):
        for c, entry in enumerate(block[r]):
            if not entry:
                continue
            if form.exact:
                total += Rational(entry.numerator, entry.denominator) * form.values[j][c]
            else:
                total += to_mpf(entry) * to_mpf(form.values[j][c])
    if form.exact:
        return _simplify(total / form.values[i][r])
    return total / to_mpf(form.values[i][r])


def newform_coeffs(form, classes, n_max):
    """NewformData of weight 2 + 2 nu attached to a cuspidal eigenform."""
    if form.is_eisenstein:
        raise PreconditionError("the constant form has no attached newform")
    order = form.order
    level = order.level
    k = form.weight
    module = HeckeModule.for_classes(classes, form.nu)
    i, _ = form.pivot()
    module.prepare(n_max, rows=[i])

    al_eigen = {}
    ap = {}
    for q in primefactors(level) if level > 1 else []:
        w = form.al_eigenvalues[q]
        al_eigen[q] = -w if order.M1 % q == 0 else w
        ap[q] = bad_prime_coefficient(al_eigen[q], q, k)
    for p in primerange(2, n_max + 1):
        if level % p:
            ap[p] = form.hecke_eigenvalues.get(p)
            if ap[p] is None:
                ap[p] = hecke_eigenvalue(form, classes, p)

    coeffs = extend_coefficients(ap, level, k, n_max)
    return check_internal(NewformData(level, k, coeffs, al_eigen))


def newforms(level, weight, n_max=50):
    """Newforms of squarefree level and even weight from the definite algebra at one prime."""
    if weight < 2 or weight % 2:
        raise PreconditionError(f"weight {weight} must be even and at least 2")
    if level < 2 or any(e > 1 for e in sympy.factorint(level).values()):
        raise PreconditionError(f"level {level} must be squarefree and greater than 1")
    M1 = min(primefactors(level))
    order = eichler_order(make_algebra(M1), M1, level // M1)
    classes = class_set(order)
    result = []
    for form in stored_eigenforms(classes, (weight - 2) // 2):
        if form.is_newform:
            result.append(newform_coeffs(form, classes, n_max))
    return sort_and_label(result)


def matching_eigenform(newform, order=None):
    """
    Essential eigenform on R(M1, N/M1) whose good-prime eigenvalues match a
    newform, M1 the smallest level prime unless an order is given.
    """
    level = newform.level
    if order is None:
        M1 = min(primefactors(level))
        order = eichler_order(make_algebra(M1), M1, level // M1)
    classes = class_set(order)
    primes = good_primes(level, config.MATCH_PRIMES)
    for form in stored_eigenforms(classes, (newform.weight - 2) // 2):
        if not form.is_newform:
            continue
        if all(
            abs(to_mpf(hecke_eigenvalue(form, classes, p)) - newform.numeric(p)) < 1e-6
            for p in primes
            if p <= newform.n_max
        ):
            return classes, form
    raise ConsistencyError(f"no essential eigenform on {order} matches {newform.label}")


def extend_newform(form, n_max):
    """The same newform with coefficients up to n_max, recomputed from its eigenform."""
    classes, quaternionic = matching_eigenform(form)
    extended = newform_coeffs(quaternionic, classes, n_max)
    extended.label = form.label
    for n in range(1, form.n_max + 1):
        known = form.numeric(n)
        if abs(to_mpf(extended.a(n)) - known) > 1e-6 * max(1, abs(known)):
            raise ConsistencyError(f"{form.label}: recomputed a({n}) disagrees")
    return extended


def newform_by_label(label, n_max=50):
    """Newform level.weight.index with coefficients up to n_max."""
    try:
        level, weight, index = (int(part) for part in label.split("."))
    except ValueError as err:
        raise PreconditionError(f"bad newform label '{label}', expected level.weight.index") from err
    forms = newforms(level, weight)
    if not 1 <= index <= len(forms):
        raise PreconditionError(
            f"{label}: level {level} weight {weight} has {len(forms)} newforms"
        )
    form = forms[index - 1]
    return extend_newform(form, n_max) if n_max > form.n_max else form


def yoshida_lift0(form, classes, q_prec):
    """
    q-expansion sum_ij phi(I_i) phi(I_j) / (e_i e_j) theta(I_ij), rescaled so
    the first nonzero coefficient of positive index is 1.
    """
    if form.nu != 0:
        raise PreconditionError("the theta lift is only defined for nu = 0")
    module = HeckeModule.for_classes(classes, 0)
    module.prepare(q_prec)
    values = [vector[0] for vector in form.values]
    units = classes.unit_orders
    coeffs = []
    for n in range(q_prec + 1):
        total = 0
        for i in range(classes.h):
            for j in range(classes.h):
                count = module.theta(i, j, q_prec)[n]
                if not count:
                    continue
                if form.exact:
                    total += Rational(count, units[i] * units[j]) * values[i] * values[j]
                else:
                    total += mpmath.mpf(count) / (units[i] * units[j]) * to_mpf(values[i]) * to_mpf(values[j])
        coeffs.append(_simplify(total))

    leading = next((c for c in coeffs[1:] if not _is_zero(c)), None)
    if leading is None:
        raise ConsistencyError("theta lift vanishes identically")
    scaled = [_simplify(c / leading) if form.exact else c / leading for c in coeffs]
    return [int(c) if form.exact and getattr(c, "is_Integer", False) else c for c in scaled]
