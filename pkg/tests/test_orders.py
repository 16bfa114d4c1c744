from fractions import Fraction

import pytest
from sympy import divisors, factorint, primefactors

from errors import PreconditionError
from quaternion.algebra import make_algebra
from quaternion.eigenforms import class_set
from quaternion.lattice import gram_matrix, lattice_isometry, short_vectors, theta_series
from quaternion.orders import (
    class_map,
    eichler_mass,
    eichler_order,
    ideal_transporter,
    make_order,
    reduced_discriminant,
    right_ideal_classes,
    two_sided_ideal,
    unit_count,
)


@pytest.mark.parametrize(
    "M1, M2, mass",
    [
        (2, 1, Fraction(1, 24)),
        (11, 1, Fraction(5, 12)),
        (2, 3, Fraction(1, 6)),
        (3, 5, Fraction(1, 2)),
    ],
)
def test_eichler_mass(M1, M2, mass):
    assert eichler_mass(M1, M2) == mass


def test_hurwitz_units():
    assert unit_count(make_order(2, 1).lattice) == 24


@pytest.mark.parametrize("M1, M2", [(2, 1), (11, 1), (2, 3), (3, 5)])
def test_eichler_order_discriminant(M1, M2):
    order = make_order(M1, M2)
    assert reduced_discriminant(order.lattice) == M1 * M2
    assert order.level == M1 * M2


def test_eichler_orders_are_nested():
    assert make_order(2, 1).lattice.contains_lattice(make_order(2, 3).lattice)


@pytest.mark.parametrize("M1, M2", [(2, 2), (2, 9)])
def test_eichler_order_rejects_bad_level(M1, M2):
    with pytest.raises(PreconditionError):
        make_order(M1, M2)


def test_class_number_two(classes_2):
    assert classes_2.h == 1
    assert classes_2.unit_orders == [24]
    assert classes_2.mass() == Fraction(1, 24)


def test_class_number_eleven(classes_11):
    assert classes_11.h == 2
    assert sorted(classes_11.unit_orders) == [4, 6]
    assert classes_11.mass() == Fraction(5, 12)
    assert classes_11.reps[0] == classes_11.order.lattice
    assert lattice_isometry(classes_11.reps[1], classes_11.reps[0]) is None


def test_exhaustive_search_agrees_with_mass_stop(classes_11):
    exhaustive = right_ideal_classes(make_order(11, 1), use_mass_stop=False)
    assert exhaustive.h == classes_11.h
    assert exhaustive.mass() == classes_11.mass()


def test_class_map_to_maximal_order(classes_2):
    small = make_order(2, 3)
    small_classes = class_set(small)
    mapping = class_map(small, make_order(2, 1), small_classes, classes_2)
    assert len(mapping) == small_classes.h
    assert all(index == 0 for index, _ in mapping)


def test_class_map_requires_containment():
    with pytest.raises(PreconditionError):
        class_map(make_order(2, 1), make_order(2, 3), class_set(make_order(2, 1)), class_set(make_order(2, 3)))


def test_two_sided_ideal_has_norm_p():
    order = make_order(11, 1)
    ideal = two_sided_ideal(order, 11)
    assert ideal.norm() == 11
    assert order.lattice.contains_lattice(ideal)


def test_eichler_order_needs_matching_algebra():
    with pytest.raises(PreconditionError):
        eichler_order(make_algebra(2), 11, 1)


def test_transporters_count_units(classes_11):
    for i in range(classes_11.h):
        for j in range(classes_11.h):
            gram = gram_matrix(ideal_transporter(classes_11, i, j))
            units = sum(1 for _, value in short_vectors(gram, 1) if value == 1)
            assert units == (classes_11.unit_orders[i] if i == j else 0)


@pytest.mark.parametrize("M1", [2, 3, 5, 7])
def test_exhaustive_search_reaches_mass(M1):
    classes = right_ideal_classes(make_order(M1, 1), use_mass_stop=False)
    assert classes.mass() == eichler_mass(M1, 1)


def _odd_discriminant_levels(limit):
    levels = []
    for N in range(2, limit + 1):
        factors = factorint(N)
        if any(e > 1 for e in factors.values()):
            continue
        for M1 in divisors(N):
            if len(primefactors(M1)) % 2:
                levels.append((M1, N // M1))
    return levels


@pytest.mark.slow
@pytest.mark.parametrize("M1, M2", _odd_discriminant_levels(50))
def test_class_sets_up_to_level_fifty(M1, M2):
    classes = right_ideal_classes(make_order(M1, M2))
    assert classes.mass() == eichler_mass(M1, M2)
    for a in range(classes.h):
        for b in range(classes.h):
            found = lattice_isometry(classes.reps[a], classes.reps[b])
            assert (found is not None) == (a == b)


def test_transporter_theta_is_symmetric(classes_11):
    for i in range(classes_11.h):
        for j in range(classes_11.h):
            forward = theta_series(gram_matrix(ideal_transporter(classes_11, i, j)), 20)
            backward = theta_series(gram_matrix(ideal_transporter(classes_11, j, i)), 20)
            assert forward == backward


@pytest.mark.slow
def test_class_maps_compose():
    orders = [make_order(11, 6), make_order(11, 3), make_order(11, 1)]
    classes = [class_set(order) for order in orders]
    to_middle = class_map(orders[0], orders[1], classes[0], classes[1])
    middle_to_top = class_map(orders[1], orders[2], classes[1], classes[2])
    direct = class_map(orders[0], orders[2], classes[0], classes[2])
    composed = [middle_to_top[index][0] for index, _ in to_middle]
    assert composed == [index for index, _ in direct]
    assert {index for index, _ in middle_to_top} == set(range(classes[2].h))
