"""
Newform coefficient data: Hecke recursion, Satake parameters, validation of
the Euler product relations, the eta-product oracle and the COEFFS v1 text
format shared with the command line.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict

import mpmath
import sympy
from sympy import factorint, isprime, primefactors, primerange

from errors import ConsistencyError, PreconditionError

COEFFS_HEADER = "COEFFS v1"

# Absolute slack for float comparisons of coefficient relations
RELATION_TOL = 1e-6


def to_mpf(value):
    """Float embedding of an exact or float coefficient."""
    if isinstance(value, sympy.Basic):
        return mpmath.mpf(str(sympy.N(value, mpmath.mp.dps + 5)))
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def is_exact(value):
    return isinstance(value, (int, Fraction, sympy.Basic))


def _mul(x, y):
    product = x * y
    if isinstance(product, sympy.Basic):
        return sympy.expand(product)
    return product


def _sub(x, y):
    difference = x - y
    if isinstance(difference, sympy.Basic):
        return sympy.expand(difference)
    return difference


def normalize_value(value):
    """Integers stay ints; integral sympy numbers become ints."""
    if isinstance(value, sympy.Basic) and value.is_Rational:
        if value.is_Integer:
            return int(value)
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


@dataclass
class NewformData:
    level: int
    weight: int
    coeffs: Dict[int, object]
    al_eigen: Dict[int, int] = field(default_factory=dict)
    label: str = ""

    @property
    def n_max(self):
        return max(self.coeffs)

    @property
    def exact(self):
        return all(is_exact(value) for value in self.coeffs.values())

    def a(self, n):
        if n not in self.coeffs:
            raise PreconditionError(
                f"coefficient a({n}) of {self.label or self.level} not available (n_max = {self.n_max})"
            )
        return self.coeffs[n]

    def numeric(self, n):
        return to_mpf(self.a(n))

    def epsilon(self, p):
        """Atkin-Lehner sign at p | level."""
        if p not in self.al_eigen:
            raise PreconditionError(f"no Atkin-Lehner sign at {p} for {self.label}")
        return self.al_eigen[p]


def bad_prime_coefficient(epsilon, p, weight):
    """a(p) = -eps_p p^(k/2 - 1) at p dividing a squarefree level."""
    return -epsilon * p ** (weight // 2 - 1)


def extend_coefficients(ap, level, weight, n_max):
    """
    All a(n), n <= n_max, from a(p): multiplicative, with
    a(p^(l+1)) = a(p) a(p^l) - p^(k-1) a(p^(l-1)) at good p and
    a(p^l) = a(p)^l at p | level.
    """
    prime_powers = {}
    for p in primerange(2, n_max + 1):
        if p not in ap:
            raise PreconditionError(f"a({p}) missing for level {level} weight {weight}")
        powers = [1, normalize_value(ap[p])]
        power = p * p
        while power <= n_max:
            if level % p == 0:
                value = _mul(powers[-1], powers[1])
            else:
                value = _sub(_mul(powers[1], powers[-1]), _mul(p ** (weight - 1), powers[-2]))
            powers.append(normalize_value(value))
            power *= p
        prime_powers[p] = powers

    coeffs = {1: 1}
    for n in range(2, n_max + 1):
        value = 1
        for p, exponent in factorint(n).items():
            value = _mul(value, prime_powers[p][exponent])
        coeffs[n] = normalize_value(value)
    return coeffs


def _close(x, y):
    if is_exact(x) and is_exact(y):
        difference = x - y
        if isinstance(difference, sympy.Basic):
            return sympy.simplify(difference) == 0
        return difference == 0
    return abs(to_mpf(x) - to_mpf(y)) <= RELATION_TOL * max(1, abs(to_mpf(y)))


def validate_newform(form, error=PreconditionError, ramanujan=True):
    """
    Check the Euler product relations of a NewformData and raise `error`
    naming the first failing relation.
    """
    coeffs = form.coeffs
    n_max = form.n_max
    k = form.weight
    if coeffs.get(1) != 1 and not _close(coeffs.get(1, 0), 1):
        raise error(f"{form.label}: a(1) = {coeffs.get(1)} is not 1")
    missing = [n for n in range(1, n_max + 1) if n not in coeffs]
    if missing:
        raise error(f"{form.label}: coefficient a({missing[0]}) missing")

    for p in primefactors(form.level) if form.level > 1 else []:
        if p not in form.al_eigen:
            raise error(f"{form.label}: missing AL line for level prime {p}")
        if form.al_eigen[p] not in (1, -1):
            raise error(f"{form.label}: AL sign at {p} must be +1 or -1")
        if p <= n_max and not _close(coeffs[p], bad_prime_coefficient(form.al_eigen[p], p, k)):
            raise error(
                f"{form.label}: a({p}) = {coeffs[p]} disagrees with AL sign {form.al_eigen[p]:+d}"
            )

    for p in primerange(2, n_max + 1):
        if form.level % p == 0:
            continue
        if ramanujan and abs(to_mpf(coeffs[p])) > 2 * mpmath.mpf(p) ** (mpmath.mpf(k - 1) / 2) + RELATION_TOL:
            raise error(f"{form.label}: |a({p})| exceeds the Ramanujan bound")
        power = p
        while power * p <= n_max:
            previous = 1 if power == p else coeffs[power // p]
            expected = coeffs[p] * coeffs[power] - p ** (k - 1) * previous
            if not _close(coeffs[power * p], expected):
                raise error(f"{form.label}: Hecke recursion fails at a({power * p})")
            power *= p

    for m in range(2, n_max + 1):
        for n in range(m + 1, n_max // m + 1):
            if gcd(m, n) == 1 and not _close(coeffs[m * n], coeffs[m] * coeffs[n]):
                raise error(f"{form.label}: a({m * n}) != a({m}) a({n})")
    return form


def satake(a_p, k, p):
    """
    Roots of X^2 - a_p X + p^(k-1), nonnegative imaginary part first, then
    larger real part.
    """
    a = to_mpf(a_p)
    norm = mpmath.mpf(p) ** (k - 1)
    root = mpmath.sqrt(mpmath.mpc(a * a - 4 * norm))
    roots = [(a + root) / 2, (a - root) / 2]
    roots.sort(key=lambda z: (-(z.imag >= 0), -z.real))
    return roots[0], roots[1]


def eta_product_expansion(exponents, n_max):
    """
    Coefficients c(0..n_max) of prod_m eta(m z)^(r_m) = sum c(n) q^n, for
    exponent maps with sum m r_m divisible by 24.
    """
    shift = sum(m * r for m, r in exponents.items())
    if shift % 24:
        raise PreconditionError(f"eta product {exponents} is not a q-series in integral powers")
    shift //= 24
    length = n_max - shift + 1
    if length <= 0:
        return [0] * (n_max + 1)
    series = [1] + [0] * (length - 1)
    for m, r in sorted(exponents.items()):
        for n in range(1, length):
            step = m * n
            if step >= length:
                break
            for _ in range(abs(r)):
                if r > 0:
                    for index in range(length - 1, step - 1, -1):
                        series[index] -= series[index - step]
                else:
                    for index in range(step, length):
                        series[index] += series[index - step]
    return [0] * shift + series


def _format_value(value):
    value = normalize_value(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return mpmath.nstr(to_mpf(value), 20, min_fixed=-30, max_fixed=30)


def _parse_value(text):
    if any(c in text for c in ".eE"):
        return mpmath.mpf(text)
    return normalize_value(Fraction(text))


def format_coeffs(form):
    lines = [f"{COEFFS_HEADER} level={form.level} weight={form.weight}"]
    for p in sorted(form.al_eigen):
        lines.append(f"AL {p} {form.al_eigen[p]:+d}")
    for n in sorted(form.coeffs):
        lines.append(f"{n} {_format_value(form.coeffs[n])}")
    return "\n".join(lines) + "\n"


def parse_coeffs(text, label=""):
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith(COEFFS_HEADER):
        raise PreconditionError(f"missing '{COEFFS_HEADER}' header")
    header = dict(part.split("=", 1) for part in lines[0].split()[2:] if "=" in part)
    try:
        level = int(header["level"])
        weight = int(header["weight"])
    except (KeyError, ValueError) as err:
        raise PreconditionError(f"bad COEFFS header '{lines[0]}'") from err

    coeffs = {}
    al_eigen = {}
    for line in lines[1:]:
        parts = line.split()
        try:
            if parts[0] == "AL":
                al_eigen[int(parts[1])] = int(parts[2])
            else:
                coeffs[int(parts[0])] = _parse_value(parts[1])
        except (IndexError, ValueError, ZeroDivisionError) as err:
            raise PreconditionError(f"bad COEFFS line '{line}'") from err
    if not coeffs:
        raise PreconditionError("COEFFS file has no coefficients")
    if any(not isprime(p) for p in al_eigen):
        raise PreconditionError("AL lines must name primes")
    return NewformData(level, weight, coeffs, al_eigen, label or f"{level}.{weight}.import")


def import_coeffs(path, label=""):
    """Read and validate a COEFFS v1 file."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return validate_newform(parse_coeffs(text, label))


def sort_and_label(forms, n_label=30):
    """Assign level.weight.index labels by lexicographic coefficient order."""
    def key(form):
        top = min(n_label, form.n_max)
        return tuple(float(form.numeric(n)) for n in range(1, top + 1))

    ordered = sorted(forms, key=key)
    for index, form in enumerate(ordered, start=1):
        form.label = f"{form.level}.{form.weight}.{index}"
    return ordered


def check_internal(form):
    """Sanity net for internally computed forms."""
    return validate_newform(form, error=ConsistencyError)
