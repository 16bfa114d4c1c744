"""
The triple product L-function of three newforms of squarefree levels: local
Euler factors, Dirichlet coefficients, gamma factor, sign and conductor.

Local inverse polynomials are computed as det(1 - X K) for an explicit
matrix K whose eigenvalues are the local roots, K built from companion
matrices of X^2 - a(p) X + p^(k-1). This keeps every factor exact whenever
the input coefficients are.
"""
from dataclasses import dataclass, field
from math import gcd, lcm
from typing import Dict, Tuple

import mpmath
import pandas as pd
import sympy
from sympy import Matrix, factorint, primefactors, symbols
from sympy.physics.quantum import TensorProduct

from errors import PreconditionError
from lfun.completed import CompletedL, euler_coefficients, gamma_c
from lfun.newforms import NewformData, normalize_value, to_mpf
from quaternion.harmonics import WeightProfile, weight_profile

CASE_DEGREES = {"IA": 3, "IB": 4, "IC": 4, "ID": 8}

_LAMBDA = symbols("lam")


@dataclass(frozen=True)
class LocalFactor:
    p: int
    inv_poly: Tuple[object, ...]
    case_tag: str

    @property
    def degree(self):
        return len(self.inv_poly) - 1

    def roots(self):
        """Reciprocal roots of the inverse polynomial (the local parameters)."""
        # 1 + c1 X + ... + cd X^d = det(1 - X K); the c_i read downwards give charpoly(K)
        return mpmath.polyroots([to_mpf(c) for c in self.inv_poly], maxsteps=200, extraprec=60)


@dataclass
class TripleL:
    forms: Tuple[NewformData, NewformData, NewformData]
    N: int
    G: int
    profile: WeightProfile
    factors: Dict[int, LocalFactor] = field(default_factory=dict)

    @property
    def weights(self):
        return tuple(form.weight for form in self.forms)

    @property
    def kappa(self):
        return sum(self.weights) // 2 - 1

    @property
    def label(self):
        return ",".join(form.label for form in self.forms)

    def level_count(self, p):
        return sum(1 for form in self.forms if form.level % p == 0)

    def factor(self, p):
        if p not in self.factors:
            self.factors[p] = local_factor(p, self)
        return self.factors[p]


def _is_squarefree(n):
    return n >= 1 and all(e == 1 for e in factorint(n).values())


def make_triple(*forms):
    """Triple with forms sorted by weight k1 >= k2 >= k3 (stable otherwise)."""
    if len(forms) != 3:
        raise PreconditionError("a triple needs exactly three newforms")
    ordered = tuple(sorted(forms, key=lambda form: -form.weight))
    profile = weight_profile(*(form.weight for form in ordered))
    for form in ordered:
        if not _is_squarefree(form.level):
            raise PreconditionError(f"level {form.level} of {form.label} is not squarefree")
    N = lcm(*(form.level for form in ordered))
    G = gcd(*(form.level for form in ordered))
    if N == 1:
        raise PreconditionError("the triple has level 1")
    return TripleL(ordered, N, G, profile)


def _companion(a_p, k, p):
    """Matrix with characteristic polynomial X^2 - a_p X + p^(k-1)."""
    return Matrix([[0, -(p ** (k - 1))], [1, a_p]])


def _inverse_polynomial(K):
    """Coefficients of det(1 - X K), constant term first."""
    coefficients = K.charpoly(_LAMBDA).all_coeffs()
    return tuple(normalize_value(sympy.expand(c)) for c in coefficients)


def _sympify(value):
    if isinstance(value, mpmath.mpf):
        return sympy.Float(str(value), mpmath.mp.dps)
    return sympy.sympify(value)


def local_factor(p, triple):
    if triple.N % (p * p) == 0:
        raise PreconditionError(f"{p}^2 divides the level {triple.N}")
    forms = triple.forms
    a = [_sympify(form.a(p)) for form in forms]
    inside = [index for index, form in enumerate(forms) if form.level % p == 0]
    outside = [index for index, form in enumerate(forms) if form.level % p]

    def companion(index):
        return _companion(a[index], forms[index].weight, p)

    if len(inside) == 3:
        c = a[0] * a[1] * a[2]
        K = sympy.diag(c, c * p, c * p)
        tag = "IA"
    elif len(inside) == 2:
        d = a[inside[0]] * a[inside[1]]
        K = TensorProduct(companion(outside[0]), sympy.diag(d, d * p))
        tag = "IB"
    elif len(inside) == 1:
        K = a[inside[0]] * TensorProduct(companion(outside[0]), companion(outside[1]))
        tag = "IC"
    else:
        K = TensorProduct(companion(0), TensorProduct(companion(1), companion(2)))
        tag = "ID"
    inv_poly = _inverse_polynomial(Matrix(K))
    if inv_poly[0] != 1 or len(inv_poly) - 1 != CASE_DEGREES[tag]:
        raise PreconditionError(f"local factor at {p} has unexpected shape {inv_poly}")
    return LocalFactor(p, inv_poly, tag)


def dirichlet_coeffs(triple, n_max):
    """b(1..n_max) as a list indexed from 1 (entry 0 unused)."""
    return euler_coefficients(lambda p: triple.factor(p).inv_poly, n_max, simplify=_expand)


def _expand(value):
    if isinstance(value, sympy.Basic):
        return normalize_value(sympy.expand(value))
    return value


def gamma_poles(triple, s):
    """Arguments of the four Gamma_C factors that sit at a pole."""
    k1, k2, k3 = triple.weights
    arguments = [s, s + 1 - k1, s + 1 - k2, s + 1 - k3]
    poles = []
    for argument in arguments:
        z = mpmath.mpc(argument)
        if abs(z.imag) < 1e-12 and abs(z.real - round(z.real)) < 1e-12 and round(z.real) <= 0:
            poles.append(argument)
    return poles


def gamma_factor(triple, s):
    poles = gamma_poles(triple, s)
    if poles:
        raise PreconditionError(f"gamma factor has a pole at s = {s} (arguments {poles})")
    k1, k2, k3 = triple.weights
    return gamma_c(s) * gamma_c(s + 1 - k1) * gamma_c(s + 1 - k2) * gamma_c(s + 1 - k3)


def sign_and_conductor(triple):
    """(w, Q, {p: eps_p}) with eps_p the product of the AL signs at p."""
    table = {}
    for p in primefactors(triple.N):
        sign = 1
        for form in triple.forms:
            if form.level % p == 0:
                sign *= form.epsilon(p)
        table[p] = sign
    w = -1
    for sign in table.values():
        w *= sign
    return w, triple.N**4 * triple.G, table


def factor_table(triple, primes=None):
    """pandas table of local factors, one row per prime."""
    primes = primes if primes is not None else primefactors(triple.N)
    rows = []
    for p in primes:
        factor = triple.factor(p)
        rows.append(
            {
                "p": p,
                "case": factor.case_tag,
                "degree": factor.degree,
                "inv_poly": " ".join(str(c) for c in factor.inv_poly),
            }
        )
    return pd.DataFrame(rows, columns=["p", "case", "degree", "inv_poly"])


def ramanujan_exponent(triple):
    """(k1 + k2 + k3 - 3) / 2, the size exponent of the local roots."""
    return mpmath.mpf(sum(triple.weights) - 3) / 2


def local_roots_balanced(factor, triple, tol=1e-10):
    exponent = ramanujan_exponent(triple)
    return all(
        abs(abs(root) * mpmath.mpf(factor.p) ** (-exponent) - 1) < tol for root in factor.roots()
    )


def ensure_coefficients(triple, n_max, extender=None):
    """Replace forms whose coefficients stop before n_max by extender(form, n_max)."""
    forms = []
    for form in triple.forms:
        if form.n_max < n_max:
            if extender is None:
                raise PreconditionError(
                    f"{form.label} has coefficients up to {form.n_max}, {n_max} needed"
                )
            form = extender(form, n_max)
        forms.append(form)
    triple.forms = tuple(forms)
    return triple


def completed_l(triple, extender=None, conductor=None, sign=None):
    """
    CompletedL of the triple product. conductor and sign default to
    N^4 gcd and w; overriding them is for the conductor diagnostics.
    """
    w, Q, _ = sign_and_conductor(triple)
    k1, k2, k3 = triple.weights

    def source(n_max):
        ensure_coefficients(triple, n_max, extender)
        return dirichlet_coeffs(triple, n_max)

    return CompletedL(
        coefficients=source,
        gamma_factors=(("C", 0), ("C", 1 - k1), ("C", 1 - k2), ("C", 1 - k3)),
        conductor=Q if conductor is None else conductor,
        sign=w if sign is None else sign,
        reflection=k1 + k2 + k3 - 2,
        coefficient_exponent=float(ramanujan_exponent(triple)),
        label=triple.label,
    )


def conductor_candidates(triple):
    """(N^e G^f, sign) alternatives tried by the FE diagnostics."""
    w, _, _ = sign_and_conductor(triple)
    candidates = []
    for e in range(3, 6):
        for f in range(0, 3):
            for sign in (w, -w):
                candidates.append((triple.N**e * triple.G**f, sign))
    return candidates
