"""
Petersson norms <f, f> = int_(Gamma_0(N) \\ H) |f(z)|^2 y^k dx dy / y^2 of
newforms of squarefree level, computed two independent ways.

Rankin-Selberg: unfolding |f|^2 y^k against the Eisenstein series of
Gamma_0(N) at infinity, whose residue at s = 1 is 1 / vol(Gamma_0(N) \\ H),
gives

    <f, f> = 2 N (k - 1)! / (pi (4 pi)^k) * L(Sym^2 f, k)

where L(Sym^2 f, s) has local factors (1 - a^2 X)(1 - a b X)(1 - b^2 X) at
good p (a, b the Satake roots, X = p^(-s)) and (1 - p^(k-2) X) at p | N,
conductor N^2, gamma factor Gamma_R(s - k + 2) Gamma_C(s) and sign +1.

Fundamental domain: the cosets Gamma_0(N) [[1, 0], [c, 1]] T^j, c | N and
0 <= j < N / c, tile Gamma_0(N) \\ H over the SL_2(Z) domain F. The
Atkin-Lehner element of Q = N / c carries [[1, 0], [c, 1]] to an upper
triangular matrix, and |f|^2 y^k is invariant under it, so

    <f, f> = int_F sum_(Q | N) sum_(j mod Q) |f((z + j) / Q)|^2 (y / Q)^k dx dy / y^2.

The part of F below y = 1 is integrated with Gauss-Legendre nodes, the
strip y >= 1 term by term with incomplete gamma functions.
"""
from dataclasses import dataclass

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss
from sympy import divisors

import config
from cache.utils import log
from errors import PrecisionError, PreconditionError
from lfun.completed import CompletedL, euler_coefficients

# Gauss-Legendre sizes (x, y) below y = 1; the second run checks the first
QUADRATURE_NODES = ((32, 16), (48, 24))

# q-series terms smaller than this (relative) are dropped
SERIES_EPS = 1e-18


@dataclass(frozen=True)
class PeterssonNorm:
    label: str
    value: mpmath.mpf
    rankin_selberg: mpmath.mpf
    quadrature: mpmath.mpf
    rel_diff: float


def _extended(form, n_max, extender):
    if form.n_max >= n_max:
        return form
    if extender is None:
        raise PreconditionError(
            f"{form.label} has coefficients up to {form.n_max}, {n_max} needed"
        )
    return extender(form, n_max)


def symmetric_square(form, extender=None):
    """CompletedL of Sym^2 f."""
    k = form.weight
    N = form.level
    state = {"form": form}

    def local_inverse(p):
        if N % p == 0:
            return (1, -float(p) ** (k - 2))
        a = float(state["form"].numeric(p))
        P = float(p) ** (k - 1)
        return (1, -(a * a - P), P * (a * a - P), -(P**3))

    def source(n_max):
        state["form"] = _extended(state["form"], n_max, extender)
        return euler_coefficients(local_inverse, n_max)

    return CompletedL(
        coefficients=source,
        gamma_factors=(("R", 2 - k), ("C", 0)),
        conductor=N * N,
        sign=1,
        reflection=2 * k - 1,
        coefficient_exponent=k - 1,
        label=f"Sym2 {form.label}",
    )


def rankin_selberg_norm(form, rel_prec=None, extender=None):
    rel_prec = config.DEFAULT_REL_PREC if rel_prec is None else rel_prec
    k = form.weight
    L = symmetric_square(form, extender)
    s = mpmath.mpf(k)
    value = mpmath.re(L.lambda_value(s, rel_prec * 1e-2) / L.gamma(s))
    constant = 2 * form.level * mpmath.factorial(k - 1) / (mpmath.pi * (4 * mpmath.pi) ** k)
    return constant * value


def _series_terms(min_imag, k):
    return int(np.ceil((np.log(1 / SERIES_EPS) + 2 * k) / (2 * np.pi * min_imag))) + 1


def _q_series(coefficients, tau):
    """sum_n a(n) e^(2 pi i n tau) over an array of tau."""
    n = np.arange(len(coefficients))
    return np.exp(2j * np.pi * np.outer(tau, n)) @ coefficients


def _lower_part(coefficients, level, k, nodes):
    """Integral over {|x| <= 1/2, sqrt(1 - x^2) <= y <= 1}."""
    x_count, y_count = nodes
    x_nodes, x_weights = leggauss(x_count)
    t_nodes, t_weights = leggauss(y_count)
    x = x_nodes / 2
    floor = np.sqrt(1 - x**2)
    height = 1 - floor
    y = floor[:, None] + height[:, None] * (t_nodes[None, :] + 1) / 2
    weights = (x_weights / 2)[:, None] * (height[:, None] / 2) * t_weights[None, :]
    z = (x[:, None] + 1j * y).ravel()
    y = y.ravel()
    weights = weights.ravel()

    total = 0.0
    for Q in divisors(level):
        for j in range(Q):
            values = _q_series(coefficients, (z + j) / Q)
            total += np.sum(weights * np.abs(values) ** 2 * (y / Q) ** k / y**2)
    return total


def _strip_part(form, level, k):
    """Integral over {|x| <= 1/2, y >= 1}, summed in closed form."""
    total = mpmath.mpf(0)
    for Q in divisors(level):
        n_max = int(np.ceil(Q * (np.log(1 / SERIES_EPS) + 2 * k) / (4 * np.pi))) + 1
        for n in range(1, n_max + 1):
            a = form.numeric(n)
            if a:
                x = 4 * mpmath.pi * n
                total += a * a * x ** (1 - k) * mpmath.gammainc(k - 1, x / Q)
    return total


def quadrature_norm(form, extender=None, nodes=QUADRATURE_NODES):
    k = form.weight
    level = form.level
    n_max = _series_terms(np.sqrt(3) / 2 / level, k)
    strip_terms = int(np.ceil(level * (np.log(1 / SERIES_EPS) + 2 * k) / (4 * np.pi))) + 1
    form = _extended(form, max(n_max, strip_terms), extender)
    coefficients = np.array([0.0] + [float(form.numeric(n)) for n in range(1, n_max + 1)])

    strip = _strip_part(form, level, k)
    results = [strip + mpmath.mpf(_lower_part(coefficients, level, k, size)) for size in nodes]
    coarse, fine = results[0], results[-1]
    if abs(coarse - fine) > 1e-10 * abs(fine):
        raise PrecisionError(
            f"{form.label}: fundamental domain quadrature not converged ({coarse} vs {fine})"
        )
    return fine


def petersson_norm(form, rel_prec=1e-6, extender=None):
    """
    <f, f> certified by agreement of the Rankin-Selberg and the fundamental
    domain values to rel_prec; PrecisionError otherwise.
    """
    log(f"petersson {form.label}: Rankin-Selberg")
    rs = rankin_selberg_norm(form, rel_prec * 1e-2, extender)
    log(f"petersson {form.label}: fundamental domain quadrature")
    quad = quadrature_norm(form, extender)
    rel_diff = float(abs(rs - quad) / abs(quad))
    if rel_diff > rel_prec:
        raise PrecisionError(
            f"{form.label}: Petersson methods disagree, Rankin-Selberg {rs} vs quadrature {quad}"
            f" (relative {rel_diff:.3e})"
        )
    return PeterssonNorm(form.label, rs, rs, quad, rel_diff)
