"""
Numerical evaluation of completed L-functions

    Lambda*(s) = Q^(s/2) prod_j Gamma_(R or C)(s + mu_j) sum_n b(n) n^(-s),
    Lambda*(s) = w Lambda*(R - s),

by the approximate functional equation split at x = A:

    Lambda*(s) = sum_n b(n) [A^s G_s(n A / sqrt Q) + w A^(s-R) G_(R-s)(n / (A sqrt Q))]

with G_s(t) = (1 / 2 pi i) int_(c) gamma(z) t^(-z) / (z - s) dz on a vertical
line to the right of every pole, evaluated with the trapezoid rule. The
result does not depend on A exactly when the functional equation holds,
which is what fe_residual measures.
"""
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import mpmath
import numpy as np
from sympy import factorint, primerange

import config
from cache.utils import log
from errors import PrecisionError

# Split points used when the functional equation is tested
FE_SPLITS = (mpmath.mpf(1), mpmath.mpf("1.15"))

# Block size (number of n) for the vectorised node sums
BLOCK_SIZE = 2048

# Hard cap on the truncation length
MAX_TERMS = 400000


def gamma_c(z):
    return (2 * mpmath.pi) ** (-z) * mpmath.gamma(z)


def gamma_r(z):
    return mpmath.pi ** (-z / 2) * mpmath.gamma(z / 2)


GAMMA_KINDS = {"C": gamma_c, "R": gamma_r}


def euler_coefficients(local_inverse, n_max, simplify=None):
    """
    b(0..n_max) of prod_p 1 / P_p(p^(-s)) with b(0) = 0, where
    local_inverse(p) gives the coefficients of P_p, constant term 1 first.
    """
    simplify = simplify or (lambda value: value)
    prime_powers = {}
    for p in primerange(2, n_max + 1):
        length, power = 0, p
        while power <= n_max:
            length, power = length + 1, power * p
        poly = local_inverse(p)
        series = [1]
        for l in range(1, length + 1):
            total = 0
            for m in range(1, min(l, len(poly) - 1) + 1):
                total += poly[m] * series[l - m]
            series.append(simplify(-total))
        prime_powers[p] = series

    coeffs = [0, 1]
    for n in range(2, n_max + 1):
        value = 1
        for p, exponent in factorint(n).items():
            value = value * prime_powers[p][exponent]
        coeffs.append(simplify(value))
    return coeffs


def _to_float(value):
    if hasattr(value, "evalf"):
        return float(value.evalf(20))
    return float(value)


@dataclass
class CompletedL:
    """
    Completed L-function data. `coefficients(n)` returns b(0..n) with b(0)
    unused; arrays are cached per truncation length.
    """

    coefficients: Callable[[int], list]
    gamma_factors: Tuple[Tuple[str, int], ...]
    conductor: int
    sign: int
    reflection: int
    coefficient_exponent: float
    label: str = ""
    _cache: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    _nodes: Dict[tuple, tuple] = field(default_factory=dict, repr=False)

    def gamma(self, s):
        value = mpmath.mpf(1)
        for kind, shift in self.gamma_factors:
            value *= GAMMA_KINDS[kind](s + shift)
        return value

    def _pole_edge(self):
        """Real part of the rightmost pole of the gamma product."""
        return -min(shift for _, shift in self.gamma_factors)

    def _coefficient_array(self, n_max):
        cached = [n for n in self._cache if n >= n_max]
        if cached:
            return self._cache[min(cached)][: n_max + 1]
        values = self.coefficients(n_max)
        array = np.array([0.0] + [_to_float(values[n]) for n in range(1, n_max + 1)])
        self._cache[n_max] = array
        return array

    def _node_weights(self, s, scale, eps):
        """
        Trapezoid nodes z_k and weights g_k for G_s. `scale` is the largest
        1/t the nodes will be used for; the step shrinks with it.
        """
        s = mpmath.mpc(s)
        key = (complex(s), float(scale), float(eps))
        if key in self._nodes:
            return self._nodes[key]
        c = max(s.real, self._pole_edge()) + 1
        distance = mpmath.mpf("0.5")
        h = 2 * mpmath.pi * distance / (mpmath.log(1 / eps) + distance * mpmath.log(max(scale, 1)) + 5)
        nodes = []
        weights = []
        peak = mpmath.mpf(0)
        for k in itertools.count():
            added = []
            for sign in (1,) if k == 0 else (1, -1):
                z = mpmath.mpc(c, sign * k * h)
                g = self.gamma(z) / (z - s) * h / (2 * mpmath.pi)
                nodes.append(complex(z))
                weights.append(complex(g))
                added.append(abs(g))
            peak = max(peak, max(added))
            if k * h > 1 and max(added) < eps * 1e-6 * peak:
                break
            if k > 100000:
                raise PrecisionError(f"{self.label}: gamma integrand does not decay at s = {s}")
        result = (np.array(nodes), np.array(weights))
        self._nodes[key] = result
        return result

    def incomplete(self, s, t, scale, eps=1e-20):
        """G_s at the positive reals t (numpy array)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        nodes, weights = self._node_weights(s, scale, eps)
        return np.exp(-np.outer(np.log(t), nodes)) @ weights

    def _sides(self, s, split):
        root = mpmath.sqrt(self.conductor)
        s = mpmath.mpc(s)
        return [
            (s, float(split / root), complex(split**s)),
            (self.reflection - s, float(1 / (split * root)), complex(self.sign * split ** (s - self.reflection))),
        ]

    def leading_scale(self, s, split=1):
        """Magnitude of the n = 1 terms, the reference for relative accuracy."""
        return sum(
            abs(factor * self.incomplete(side, [step], 1 / step)[0])
            for side, step, factor in self._sides(s, mpmath.mpf(split))
        )

    def terms_needed(self, s, rel_prec=None, split=1):
        """Truncation length bounding the tail (Ramanujan-size b(n)) below rel_prec."""
        rel_prec = config.DEFAULT_REL_PREC if rel_prec is None else rel_prec
        sides = self._sides(s, mpmath.mpf(split))
        scale = self.leading_scale(s, split)
        n = 16
        while True:
            growth = (2.0 * n) ** self.coefficient_exponent * (np.log(2.0 * n) + 1) ** 7
            tail = sum(
                n * growth * abs(factor * self.incomplete(side, [n * step], 1 / step)[0])
                for side, step, factor in sides
            )
            if tail < rel_prec * scale / 10:
                return n
            if n > MAX_TERMS:
                raise PrecisionError(
                    f"{self.label}: truncation at {n} terms only reaches relative {tail / scale:.3e}"
                )
            n *= 2

    def _check_quadrature(self, s, step, eps):
        coarse = self.incomplete(s, [step], 1 / step, eps)[0]
        fine = self.incomplete(s, [step], 1 / step, eps * 1e-6)[0]
        if abs(coarse - fine) > 1e-10 * max(abs(fine), 1e-300):
            raise PrecisionError(f"{self.label}: incomplete gamma quadrature unstable at s = {s}")

    def completed_star(self, s, rel_prec=None, split=1):
        """Lambda*(s) = Q^(s/2) Lambda(s) from the split at A = split."""
        rel_prec = config.DEFAULT_REL_PREC if rel_prec is None else rel_prec
        split = mpmath.mpf(split)
        n_max = self.terms_needed(s, rel_prec, split)
        eps = min(rel_prec * 1e-4, 1e-14)
        sides = self._sides(s, split)
        for side, step, _ in sides:
            self._check_quadrature(side, step, eps)
        b = self._coefficient_array(n_max)

        def block(start):
            stop = min(start + BLOCK_SIZE, n_max + 1)
            n = np.arange(start, stop, dtype=float)
            total = np.zeros(stop - start, dtype=complex)
            for side, step, factor in sides:
                total += factor * self.incomplete(side, n * step, 1 / step, eps)
            return complex(np.sum(b[start:stop] * total))

        starts = list(range(1, n_max + 1, BLOCK_SIZE))
        if config.THREADS > 1:
            with ThreadPoolExecutor(max_workers=config.THREADS) as executor:
                partial = list(executor.map(block, starts))
        else:
            partial = [block(start) for start in starts]
        # ascending n, independent of thread scheduling
        total = 0j
        for value in partial:
            total += value
        return mpmath.mpc(total)

    def lambda_value(self, s, rel_prec=None):
        """Lambda(s) = gamma(s) L(s)."""
        s = mpmath.mpc(s)
        return self.completed_star(s, rel_prec) * mpmath.mpf(self.conductor) ** (-s / 2)

    def direct_sum(self, s, n_terms):
        """gamma(s) sum_(n <= n_terms) b(n) n^(-s); meaningful where the series converges absolutely."""
        s = mpmath.mpc(s)
        b = self._coefficient_array(n_terms)
        total = mpmath.mpc(0)
        for n in range(1, n_terms + 1):
            if b[n]:
                total += b[n] * mpmath.power(n, -s)
        return self.gamma(s) * total


def fe_residual(L, offsets, rel_prec=None):
    """
    max over t of |Lambda*(c + t) - w Lambda*(c - t)| / max(|Lambda*(c + t)|, floor)
    at the center c = R/2, the two sides evaluated with different splits.
    Returns (worst, rows) with one (t, left, right, residual) row per offset.
    """
    center = mpmath.mpf(L.reflection) / 2
    first_split, second_split = FE_SPLITS
    worst = mpmath.mpf(0)
    rows = []
    for t in offsets:
        t = mpmath.mpc(t)
        left = L.completed_star(center + t, rel_prec, first_split)
        right = L.completed_star(center - t, rel_prec, second_split)
        floor = L.leading_scale(center + t) * 1e-3
        residual = abs(left - L.sign * right) / max(abs(left), floor)
        rows.append((t, left, right, residual))
        worst = max(worst, residual)
    return worst, rows


def fit_conductor(L_factory, candidates, offsets, rel_prec=None):
    """
    Diagnostic: FE residuals of alternative (conductor, sign) pairs, best
    first. `L_factory(conductor, sign)` builds the CompletedL to test.
    """
    results = []
    for conductor, sign in candidates:
        L = L_factory(conductor, sign)
        try:
            residual, _ = fe_residual(L, offsets, rel_prec)
        except PrecisionError as err:
            log(f"fit_conductor: {conductor}, {sign:+d} skipped:", err)
            continue
        results.append((float(residual), conductor, sign))
    results.sort()
    return results
