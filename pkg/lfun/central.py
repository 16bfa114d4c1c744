"""
Central critical value of a triple product L-function from the height
pairing of quaternionic eigenforms, cross-checked against the completed
L-function at the center.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Tuple

import mpmath
import sympy
from sympy import Rational, primefactors

import config
from cache.utils import format_float, format_rational, log
from errors import PreconditionError
from lfun.newforms import to_mpf
from lfun.petersson import petersson_norm
from lfun.triple import completed_l, gamma_factor, sign_and_conductor
from quaternion.algebra import make_algebra
from quaternion.brandt import HeckeModule, atkin_lehner_involution, pullback_matrix
from quaternion.eigenforms import class_set, matching_eigenform
from quaternion.harmonics import HarmonicBasis, trilinear_T0
from quaternion.orders import class_map, eichler_order

# |L(kappa)| below this fraction of the term scale counts as vanishing
ZERO_TOL = 1e-6


@dataclass(frozen=True)
class Decomposition:
    M1: int
    M2: int
    zero_reason: Optional[str] = None

    @property
    def is_zero(self):
        return self.zero_reason is not None


@dataclass
class HeightPairing:
    """sum_i T0(phi1(y_i), phi2(y_i), phi3(y_i)) / e_i before and after normalization."""

    raw_sum: object
    norms: Tuple[object, object, object]
    height_sq: object
    exact: bool

    @property
    def value_sq(self):
        return to_mpf(self.height_sq)


@dataclass
class CentralValueReport:
    label: str
    sign: int
    decomposition: Decomposition
    lambda_sets: Tuple[tuple, tuple, tuple] = ((), (), ())
    height: Optional[HeightPairing] = None
    constant: Tuple[Fraction, int] = (Fraction(0), 0)
    petersson: Tuple[mpmath.mpf, ...] = ()
    calibration_sq: mpmath.mpf = mpmath.mpf(1)
    calibrated: bool = False
    central_value: mpmath.mpf = mpmath.mpf(0)
    afe_value: mpmath.mpf = mpmath.mpf(0)
    scale: mpmath.mpf = mpmath.mpf(1)
    rel_diff: Optional[mpmath.mpf] = None
    passed: Optional[bool] = None
    findings: List[str] = field(default_factory=list)

    def fields(self):
        """(key, text) pairs in report order."""
        d = self.decomposition
        coefficient, pi_power = self.constant
        rows = [("triple", self.label), ("sign", f"{self.sign:+d}")]
        if d.is_zero:
            rows.append(("zero_certificate", d.zero_reason))
        else:
            rows += [
                ("M1", str(d.M1)),
                ("M2", str(d.M2)),
                ("lambda_sets", "; ".join(",".join(map(str, s)) or "-" for s in self.lambda_sets)),
                ("height_sum", _exact_text(self.height.raw_sum)),
                ("height_norms", " ".join(_exact_text(n) for n in self.height.norms)),
                ("height_sq", _exact_text(self.height.height_sq)),
                ("constant", f"{format_rational(coefficient)} * pi^{pi_power}"),
                ("petersson", " ".join(format_float(x) for x in self.petersson)),
                ("calibration_sq", format_float(self.calibration_sq)),
                ("calibrated", "yes" if self.calibrated else "no"),
            ]
        rows += [
            ("central_value", format_float(self.central_value)),
            ("afe_value", format_float(self.afe_value)),
            ("scale", format_float(self.scale)),
            ("rel_diff", "-" if self.rel_diff is None else format_float(self.rel_diff, 6)),
            ("passed", "-" if self.passed is None else ("yes" if self.passed else "no")),
        ]
        rows += [("finding", finding) for finding in self.findings]
        return rows

    def to_text(self):
        return "".join(f"{key}: {value}\n" for key, value in self.fields())

    def to_kv(self):
        return "".join(f"{key}={value}\n" for key, value in self.fields())


def _exact_text(value):
    if isinstance(value, (int, Fraction)):
        return format_rational(value)
    if isinstance(value, sympy.Basic):
        if value.is_Rational:
            return format_rational(Fraction(int(value.p), int(value.q)))
        if value.is_Float:
            return format_float(to_mpf(value))
        return sympy.sstr(value)
    return format_float(value)


def _simplify(value):
    if isinstance(value, sympy.Basic):
        return sympy.radsimp(sympy.expand(value))
    return value


def select_decomposition(triple):
    """
    M1 = product of the p | gcd where the three Atkin-Lehner signs multiply
    to -1; the value is certified zero unless M1 has an odd number of primes.
    """
    _, _, signs = sign_and_conductor(triple)
    if triple.G == 1:
        return Decomposition(1, triple.N, "no admissible definite algebra")
    M1 = 1
    for p in primefactors(triple.G):
        if signs[p] == -1:
            M1 *= p
    M2 = triple.N // M1
    if len(primefactors(M1)) % 2 == 0:
        return Decomposition(M1, M2, f"M1 = {M1} has an even number of prime divisors")
    return Decomposition(M1, M2)


def lambda_assignment(triple):
    """Primes dividing exactly one level go to the lowest-indexed other form."""
    sets = ([], [], [])
    for p in primefactors(triple.N):
        holders = [i for i, form in enumerate(triple.forms) if form.level % p == 0]
        if len(holders) == 1:
            sets[min(i for i in range(3) if i != holders[0])].append(p)
    return tuple(tuple(s) for s in sets)


def check_assignment(triple, assignment):
    """Every prime dividing exactly one level sits in one set other than its owner's."""
    seen = [p for s in assignment for p in s]
    for p in primefactors(triple.N):
        holders = [i for i, form in enumerate(triple.forms) if form.level % p == 0]
        if len(holders) != 1:
            if p in seen:
                raise PreconditionError(f"{p} divides more than one level and cannot be assigned")
            continue
        owners = [i for i, s in enumerate(assignment) if p in s]
        if len(owners) != 1 or owners[0] == holders[0]:
            raise PreconditionError(f"prime {p} needs exactly one set other than form {holders[0] + 1}")
    return assignment


@lru_cache(maxsize=None)
def _trilinear_tensor(algebra, nus):
    """Nonzero T0(b1, b2, b3) on basis polynomials of the three degrees."""
    bases = [HarmonicBasis(algebra, nu) for nu in nus]
    tensor = {}
    for a, P1 in enumerate(bases[0].polys):
        for b, P2 in enumerate(bases[1].polys):
            for c, P3 in enumerate(bases[2].polys):
                value = trilinear_T0(P1, P2, P3)
                if value:
                    tensor[(a, b, c)] = Rational(value.numerator, value.denominator)
    return tensor


def _level_vector(form, classes_own, classes_full, primes):
    """Pull a form back to the full-level classes and apply w_p for p in primes."""
    basis = HeckeModule.for_classes(classes_own, form.nu).basis
    mapping = class_map(classes_full.order, classes_own.order, classes_full, classes_own)
    vector = pullback_matrix(mapping, basis, classes_own.h) * form.stacked()
    for p in primes:
        vector = atkin_lehner_involution(classes_full, p).to_matrix(basis) * vector
    return vector


def height_pairing(triple, decomposition, assignment, unit_orders=None):
    """
    Height of the three essential eigenforms at R(M1, N/M1), each taken on
    its own order R(M1, N_k/M1) with <phi, phi> = 1.
    """
    if decomposition.is_zero:
        raise PreconditionError(f"no height for a certified zero: {decomposition.zero_reason}")
    check_assignment(triple, assignment)
    M1 = decomposition.M1
    algebra = make_algebra(M1)
    full = class_set(eichler_order(algebra, M1, decomposition.M2))
    units = list(unit_orders or full.unit_orders)
    log(f"height {triple.label}: {full.order}, h = {full.h}")

    vectors, norms, nus, exact = [], [], [], True
    for form, primes in zip(triple.forms, assignment):
        order = eichler_order(algebra, M1, form.level // M1)
        classes, phi = matching_eigenform(form, order)
        vectors.append(_level_vector(phi, classes, full, primes))
        norms.append(phi.norm_sq)
        nus.append(phi.nu)
        exact = exact and phi.exact

    tensor = _trilinear_tensor(algebra, tuple(nus))
    dims = [2 * nu + 1 for nu in nus]
    total = 0
    for i in range(full.h):
        parts = [vector[i * d : (i + 1) * d] for vector, d in zip(vectors, dims)]
        value = 0
        for (a, b, c), t in tensor.items():
            value += t * parts[0][a] * parts[1][b] * parts[2][c]
        total += Rational(1, units[i]) * value if exact else to_mpf(value) / units[i]
    total = _simplify(total)
    product = norms[0] * norms[1] * norms[2]
    if exact:
        height_sq = _simplify(total**2 / product)
    else:
        height_sq = to_mpf(total) ** 2 / to_mpf(product)
    return HeightPairing(total, tuple(norms), height_sq, exact)


def _rising(x, n):
    value = Fraction(1)
    for m in range(n):
        value *= x + m
    return value


def central_constant(profile, omega_gcd):
    """(rational coefficient, power of pi) in front of the height square."""
    a, a_prime, b = profile.a, profile.a_prime, profile.b
    coefficient = Fraction((-1) ** a_prime) * Fraction(2) ** (5 + 4 * a + 3 * b - omega_gcd)
    coefficient *= _rising(a_prime + 1, b)
    coefficient /= (
        _rising(2, a + b)
        * _rising(2, a_prime)
        * _rising(profile.nu2 + 1, a_prime)
        * _rising(profile.nu3 + 1, a_prime)
    )
    return coefficient, 5 + 9 * a_prime + 4 * b


def afe_central(triple, extender=None, rel_prec=None):
    """(L(kappa), scale) from the completed L-function; scale is the n = 1 term size."""
    L = completed_l(triple, extender)
    s = mpmath.mpf(triple.kappa)
    gamma = gamma_factor(triple, s)
    value = mpmath.re(L.lambda_value(s, rel_prec)) / gamma
    scale = L.leading_scale(s) * mpmath.mpf(L.conductor) ** (-s / 2) / abs(gamma)
    return value, scale


def central_value(triple, extender=None, calibration_sq=None, rel_prec=None, unit_orders=None):
    """
    CentralValueReport with the height formula value and the AFE value.
    Mixed weights use calibration_sq when given, otherwise calibrate on
    this triple.
    """
    name = f"central {triple.label}"
    log(f"{name}: start")
    w, _, _ = sign_and_conductor(triple)
    decomposition = select_decomposition(triple)
    afe, scale = afe_central(triple, extender, rel_prec)
    report = CentralValueReport(triple.label, w, decomposition, afe_value=afe, scale=scale)
    if decomposition.is_zero:
        log(f"{name}: zero certificate, {decomposition.zero_reason}")
        if abs(afe) >= ZERO_TOL * scale:
            report.findings.append(
                f"zero certificate but |L(kappa)| = {format_float(abs(afe))} exceeds {ZERO_TOL} of the scale"
            )
        log(f"{name}: done")
        return report

    report.lambda_sets = lambda_assignment(triple)
    report.height = height_pairing(triple, decomposition, report.lambda_sets, unit_orders)
    report.constant = central_constant(triple.profile, len(primefactors(triple.G)))
    report.petersson = tuple(petersson_norm(form, extender=extender).value for form in triple.forms)

    coefficient, pi_power = report.constant
    base = to_mpf(coefficient) * mpmath.pi**pi_power * report.height.value_sq
    for norm in report.petersson:
        base *= norm
    profile = triple.profile
    if profile.a == 0 and profile.b == 0:
        report.calibration_sq = mpmath.mpf(1)
    elif calibration_sq is not None:
        report.calibration_sq = mpmath.mpf(calibration_sq)
    elif base:
        report.calibration_sq = afe / base
        report.calibrated = True
    else:
        report.findings.append("height vanishes, calibration undetermined")
    report.central_value = base * report.calibration_sq

    if w == -1 and abs(report.central_value) >= ZERO_TOL * scale:
        report.findings.append("sign -1 forces L(kappa) = 0 but the height formula is nonzero")
    if report.central_value < 0:
        report.findings.append("height formula gives a negative central value")
    if report.calibrated and report.calibration_sq < 0:
        report.findings.append("calibration square is negative")
    log(f"{name}: done")
    return report


def verify_central(triple, rel_tol=None, report=None, **options):
    """
    Compare the height formula against L(kappa) from the completed
    L-function. Returns (passed, rel_diff, report); the report carries the
    discrepancy as a finding on failure.
    """
    rel_tol = config.DEFAULT_TOL if rel_tol is None else rel_tol
    report = report if report is not None else central_value(triple, **options)
    if report.decomposition.is_zero or report.height is not None and report.height.value_sq == 0:
        rel_diff = abs(report.afe_value) / report.scale
        passed = rel_diff < ZERO_TOL
    else:
        reference = max(abs(report.afe_value), ZERO_TOL * report.scale)
        rel_diff = abs(report.central_value - report.afe_value) / reference
        passed = rel_diff <= rel_tol
    report.rel_diff = rel_diff
    report.passed = passed
    if not passed:
        report.findings.append(
            f"discrepancy: formula {format_float(report.central_value)} vs AFE"
            f" {format_float(report.afe_value)}, relative {format_float(rel_diff, 6)} > {rel_tol}"
        )
    return passed, rel_diff, report
