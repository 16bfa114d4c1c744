import os
import sys
import tempfile
from fractions import Fraction
from time import asctime

import mpmath
from tqdm import tqdm

import config


def log(*args):
    """
    Super simple logging function that prepends timestamps. Goes to stderr so
    that reports on stdout stay byte-for-byte reproducible.
    """
    print(asctime(), *args, file=sys.stderr)
    sys.stderr.flush()


def progress(iterable=None, total=None, desc=None):
    """
    tqdm progress bar on stderr, silenced when config.SHOW_PROGRESS is off.
    """
    return tqdm(
        iterable,
        total=total,
        desc=desc,
        file=sys.stderr,
        disable=not config.SHOW_PROGRESS,
        leave=False,
    )


def write_atomic(path, text):
    """
    Write text to path via a temp file in the same directory followed by a
    rename, so readers never observe a half-written file.
    """
    directory = os.path.dirname(path)
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except OSError:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def format_rational(value):
    """Exact `p/q` (or integer) text for a rational value."""
    if hasattr(value, "p") and hasattr(value, "q"):
        value = Fraction(int(value.p), int(value.q))
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text):
    return Fraction(text.strip())


def format_float(value, digits=None):
    """Fixed-precision float text used in every report."""
    if digits is None:
        digits = config.REPORT_DIGITS
    value = mpmath.mpmathify(value)
    if isinstance(value, mpmath.mpc):
        if value.imag == 0:
            value = value.real
        else:
            return f"{mpmath.nstr(value.real, digits)}{'+' if value.imag >= 0 else '-'}{mpmath.nstr(abs(value.imag), digits)}j"
    return mpmath.nstr(value, digits, min_fixed=-4, max_fixed=8)
