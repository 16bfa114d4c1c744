import os

from dotenv import load_dotenv

load_dotenv()

# Directory for cached artifacts (classes, brandt, eigenform, coeffs, report)
CACHE_DIR = os.getenv("TRIPLEL_CACHE", os.path.join(os.getcwd(), ".triplel_cache"))

# Bump when any on-disk payload format changes; stale entries get recomputed
CACHE_VERSION = 1

# Upper bound for worker threads used by enumeration and summation
THREADS = int(os.getenv("TRIPLEL_THREADS", "1"))

# Show tqdm progress bars on stderr
SHOW_PROGRESS = os.getenv("TRIPLEL_PROGRESS", "1") != "0"

# mpmath working precision (decimal digits)
MP_DPS = int(os.getenv("TRIPLEL_MP_DPS", "30"))

# Default relative precision for completed L-function values
DEFAULT_REL_PREC = 1e-8

# Default tolerance when comparing the central value formula against the AFE
DEFAULT_TOL = 1e-4

# Largest prime tried when separating Hecke eigenspaces
EIGEN_PRIME_LIMIT = 100

# Number of leading good primes used to match quaternionic forms to newforms
MATCH_PRIMES = 8

# Digits used when printing floats in reports
REPORT_DIGITS = 15
