"""Extended-real helpers with the conventions 1/0 = +inf and 1/inf = 0.

Plain IEEE floats already represent [0, +inf]; these helpers centralise the
division conventions and the fixed text formatting used in CSV/JSON output.
"""

import math

INF = math.inf


def recip(x: float) -> float:
    """1/x with 1/0 = +inf and 1/inf = 0."""
    if x == 0.0:
        return INF
    if math.isinf(x):
        return 0.0
    return 1.0 / x


def pi_over_sqrt_2x(x: float) -> float:
    """pi / sqrt(2 x) for x in [0, +inf], the mass bound built from a
    limit of Z/Phi'; follows the 1/0 = +inf convention."""
    if x == 0.0:
        return INF
    if math.isinf(x):
        return 0.0
    return math.pi / math.sqrt(2.0 * x)


def fmt(x: float) -> str:
    """Fixed 17-significant-digit text form; extended reals as 'inf'/'-inf',
    exact zero as '0'."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    return format(x, ".17g")
