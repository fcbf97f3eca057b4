"""Singular-endpoint quadrature and bracketed root finding.

The integrator is a double-exponential (tanh-sinh) rule with level doubling.
Endpoints can additionally be declared ``inverse_sqrt``, in which case the
half of the interval next to that endpoint is handled by a Gauss-Jacobi rule
with the 1/sqrt(distance) weight factored out analytically.  That route keeps
full double precision when the integrand's zero at the endpoint is itself
known only to roundoff (the typical situation when the endpoint is a computed
root): plain tanh-sinh saturates near sqrt(eps) absolute error there.

Integrands must accept numpy arrays.  Neither rule ever evaluates the
integrand at an endpoint.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.special import roots_jacobi

from .errors import BadBracket, DivergenceSuspected, NoBracket, NoConvergence

ENDPOINT_NONE = "none"
ENDPOINT_INVERSE_SQRT = "inverse_sqrt"
ENDPOINT_GENERAL = "general"

_ENDPOINT_CLASSES = {None, ENDPOINT_NONE, ENDPOINT_INVERSE_SQRT, ENDPOINT_GENERAL}


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_levels: int = 12
    endpoint_classes: tuple = (None, None)

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_levels < 4:
            raise ValueError("max_levels must be >= 4")
        left, right = self.endpoint_classes
        if left not in _ENDPOINT_CLASSES or right not in _ENDPOINT_CLASSES:
            raise ValueError(f"unknown endpoint class in {self.endpoint_classes!r}")


@dataclass(frozen=True)
class RootConfig:
    x_tol: float = 1e-12
    f_tol: float = 1e-9
    max_iter: int = 256

    def __post_init__(self):
        if not (self.x_tol > 0 and self.f_tol > 0 and self.max_iter > 0):
            raise ValueError("RootConfig fields must be positive")


class QuadResult(NamedTuple):
    value: float
    error: float


# ---------------------------------------------------------------------------
# tanh-sinh core
# ---------------------------------------------------------------------------

_BLOCK = 32          # nodes evaluated per vectorized chunk while extending tails
_T_CAP = 6.56        # |t| cap; offsets underflow long before this for any scale


def _ts_nodes(ts, half):
    """Offsets from the nearer endpoint and weights for tanh-sinh abscissas.

    Stable forms: 1 - tanh(u) = 2 e^{-2u}/(1+e^{-2u}) and
    sech^2(u) = 4 e^{-2u}/(1+e^{-2u})^2 with u = (pi/2) sinh(t) >= 0.
    """
    u = 0.5 * np.pi * np.sinh(ts)
    e = np.exp(-2.0 * u)
    offset = half * 2.0 * e / (1.0 + e)
    w = half * (0.5 * np.pi) * np.cosh(ts) * 4.0 * e / (1.0 + e) ** 2
    return offset, w


def _tanh_sinh(f, a, b, cfg: QuadConfig) -> QuadResult:
    if not b > a:
        raise ValueError("tanh-sinh requires a < b")
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)

    def eval_side(k_arr, h, right, tail_eps):
        """Contributions w*f at nodes k*h on one side.

        ``undecayed`` reports that the estimated tail beyond the last
        representable node is still above ``tail_eps``; the estimate is
        geometric in the last two node magnitudes, so the double-exponential
        decay of a convergent transform is recognised even when the node
        sequence hits the endpoint-collapse wall early.
        """
        total = 0.0
        t_prev = np.inf
        t_last = np.inf
        hit_wall = False
        clean_decay = False
        for start in range(0, len(k_arr), _BLOCK):
            ks = k_arr[start:start + _BLOCK]
            offs, ws = _ts_nodes(ks * h, half)
            x = b - offs if right else a + offs
            live = (x > a) & (x < b) & (offs > 0.0)
            blew_up = False
            if live.any():
                fx = np.zeros_like(x)
                with np.errstate(all="ignore"):
                    fx[live] = f(x[live])
                finite = np.isfinite(fx)
                if not finite.all():
                    # overflow/underflow wall: drop everything from the first
                    # bad node on and extrapolate the tail from what precedes
                    first_bad = int(np.nonzero(~finite)[0][0])
                    live = live & (np.arange(len(x)) < first_bad)
                    fx[first_bad:] = 0.0
                    blew_up = True
                terms = ws * fx
                terms[~live] = 0.0
                total += float(np.sum(terms))
                mags = np.abs(terms[live])
                if mags.size >= 2:
                    t_prev, t_last = float(mags[-2]), float(mags[-1])
                elif mags.size == 1:
                    t_prev, t_last = t_last, float(mags[-1])
            if blew_up or not live.all():
                hit_wall = True
                break
            if t_last <= tail_eps:
                clean_decay = True
                break
        if clean_decay:
            return total, t_last, False
        if t_last <= tail_eps:
            return total, t_last, False
        # wall or t-cap reached with a significant last term: extrapolate the
        # missing tail geometrically from the final ratio
        if not np.isfinite(t_prev) or t_prev <= 0.0 or t_last >= t_prev:
            return total, t_last, True
        q = t_last / t_prev
        tail_est = t_last * q / (1.0 - q)
        return total, t_last, tail_est > tail_eps

    value = 0.0
    prev = None
    growth_streak = 0
    undecayed_streak = 0
    err = np.inf

    for level in range(cfg.max_levels):
        h = 1.0 / 2 ** level
        n_cap = int(np.ceil(_T_CAP / h))
        if level == 0:
            ks = np.arange(1, n_cap + 1, dtype=float)
            _, w0 = _ts_nodes(np.array([0.0]), half)
            with np.errstate(all="ignore"):
                f0 = float(np.asarray(f(np.array([mid]))).ravel()[0]) if a < mid < b else 0.0
            if not np.isfinite(f0):
                f0 = 0.0
            base = w0[0] * f0
        else:
            ks = np.arange(1, n_cap + 1, dtype=float)[::2]  # odd multiples only
            base = 0.0

        # cap the scale so wall-dominated partial sums cannot self-license
        # arbitrarily large "negligible" tails
        scale = min(max(abs(value), abs(base), 1.0), 1e12)
        tail_eps = max(cfg.abs_tol, cfg.rel_tol * scale) * 1e-2

        s_r, last_r, und_r = eval_side(ks, h, right=True, tail_eps=tail_eps)
        s_l, last_l, und_l = eval_side(ks, h, right=False, tail_eps=tail_eps)
        new_sum = base + s_r + s_l

        if level == 0:
            value = h * new_sum
        else:
            value = 0.5 * value + h * new_sum

        if not np.isfinite(value) or abs(value) > 1e150:
            raise DivergenceSuspected(
                f"tanh-sinh partial sums blew up on [{a:.6g}, {b:.6g}]"
            )

        if und_r or und_l:
            undecayed_streak += 1
            if undecayed_streak >= 3:
                boundary = max(last_r if und_r else 0.0, last_l if und_l else 0.0)
                raise DivergenceSuspected(
                    f"integrand tail does not decay near an endpoint of "
                    f"[{a:.6g}, {b:.6g}]; boundary term {boundary:.3g}"
                )
        else:
            undecayed_streak = 0

        if prev is not None:
            if abs(value) > 1.5 * abs(prev) and abs(prev) > cfg.abs_tol:
                growth_streak += 1
                if growth_streak >= 3:
                    raise DivergenceSuspected(
                        f"partial sums grew by >1.5x over 3 levels on "
                        f"[{a:.6g}, {b:.6g}]"
                    )
            else:
                growth_streak = 0
            err = abs(value - prev)
            if not (und_r or und_l) and err <= max(cfg.abs_tol, cfg.rel_tol * abs(value)):
                return QuadResult(value, err)
        prev = value

    raise NoConvergence(
        f"tanh-sinh stalled at error {err:.3g} after {cfg.max_levels} levels "
        f"on [{a:.6g}, {b:.6g}]",
        value=value,
        error=err,
    )


# ---------------------------------------------------------------------------
# Gauss-Jacobi endpoint rule for inverse-square-root singularities
# ---------------------------------------------------------------------------

_GJ_ORDERS = (24, 40, 64, 96, 144, 216, 324, 486)


def _gauss_jacobi_endpoint(f, endpoint, c, right, cfg: QuadConfig) -> QuadResult:
    """Integral of f over the length-c interval touching ``endpoint``, where
    f(x) ~ g(x)/sqrt(|x - endpoint|) with g smooth.

    The weight is absorbed by Gauss-Jacobi nodes; the remaining factor
    f(x)*sqrt(d) is evaluated with the distance d taken from the node formula
    rather than by subtraction, so accuracy does not degrade when the
    integrand's root sits at the endpoint only to within roundoff.
    """
    prev = None
    value = 0.0
    err = np.inf
    diffs = []
    for n in _GJ_ORDERS:
        zeta, w = roots_jacobi(n, 0.0, -0.5)
        d = c * (1.0 + zeta) / 2.0
        x = endpoint - d if right else endpoint + d
        with np.errstate(all="ignore"):
            fx = f(x)
        fx = np.where(np.isfinite(fx), fx, 0.0)
        value = float(np.sqrt(c / 2.0) * np.sum(w * fx * np.sqrt(d)))
        if prev is not None:
            err = abs(value - prev)
            if err <= max(cfg.abs_tol, cfg.rel_tol * abs(value)):
                return QuadResult(value, err)
            diffs.append(err)
            # roundoff plateau: successive refinements stopped improving while
            # the discrepancy is already tiny relative to the value; accept
            # with the plateau as the honest error estimate
            if (len(diffs) >= 3 and diffs[-1] > 0.5 * diffs[-3]
                    and err <= 1e-6 * max(1.0, abs(value))):
                return QuadResult(value, err)
        prev = value
    raise NoConvergence(
        f"Gauss-Jacobi endpoint rule stalled at error {err:.3g} near "
        f"{endpoint:.6g}",
        value=value,
        error=err,
    )


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def integrate_singular(f: Callable, a: float, b: float,
                       cfg: Optional[QuadConfig] = None) -> QuadResult:
    """Integrate f over (a, b) allowing integrable endpoint singularities.

    ``cfg.endpoint_classes`` declares what is known about each endpoint:
    ``inverse_sqrt`` routes the adjacent piece through the Gauss-Jacobi rule,
    anything else uses pure tanh-sinh.  Raises NoConvergence when the error
    estimate stalls and DivergenceSuspected when the partial sums or endpoint
    tails indicate a non-integrable singularity.
    """
    cfg = cfg or QuadConfig()
    if not b > a:
        raise ValueError("integrate_singular requires a < b")
    left, right = cfg.endpoint_classes
    left_sq = left == ENDPOINT_INVERSE_SQRT
    right_sq = right == ENDPOINT_INVERSE_SQRT

    if not left_sq and not right_sq:
        return _tanh_sinh(f, a, b, cfg)

    pieces = []
    if left_sq and right_sq:
        c = (b - a) / 3.0
        pieces.append(_gauss_jacobi_endpoint(f, a, c, right=False, cfg=cfg))
        pieces.append(_tanh_sinh(f, a + c, b - c, cfg))
        pieces.append(_gauss_jacobi_endpoint(f, b, c, right=True, cfg=cfg))
    elif right_sq:
        c = (b - a) / 2.0
        pieces.append(_tanh_sinh(f, a, b - c, cfg))
        pieces.append(_gauss_jacobi_endpoint(f, b, c, right=True, cfg=cfg))
    else:
        c = (b - a) / 2.0
        pieces.append(_gauss_jacobi_endpoint(f, a, c, right=False, cfg=cfg))
        pieces.append(_tanh_sinh(f, a + c, b, cfg))
    return QuadResult(sum(p.value for p in pieces), sum(p.error for p in pieces))


def bisect_root(f: Callable[[float], float], lo: float, hi: float,
                cfg: Optional[RootConfig] = None) -> float:
    """Root of f on [lo, hi] by bisection; requires a sign change."""
    cfg = cfg or RootConfig()
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BadBracket(f"no sign change on [{lo:.6g}, {hi:.6g}]")
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= cfg.x_tol * max(1.0, abs(lo), abs(hi)):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_first_root_above(f: Callable[[float], float], s0: float,
                          cfg: Optional[RootConfig] = None,
                          _depth: int = 0) -> float:
    """Smallest root of f above s0, assuming f > 0 just right of s0.

    Brackets by geometric expansion (factor 2) with an interior sample mesh
    per step, then bisects.  After bisection, positivity of f is re-verified
    on a 64-point mesh of (s0, root); a violation restarts the search on the
    narrowed interval.  Raises NoBracket if no sign change appears before the
    overflow bound 1e300.
    """
    cfg = cfg or RootConfig()

    step = max(abs(s0), 1.0) * 1e-8
    probe = s0 + step
    tries = 0
    while f(probe) <= 0.0:
        step *= 0.25
        probe = s0 + step
        tries += 1
        if tries > 20 or probe <= s0:
            raise NoBracket(f"f is not positive just above s0={s0:.6g}")

    lo, flo = probe, f(probe)
    bracket = None
    while True:
        nxt = s0 + (lo - s0) * 2.0
        if nxt > 1e300:
            raise NoBracket(
                f"no sign change of f above s0={s0:.6g} before overflow bound"
            )
        mesh = np.linspace(lo, nxt, 10)[1:]
        vals = np.array([f(s) for s in mesh])
        neg = np.nonzero(~(vals > 0.0))[0]
        if neg.size:
            j = neg[0]
            left = lo if j == 0 else mesh[j - 1]
            bracket = (left, mesh[j])
            break
        lo = nxt

    root = _bisect_to_tolerance(f, bracket[0], bracket[1], cfg)

    check = np.linspace(s0, root, 66)[1:-1]
    bad = [s for s in check if not f(s) > 0.0]
    if bad and _depth < 3:
        return _first_root_within(f, s0, bad[0], cfg, _depth + 1)
    return root


def _first_root_within(f, s0, s_hi, cfg, depth):
    """Recovery path: an earlier sign change was detected at s_hi; search the
    narrowed interval (s0, s_hi] densely."""
    mesh = np.linspace(s0, s_hi, 130)[1:]
    vals = np.array([f(s) for s in mesh])
    neg = np.nonzero(~(vals > 0.0))[0]
    if not neg.size:
        raise NoBracket(f"inconsistent sign data below {s_hi:.6g}")
    j = neg[0]
    left = s0 + max(abs(s0), 1.0) * 1e-14 if j == 0 else mesh[j - 1]
    root = _bisect_to_tolerance(f, left, mesh[j], cfg)
    check = np.linspace(s0, root, 66)[1:-1]
    bad = [s for s in check if not f(s) > 0.0]
    if bad and depth < 3:
        return _first_root_within(f, s0, bad[0], cfg, depth + 1)
    return root


def _bisect_to_tolerance(f, lo, hi, cfg):
    """Bisection that narrows until BOTH the bracket width is below x_tol and
    |f| is below f_tol relative to the initial bracket magnitude."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    fscale = max(1.0, abs(flo), abs(fhi))
    mid = 0.5 * (lo + hi)
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
        narrow = hi - lo <= cfg.x_tol * max(1.0, abs(lo), abs(hi))
        if narrow and abs(fm) <= cfg.f_tol * fscale:
            return 0.5 * (lo + hi)
    return 0.5 * (lo + hi)
