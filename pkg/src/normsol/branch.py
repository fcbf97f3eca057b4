"""Global branch of even homoclinic profiles for -u'' + lam G'(u) = F'(u).

For every admissible lam > 0 the effective potential W_lam = lam*G - F has a
first positive zero m_lam with W_lam > 0 below it; the corresponding orbit
u_lam peaks at m_lam, obeys the equipartition relation u'^2 = 2 W_lam(u), and
carries the constraint mass

    rho_lam = sqrt(2) * int_0^{m_lam} K(u)/sqrt(W_lam(u)) du.

This module locates m_lam, evaluates rho_lam with full-precision treatment of
the inverse-square-root endpoint, traces (lam, m_lam, rho_lam) curves, inverts
the mass map, reconstructs profiles by the time map, and assembles the mass
windows implied by the asymptotics of rho_lam.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from .errors import (
    AllPointsDegenerate,
    DegenerateZero,
    DivergenceSuspected,
    InversionFailure,
    NoConvergence,
)
from .extreal import INF, fmt, pi_over_sqrt_2x
from .model import NonlinearityModel, asymptotic_limits, i_f, m_zero, w_lambda
from .quadrature import (
    ENDPOINT_INVERSE_SQRT,
    QuadConfig,
    RootConfig,
    bisect_root,
    find_first_root_above,
    integrate_singular,
)

_DEGENERACY_TOL = 1e-8
_M_ROOT_CFG = RootConfig(x_tol=1e-13, f_tol=1e-9, max_iter=256)


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    m_lambda: float
    rho_lambda: float
    quad_error: float


@dataclass
class BranchCurve:
    points: list
    model: NonlinearityModel
    monotone_m: bool
    degenerate_lams: list = field(default_factory=list)

    def to_csv(self, fh):
        fh.write("lambda,m_lambda,rho_lambda,quad_error\n")
        for p in self.points:
            fh.write(f"{fmt(p.lam)},{fmt(p.m_lambda)},{fmt(p.rho_lambda)},"
                     f"{fmt(p.quad_error)}\n")


@dataclass
class SolitonProfile:
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    lam: float
    peak: float
    half_support: float  # +inf for exponentially decaying profiles

    def to_csv(self, fh):
        fh.write("x,u,du_dx\n")
        for xi, ui, di in zip(self.x, self.u, self.du):
            fh.write(f"{fmt(xi)},{fmt(ui)},{fmt(di)}\n")


@dataclass(frozen=True)
class ExistenceWindow:
    intervals: list
    cases: list
    inputs: dict
    sampled_limits: bool


@dataclass
class MassSolveResult:
    rho: float
    solutions: list            # (lam, |rho_lam - rho|) pairs
    flat_curve: bool
    lambdas_sampled: np.ndarray
    rho_sampled: np.ndarray
    degenerate_lams: list
    message: str = ""


# ---------------------------------------------------------------------------
# peak amplitude and mass
# ---------------------------------------------------------------------------

def _polish_degenerate_location(w_prime_abs, root):
    """Golden-section minimum of |W'| near a suspected degenerate zero.

    The located zero of W itself is noise-limited (W vanishes to high order
    there, so its computed sign is roundoff near the touch point), but |W'|
    has a sharp V-shaped minimum whose position is recoverable to near
    machine precision.
    """
    delta = 1e-3 * max(abs(root), 1.0)
    a, b = root - delta, root + delta
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = w_prime_abs(c), w_prime_abs(d)
    for _ in range(120):
        if b - a <= 1e-13 * max(abs(root), 1.0):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = w_prime_abs(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = w_prime_abs(d)
    return 0.5 * (a + b)


def m_lambda(model: NonlinearityModel, lam: float,
             root_cfg: Optional[RootConfig] = None) -> float:
    """First zero of W_lam above the region where F <= 0.

    Verifies non-degeneracy of the zero: W'_lam(m_lam) must be negative and
    bounded away from 0 relative to the scale max(lam*G', |F'|) of the two
    cancelling slope terms, otherwise no homoclinic orbit exists there and
    DegenerateZero is raised with the located zero attached.  Suspect zeros
    are first re-located through the minimum of |W'|, which stays sharp where
    the sign of W itself drowns in roundoff.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    cfg = root_cfg or _M_ROOT_CFG

    def w(s):
        return float(lam * model.G(s) - model.F(s))

    def w_prime(s):
        return float(lam * model.G_prime(s) - model.F_prime(s))

    m0 = m_zero(model)
    root = find_first_root_above(w, m0, cfg)

    def slope_scale(s):
        return max(float(lam * model.G_prime(s)), abs(float(model.F_prime(s))),
                   1e-300)

    slope = w_prime(root)
    if abs(slope) <= 1e-3 * slope_scale(root) or slope > 0:
        loc = _polish_degenerate_location(lambda s: abs(w_prime(s)), root)
        polished = w_prime(loc)
        if abs(polished) <= _DEGENERACY_TOL * slope_scale(loc):
            raise DegenerateZero(lam, loc, polished)
        if slope > 0:
            # W' positive at the located first zero cannot happen for a
            # transversal crossing from positivity
            raise DegenerateZero(lam, root, slope)
    return root


def _mass_quad_config(quad_cfg: Optional[QuadConfig]) -> QuadConfig:
    # default relative tolerance sits above the accuracy floor of piecewise
    # C^2 potentials while analytic ones still converge to ~1e-11
    base = quad_cfg or QuadConfig(rel_tol=5e-9)
    return QuadConfig(abs_tol=base.abs_tol, rel_tol=base.rel_tol,
                      max_levels=base.max_levels,
                      endpoint_classes=(None, ENDPOINT_INVERSE_SQRT))


def rho_lambda(model: NonlinearityModel, lam: float,
               quad_cfg: Optional[QuadConfig] = None,
               root_cfg: Optional[RootConfig] = None) -> BranchPoint:
    """Constraint mass of the lam-profile together with its quadrature error."""
    m = m_lambda(model, lam, root_cfg)

    def integrand(u):
        return math.sqrt(2.0) * model.K(u) / np.sqrt(
            np.maximum(lam * model.G(u) - model.F(u), 0.0)
        )

    res = integrate_singular(integrand, 0.0, m, _mass_quad_config(quad_cfg))
    return BranchPoint(lam, m, res.value, res.error)


def trace_branch(model: NonlinearityModel, lambda_lo: float, lambda_hi: float,
                 n: int, quad_cfg: Optional[QuadConfig] = None) -> BranchCurve:
    """Sample the branch on n log-spaced multipliers in [lambda_lo, lambda_hi].

    Degenerate multipliers are skipped and recorded; the curve keeps a flag
    telling whether the sampled peak amplitudes were strictly increasing.
    """
    if not (0 < lambda_lo < lambda_hi) and not (lambda_lo == lambda_hi > 0):
        raise ValueError("need 0 < lambda_lo <= lambda_hi")
    if n < 1:
        raise ValueError("need n >= 1")
    lams = np.geomspace(lambda_lo, lambda_hi, n)
    points = []
    degenerate = []
    for lam in lams:
        try:
            points.append(rho_lambda(model, float(lam), quad_cfg))
        except DegenerateZero as exc:
            degenerate.append((float(lam), exc.location))
    if not points:
        raise AllPointsDegenerate(
            f"all {n} sampled multipliers have degenerate potentials",
            degenerate_lams=[lam for lam, _ in degenerate],
        )
    ms = np.array([p.m_lambda for p in points])
    monotone = bool(np.all(np.diff(ms) > 0)) if len(ms) > 1 else True
    return BranchCurve(points, model, monotone, degenerate)


def solve_mass(model: NonlinearityModel, rho: float, lambda_lo: float,
               lambda_hi: float, n: int = 33,
               root_cfg: Optional[RootConfig] = None,
               quad_cfg: Optional[QuadConfig] = None) -> MassSolveResult:
    """All multipliers in [lambda_lo, lambda_hi] whose branch mass equals rho.

    Samples rho_lam on a log grid, refines every bracketing pair by bisection
    and reports each root with its mass residual.  When the sampled curve is
    flat and already sits at rho (the constraint-critical situation) a
    FlatCurve marker is returned instead of an arbitrary multiplier.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    cfg = root_cfg or RootConfig(x_tol=1e-10, f_tol=1e-9)
    lams = np.geomspace(lambda_lo, lambda_hi, n)
    rhos = np.full(n, np.nan)
    degenerate = []
    for i, lam in enumerate(lams):
        try:
            rhos[i] = rho_lambda(model, float(lam), quad_cfg).rho_lambda
        except DegenerateZero:
            degenerate.append(float(lam))
    ok = np.isfinite(rhos)
    if not ok.any():
        raise AllPointsDegenerate("mass curve could not be sampled anywhere",
                                  degenerate_lams=degenerate)

    good_l, good_r = lams[ok], rhos[ok]
    spread = float(np.max(good_r) - np.min(good_r))
    if spread < cfg.f_tol and abs(float(np.mean(good_r)) - rho) < cfg.f_tol:
        return MassSolveResult(rho, [], True, lams, rhos, degenerate,
                               message="mass curve is flat at the target value")

    def g(lam):
        return rho_lambda(model, lam, quad_cfg).rho_lambda - rho

    solutions = []
    resid = good_r - rho
    for i in range(len(good_l) - 1):
        if resid[i] == 0.0:
            solutions.append((float(good_l[i]), 0.0))
            continue
        if resid[i] * resid[i + 1] < 0:
            lam_star = bisect_root(g, float(good_l[i]), float(good_l[i + 1]), cfg)
            solutions.append((lam_star, abs(g(lam_star))))
    if resid[-1] == 0.0:
        solutions.append((float(good_l[-1]), 0.0))

    msg = "" if solutions else (
        f"no bracket for rho={rho:.6g}; sampled mass range "
        f"[{np.min(good_r):.6g}, {np.max(good_r):.6g}]"
    )
    return MassSolveResult(rho, solutions, False, lams, rhos, degenerate, msg)


# ---------------------------------------------------------------------------
# existence windows
# ---------------------------------------------------------------------------

def existence_window(model: NonlinearityModel,
                     quad_cfg: Optional[QuadConfig] = None) -> ExistenceWindow:
    """Open mass intervals on which a branch solution is guaranteed.

    Each applicable case contributes one interval built from the asymptotic
    limits of Z/Phi' (via pi/sqrt(2 L)), the threshold integral I_F, and
    F'(m0); the 1/0 = inf convention applies to the endpoints.
    """
    lims = asymptotic_limits(model, quad_cfg)
    m0 = m_zero(model)
    IF = i_f(model, quad_cfg)
    fpm0 = float(model.F_prime(np.array([m0]))[0]) if m0 > 0 else None

    cases = []
    intervals = []
    if m0 == 0.0:
        if lims.L0 < lims.linf:
            cases.append("m0=0, L0 < linf")
            intervals.append((pi_over_sqrt_2x(lims.linf), pi_over_sqrt_2x(lims.L0)))
        if lims.Linf < lims.l0:
            cases.append("m0=0, Linf < l0")
            intervals.append((pi_over_sqrt_2x(lims.l0), pi_over_sqrt_2x(lims.Linf)))
    else:
        lo_bound = pi_over_sqrt_2x(lims.linf)
        hi_bound = pi_over_sqrt_2x(lims.Linf)
        if IF is not None and IF > lo_bound:
            cases.append("m0>0, IF > pi/sqrt(2*linf)")
            intervals.append((lo_bound, IF))
        if IF is not None and fpm0 != 0.0 and IF < hi_bound:
            cases.append("m0>0, F'(m0) != 0, IF < pi/sqrt(2*Linf)")
            intervals.append((IF, hi_bound))

    inputs = {
        "m0": m0,
        "i_f": IF,
        "f_prime_at_m0": fpm0,
        "L0": lims.L0, "l0": lims.l0,
        "Linf": lims.Linf, "linf": lims.linf,
    }
    return ExistenceWindow(intervals, cases, inputs,
                           sampled_limits=lims.provenance == "sampled")


# ---------------------------------------------------------------------------
# profile reconstruction via the time map
# ---------------------------------------------------------------------------

def _cumulative_time_map(model, lam, m, n_cheb, tail_ratio, u_floor_frac,
                         quad_cfg):
    """Node set (u decreasing from just below m), their x positions from the
    time map x(u) = int_u^m dv/sqrt(2 W), and du/dx at the nodes."""
    theta = np.arange(1, n_cheb) * np.pi / n_cheb
    u_cheb = m * (1.0 + np.cos(theta)) / 2.0
    n_tail = int(np.ceil(np.log(u_cheb[-1] / (m * u_floor_frac)) / np.log(tail_ratio)))
    u_tail = u_cheb[-1] * (1.0 / tail_ratio) ** np.arange(1, max(n_tail, 1) + 1)
    ug = np.concatenate([u_cheb, u_tail[u_tail > 0]])

    def speed_sq(u):
        return np.maximum(2.0 * (lam * model.G(u) - model.F(u)), 0.0)

    head = integrate_singular(
        lambda v: 1.0 / np.sqrt(speed_sq(v)), float(ug[0]), m,
        _mass_quad_config(quad_cfg),
    )

    xg_nodes, wg = roots_legendre(16)
    hi, lo = ug[:-1], ug[1:]
    mid = 0.5 * (hi + lo)[:, None] + 0.5 * (hi - lo)[:, None] * xg_nodes[None, :]
    with np.errstate(all="ignore"):
        vals = 1.0 / np.sqrt(speed_sq(mid))
    panel = 0.5 * (hi - lo) * np.sum(wg[None, :] * vals, axis=1)
    if not np.all(np.isfinite(panel)) or not np.all(panel > 0):
        raise InversionFailure(
            "time map is not strictly monotone: W_lambda <= 0 inside (0, m_lambda)"
        )

    xs = np.concatenate([[0.0], head.value + np.concatenate([[0.0], np.cumsum(panel)])])
    us = np.concatenate([[m], ug])
    slopes = np.concatenate([[0.0], -np.sqrt(speed_sq(ug))])
    return xs, us, slopes, head.error


def _hermite_inverse(xs, us, slopes, xq):
    """Evaluate the profile height at |x| values xq from node data with exact
    slopes (cubic Hermite per panel)."""
    idx = np.clip(np.searchsorted(xs, xq) - 1, 0, len(xs) - 2)
    x0, x1 = xs[idx], xs[idx + 1]
    hgap = x1 - x0
    t = np.clip((xq - x0) / hgap, 0.0, 1.0)
    h00 = (1 + 2 * t) * (1 - t) ** 2
    h10 = t * (1 - t) ** 2
    h01 = t * t * (3 - 2 * t)
    h11 = t * t * (t - 1)
    return (h00 * us[idx] + h10 * hgap * slopes[idx]
            + h01 * us[idx + 1] + h11 * hgap * slopes[idx + 1])


def _half_support(model, lam, u_last, x_last, quad_cfg):
    """Total half-width of the orbit: finite when the time map converges at 0."""
    if model.kind == "power_sum":
        if model.power_data.p >= 2.0:
            return INF
    base = quad_cfg or QuadConfig()
    probe = QuadConfig(abs_tol=base.abs_tol, rel_tol=base.rel_tol, max_levels=8)

    def integrand(v):
        return 1.0 / np.sqrt(np.maximum(2.0 * (lam * model.G(v) - model.F(v)), 0.0))

    try:
        tail = integrate_singular(integrand, 0.0, float(u_last), probe)
    except (DivergenceSuspected, NoConvergence):
        return INF
    return x_last + tail.value


def reconstruct_profile(model: NonlinearityModel, lam: float, n_nodes: int,
                        x_max: float, n_cheb: int = 600,
                        tail_ratio: float = 1.08, u_floor_frac: float = 1e-9,
                        quad_cfg: Optional[QuadConfig] = None) -> SolitonProfile:
    """Even profile on a uniform symmetric grid from the inverse time map.

    The height grid is Chebyshev-clustered at both the peak and 0, extended
    geometrically to u ~ 1e-9 * m_lambda; positions come from per-panel
    quadrature of 1/sqrt(2 W) with the peak-side inverse-sqrt endpoint handled
    by the Gauss-Jacobi rule.  Between nodes the profile is a cubic Hermite
    interpolant with the exact slopes -sqrt(2 W(u)); beyond the deepest node
    the tail continues exponentially (or is exactly 0 past a finite support).
    The slope samples stored on the output grid come from the equipartition
    relation, with sign -sign(x).
    """
    if n_nodes < 3:
        raise ValueError("n_nodes must be >= 3")
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    m = m_lambda(model, lam)
    xs, us, slopes, _ = _cumulative_time_map(
        model, lam, m, n_cheb, tail_ratio, u_floor_frac, quad_cfg
    )
    x_last, u_last = float(xs[-1]), float(us[-1])
    T = _half_support(model, lam, u_last, x_last, quad_cfg)

    xq = np.linspace(-x_max, x_max, n_nodes)
    ax = np.abs(xq)
    u = np.zeros_like(xq)
    inside = ax <= x_last
    u[inside] = _hermite_inverse(xs, us, slopes, ax[inside])
    outside = ~inside
    if math.isinf(T):
        speed = -slopes[-1]
        kappa = speed / u_last if u_last > 0 else 1.0
        with np.errstate(all="ignore"):
            decay = u_last * np.exp(-kappa * (ax[outside] - x_last))
        u[outside] = np.where(np.isfinite(decay), decay, 0.0)
    # else: support ends essentially at x_last (deepest node ~ 1e-9 * peak);
    # heights beyond stay exactly 0
    if not math.isinf(T):
        u[ax >= T] = 0.0
    u[np.abs(u) < 1e-300] = 0.0

    with np.errstate(all="ignore"):
        speed = np.sqrt(np.maximum(2.0 * (lam * model.G(u) - model.F(u)), 0.0))
    du = -np.sign(xq) * speed
    du[u == 0.0] = 0.0
    return SolitonProfile(xq, u, du, lam, m, T)
