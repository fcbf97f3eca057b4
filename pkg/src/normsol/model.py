"""The nonlinearity triple (F, G, K) and every scalar quantity derived from it.

Two tiers share one interface.  Power-sum models (G = s^p/p, K = s^q,
F = sum_i c_i s^{r_i}) carry their exponent data, so effective potentials,
asymptotic limits and growth conditions are evaluated exactly from exponent
arithmetic.  Generic models wrap black-box callables; limits are then sampled
on geometric grids and flagged as such.

All callables are vectorized over numpy arrays.  Power-sum nonlinearities are
extended evenly to s < 0 (F(s) = F(|s|)), which keeps F and H = F's - 2F in
C^1 whenever every exponent exceeds 1.
"""

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DivergentNearZero, ModelError, NoFiniteMZero
from .extreal import INF
from .quadrature import (
    ENDPOINT_GENERAL,
    ENDPOINT_INVERSE_SQRT,
    QuadConfig,
    RootConfig,
    bisect_root,
    integrate_singular,
)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PowerSumData:
    p: float                                  # G(s) = s^p / p
    q: float                                  # K(s) = s^q
    terms: tuple                              # ((c_1, r_1), ...) for F


class NonlinearityModel:
    """Container for (F, G, K) with first derivatives of F and G.

    Use :meth:`power_sum` or :meth:`generic` instead of the bare constructor.
    """

    def __init__(self, F, F_prime, G, G_prime, K, kind, power_data=None, name=""):
        self.F = F
        self.F_prime = F_prime
        self.G = G
        self.G_prime = G_prime
        self.K = K
        self.kind = kind
        self.power_data = power_data
        self.name = name
        self._m0 = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def power_sum(cls, p: float, q: float, terms, name: str = "") -> "NonlinearityModel":
        """Model with G = s^p/p, K = s^q, F = sum c_i |s|^{r_i} (even extension).

        Requires p > 1, q > max(p/2 - 1, 0); every exponent r_i > 1 so that
        F'(0) = 0; the leading coefficient positive and the trailing exponent
        above p so that F/G -> 0 at 0 and F/G -> +inf at infinity.
        """
        if not p > 1:
            raise ModelError(f"need p > 1, got p={p}")
        if not q > max(p / 2 - 1, 0.0):
            raise ModelError(f"need q > max(p/2 - 1, 0) = {max(p/2-1, 0.0)}, got q={q}")
        terms = tuple((float(c), float(r)) for c, r in terms if c != 0.0)
        if not terms:
            raise ModelError("F must have at least one nonzero term")
        if any(r <= 1 for _, r in terms):
            raise ModelError("every exponent of F must exceed 1 (F'(0) = 0)")
        terms = tuple(sorted(terms, key=lambda t: t[1]))
        c_lead, r_lead = terms[-1]
        _, r_trail = terms[0]
        if c_lead <= 0:
            raise ModelError("leading coefficient of F must be positive (F/G -> +inf)")
        if not r_lead > p:
            raise ModelError(f"leading exponent {r_lead} must exceed p={p}")
        if not r_trail > p:
            raise ModelError(f"trailing exponent {r_trail} must exceed p={p} (F/G -> 0 at 0)")

        def F(s):
            a = np.abs(s)
            return sum(c * a ** r for c, r in terms)

        def F_prime(s):
            a = np.abs(s)
            return np.sign(s) * sum(c * r * a ** (r - 1) for c, r in terms)

        def G(s):
            return np.abs(s) ** p / p

        def G_prime(s):
            return np.sign(s) * np.abs(s) ** (p - 1)

        def K(s):
            return np.abs(s) ** q

        return cls(F, F_prime, G, G_prime, K, "power_sum",
                   PowerSumData(float(p), float(q), terms), name)

    @classmethod
    def generic(cls, F, F_prime, G, G_prime, K, name: str = "") -> "NonlinearityModel":
        """Model from black-box callables; basic sign structure is verified."""
        for fname, fn in (("F", F), ("G", G), ("F'", F_prime), ("G'", G_prime)):
            v = float(np.asarray(fn(np.array([0.0]))).ravel()[0])
            if abs(v) > 1e-12:
                raise ModelError(f"{fname}(0) = {v:.3g}, expected 0")
        probe = np.geomspace(1e-6, 1e3, 40)
        if not np.all(np.asarray(G_prime(probe)) > 0):
            raise ModelError("G'(s) must be positive for s > 0")
        kv = np.asarray(K(probe))
        if not np.all(kv > 0):
            raise ModelError("K(s) must be positive for s > 0")
        return cls(F, F_prime, G, G_prime, K, "generic", None, name)

    def __repr__(self):
        tag = self.name or self.kind
        return f"NonlinearityModel({tag})"


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------

def w_lambda(model: NonlinearityModel, lam: float, s):
    """Effective potential lambda*G(s) - F(s)."""
    return lam * model.G(s) - model.F(s)


def m_zero(model: NonlinearityModel) -> float:
    """Largest t with F <= 0 on [0, t]; 0 when F > 0 immediately right of 0.

    Located as the first entry of F into positive values on a geometric scan
    up to 1e6, refined by bisection to 1e-12 relative accuracy.
    """
    if model._m0 is not None:
        return model._m0
    if model.kind == "power_sum":
        c_trail = model.power_data.terms[0][0]
        if c_trail > 0:
            model._m0 = 0.0
            return 0.0
    grid = np.geomspace(1e-8, 1e6, 800)
    vals = np.asarray(model.F(grid))
    pos = np.nonzero(vals > 0)[0]
    if not pos.size:
        raise NoFiniteMZero("F stays non-positive on the scanned range (0, 1e6]")
    j = pos[0]
    if j == 0:
        # F > 0 at the smallest sample: decide by the limit at 0
        model._m0 = 0.0
        return 0.0
    root = bisect_root(lambda s: float(model.F(np.array([s]))[0]),
                       grid[j - 1], grid[j], RootConfig(x_tol=1e-13))
    model._m0 = root
    return root


def z(model: NonlinearityModel, s):
    """(F/G)'(s); exact power-sum reduction p (F'(s)s - pF(s)) / s^{p+1}."""
    if model.kind == "power_sum":
        p = model.power_data.p
        return p * (model.F_prime(s) * s - p * model.F(s)) / s ** (p + 1)
    Fv, Gv = model.F(s), model.G(s)
    return (model.F_prime(s) * Gv - Fv * model.G_prime(s)) / Gv ** 2


def _phi_sqrt_int(model, t, quad_cfg):
    """int_0^t K/sqrt(G); diverging probes raise DivergentNearZero."""
    from .errors import DivergenceSuspected

    f = lambda u: model.K(u) / np.sqrt(model.G(u))
    try:
        res = integrate_singular(f, 0.0, t, quad_cfg or QuadConfig())
    except DivergenceSuspected as exc:
        raise DivergentNearZero(
            "integral of K/sqrt(G) appears to diverge near 0"
        ) from exc
    return res.value


def big_phi(model: NonlinearityModel, t: float, quad_cfg: Optional[QuadConfig] = None) -> float:
    """Phi(t) = (int_0^t K/sqrt(G))^2, exact in the power-sum tier."""
    if model.kind == "power_sum":
        p, q = model.power_data.p, model.power_data.q
        e = q - p / 2 + 1
        return p * t ** (2 * q - p + 2) / e ** 2
    return _phi_sqrt_int(model, t, quad_cfg) ** 2


def big_phi_prime(model: NonlinearityModel, t: float,
                  quad_cfg: Optional[QuadConfig] = None) -> float:
    """Phi'(t) = 2 sqrt(Phi(t)) * K(t)/sqrt(G(t))."""
    if model.kind == "power_sum":
        p, q = model.power_data.p, model.power_data.q
        e = q - p / 2 + 1
        return 2 * p * t ** (2 * q - p + 1) / e
    root = _phi_sqrt_int(model, t, quad_cfg)
    return 2.0 * root * float(model.K(np.array([t]))[0] / np.sqrt(model.G(np.array([t]))[0]))


@dataclass(frozen=True)
class AsymptoticLimits:
    """The four limits of Z/Phi' at 0+ and +infinity, as elements of [0, inf].

    ``L0``/``Linf`` are the upper limits, ``l0``/``linf`` the lower ones.
    Diverging limits are recorded as +inf; negative finite limits (possible
    only when m0 > 0, where the 0-side limits never enter a mass window) are
    clamped to 0.
    """
    L0: float
    l0: float
    Linf: float
    linf: float
    provenance: str  # "exact" | "sampled"

    def __post_init__(self):
        if self.l0 > self.L0 or self.linf > self.Linf:
            raise ValueError("lower limits must not exceed upper limits")


def _exact_limit(terms, p, q, at_zero):
    """Limit of Z/Phi' from the dominant exponent of F's - pF."""
    reduced = [(c * (r - p), r) for c, r in terms if c * (r - p) != 0.0]
    if not reduced:
        return 0.0
    coeff, r = min(reduced, key=lambda t: t[1]) if at_zero else max(reduced, key=lambda t: t[1])
    e = q - p / 2 + 1
    a = 0.5 * e * coeff
    d = r - (2 * q + 2)
    diverges = d < 0 if at_zero else d > 0
    vanishes = d > 0 if at_zero else d < 0
    if diverges:
        return INF
    if vanishes:
        return 0.0
    return max(a, 0.0)


def asymptotic_limits(model: NonlinearityModel,
                      quad_cfg: Optional[QuadConfig] = None,
                      n_samples: int = 200) -> AsymptoticLimits:
    """Upper/lower limits of Z/Phi' at 0+ and at +infinity.

    Power-sum tier: exact from exponent analysis (all four collapse to true
    limits).  Generic tier: sup/inf over geometric sample grids on
    [1e-8, 1e-3] and [1e3, 1e8], flagged provenance="sampled".
    """
    if model.kind == "power_sum":
        d = model.power_data
        v0 = _exact_limit(d.terms, d.p, d.q, at_zero=True)
        vinf = _exact_limit(d.terms, d.p, d.q, at_zero=False)
        return AsymptoticLimits(v0, v0, vinf, vinf, "exact")

    def ratio_on(grid):
        base = _phi_sqrt_int(model, grid[0], quad_cfg)
        from scipy.special import roots_legendre

        xg, wg = roots_legendre(16)
        a, b = grid[:-1], grid[1:]
        midp = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * xg[None, :]
        panel = 0.5 * (b - a) * np.sum(
            wg[None, :] * np.asarray(model.K(midp)) / np.sqrt(np.asarray(model.G(midp))),
            axis=1,
        )
        sqrt_phi = base + np.concatenate([[0.0], np.cumsum(panel)])
        phi_prime = 2.0 * sqrt_phi * np.asarray(model.K(grid)) / np.sqrt(np.asarray(model.G(grid)))
        zs = np.asarray(z(model, grid))
        return zs / phi_prime

    lo = ratio_on(np.geomspace(1e-8, 1e-3, n_samples))
    hi = ratio_on(np.geomspace(1e3, 1e8, n_samples))

    def pack(vals):
        # magnitudes beyond 1e100 count as divergence (+inf); negative finite
        # values are clamped into the codomain [0, inf]
        out = []
        for v in (np.max(vals), np.min(vals)):
            v = float(v)
            if not np.isfinite(v) or abs(v) > 1e100:
                v = INF
            out.append(max(v, 0.0))
        return max(out), min(out)

    L0, l0 = pack(lo)
    Linf, linf = pack(hi)
    return AsymptoticLimits(L0, l0, Linf, linf, "sampled")


def i_f(model: NonlinearityModel,
        quad_cfg: Optional[QuadConfig] = None) -> Optional[float]:
    """sqrt(2) * int_0^{m0} K/sqrt(|F|); None when m0 = 0, +inf when divergent."""
    m0 = m_zero(model)
    if m0 == 0.0:
        return None
    slope = abs(float(np.asarray(model.F_prime(np.array([m0]))).ravel()[0]))
    fscale = max(abs(float(np.asarray(model.F(np.array([m0 / 2]))).ravel()[0])), 1e-30)
    degenerate_endpoint = slope <= 1e-10 * max(1.0, fscale / max(m0, 1e-30))

    if model.kind == "power_sum":
        q = model.power_data.q
        r_trail = model.power_data.terms[0][1]
        if not q - r_trail / 2 > -1.0:
            return INF
        if degenerate_endpoint:
            return INF

    f = lambda u: math.sqrt(2.0) * model.K(u) / np.sqrt(np.maximum(-model.F(u), 0.0))
    classes = (None, ENDPOINT_INVERSE_SQRT) if not degenerate_endpoint else (None, ENDPOINT_GENERAL)
    base = quad_cfg or QuadConfig()
    cfg = QuadConfig(abs_tol=base.abs_tol, rel_tol=base.rel_tol,
                     max_levels=base.max_levels, endpoint_classes=classes)
    from .errors import DivergenceSuspected, NoConvergence

    try:
        return integrate_singular(f, 0.0, m0, cfg).value
    except DivergenceSuspected:
        return INF
    except NoConvergence:
        if degenerate_endpoint:
            return INF
        raise


def h(model: NonlinearityModel, s):
    """H(s) = F'(s) s - 2 F(s)."""
    return model.F_prime(s) * s - 2.0 * model.F(s)


def h_prime(model: NonlinearityModel, s):
    """H'(s); exact in the power-sum tier, central difference otherwise."""
    if model.kind == "power_sum":
        a = np.abs(s)
        return np.sign(s) * sum(
            c * (r - 2.0) * r * a ** (r - 1)
            for c, r in model.power_data.terms
        )
    step = _EPS ** (1.0 / 3.0) * np.maximum(1.0, np.abs(s))
    return (h(model, s + step) - h(model, s - step)) / (2.0 * step)


# ---------------------------------------------------------------------------
# structural growth conditions for the variational solvers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    """Growth-condition audit of F at derivative order m and mass rho.

    ``eta`` is the upper limit of H(s)/|s|^{2+4m} at 0, ``sigma`` the upper
    limit of F(s)/|s|^{2+4m} at infinity; booleans are exact for power sums
    and sampled otherwise.
    """
    m: int
    rho: float
    gn_c: float
    critical_exponent: float
    eta: float
    sigma: float
    provenance: str
    small_s_regular_ok: bool        # |F'| + |H'| = O(|s|) near 0
    supercritical_growth_ok: bool   # F(s)/|s|^{2+4m} -> +inf at infinity
    h_scaling_ok: bool              # H'(s) s >= (2+4m) H(s) everywhere
    f_between_ok: bool              # 0 <= 4m F(s) <= H(s) everywhere
    strict_scaling_ok: bool         # h_scaling with strict inequality near 0
    subcritical_origin_ok: bool     # F/s^2 -> 0 and F/|s|^{2+4m} -> +inf at 0
    mass_condition_super: bool      # eta * gn_c * rho^{2m} < 2m
    mass_condition_sub: bool        # 2 * sigma * gn_c * rho^{2m} < 1


def _power_limit(terms, expo, at_zero):
    """Limit of sum c_i |s|^{r_i} / |s|^expo at 0 or infinity (signed)."""
    if not terms:
        return 0.0
    c, r = min(terms, key=lambda t: t[1]) if at_zero else max(terms, key=lambda t: t[1])
    d = r - expo
    diverges = d < 0 if at_zero else d > 0
    vanishes = d > 0 if at_zero else d < 0
    if diverges:
        return math.copysign(INF, c)
    if vanishes:
        return 0.0
    return c


def check_structural_conditions(model: NonlinearityModel, m: int, rho: float,
                                gn_c: float) -> ConditionReport:
    """Audit the growth conditions used by the constrained minimizers.

    ``gn_c`` is an estimate of the sharp interpolation constant raised to the
    critical power (the quantity produced by ``gn_constant``).
    """
    beta = 2.0 + 4.0 * m
    exact = model.kind == "power_sum"

    if exact:
        terms = model.power_data.terms
        h_terms = [(c * (r - 2.0), r) for c, r in terms if c * (r - 2.0) != 0.0]
        eta = _power_limit(h_terms, beta, at_zero=True)
        sigma = _power_limit(terms, beta, at_zero=False)
        c_t, r_t = terms[0]
        hr_t = min((r for cc, r in h_terms), default=INF)
        small_s_ok = r_t >= 2.0 and hr_t >= 2.0
        super_ok = sigma == INF
        sub_origin_ok = (_power_limit(terms, 2.0, at_zero=True) == 0.0
                         and _power_limit(terms, beta, at_zero=True) == INF)
    else:
        s_small = np.geomspace(1e-8, 1e-2, 60)
        s_big = np.geomspace(1e2, 1e8, 60)
        eta = float(np.max(h(model, s_small) / s_small ** beta))
        sigma = float(np.max(model.F(s_big) / s_big ** beta))
        if sigma > 1e50:
            sigma = INF
        if eta > 1e50:
            eta = INF
        ratio = (np.abs(model.F_prime(s_small)) + np.abs(h_prime(model, s_small))) / s_small
        small_s_ok = bool(np.max(ratio) <= 10.0 * max(1.0, ratio[-1]))
        grow = model.F(s_big) / s_big ** beta
        super_ok = bool(grow[-1] > 1e3 * max(grow[0], 1e-30)) or sigma == INF
        r_quad = model.F(s_small) / s_small ** 2
        r_crit = model.F(s_small) / s_small ** beta
        sub_origin_ok = bool(abs(r_quad[0]) < 1e-6 * max(1.0, abs(r_quad[-1]))) and bool(
            r_crit[0] > 1e3 * max(r_crit[-1], 1e-30)
        )

    grid = np.concatenate([-np.geomspace(1e-6, 1e3, 240)[::-1],
                           np.geomspace(1e-6, 1e3, 240)])
    Hs = np.asarray(h(model, grid))
    Hps = np.asarray(h_prime(model, grid)) * grid
    Fs = np.asarray(model.F(grid))
    scale = np.abs(Hps) + beta * np.abs(Hs) + 1e-300
    gap = Hps - beta * Hs
    h_scaling_ok = bool(np.all(gap >= -1e-9 * scale))
    f_between_ok = bool(np.all(4.0 * m * Fs >= -1e-12 * (np.abs(Hs) + 1e-300))
                        and np.all(4.0 * m * Fs <= Hs + 1e-9 * scale))
    near0 = np.abs(grid) <= 1e-2
    strict_ok = h_scaling_ok and bool(np.all(gap[near0] > 1e-9 * scale[near0]))

    rho2m = rho ** (2 * m)
    mass_super = eta * gn_c * rho2m < 2.0 * m
    mass_sub = (sigma == 0.0) or (2.0 * sigma * gn_c * rho2m < 1.0)

    return ConditionReport(
        m=m, rho=rho, gn_c=gn_c, critical_exponent=beta,
        eta=eta if eta != -INF else 0.0, sigma=sigma,
        provenance="exact" if exact else "sampled",
        small_s_regular_ok=small_s_ok,
        supercritical_growth_ok=super_ok,
        h_scaling_ok=h_scaling_ok,
        f_between_ok=f_between_ok,
        strict_scaling_ok=strict_ok,
        subcritical_origin_ok=sub_origin_ok,
        mass_condition_super=bool(mass_super),
        mass_condition_sub=bool(mass_sub),
    )


# ---------------------------------------------------------------------------
# model files and builtins
# ---------------------------------------------------------------------------

def _degenerate_cosine(p_ext: float = 3.0) -> NonlinearityModel:
    """Generic model whose effective potential at lambda = 1 touches zero
    tangentially at 2*pi: F = s^2/2 + cos(s) - 1 on [0, 2pi], then grows as
    s^2/2 + (s - 2pi)^p_ext.  The branch method must refuse it at lambda = 1.
    """
    two_pi = 2.0 * math.pi

    def F(s):
        s = np.abs(np.asarray(s, dtype=float))
        low = s ** 2 / 2 + np.cos(s) - 1.0
        high = s ** 2 / 2 + (s - two_pi) ** p_ext
        return np.where(s <= two_pi, low, high)

    def F_prime(s):
        arr = np.asarray(s, dtype=float)
        a = np.abs(arr)
        low = a - np.sin(a)
        high = a + p_ext * (a - two_pi) ** (p_ext - 1.0)
        return np.sign(arr) * np.where(a <= two_pi, low, high)

    G = lambda s: np.asarray(s, dtype=float) ** 2 / 2
    G_prime = lambda s: np.asarray(s, dtype=float)
    K = lambda s: np.asarray(s, dtype=float) ** 2
    return NonlinearityModel.generic(F, F_prime, G, G_prime, K, name="degenerate-cosine")


_BUILTINS = {
    "degenerate-cosine": _degenerate_cosine,
}


def builtin_model(name: str, **params) -> NonlinearityModel:
    if name not in _BUILTINS:
        raise ModelError(f"unknown builtin model {name!r}; known: {sorted(_BUILTINS)}")
    return _BUILTINS[name](**params)


def load_model(path) -> NonlinearityModel:
    """Read a model specification file.

    Power-sum format::

        {"G": {"power": 2}, "K": {"power": 2},
         "F": {"terms": [{"c": 0.25, "r": 4}]}}

    The extension {"builtin": "<name>", ...params} selects a named generic
    model that cannot be expressed as a power sum.
    """
    with open(path) as fh:
        data = json.load(fh)
    if "builtin" in data:
        params = {k: v for k, v in data.items() if k != "builtin"}
        return builtin_model(data["builtin"], **params)
    try:
        p = float(data["G"]["power"])
        q = float(data["K"]["power"])
        terms = [(float(t["c"]), float(t["r"])) for t in data["F"]["terms"]]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model file {path}: {exc}") from exc
    import os

    name = os.path.splitext(os.path.basename(str(path)))[0]
    return NonlinearityModel.power_sum(p, q, terms, name=name)
