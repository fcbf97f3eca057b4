"""Nehari, Pohozaev, and equipartition residuals for claimed solutions.

Every nonzero solution of (-d^2/dx^2)^m u + lam G'(u) = F'(u) satisfies

    int |u^{(m)}|^2 + lam int G'(u) u = int F'(u) u          (Nehari)
    (1-2m) int |u^{(m)}|^2 + 2 lam int G(u) = 2 int F(u)     (Pohozaev, N=1)

and, for m = 1, the first integral u'^2 = 2 (lam G(u) - F(u)) pointwise.
The classical statements cover the quadratic constraint G = s^2/2; the
general-G forms used here follow from multiplying the equation by u (resp.
x u') and integrating by parts, and specialize exactly to the quadratic
versions.

Residuals are relative (scaled by the larger side), so they are comparable
across multiplier sweeps.  Inputs can be reconstructed branch profiles
(trapezoid integrals on their inclusive grid, derivative norms from the
stored equipartition slopes) or spectral fields.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .branch import SolitonProfile
from .errors import NotApplicableError
from .model import NonlinearityModel
from .variational import FieldState, sobolev_seminorm_sq

FieldLike = Union[FieldState, SolitonProfile]


def _pieces(obj: FieldLike, model: NonlinearityModel, m: Optional[int]):
    """(m, seminorm^2, integral functional) for either input kind."""
    if isinstance(obj, SolitonProfile):
        if m not in (None, 1):
            raise NotApplicableError("branch profiles are second-order objects (m=1)")
        x = obj.x

        def integral(vals):
            return float(np.trapezoid(vals, x))

        return 1, integral(obj.du ** 2), integral
    if isinstance(obj, FieldState):
        mm = obj.m if m is None else m
        if mm != obj.m:
            raise ValueError(f"field has derivative order {obj.m}, requested {mm}")
        dx = obj.dx

        def integral(vals):
            return dx * float(np.sum(vals))

        return mm, sobolev_seminorm_sq(obj), integral
    raise TypeError(f"expected FieldState or SolitonProfile, got {type(obj)!r}")


def _values(obj: FieldLike) -> np.ndarray:
    return obj.u if isinstance(obj, SolitonProfile) else obj.values


def _relative(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale


def nehari_residual(obj: FieldLike, model: NonlinearityModel, lam: float,
                    m: Optional[int] = None) -> float:
    """Relative defect of int |u^{(m)}|^2 + lam int G'(u)u = int F'(u)u."""
    mm, semi, integral = _pieces(obj, model, m)
    u = _values(obj)
    lhs = semi + lam * integral(model.G_prime(u) * u)
    rhs = integral(model.F_prime(u) * u)
    return _relative(lhs, rhs)


def pohozaev_residual(obj: FieldLike, model: NonlinearityModel, lam: float,
                      m: Optional[int] = None) -> float:
    """Relative defect of (1-2m) int |u^{(m)}|^2 + 2 lam int G(u) = 2 int F(u)."""
    mm, semi, integral = _pieces(obj, model, m)
    u = _values(obj)
    lhs = (1 - 2 * mm) * semi + 2.0 * lam * integral(model.G(u))
    rhs = 2.0 * integral(model.F(u))
    return _relative(lhs, rhs)


def pohozaev_residual_quadratic(obj: FieldLike, model: NonlinearityModel,
                                lam: float, m: Optional[int] = None) -> float:
    """Quadratic-constraint code path: the G-term written literally as
    lam int u^2 (valid when G = s^2/2); used to cross-check the general form."""
    mm, semi, integral = _pieces(obj, model, m)
    u = _values(obj)
    lhs = (1 - 2 * mm) * semi + lam * integral(u * u)
    rhs = 2.0 * integral(model.F(u))
    return _relative(lhs, rhs)


def equipartition_residual(profile: SolitonProfile, model: NonlinearityModel,
                           lam: float) -> float:
    """sup over interior nodes of |u'(x)^2 - 2 W_lam(u(x))|; profiles only."""
    if not isinstance(profile, SolitonProfile):
        raise NotApplicableError(
            "equipartition applies to second-order branch profiles only"
        )
    w = lam * model.G(profile.u) - model.F(profile.u)
    resid = np.abs(profile.du ** 2 - 2.0 * w)
    return float(np.max(resid[1:-1]))


def mass_K(obj: FieldLike, model: NonlinearityModel) -> float:
    """Trapezoid integral of K(u) over the object's grid."""
    if isinstance(obj, SolitonProfile):
        return float(np.trapezoid(model.K(obj.u), obj.x))
    if isinstance(obj, FieldState):
        return obj.dx * float(np.sum(model.K(obj.values)))
    raise TypeError(f"expected FieldState or SolitonProfile, got {type(obj)!r}")


@dataclass(frozen=True)
class IdentityReport:
    nehari_rel: float
    pohozaev_rel: float
    equipartition_sup: Optional[float]  # None unless a second-order profile
    mass_k: float
    lam: float
    m: int
    model_name: str

    def scalar_dict(self) -> dict:
        return {
            "nehari_rel": self.nehari_rel,
            "pohozaev_rel": self.pohozaev_rel,
            "equipartition_sup": self.equipartition_sup,
            "mass_k": self.mass_k,
            "lambda": self.lam,
            "m": self.m,
            "model": self.model_name,
        }


def identity_report(obj: FieldLike, model: NonlinearityModel, lam: float,
                    m: Optional[int] = None) -> IdentityReport:
    """All applicable residuals for one claimed solution."""
    mm, _, _ = _pieces(obj, model, m)
    equi = (equipartition_residual(obj, model, lam)
            if isinstance(obj, SolitonProfile) else None)
    return IdentityReport(
        nehari_rel=nehari_residual(obj, model, lam, m),
        pohozaev_rel=pohozaev_residual(obj, model, lam, m),
        equipartition_sup=equi,
        mass_k=mass_K(obj, model),
        lam=lam,
        m=mm,
        model_name=model.name or model.kind,
    )
