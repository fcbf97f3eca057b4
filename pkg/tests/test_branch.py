import io
import math

import numpy as np
import pytest

from normsol import AllPointsDegenerate, DegenerateZero
from normsol.branch import (
    existence_window,
    m_lambda,
    reconstruct_profile,
    rho_lambda,
    solve_mass,
    trace_branch,
)
from normsol.model import NonlinearityModel

SQRT2 = math.sqrt(2.0)
QUINTIC_MASS = math.pi * math.sqrt(3.0) / 2.0
I_F_SIGN_CHANGING = 4 * math.sqrt(2) * math.pi / 3


class TestMLambda:
    def test_cubic_analytic(self, cubic):
        assert m_lambda(cubic, 1.0) == pytest.approx(SQRT2, rel=1e-12)

    def test_quintic_analytic(self, quintic):
        # root of lam s^2/2 = s^6/6 is (3 lam)^{1/4}
        assert m_lambda(quintic, 2.0) == pytest.approx(6 ** 0.25, rel=1e-12)

    def test_degenerate_model(self, degenerate_cosine):
        with pytest.raises(DegenerateZero) as exc:
            m_lambda(degenerate_cosine, 1.0)
        assert exc.value.location == pytest.approx(2 * math.pi, abs=1e-6)

    def test_degenerate_model_ok_away_from_one(self, degenerate_cosine):
        # for lam != 1 the touching point detaches and the zero is regular
        m = m_lambda(degenerate_cosine, 2.0)
        assert m > 2 * math.pi

    def test_monotone_in_lambda(self, cubic, quintic, sign_changing):
        lams = np.geomspace(1e-3, 1e3, 50)
        for model in (cubic, quintic, sign_changing):
            ms = np.array([m_lambda(model, float(l)) for l in lams])
            assert np.all(np.diff(ms) > 0)

    def test_exceeds_m_zero(self, sign_changing):
        assert m_lambda(sign_changing, 1e-6) > 4 / 3


class TestRhoLambda:
    @pytest.mark.parametrize("lam", [0.25, 1.0, 4.0])
    def test_cubic_closed_form(self, cubic, lam):
        # sech profile mass: rho = 4 sqrt(lam)
        pt = rho_lambda(cubic, lam)
        assert pt.rho_lambda == pytest.approx(4 * math.sqrt(lam), abs=1e-10)
        assert pt.quad_error < 1e-8

    @pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
    def test_quintic_constant(self, quintic, lam):
        pt = rho_lambda(quintic, lam)
        assert pt.rho_lambda == pytest.approx(QUINTIC_MASS, abs=1e-10)

    def test_small_lambda_limits(self, cubic):
        assert rho_lambda(cubic, 1e-6).rho_lambda < 0.05
        assert rho_lambda(cubic, 1e6).rho_lambda > 100.0

    def test_sign_changing_tends_to_threshold(self, sign_changing):
        val = rho_lambda(sign_changing, 1e-5).rho_lambda
        assert val == pytest.approx(I_F_SIGN_CHANGING, rel=0.01)


class TestTraceBranch:
    def test_cubic_columns(self, cubic):
        curve = trace_branch(cubic, 0.25, 4.0, 9)
        lams = np.array([p.lam for p in curve.points])
        ms = np.array([p.m_lambda for p in curve.points])
        rhos = np.array([p.rho_lambda for p in curve.points])
        assert len(curve.points) == 9
        assert np.allclose(ms, np.sqrt(2 * lams), rtol=1e-10)
        assert np.allclose(rhos, 4 * np.sqrt(lams), atol=1e-9)
        assert curve.monotone_m

    def test_quintic_flat_mass(self, quintic):
        curve = trace_branch(quintic, 0.1, 10.0, 21)
        rhos = np.array([p.rho_lambda for p in curve.points])
        assert np.max(np.abs(rhos - QUINTIC_MASS)) < 1e-8

    def test_all_degenerate(self, degenerate_cosine):
        with pytest.raises(AllPointsDegenerate):
            trace_branch(degenerate_cosine, 1.0, 1.0, 1)

    def test_partial_degenerate_recorded(self, degenerate_cosine):
        curve = trace_branch(degenerate_cosine, 1.0, 4.0, 3)
        assert len(curve.degenerate_lams) == 1
        assert curve.degenerate_lams[0][0] == pytest.approx(1.0)
        assert len(curve.points) == 2

    def test_csv_export(self, cubic):
        curve = trace_branch(cubic, 0.5, 2.0, 3)
        buf = io.StringIO()
        curve.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "lambda,m_lambda,rho_lambda,quad_error"
        assert len(lines) == 4


class TestSolveMass:
    def test_cubic_inverse(self, cubic):
        res = solve_mass(cubic, 4.0, 0.5, 2.0, n=9)
        assert not res.flat_curve
        assert len(res.solutions) == 1
        lam, resid = res.solutions[0]
        assert lam == pytest.approx(1.0, abs=1e-6)
        assert resid < 1e-7

    def test_quintic_no_solution(self, quintic):
        res = solve_mass(quintic, 1.0, 0.1, 10.0, n=9)
        assert not res.flat_curve
        assert res.solutions == []
        assert "no bracket" in res.message

    def test_quintic_flat_curve(self, quintic):
        res = solve_mass(quintic, QUINTIC_MASS, 0.1, 10.0, n=9)
        assert res.flat_curve
        assert res.solutions == []


class TestExistenceWindow:
    def test_cubic_full_line(self, cubic):
        win = existence_window(cubic)
        assert win.cases == ["m0=0, Linf < l0"]
        (lo, hi), = win.intervals
        assert lo == 0.0
        assert math.isinf(hi)
        assert not win.sampled_limits

    def test_quintic_empty(self, quintic):
        win = existence_window(quintic)
        assert win.cases == []
        assert win.intervals == []

    def test_sign_changing(self, sign_changing):
        win = existence_window(sign_changing)
        assert win.cases == ["m0>0, F'(m0) != 0, IF < pi/sqrt(2*Linf)"]
        (lo, hi), = win.intervals
        assert lo == pytest.approx(I_F_SIGN_CHANGING, abs=1e-6)
        assert math.isinf(hi)
        assert win.inputs["f_prime_at_m0"] == pytest.approx(16 / 27, rel=1e-10)

    def test_sampled_flag(self, cubic_generic):
        win = existence_window(cubic_generic)
        assert win.sampled_limits


class TestReconstructProfile:
    def test_cubic_matches_sech(self, cubic):
        prof = reconstruct_profile(cubic, 1.0, 2001, 10.0)
        exact = SQRT2 / np.cosh(prof.x)
        assert np.max(np.abs(prof.u - exact)) <= 1e-6
        assert math.isinf(prof.half_support)

    def test_quintic_matches_sech_half(self, quintic):
        prof = reconstruct_profile(quintic, 1.0, 2001, 10.0)
        exact = 3 ** 0.25 / np.sqrt(np.cosh(2 * prof.x))
        assert np.max(np.abs(prof.u - exact)) <= 1e-6

    def test_peak_value_exact(self, cubic):
        prof = reconstruct_profile(cubic, 1.0, 1001, 8.0)
        mid = 500
        assert prof.x[mid] == 0.0
        assert prof.u[mid] == m_lambda(cubic, 1.0)

    def test_even_and_monotone(self, cubic):
        prof = reconstruct_profile(cubic, 2.0, 801, 12.0)
        assert np.max(np.abs(prof.u - prof.u[::-1])) <= 1e-12
        right = prof.u[prof.x >= 0]
        assert np.all(np.diff(right) <= 1e-14)

    def test_equipartition_by_construction(self, cubic):
        prof = reconstruct_profile(cubic, 1.0, 1001, 10.0)
        w = 1.0 * cubic.G(prof.u) - cubic.F(prof.u)
        resid = np.abs(prof.du ** 2 - 2 * w)
        assert np.max(resid[1:-1]) <= 1e-8

    def test_mass_consistency(self, cubic):
        prof = reconstruct_profile(cubic, 1.0, 4001, 16.0)
        mass = np.trapezoid(cubic.K(prof.u), prof.x)
        rho = rho_lambda(cubic, 1.0).rho_lambda
        assert mass == pytest.approx(rho, rel=1e-5)

    def test_interpolated_derivative_consistent(self, cubic):
        # independent check of the stored slopes: numerically differentiate u
        prof = reconstruct_profile(cubic, 1.0, 4001, 10.0)
        dx = prof.x[1] - prof.x[0]
        fd = np.gradient(prof.u, dx)
        interior = slice(10, -10)
        assert np.max(np.abs(fd[interior] - prof.du[interior])) < 5e-5

    def test_compact_support_case(self):
        # sub-quadratic G: the orbit touches 0 at finite range
        model = NonlinearityModel.power_sum(1.5, 1.0, [(1 / 3, 3)])
        prof = reconstruct_profile(model, 1.0, 2001, 20.0)
        assert np.isfinite(prof.half_support)
        assert prof.u[np.abs(prof.x) >= prof.half_support].max() == 0.0
        inside = np.abs(prof.x) <= 0.5 * prof.half_support
        assert np.all(prof.u[inside] > 0)

    def test_profile_csv(self, cubic):
        prof = reconstruct_profile(cubic, 1.0, 11, 5.0)
        buf = io.StringIO()
        prof.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "x,u,du_dx"
        assert len(lines) == 12

    def test_degenerate_propagates(self, degenerate_cosine):
        with pytest.raises(DegenerateZero):
            reconstruct_profile(degenerate_cosine, 1.0, 101, 5.0)
