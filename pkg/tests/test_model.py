import math

import numpy as np
import pytest

from normsol import ModelError, NoFiniteMZero
from normsol.model import (
    NonlinearityModel,
    asymptotic_limits,
    big_phi,
    big_phi_prime,
    check_structural_conditions,
    h,
    h_prime,
    i_f,
    load_model,
    m_zero,
    w_lambda,
    z,
)

INF = math.inf
I_F_SIGN_CHANGING = 4 * math.sqrt(2) * math.pi / 3  # analytic: 5.9238...


class TestWLambda:
    def test_zero_at_origin(self, cubic):
        assert w_lambda(cubic, 1.0, 0.0) == 0.0

    def test_cubic_at_one(self, cubic):
        assert w_lambda(cubic, 1.0, 1.0) == pytest.approx(0.25, abs=1e-15)

    def test_quintic_root(self, quintic):
        s = 3 ** 0.25
        assert w_lambda(quintic, 1.0, s) == pytest.approx(0.0, abs=1e-15)


class TestMZero:
    def test_pure_positive_power(self, cubic, quintic):
        assert m_zero(cubic) == 0.0
        assert m_zero(quintic) == 0.0

    def test_sign_changing(self, sign_changing):
        assert m_zero(sign_changing) == pytest.approx(4 / 3, rel=1e-12)

    def test_all_negative_raises(self):
        model = NonlinearityModel.generic(
            F=lambda s: -np.asarray(s) ** 4,
            F_prime=lambda s: -4 * np.asarray(s) ** 3,
            G=lambda s: np.asarray(s) ** 2 / 2,
            G_prime=lambda s: np.asarray(s, dtype=float),
            K=lambda s: np.asarray(s) ** 2,
        )
        with pytest.raises(NoFiniteMZero):
            m_zero(model)


class TestZ:
    def test_cubic(self, cubic):
        # F/G = s^2/2 so Z = s
        assert z(cubic, 2.0) == pytest.approx(2.0, rel=1e-14)

    def test_quintic(self, quintic):
        # F/G = s^4/3 so Z = 4 s^3 / 3
        assert z(quintic, 1.0) == pytest.approx(4 / 3, rel=1e-14)

    def test_sign_changing(self, sign_changing):
        # Z = s - 2/3
        assert z(sign_changing, 1.0) == pytest.approx(1 / 3, rel=1e-13)

    def test_positive_where_f_positive(self, cubic, quintic, sign_changing):
        for model in (cubic, quintic, sign_changing):
            s = np.geomspace(1e-3, 1e3, 200)
            mask = np.asarray(model.F(s)) > 0
            assert np.all(np.asarray(z(model, s))[mask] > 0)

    def test_tiers_agree(self, cubic, cubic_generic):
        s = np.array([0.3, 1.0, 2.7])
        assert np.allclose(z(cubic, s), z(cubic_generic, s), rtol=1e-12)


class TestBigPhi:
    def test_unit(self, cubic):
        assert big_phi(cubic, 1.0) == pytest.approx(0.5, rel=1e-14)
        assert big_phi_prime(cubic, 1.0) == pytest.approx(2.0, rel=1e-14)

    def test_at_two(self, cubic):
        assert big_phi(cubic, 2.0) == pytest.approx(8.0, rel=1e-14)

    def test_tier_cross_check(self, cubic, cubic_generic):
        assert big_phi(cubic_generic, 1.7) == pytest.approx(
            big_phi(cubic, 1.7), rel=1e-10
        )

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_exact_matches_quadrature(self, cubic, cubic_generic, t):
        assert big_phi(cubic_generic, t) == pytest.approx(big_phi(cubic, t), rel=1e-9)


class TestAsymptoticLimits:
    def test_cubic(self, cubic):
        lim = asymptotic_limits(cubic)
        assert lim.provenance == "exact"
        assert lim.L0 == lim.l0 == INF
        assert lim.Linf == lim.linf == 0.0

    def test_quintic(self, quintic):
        lim = asymptotic_limits(quintic)
        assert lim.L0 == lim.l0 == lim.Linf == lim.linf == pytest.approx(2 / 3, rel=1e-15)

    def test_sign_changing(self, sign_changing):
        lim = asymptotic_limits(sign_changing)
        assert lim.Linf == lim.linf == 0.0
        assert lim.L0 == lim.l0 == INF

    def test_quintic_mass_identity(self, quintic):
        # pi/sqrt(2 L0) equals the constraint-critical mass pi sqrt(3)/2
        lim = asymptotic_limits(quintic)
        assert math.pi / math.sqrt(2 * lim.L0) == pytest.approx(
            math.pi * math.sqrt(3) / 2, rel=1e-12
        )

    def test_exponent_form_matches_limit_form(self, quintic):
        # pi/sqrt(2 L0) must equal pi/sqrt((q - p/2 + 1) K0) where K0 is the
        # limit of (F'(s)s - pF(s))/s^{2q+2}, here sampled numerically at 0+
        d = quintic.power_data
        s = 1e-4
        K0 = (quintic.F_prime(s) * s - d.p * quintic.F(s)) / s ** (2 * d.q + 2)
        lim = asymptotic_limits(quintic)
        lhs = math.pi / math.sqrt(2 * lim.L0)
        rhs = math.pi / math.sqrt((d.q - d.p / 2 + 1) * K0)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_sampled_tier(self, cubic_generic):
        lim = asymptotic_limits(cubic_generic)
        assert lim.provenance == "sampled"
        assert lim.L0 > 1e10          # proxy for the divergent exact limit
        assert lim.Linf < 1e-5


class TestIF:
    def test_not_applicable_when_m0_zero(self, cubic):
        assert i_f(cubic) is None

    def test_sign_changing_analytic(self, sign_changing):
        assert i_f(sign_changing) == pytest.approx(I_F_SIGN_CHANGING, abs=1e-10)

    def test_cubic_k3_vs_adaptive_quadrature(self):
        model = NonlinearityModel.power_sum(2, 3, [(0.25, 4), (-1 / 3, 3)])
        val = i_f(model)
        from scipy.integrate import quad

        # QUADPACK algebraic-weight oracle; the regular factor
        # sqrt(2) u^3 sqrt((4/3-u)/|F(u)|) simplifies exactly to 2 sqrt(2) u^{3/2}
        oracle, _ = quad(
            lambda u: 2 * math.sqrt(2) * u ** 1.5,
            0.0,
            4 / 3,
            weight="alg",
            wvar=(0.0, -0.5),
            epsabs=1e-13,
            epsrel=1e-13,
        )
        assert np.isfinite(val)
        assert val == pytest.approx(oracle, rel=1e-10)


class TestH:
    def test_quadratic_kernel_vanishes(self):
        model = NonlinearityModel.generic(
            F=lambda s: np.asarray(s) ** 2,
            F_prime=lambda s: 2 * np.asarray(s, dtype=float),
            G=lambda s: np.asarray(s) ** 2 / 2,
            G_prime=lambda s: np.asarray(s, dtype=float),
            K=lambda s: np.asarray(s) ** 2,
        )
        for s in (0.2, 1.0, 7.5):
            assert h(model, s) == pytest.approx(0.0, abs=1e-14)

    def test_cubic(self, cubic):
        assert h(cubic, 1.0) == pytest.approx(0.5, rel=1e-15)

    def test_twelfth(self, twelfth):
        assert h(twelfth, 2.0) == pytest.approx((10 / 12) * 2 ** 12, rel=1e-15)

    def test_matches_assembled_callables(self, cubic, sign_changing):
        s = np.linspace(0.1, 5.0, 23)
        for model in (cubic, sign_changing):
            direct = h(model, s)
            assembled = model.F_prime(s) * s - 2.0 * model.F(s)
            assert np.array_equal(direct, assembled)

    def test_h_prime_exact_vs_difference(self, octic):
        s = np.array([0.5, 1.3, 2.0])
        exact = h_prime(octic, s)
        step = 1e-6
        fd = (h(octic, s + step) - h(octic, s - step)) / (2 * step)
        assert np.allclose(exact, fd, rtol=1e-8)


class TestStructuralConditions:
    def test_twelfth_m2(self, twelfth):
        rep = check_structural_conditions(twelfth, m=2, rho=1.0, gn_c=1.0)
        assert rep.eta == 0.0
        assert rep.h_scaling_ok
        assert rep.f_between_ok
        assert rep.strict_scaling_ok
        assert rep.mass_condition_super
        assert rep.supercritical_growth_ok

    def test_quintic_m1_strict_fails(self, quintic):
        rep = check_structural_conditions(quintic, m=1, rho=1.0, gn_c=1.0)
        assert rep.eta == pytest.approx(2 / 3, rel=1e-15)
        assert not rep.strict_scaling_ok
        assert rep.h_scaling_ok  # equality case still passes the weak form

    def test_cubic_subcritical_any_mass(self, cubic):
        rep = check_structural_conditions(cubic, m=1, rho=1e6, gn_c=123.0)
        assert rep.sigma == 0.0
        assert rep.mass_condition_sub

    def test_octic_supercritical_m1(self, octic):
        rep = check_structural_conditions(octic, m=1, rho=1.0, gn_c=1.0)
        assert rep.supercritical_growth_ok
        assert rep.strict_scaling_ok
        assert rep.f_between_ok


class TestConstruction:
    def test_rejects_bad_exponents(self):
        with pytest.raises(ModelError):
            NonlinearityModel.power_sum(1.0, 2, [(1, 4)])
        with pytest.raises(ModelError):
            NonlinearityModel.power_sum(2, 0.0, [(1, 4)])
        with pytest.raises(ModelError):
            NonlinearityModel.power_sum(2, 2, [(1, 0.5)])
        with pytest.raises(ModelError):
            NonlinearityModel.power_sum(2, 2, [(-1, 4)])
        with pytest.raises(ModelError):
            NonlinearityModel.power_sum(2, 2, [(1, 1.5)])

    def test_rejects_bad_generic_signs(self):
        with pytest.raises(ModelError):
            NonlinearityModel.generic(
                F=lambda s: np.asarray(s) ** 2 + 1.0,   # F(0) != 0
                F_prime=lambda s: 2 * np.asarray(s, dtype=float),
                G=lambda s: np.asarray(s) ** 2 / 2,
                G_prime=lambda s: np.asarray(s, dtype=float),
                K=lambda s: np.asarray(s) ** 2,
            )

    def test_derivative_consistency(self, cubic, sign_changing):
        # F' agrees with a numerical difference of F on samples
        s = np.linspace(0.2, 3.0, 15)
        for model in (cubic, sign_changing):
            step = 1e-7
            fd = (model.F(s + step) - model.F(s - step)) / (2 * step)
            assert np.allclose(model.F_prime(s), fd, rtol=1e-6)

    def test_load_model_roundtrip(self, tmp_path):
        path = tmp_path / "cubic.json"
        path.write_text(
            '{"G": {"power": 2}, "K": {"power": 2}, '
            '"F": {"terms": [{"c": 0.25, "r": 4}]}}'
        )
        model = load_model(path)
        assert model.kind == "power_sum"
        assert w_lambda(model, 1.0, 1.0) == pytest.approx(0.25)

    def test_load_builtin(self, tmp_path):
        path = tmp_path / "gap.json"
        path.write_text('{"builtin": "degenerate-cosine"}')
        model = load_model(path)
        assert model.kind == "generic"

    def test_load_malformed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"G": {"power": 2}}')
        with pytest.raises(ModelError):
            load_model(path)
