import math

import numpy as np
import pytest

from nmthermo.channels import affine_from_kraus, choi_from, is_cp
from nmthermo.errors import ParameterOutOfRange, SingularRate
from nmthermo.gad_map import (
    GadSchedule,
    evolve_gad,
    fig1_scan,
    gad_affine,
    gad_entropy_production,
    gad_kraus,
    gad_velocity,
    generator_rates,
    lindblad_field,
    schedule_eval,
    sigma_integrated_gad,
    sigma_integrated_mixed,
    sigma_minimum,
)
from nmthermo.numerics import central_diff, make_rng, ode_rk
from nmthermo.qstate import QubitState, gibbs_state, relative_entropy

# 40-digit reference values for beta = 0.1, eps = lam = 1 and a maximally mixed start,
# computed with mpmath from the Kraus operators and the eigenvalue form of the relative entropy
TAU_STAR = 1.1624845000741904459637
SIGMA_STAR = -0.02572464811576493873
WINDOW = (0.39476568385141977546, 2.0582484970656213505)
SIGMA_AT_ONE = -0.023604653073586244616

FIG1 = GadSchedule(1.0, 1.0, 0.1)
MIXED = QubitState(0.0, 0.0, 0.0)


def random_state(rng):
    v = rng.normal(size=3)
    return QubitState.from_vector(v / np.linalg.norm(v) * rng.uniform() ** (1 / 3))


class TestSchedule:
    def test_identity_at_start(self):
        assert schedule_eval(FIG1, 0.0)[1] == 0.0

    def test_asymptotics(self):
        p, g = schedule_eval(FIG1, 40.0)
        assert g == pytest.approx(1.0, abs=1e-15)
        assert 2 * p - 1 == pytest.approx(-math.tanh(0.1), abs=1e-15)

    def test_no_bump_means_constant_p(self):
        s = GadSchedule(0.0, 1.0, 0.4)
        assert len({schedule_eval(s, t)[0] for t in (0.0, 0.3, 2.0, 7.0)}) == 1

    @pytest.mark.parametrize("kw", [{"epsilon": -1.0}, {"lam": 0.0}, {"beta": -0.1}])
    def test_invalid(self, kw):
        with pytest.raises(ParameterOutOfRange):
            GadSchedule(**kw)

    def test_negative_time(self):
        with pytest.raises(ParameterOutOfRange):
            schedule_eval(FIG1, -0.1)


class TestEvolution:
    def test_identity_at_start(self):
        rho0 = QubitState(0.3, -0.4, 0.2)
        assert evolve_gad(rho0, FIG1, 0.0).vector.tolist() == rho0.vector.tolist()

    def test_mixed_start(self):
        for tau in (0.3, 1.0, 4.0):
            p, g = schedule_eval(FIG1, tau)
            np.testing.assert_allclose(evolve_gad(MIXED, FIG1, tau).vector, [0, 0, g * (2 * p - 1)], atol=1e-16)

    def test_gibbs_not_invariant(self):
        ref = gibbs_state(FIG1.spec)
        dev = max(np.linalg.norm(evolve_gad(ref, FIG1, t).vector - ref.vector) for t in np.linspace(0, 10, 200))
        assert dev > 1e-6

    def test_gibbs_invariant_without_bump(self):
        s = GadSchedule(0.0, 1.0, 0.1)
        ref = gibbs_state(s.spec)
        for t in (0.2, 3.0):
            np.testing.assert_allclose(evolve_gad(ref, s, t).vector, ref.vector, atol=1e-15)

    def test_kraus_and_closed_form_agree(self):
        rng = make_rng(31)
        for _ in range(30):
            tau = rng.uniform(0, 10)
            assert affine_from_kraus(gad_kraus(FIG1, tau)).distance(gad_affine(FIG1, tau)) <= 1e-12

    def test_completely_positive(self):
        for tau in np.linspace(0, 10, 100):
            k = gad_kraus(FIG1, tau)
            assert np.abs(k.completeness() - np.eye(2)).max() <= 1e-12
            assert is_cp(choi_from(k))

    def test_relaxation(self):
        s = GadSchedule(1.0, 0.5, 0.3)
        out = evolve_gad(QubitState(0.6, 0.0, 0.8), s, 20.0 / s.lam)
        assert abs(out.z + math.tanh(0.3)) <= 1e-8
        assert math.hypot(out.x, out.y) <= 1e-8

    def test_semigroup_without_bump(self):
        s = GadSchedule(0.0, 0.7, 0.2)
        for tau, delta in [(0.3, 0.5), (1.0, 2.0), (4.0, 0.1)]:
            assert gad_affine(s, tau + delta).distance(gad_affine(s, tau) @ gad_affine(s, delta)) <= 1e-10

    def test_velocity_matches_difference_quotient(self):
        rho0 = QubitState(0.2, 0.3, -0.5)
        for tau in (0.4, 1.7):
            _, vel = gad_velocity(rho0, FIG1, tau)
            fd = [central_diff(lambda t, i=i: evolve_gad(rho0, FIG1, t).vector[i], tau, 1e-3, richardson=True)
                  for i in range(3)]
            np.testing.assert_allclose(vel, fd, atol=1e-10)


class TestGenerator:
    def test_initial_rates(self):
        s = GadSchedule(1.0, 0.8, 0.3)
        p0, _ = schedule_eval(s, 0.0)
        a_minus, a_plus = generator_rates(s, 0.0)
        assert a_minus == pytest.approx(0.4 * (1 - p0), rel=1e-15)
        assert a_plus == pytest.approx(0.4 * p0, rel=1e-15)

    def test_constant_without_bump(self):
        s = GadSchedule(0.0, 1.0, 0.2)
        rates = {tuple(round(r, 14) for r in generator_rates(s, t)) for t in (0.0, 1.0, 5.0)}
        assert len(rates) == 1

    def test_singular(self):
        with pytest.raises(SingularRate, match="keep tau below"):
            generator_rates(FIG1, 20.0)

    @pytest.mark.parametrize("sched", [FIG1, GadSchedule(3.0, 0.5, 1.0), GadSchedule(0.0, 1.0, 0.1)])
    def test_master_equation_matches_closed_form(self, sched):
        rho0 = QubitState(0.4, -0.2, 0.7)
        horizon = -math.log(0.001) / (2 * sched.lam)  # gamma = 0.999
        taus = np.linspace(0, min(10.0, horizon), 60)
        traj = ode_rk(lindblad_field(sched), rho0, taus[-1], tol=1e-11, t_eval=taus)
        closed = np.array([evolve_gad(rho0, sched, t).vector for t in taus])
        assert np.abs(traj.values - closed).max() <= 1e-8


class TestIntegratedProduction:
    def test_zero_at_start(self):
        assert sigma_integrated_gad(MIXED, FIG1, 0.0) == 0.0

    def test_reference_value(self):
        assert sigma_integrated_gad(MIXED, FIG1, 1.0) == pytest.approx(SIGMA_AT_ONE, abs=1e-15)

    def test_mixed_special_case(self):
        for tau in np.linspace(0, 10, 57):
            assert sigma_integrated_mixed(FIG1, tau) == pytest.approx(sigma_integrated_gad(MIXED, FIG1, tau), abs=1e-15)

    def test_relative_entropy_form(self):
        rng = make_rng(32)
        ref = gibbs_state(FIG1.spec)
        for _ in range(20):
            rho0 = random_state(rng)
            tau = rng.uniform(0.01, 10)
            rho_t = evolve_gad(rho0, FIG1, tau)
            expected = relative_entropy(rho0, ref) - relative_entropy(rho_t, ref)
            assert sigma_integrated_gad(rho0, FIG1, tau) == pytest.approx(expected, abs=1e-13)

    def test_pure_start_is_finite(self):
        assert math.isfinite(sigma_integrated_gad(QubitState(0, 0, 1.0), FIG1, 0.5))

    def test_rate_is_derivative(self):
        for tau in (0.2, 1.0, 3.0):
            fd = central_diff(lambda t: sigma_integrated_gad(MIXED, FIG1, t), tau, 1e-3, richardson=True)
            assert gad_entropy_production(MIXED, FIG1, tau) == pytest.approx(fd, rel=1e-7)

    def test_negative_window(self):
        scan = fig1_scan(FIG1)
        assert len(scan.windows) == 1
        np.testing.assert_allclose(scan.windows[0], WINDOW, atol=1e-12)

    def test_minimum(self):
        tau, value = sigma_minimum(FIG1)
        assert tau == pytest.approx(TAU_STAR, abs=1e-8)
        assert value == pytest.approx(SIGMA_STAR, abs=1e-8)

    def test_semigroup_case_nonnegative(self):
        scan = fig1_scan(GadSchedule(0.0, 1.0, 0.1))
        assert scan.Sigma.min() >= 0.0 and not scan.windows
