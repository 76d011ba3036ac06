import math

import numpy as np
import pytest

from nmthermo.damping_map import DampingParams, DampingProfile, damping_series, damping_velocity, evolve_damping
from nmthermo.errors import GridTooCoarse, PureStateSingularity
from nmthermo.gad_map import GadSchedule, evolve_gad, gad_series
from nmthermo.numerics import central_diff, make_rng
from nmthermo.qstate import GibbsSpec, QubitState, gibbs_state, relative_entropy, von_neumann_entropy
from nmthermo.thermo import (
    ThermoSample,
    entropy_production,
    entropy_rate,
    heat_flux,
    integrated_entropy_production,
    thermo_series,
)

SPEC = GibbsSpec(1.0, 1.0)
CONST = DampingParams(DampingProfile("const", gamma0=0.8), SPEC)
OSC = DampingParams(DampingProfile("osc", gamma0=1.0, a=1.5, nu=5.0), SPEC)


class TestHeatFlux:
    def test_no_population_change(self):
        assert heat_flux(QubitState(0.3, 0, 0.1), [1.0, -2.0, 0.0], SPEC) == 0.0

    def test_gibbs_start(self):
        state, vel = damping_velocity(gibbs_state(SPEC), OSC, 0.0)
        assert heat_flux(state, vel, SPEC) == 0.0

    @pytest.mark.parametrize("tau", [0.0, 0.4, 2.0])
    def test_constant_rate_formula(self, tau):
        rho0 = QubitState(0.2, 0.1, 0.6)
        state, vel = damping_velocity(rho0, CONST, tau, method="analytic")
        g0, w, b = 0.8, SPEC.omega, SPEC.beta
        coth = 1 / math.tanh(b * w / 2)
        big = 0.5 * coth * g0 * tau
        expected = -(w / 2) * g0 * coth * math.exp(-2 * big) * (rho0.z + math.tanh(b * w / 2))
        assert heat_flux(state, vel, SPEC) == pytest.approx(expected, rel=1e-13)


class TestEntropyRate:
    def test_tangential_motion(self):
        assert entropy_rate(QubitState(0.5, 0, 0), [0, 1.0, 0]) == 0.0

    def test_center(self):
        assert entropy_rate(QubitState(0, 0, 0), [0.3, 0.2, 0.1]) == 0.0
        assert abs(entropy_rate(QubitState(1e-9, 0, 0), [1.0, 0, 0])) < 1e-8

    def test_pure_radial_diverges(self):
        with pytest.raises(PureStateSingularity):
            entropy_rate(QubitState(0, 0, 1.0), [0, 0, -0.1])

    def test_pure_tangential_finite(self):
        assert entropy_rate(QubitState(0, 0, 1.0), [0.3, 0, 0]) == 0.0

    @pytest.mark.parametrize("tau", [0.2, 0.63, 1.5, 4.0])
    def test_matches_finite_difference(self, tau):
        rho0 = QubitState(0.5, -0.1, 0.7)
        state, vel = damping_velocity(rho0, OSC, tau)
        fd = central_diff(lambda t: von_neumann_entropy(evolve_damping(rho0, OSC, t)), tau, 1e-4, richardson=True)
        assert entropy_rate(state, vel) == pytest.approx(fd, rel=1e-6, abs=1e-10)


class TestEntropyProduction:
    def test_stationary_gibbs(self):
        state, vel = damping_velocity(gibbs_state(SPEC), OSC, 1.3)
        assert entropy_production(state, vel, SPEC) == pytest.approx(0.0, abs=1e-15)

    def test_semigroup_nonnegative(self):
        rng = make_rng(3)
        for _ in range(200):
            v = rng.normal(size=3)
            rho0 = QubitState.from_vector(0.99 * v / np.linalg.norm(v) * rng.uniform())
            state, vel = damping_velocity(rho0, CONST, rng.uniform(0, 5), method="analytic")
            assert entropy_production(state, vel, SPEC) >= -1e-12

    def test_negative_rate_gives_negative_production(self):
        tau = math.pi / 5.0  # cos(5 tau) = -1, gamma = -0.5
        state, vel = damping_velocity(QubitState(0.5, 0.0, 0.5), OSC, tau)
        assert float(OSC.profile.rate(tau)) < 0
        assert entropy_production(state, vel, SPEC) < 0

    def test_relative_entropy_derivative(self):
        rho0 = QubitState(0.3, 0.4, -0.2)
        ref = gibbs_state(SPEC)
        for tau in (0.3, 0.7, 2.2):
            state, vel = damping_velocity(rho0, OSC, tau)
            fd = -central_diff(lambda t: relative_entropy(evolve_damping(rho0, OSC, t), ref), tau, 1e-3,
                               richardson=True)
            assert entropy_production(state, vel, SPEC) == pytest.approx(fd, rel=1e-5)


class TestSeries:
    def test_columns(self):
        assert ThermoSample.columns() == ["tau", "x", "y", "z", "S", "dS", "dQ", "sigma", "Sigma", "relent"]

    def test_definition_consistency(self):
        series = damping_series(QubitState(0.5, 0, 0.5), OSC, np.linspace(0, 10, 500))
        for s in series:
            assert abs(s.sigma - (s.dS - SPEC.beta * s.dQ)) < 1e-10

    def test_starts_at_zero(self):
        series = damping_series(QubitState(0.5, 0, 0.5), OSC, np.linspace(0, 1, 5))
        assert series[0].Sigma == 0.0

    def test_gibbs_invariant_cumulative_nonnegative(self):
        rng = make_rng(9)
        for _ in range(5):
            v = rng.normal(size=3)
            rho0 = QubitState.from_vector(v / np.linalg.norm(v) * rng.uniform())
            series = damping_series(rho0, OSC, np.linspace(0, 10, 2000))
            assert min(s.Sigma for s in series) >= -1e-9
            assert min(s.sigma for s in series) < 0 or rho0.r < 0.05

    def test_non_increasing_grid(self):
        with pytest.raises(GridTooCoarse):
            damping_series(QubitState(0, 0, 0), CONST, [0.0, 0.5, 0.5])

    def test_pure_sample_panel_uses_relative_entropy(self):
        # a pure state sitting still is harmless, one moving radially is flagged
        states = [QubitState(0, 0, 1.0), QubitState(0, 0, 0.9)]
        vels = [[0, 0, -0.2], [0, 0, -0.1]]
        series = thermo_series([0.0, 0.5], states, vels, SPEC)
        assert series[0].sigma == math.inf
        ref = gibbs_state(SPEC)
        assert series[1].Sigma == pytest.approx(relative_entropy(states[0], ref) - relative_entropy(states[1], ref))

    def test_fine_grid_agrees_with_relative_entropy_drop(self):
        rho0 = QubitState(0.5, 0, 0.5)
        taus = np.linspace(0, 10, 20000)
        series = damping_series(rho0, OSC, taus)
        got = integrated_entropy_production(series, SPEC, rho0, evolve_damping(rho0, OSC, 10.0))
        assert got.quadrature == pytest.approx(got.relent_difference, rel=1e-5)

    def test_coarse_grid_detected(self):
        rho0 = QubitState(0.5, 0, 0.5)
        series = damping_series(rho0, OSC, np.linspace(0, 10, 60))
        with pytest.raises(GridTooCoarse):
            integrated_entropy_production(series, SPEC, rho0, evolve_damping(rho0, OSC, 10.0))

    def test_gad_negative_interval(self):
        sched = GadSchedule(1.0, 1.0, 0.1)
        rho0 = QubitState(0, 0, 0)
        series = gad_series(rho0, sched, np.linspace(0, 10, 4000))
        assert min(s.Sigma for s in series) < -0.02
        got = integrated_entropy_production(series, sched.spec, rho0, evolve_gad(rho0, sched, 10.0))
        assert got.relent_difference > 0
