"""Time-parametrized generalized amplitude damping.

Here H = sz (so the Gibbs state has z = -tanh(beta), i.e. omega = 2 in the
``GibbsSpec`` convention) and the channel parameters follow the schedule

    2 p_t - 1 = exp(-eps t) sin^2(eps t) - tanh(beta),   gamma_t = 1 - exp(-2 lam t).

The asymptotic state is the Gibbs state, but for eps > 0 it is not invariant
at finite times, which lets the integrated entropy production go negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .channels import BlochAffineMap, KrausSet, kraus_gad
from .errors import ParameterOutOfRange, ScheduleOutOfRange, SingularRate
from .qstate import IDENTITY, PAULIS, GibbsSpec, QubitState, binary_entropy_of_radius
from .thermo import entropy_production, thermo_series

# max of exp(-u) sin^2(u), reached at tan(u) = 2
_BUMP_MAX = math.exp(-math.atan(2.0)) * 0.8
SINGULAR_GAP = 1e-12


@dataclass(frozen=True)
class GadSchedule:
    epsilon: float = 1.0
    lam: float = 1.0
    beta: float = 0.1

    def __post_init__(self):
        if not (self.epsilon >= 0.0 and math.isfinite(self.epsilon)):
            raise ParameterOutOfRange(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ParameterOutOfRange(f"lambda must be > 0, got {self.lam!r}")
        if not (self.beta >= 0.0):
            raise ParameterOutOfRange(f"beta must be >= 0, got {self.beta!r}")
        # 2p - 1 ranges over [-tanh(beta), bump_max - tanh(beta)]
        lo = -math.tanh(self.beta)
        hi = (_BUMP_MAX if self.epsilon > 0 else 0.0) - math.tanh(self.beta)
        if lo < -1.0 or hi > 1.0:
            raise ScheduleOutOfRange("p_t leaves [0, 1] for this schedule")

    @property
    def spec(self) -> GibbsSpec:
        return GibbsSpec(self.beta, 2.0)


class Fig1Scan(NamedTuple):
    taus: np.ndarray
    Sigma: np.ndarray
    windows: list  # (start, end) intervals with Sigma < 0


def _bump(s: GadSchedule, tau: float) -> float:
    u = s.epsilon * tau
    return math.exp(-u) * math.sin(u) ** 2


def schedule_eval(s: GadSchedule, tau: float) -> tuple[float, float]:
    """(p_tau, gamma_tau)."""
    if tau < 0:
        raise ParameterOutOfRange("tau must be >= 0")
    p = 0.5 * (1.0 + _bump(s, tau) - math.tanh(s.beta))
    gamma = -math.expm1(-2.0 * s.lam * tau)
    if not (0.0 <= p <= 1.0):
        raise ScheduleOutOfRange(f"p_tau={p!r} outside [0, 1]")
    return p, gamma


def schedule_derivatives(s: GadSchedule, tau: float) -> tuple[float, float]:
    """(dp/dtau, dgamma/dtau)."""
    u = s.epsilon * tau
    dp = 0.5 * s.epsilon * math.exp(-u) * math.sin(u) * (2.0 * math.cos(u) - math.sin(u))
    dgamma = 2.0 * s.lam * math.exp(-2.0 * s.lam * tau)
    return dp, dgamma


def gad_kraus(s: GadSchedule, tau: float) -> KrausSet:
    return kraus_gad(*schedule_eval(s, tau))


def gad_affine(s: GadSchedule, tau: float) -> BlochAffineMap:
    p, gamma = schedule_eval(s, tau)
    keep = math.exp(-s.lam * tau)  # sqrt(1 - gamma)
    linear = np.diag([keep, keep, 1.0 - gamma])
    return BlochAffineMap(linear, np.array([0.0, 0.0, gamma * (2.0 * p - 1.0)]))


def gad_family(s: GadSchedule):
    return lambda tau: gad_affine(s, tau)


def evolve_gad(rho0: QubitState, s: GadSchedule, tau: float) -> QubitState:
    p, gamma = schedule_eval(s, tau)
    keep = math.exp(-s.lam * tau)
    z = -gamma + 2.0 * p * gamma + rho0.z * (1.0 - gamma)
    return QubitState(keep * rho0.x, keep * rho0.y, z)


def gad_velocity(rho0: QubitState, s: GadSchedule, tau: float):
    """(state, Bloch velocity) by differentiating the closed form."""
    state = evolve_gad(rho0, s, tau)
    p, gamma = schedule_eval(s, tau)
    dp, dgamma = schedule_derivatives(s, tau)
    dz = dgamma * (2.0 * p - 1.0) + 2.0 * gamma * dp - rho0.z * dgamma
    vel = np.array([-s.lam * state.x, -s.lam * state.y, dz])
    return state, vel


def generator_rates(s: GadSchedule, tau: float) -> tuple[float, float]:
    """(a_minus, a_plus) of the time-local generator.

    a_pm = (1/4) (p_pm dgamma/(1 - gamma) +/- gamma dp),  p_- = 1 - p, p_+ = p,
    to be used with sigma_pm = sx +/- i sy, i.e. jump operators 2|1><0| and 2|0><1|.
    """
    p, gamma = schedule_eval(s, tau)
    gap = math.exp(-2.0 * s.lam * tau)  # 1 - gamma without cancellation
    if gap < SINGULAR_GAP:
        tau_max = math.log(1.0 / SINGULAR_GAP) / (2.0 * s.lam)
        raise SingularRate(f"1 - gamma_tau = {gap:.3e}; keep tau below {tau_max:.4g}")
    dp, dgamma = schedule_derivatives(s, tau)
    a_minus = 0.25 * ((1.0 - p) * dgamma / gap - gamma * dp)
    a_plus = 0.25 * (p * dgamma / gap + gamma * dp)
    return a_minus, a_plus


_SIGMA_MINUS = 2.0 * np.array([[0, 0], [1, 0]], dtype=complex)  # sx - i sy
_SIGMA_PLUS = _SIGMA_MINUS.conj().T


def _dissipator(jump, rho):
    jd = jump.conj().T
    return jump @ rho @ jd - 0.5 * (jd @ jump @ rho + rho @ jd @ jump)


def lindblad_field(s: GadSchedule):
    """Bloch velocity of the time-dependent generator, built on 2x2 matrices."""

    def field(t: float, v: np.ndarray) -> np.ndarray:
        rho = 0.5 * (IDENTITY + v[0] * PAULIS[0] + v[1] * PAULIS[1] + v[2] * PAULIS[2])
        a_minus, a_plus = generator_rates(s, t)
        drho = a_minus * _dissipator(_SIGMA_MINUS, rho) + a_plus * _dissipator(_SIGMA_PLUS, rho)
        return np.array([np.trace(p @ drho).real for p in PAULIS])

    return field


def _entropy_term(r: float) -> float:
    # -(1/2) log(1 - r^2) - (r/2) log((1+r)/(1-r)), regrouped so r = 1 is finite
    return binary_entropy_of_radius(r) - math.log(2.0)


def sigma_integrated_gad(rho0: QubitState, s: GadSchedule, tau: float) -> float:
    """Sigma_tau = S(rho_0 || rho_beta) - S(rho_tau || rho_beta) in closed form."""
    state = evolve_gad(rho0, s, tau)
    return _entropy_term(state.r) - _entropy_term(rho0.r) + s.beta * (rho0.z - state.z)


def sigma_integrated_mixed(s: GadSchedule, tau: float) -> float:
    """Same quantity for rho_0 = 1/2, where r_tau = |z_tau|."""
    z = evolve_gad(QubitState(0.0, 0.0, 0.0), s, tau).z
    az = abs(z)
    total = 0.0
    for w in (1.0 + az, 1.0 - az):
        if w > 0.0:
            total -= 0.5 * w * (math.log(w) + s.beta * z)
    return total


def gad_entropy_production(rho0: QubitState, s: GadSchedule, tau: float) -> float:
    state, vel = gad_velocity(rho0, s, tau)
    return entropy_production(state, vel, s.spec)


def gad_series(rho0: QubitState, s: GadSchedule, taus):
    pairs = [gad_velocity(rho0, s, float(t)) for t in taus]
    return thermo_series(taus, [p[0] for p in pairs], [p[1] for p in pairs], s.spec)


def fig1_scan(s: GadSchedule, grid: int = 2000, horizon: float = 10.0, rho0: QubitState | None = None) -> Fig1Scan:
    """Sigma_tau on a uniform grid and the windows where it is negative,
    with window edges refined by root bracketing."""
    rho0 = rho0 or QubitState(0.0, 0.0, 0.0)
    taus = np.linspace(0.0, horizon, grid)
    values = np.array([sigma_integrated_gad(rho0, s, float(t)) for t in taus])
    func = lambda t: sigma_integrated_gad(rho0, s, t)

    windows = []
    neg = values < 0.0
    i = 0
    while i < len(taus):
        if not neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(taus) and neg[j + 1]:
            j += 1
        start = taus[i] if i == 0 else brentq(func, taus[i - 1], taus[i], xtol=1e-14)
        end = taus[j] if j == len(taus) - 1 else brentq(func, taus[j], taus[j + 1], xtol=1e-14)
        windows.append((float(start), float(end)))
        i = j + 1
    return Fig1Scan(taus, values, windows)


def sigma_minimum(s: GadSchedule, grid: int = 2000, horizon: float = 10.0,
                  rho0: QubitState | None = None) -> tuple[float, float]:
    """(tau*, Sigma*) of the global minimum on [0, horizon].

    The grid minimum is refined by locating the sign change of the entropy
    production sigma = dSigma/dtau next to it.
    """
    rho0 = rho0 or QubitState(0.0, 0.0, 0.0)
    scan = fig1_scan(s, grid, horizon, rho0)
    k = int(np.argmin(scan.Sigma))
    if 0 < k < len(scan.taus) - 1:
        lo, hi = scan.taus[k - 1], scan.taus[k + 1]
        rate = lambda t: gad_entropy_production(rho0, s, t)
        if rate(lo) < 0.0 < rate(hi):
            t_star = brentq(rate, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            return float(t_star), sigma_integrated_gad(rho0, s, t_star)
    return float(scan.taus[k]), float(scan.Sigma[k])
