"""Dephasing qubit coupled linearly (through sz) to a bosonic bath.

Spectral density |f(w)|^2 = w^s / wc^(s-1) exp(-w/wc).  With u = w/wc the
bath integrals become

    Gamma_t  = int u^(s-2) e^-u coth(beta wc u/2) sin^2(wc t u/2) du
    dGamma_t = (wc/2)   int u^(s-1) e^-u coth(beta wc u/2) sin(wc t u) du
    Delta_t  = wc       int u^(s-1) e^-u sin^2(wc t u/2) du
    dDelta_t = (wc^2/2) int u^s e^-u sin(wc t u) du

The populations are frozen, the coherence decays by exp(-8 lam^2 Gamma_t),
and to second order in the coupling

    dS_S = 16 lam^2 |rho01|^2 e^{-16 lam^2 Gamma} / r_S log((1+r_S)/(1-r_S)) dGamma
    dQ_S = 0,   dQ_B = 4 lam^2 (1 - <sz>^2) dDelta,   dS_B = beta dQ_B,
    dU_chi = -(dQ_S + dQ_B).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as euler_gamma
from scipy.special import gammaincc

from .errors import IntegrandDivergence, ParameterOutOfRange, PureStateSingularity
from .numerics import adaptive_quad
from .qstate import QubitState, binary_entropy_of_radius

U_MIN = 50.0
TAIL_TOL = 1e-13
QUAD_TOL = 1e-12
QUAD_RTOL = 1e-11
WEAK_COUPLING = 0.3
PURE_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDensity:
    s: float = 4.0
    omega_c: float = 1.0

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ParameterOutOfRange(f"ohmicity s must be > 0, got {self.s!r}")
        if not (self.omega_c > 0 and math.isfinite(self.omega_c)):
            raise ParameterOutOfRange(f"cutoff omega_c must be > 0, got {self.omega_c!r}")

    def __call__(self, omega):
        """|f(omega)|^2."""
        omega = np.asarray(omega, dtype=float)
        return omega ** self.s / self.omega_c ** (self.s - 1) * np.exp(-omega / self.omega_c)

    @property
    def cutoff(self) -> float:
        """Upper limit in u = w/wc beyond which the exponential tail is negligible."""
        u = U_MIN
        while gammaincc(self.s + 1.0, u) > TAIL_TOL:
            u += 10.0
        return u


@dataclass(frozen=True)
class DephasingConfig:
    density: SpectralDensity
    beta: float
    lam: float
    rho0: QubitState

    def __post_init__(self):
        if not (self.beta >= 0):
            raise ParameterOutOfRange(f"beta must be >= 0, got {self.beta!r}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ParameterOutOfRange(f"coupling must be >= 0, got {self.lam!r}")
        if self.lam > WEAK_COUPLING:
            warnings.warn(
                f"coupling {self.lam} is not weak; second-order formulas may be unreliable",
                stacklevel=2,
            )

    @property
    def sz(self) -> float:
        return self.rho0.z

    @property
    def coherence_sq(self) -> float:
        """|rho_01|^2 of the initial state."""
        return (self.rho0.x ** 2 + self.rho0.y ** 2) / 4.0


def _coth(x):
    return 1.0 / np.tanh(x)


def _thermal(c: DephasingConfig, u):
    if math.isinf(c.beta):
        return np.ones_like(u)
    return _coth(0.5 * c.beta * c.density.omega_c * u)


def _check_gamma_integrable(c: DephasingConfig):
    if c.beta == 0.0:
        raise IntegrandDivergence("Gamma diverges at infinite temperature (beta = 0)")
    if c.density.s < 1.0 and not math.isinf(c.beta):
        raise IntegrandDivergence(
            f"integrand of Gamma is unbounded at w -> 0 for s={c.density.s} < 1 at finite beta"
        )


def _integrate(c: DephasingConfig, integrand, taus, tol: float):
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any(taus < 0):
        raise ParameterOutOfRange("tau must be >= 0")
    wc = c.density.omega_c
    top = float(taus.max()) * wc
    width = 1.0 if top == 0 else min(1.0, math.pi / top)
    res = adaptive_quad(lambda u: integrand(u[:, None], wc * taus[None, :]),
                        0.0, c.density.cutoff, tol=tol, rtol=QUAD_RTOL, max_width=width)
    return np.atleast_1d(res.value)


def _shape(taus, values):
    return float(values[0]) if np.ndim(taus) == 0 else values


def gamma_dephasing(c: DephasingConfig, tau, tol: float = QUAD_TOL):
    """Decoherence integral Gamma_tau (scalar or array ``tau``)."""
    _check_gamma_integrable(c)
    s = c.density.s
    f = lambda u, wt: u ** (s - 2) * np.exp(-u) * _thermal(c, u) * np.sin(0.5 * wt * u) ** 2
    return _shape(tau, _integrate(c, f, tau, tol))


def d_gamma(c: DephasingConfig, tau, tol: float = QUAD_TOL):
    """dGamma/dtau by quadrature of the differentiated integrand."""
    _check_gamma_integrable(c)
    s = c.density.s
    f = lambda u, wt: u ** (s - 1) * np.exp(-u) * _thermal(c, u) * np.sin(wt * u)
    return _shape(tau, 0.5 * c.density.omega_c * _integrate(c, f, tau, tol))


def delta_heat(c: DephasingConfig, tau, tol: float = QUAD_TOL):
    """Delta_tau, the integral that drives the bath heat."""
    s = c.density.s
    f = lambda u, wt: u ** (s - 1) * np.exp(-u) * np.sin(0.5 * wt * u) ** 2
    return _shape(tau, c.density.omega_c * _integrate(c, f, tau, tol))


def d_delta(c: DephasingConfig, tau, tol: float = QUAD_TOL):
    """dDelta/dtau by quadrature."""
    s = c.density.s
    f = lambda u, wt: u ** s * np.exp(-u) * np.sin(wt * u)
    return _shape(tau, 0.5 * c.density.omega_c ** 2 * _integrate(c, f, tau, tol))


def d_delta_analytic(density: SpectralDensity, tau):
    """(wc^2/2) Gamma(s+1) [1 + (wc t)^2]^(-(s+1)/2) sin[(s+1) arctan(wc t)]."""
    wt = density.omega_c * np.asarray(tau, dtype=float)
    s = density.s
    return (0.5 * density.omega_c ** 2 * euler_gamma(s + 1.0)
            * (1.0 + wt ** 2) ** (-(s + 1.0) / 2.0) * np.sin((s + 1.0) * np.arctan(wt)))


def d_gamma_highT(c: DephasingConfig, tau, printed: bool = False):
    """High-temperature form of dGamma/dtau (coth x ~ 1/x):

        (1/beta) Gamma(s-1) [1 + (wc t)^2]^(-(s-1)/2) sin[(s-1) arctan(wc t)].

    ``printed=True`` uses the prefactor 1/(2 beta) instead, which is half the
    expansion of the Gamma integral above.
    """
    s = c.density.s
    if s <= 1.0:
        raise ParameterOutOfRange("high-temperature form needs s > 1")
    if c.beta == 0.0 or math.isinf(c.beta):
        raise ParameterOutOfRange("high-temperature form needs 0 < beta < inf")
    wt = c.density.omega_c * np.asarray(tau, dtype=float)
    pref = 1.0 / (2.0 * c.beta) if printed else 1.0 / c.beta
    return pref * euler_gamma(s - 1.0) * (1.0 + wt ** 2) ** (-(s - 1.0) / 2.0) * np.sin((s - 1.0) * np.arctan(wt))


def _modes(c: DephasingConfig, modes: int):
    wc = c.density.omega_c
    step = c.density.cutoff * wc / modes
    omega = step * np.arange(1, modes + 1)
    return omega, c.density(omega) * step


def gamma_discrete(c: DephasingConfig, tau, modes: int = 10_000):
    """Gamma_tau as a finite sum over ``modes`` equally spaced bath modes on
    (0, cutoff wc], each weighted by |f(w_k)|^2 dw."""
    _check_gamma_integrable(c)
    omega, weight = _modes(c, modes)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    thermal = 1.0 if math.isinf(c.beta) else _coth(0.5 * c.beta * omega)
    terms = (weight * thermal / omega ** 2)[None, :] * np.sin(0.5 * np.outer(taus, omega)) ** 2
    return _shape(tau, terms.sum(axis=1))


def delta_discrete(c: DephasingConfig, tau, modes: int = 10_000):
    omega, weight = _modes(c, modes)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    terms = (weight / omega)[None, :] * np.sin(0.5 * np.outer(taus, omega)) ** 2
    return _shape(tau, terms.sum(axis=1))


def coherence_decay(c: DephasingConfig, big_gamma):
    """Amplitude factor exp(-8 lam^2 Gamma) of the off-diagonal element."""
    return np.exp(-8.0 * c.lam ** 2 * np.asarray(big_gamma))


def system_radius(c: DephasingConfig, big_gamma):
    """r_S = sqrt(1 - 4 (rho00 rho11 - e^{-16 lam^2 Gamma} |rho01|^2))."""
    rho00 = 0.5 * (1.0 + c.sz)
    rho11 = 0.5 * (1.0 - c.sz)
    inner = 1.0 - 4.0 * (rho00 * rho11 - np.exp(-16.0 * c.lam ** 2 * np.asarray(big_gamma)) * c.coherence_sq)
    return np.sqrt(np.clip(inner, 0.0, None))


def reduced_state(c: DephasingConfig, tau) -> QubitState:
    """System state at ``tau`` in the frame rotating with H_S."""
    k = float(coherence_decay(c, gamma_dephasing(c, tau)))
    return QubitState(k * c.rho0.x, k * c.rho0.y, c.rho0.z)


def system_entropy(c: DephasingConfig, tau):
    r = system_radius(c, gamma_dephasing(c, tau))
    return _shape(tau, np.array([binary_entropy_of_radius(v) for v in np.atleast_1d(r)]))


def _log_ratio_over_r(r):
    r = np.asarray(r, dtype=float)
    safe = np.where(r < 1e-8, 1.0, r)
    return np.where(r < 1e-8, 2.0, 2.0 * np.arctanh(np.minimum(safe, 1.0 - 1e-16)) / safe)


def system_entropy_rate(c: DephasingConfig, tau):
    if c.coherence_sq == 0.0:
        return _shape(tau, np.zeros(np.size(tau)))
    big_gamma = np.atleast_1d(gamma_dephasing(c, tau))
    rate = np.atleast_1d(d_gamma(c, tau))
    r = system_radius(c, big_gamma)
    if np.any(r >= 1.0 - PURE_TOL):
        raise PureStateSingularity("system state is pure; entropy rate diverges")
    decay = np.exp(-16.0 * c.lam ** 2 * big_gamma)
    value = 16.0 * c.lam ** 2 * c.coherence_sq * decay * _log_ratio_over_r(r) * rate
    return _shape(tau, value)


def system_heat_flux(c: DephasingConfig, tau):
    # dephasing preserves populations, so no heat flows into S
    return _shape(tau, np.zeros(np.size(tau)))


def bath_rates(c: DephasingConfig, tau):
    """(dQ_B, dS_B) to second order in the coupling."""
    dq = 4.0 * c.lam ** 2 * (1.0 - c.sz ** 2) * d_delta_analytic(c.density, tau)
    ds = c.beta * dq
    if np.ndim(tau) == 0:
        return float(dq), float(ds)
    return dq, ds


def binding_energy_rate(c: DephasingConfig, tau):
    dq_b, _ = bath_rates(c, tau)
    return -(system_heat_flux(c, tau) + dq_b)


def find_negative_window(c: DephasingConfig, tau_range, grid: int = 2000, xtol: float = 1e-9):
    """Intervals inside ``tau_range`` where dS_S < 0 and dS_B < 0 at once.

    Found on a uniform grid; each edge is then bracketed and refined on
    max(dS_S, dS_B).
    """
    lo, hi = tau_range
    taus = np.linspace(lo, hi, grid)
    ds_s = np.atleast_1d(system_entropy_rate(c, taus))
    ds_b = np.atleast_1d(bath_rates(c, taus)[1])
    both = (ds_s < 0) & (ds_b < 0)

    def g(t):
        return max(system_entropy_rate(c, t), bath_rates(c, t)[1])

    windows = []
    i = 0
    while i < grid:
        if not both[i]:
            i += 1
            continue
        j = i
        while j + 1 < grid and both[j + 1]:
            j += 1
        start = taus[i] if i == 0 else brentq(g, taus[i - 1], taus[i], xtol=xtol)
        end = taus[j] if j == grid - 1 else brentq(g, taus[j], taus[j + 1], xtol=xtol)
        windows.append((float(start), float(end)))
        i = j + 1
    return windows


class SecondLawBalance(NamedTuple):
    taus: np.ndarray
    rate: np.ndarray  # dS_S + dS_B
    cumulative: np.ndarray  # running trapezoid integral of ``rate``
    exact: np.ndarray  # [S_S(t) - S_S(0)] + beta * 4 lam^2 (1 - <sz>^2) Delta_t


def second_law_balance(c: DephasingConfig, taus) -> SecondLawBalance:
    taus = np.asarray(taus, dtype=float)
    rate = np.atleast_1d(system_entropy_rate(c, taus)) + np.atleast_1d(bath_rates(c, taus)[1])
    steps = 0.5 * (rate[1:] + rate[:-1]) * np.diff(taus)
    cumulative = np.concatenate(([0.0], np.cumsum(steps)))
    s_sys = np.atleast_1d(system_entropy(c, taus))
    s_sys0 = binary_entropy_of_radius(c.rho0.r)
    bath = c.beta * 4.0 * c.lam ** 2 * (1.0 - c.sz ** 2) * np.atleast_1d(delta_heat(c, taus))
    return SecondLawBalance(taus, rate, cumulative, s_sys - s_sys0 + bath)


def dephasing_table(c: DephasingConfig, taus) -> dict:
    """Columns of the dephasing report, keyed by CSV header."""
    taus = np.asarray(taus, dtype=float)
    dq_b, ds_b = bath_rates(c, taus)
    bal = second_law_balance(c, taus)
    return {
        "tau": taus,
        "Gamma": np.atleast_1d(gamma_dephasing(c, taus)),
        "Delta": np.atleast_1d(delta_heat(c, taus)),
        "dGamma": np.atleast_1d(d_gamma(c, taus)),
        "dDelta": np.atleast_1d(d_delta_analytic(c.density, taus)),
        "S_S": np.atleast_1d(system_entropy(c, taus)),
        "dS_S": np.atleast_1d(system_entropy_rate(c, taus)),
        "dS_B": np.atleast_1d(ds_b),
        "dQ_S": np.atleast_1d(system_heat_flux(c, taus)),
        "dQ_B": np.atleast_1d(dq_b),
        "dU_chi": np.atleast_1d(binding_energy_rate(c, taus)),
        "balance": bal.rate,
        "cumulative": bal.cumulative,
    }


def critical_ohmicity(beta: float, omega_c: float = 1.0, horizon: float = 400.0,
                      grid: int = 4000, s_lo: float = 1.0, s_hi: float = 6.0, tol: float = 1e-3) -> float:
    """Smallest s for which dGamma/dtau turns negative somewhere on [0, horizon/wc].

    Found by bisection on s; the finite horizon biases the estimate upward
    because the negative region opens at ever later times near threshold.
    """
    taus = np.linspace(0.0, horizon / omega_c, grid)[1:]

    def goes_negative(s: float) -> bool:
        c = DephasingConfig(SpectralDensity(s, omega_c), beta, 0.0, QubitState(1.0, 0.0, 0.0))
        return bool(np.min(d_gamma(c, taus, tol=1e-10)) < 0.0)

    if goes_negative(s_lo) or not goes_negative(s_hi):
        raise ParameterOutOfRange("critical ohmicity is not bracketed by [s_lo, s_hi]")
    while s_hi - s_lo > tol:
        mid = 0.5 * (s_lo + s_hi)
        if goes_negative(mid):
            s_hi = mid
        else:
            s_lo = mid
    return 0.5 * (s_lo + s_hi)
