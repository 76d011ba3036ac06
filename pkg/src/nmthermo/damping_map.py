"""Qubit in a thermal bath with a time-dependent damping rate.

Master equation (sigma_- = |1><0| lowers the excited state |0>)::

    drho = -i[(omega/2) sz, rho]
           + gamma_t (n+1)/2 (2 s- rho s+ - {s+ s-, rho})
           + gamma_t n/2     (2 s+ rho s- - {s- s+, rho}),   n = 1/(e^{beta omega} - 1)

Closed-form solution on Bloch vectors::

    x_t + i y_t = exp(-G_t + i omega t) (x_0 + i y_0)
    z_t         = exp(-2 G_t) (z_0 - z_inf) + z_inf
    G_t         = (1/2) coth(beta omega/2) int_0^t gamma,   z_inf = -tanh(beta omega/2)

The map is CP iff int_0^t gamma >= 0, and CP-divisible (equivalently
P-divisible for this family) iff gamma_t >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channels import BlochAffineMap
from .errors import GridTooCoarse, ParameterOutOfRange, PureStateSingularity
from .numerics import adaptive_quad, make_rng
from .qstate import IDENTITY, PAULIS, SIGMA_Z, GibbsSpec, QubitState
from .thermo import entropy_production, thermo_series

PROFILE_KINDS = ("const", "osc", "sampled")
PURE_TOL = 1e-12
POINTS_PER_PERIOD = 20


@dataclass(frozen=True)
class DampingProfile:
    """Damping rate gamma_t.

    ``const``:   gamma_t = gamma0
    ``osc``:     gamma_t = gamma0 (1 + a cos(nu t)); negative on periodic
                 windows when a > 1 while its integral stays >= 0 for
                 a up to about 4.603.
    ``sampled``: piecewise-linear through ``samples`` = ((t_i, gamma_i), ...),
                 held constant outside the table.
    """

    kind: str = "osc"
    gamma0: float = 1.0
    a: float = 1.5
    nu: float = 5.0
    samples: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ParameterOutOfRange(f"unknown profile kind {self.kind!r}")
        if self.kind == "sampled":
            pts = np.asarray(self.samples, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
                raise ParameterOutOfRange("sampled profile needs at least two (t, gamma) rows")
            if np.any(np.diff(pts[:, 0]) <= 0):
                raise ParameterOutOfRange("sample times must be strictly increasing")
            object.__setattr__(self, "samples", tuple(map(tuple, pts)))
        if self.kind == "osc" and self.nu < 0:
            raise ParameterOutOfRange("nu must be >= 0")
        for name in ("gamma0", "a", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterOutOfRange(f"{name} must be finite")

    def rate(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "const":
            return self.gamma0 * np.ones_like(tau)
        if self.kind == "osc":
            return self.gamma0 * (1.0 + self.a * np.cos(self.nu * tau))
        pts = np.asarray(self.samples)
        return np.interp(tau, pts[:, 0], pts[:, 1])

    def antiderivative(self, tau: float) -> float | None:
        """Closed-form int_0^tau gamma for the analytic kinds, else ``None``."""
        if self.kind == "const":
            return self.gamma0 * tau
        if self.kind == "osc":
            if self.nu == 0.0:
                return self.gamma0 * (1.0 + self.a) * tau
            return self.gamma0 * (tau + self.a * math.sin(self.nu * tau) / self.nu)
        return None

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        pts = [lo]
        if self.kind == "sampled":
            pts += [t for t, _ in self.samples if lo < t < hi]
        pts.append(hi)
        return pts

    @property
    def period(self) -> float | None:
        if self.kind == "osc" and self.nu > 0 and self.a != 0:
            return 2.0 * math.pi / self.nu
        return None


@dataclass(frozen=True)
class DampingParams:
    profile: DampingProfile
    spec: GibbsSpec

    def __post_init__(self):
        if not (self.spec.beta * self.spec.omega > 0.0):
            raise ParameterOutOfRange("beta * omega must be > 0 for a finite occupation")

    @property
    def coth(self) -> float:
        return self.spec.coth

    @property
    def z_inf(self) -> float:
        return self.spec.z_inf


class Divisibility(str, Enum):
    NOT_CP = "NotCP"
    CP_DIVISIBLE = "CPDivisible"
    ESSENTIALLY_NON_MARKOVIAN = "EssentiallyNonMarkovian"


def rate_integral(profile: DampingProfile, lo: float, hi: float, tol: float = 1e-13) -> float:
    """int_lo^hi gamma by adaptive quadrature."""
    if hi == lo:
        return 0.0
    width = None if profile.period is None else profile.period / 4.0
    total = 0.0
    edges = profile.breakpoints(lo, hi)
    for a, b in zip(edges[:-1], edges[1:]):
        total += adaptive_quad(profile.rate, a, b, tol=tol, max_width=width).value
    return total


def gamma_integral(profile: DampingProfile, spec: GibbsSpec, tau: float, method: str = "quad") -> float:
    """G_tau = (1/2) coth(beta omega/2) int_0^tau gamma.

    ``method="analytic"`` uses the closed-form antiderivative (const/osc only).
    """
    if tau < 0:
        raise ParameterOutOfRange("tau must be >= 0")
    if method == "analytic":
        integral = profile.antiderivative(tau)
        if integral is None:
            raise ParameterOutOfRange(f"no analytic antiderivative for kind {profile.kind!r}")
    elif method == "quad":
        integral = rate_integral(profile, 0.0, tau)
    else:
        raise ParameterOutOfRange(f"unknown method {method!r}")
    return 0.5 * spec.coth * integral


def gamma_integral_grid(profile: DampingProfile, spec: GibbsSpec, taus) -> np.ndarray:
    """G on an increasing grid starting at 0, accumulated panel by panel."""
    taus = np.asarray(taus, dtype=float)
    out = np.zeros(len(taus))
    acc = 0.0
    for i in range(1, len(taus)):
        acc += rate_integral(profile, taus[i - 1], taus[i])
        out[i] = acc
    if len(taus) and taus[0] != 0.0:
        out += rate_integral(profile, 0.0, taus[0])
    return 0.5 * spec.coth * out


def _solution(rho0: QubitState, params: DampingParams, tau: float, big_gamma: float):
    """State and Bloch velocity at ``tau`` for a given G_tau."""
    w = params.spec.omega
    z_inf = params.z_inf
    damp = math.exp(-big_gamma)
    c, s = math.cos(w * tau), math.sin(w * tau)
    x = damp * (c * rho0.x - s * rho0.y)
    y = damp * (s * rho0.x + c * rho0.y)
    dev = math.exp(-2.0 * big_gamma) * (rho0.z - z_inf)
    z = dev + z_inf
    rate = 0.5 * params.coth * float(params.profile.rate(tau))  # dG/dt
    vel = np.array([-rate * x - w * y, -rate * y + w * x, -2.0 * rate * dev])
    return QubitState(x, y, z), vel


def evolve_damping(rho0: QubitState, params: DampingParams, tau: float, method: str = "quad") -> QubitState:
    big_gamma = gamma_integral(params.profile, params.spec, tau, method=method)
    return _solution(rho0, params, tau, big_gamma)[0]


def damping_velocity(rho0: QubitState, params: DampingParams, tau: float, method: str = "quad"):
    """(state, Bloch velocity) at ``tau`` from the closed-form solution."""
    big_gamma = gamma_integral(params.profile, params.spec, tau, method=method)
    return _solution(rho0, params, tau, big_gamma)


def damping_trajectory(rho0: QubitState, params: DampingParams, taus):
    """States and velocities on a grid starting at 0."""
    gammas = gamma_integral_grid(params.profile, params.spec, taus)
    pairs = [_solution(rho0, params, float(t), g) for t, g in zip(taus, gammas)]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def damping_series(rho0: QubitState, params: DampingParams, taus):
    states, vels = damping_trajectory(rho0, params, taus)
    return thermo_series(taus, states, vels, params.spec)


def damping_family(params: DampingParams, method: str = "quad"):
    """tau -> Bloch-affine form of the dynamical map Lambda_tau."""
    w = params.spec.omega
    z_inf = params.z_inf

    def family(tau: float) -> BlochAffineMap:
        g = gamma_integral(params.profile, params.spec, tau, method=method)
        e1, e2 = math.exp(-g), math.exp(-2.0 * g)
        c, s = math.cos(w * tau), math.sin(w * tau)
        linear = np.array([[e1 * c, -e1 * s, 0.0], [e1 * s, e1 * c, 0.0], [0.0, 0.0, e2]])
        return BlochAffineMap(linear, np.array([0.0, 0.0, z_inf * (1.0 - e2)]))

    return family


_LOWER = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
_RAISE = _LOWER.conj().T


def _dissipator(jump: np.ndarray, rho: np.ndarray) -> np.ndarray:
    jd = jump.conj().T
    return jump @ rho @ jd - 0.5 * (jd @ jump @ rho + rho @ jd @ jump)


def lindblad_field(params: DampingParams):
    """Bloch velocity field of the master equation, evaluated on 2x2 matrices.

    With sigma_pm = (sx +/- i sy)/2 this generator's exact solution is the
    closed form above; the factor conventions are fixed by that requirement.
    """
    w = params.spec.omega
    n = params.spec.occupation
    ham = 0.5 * w * SIGMA_Z

    def field(t: float, v: np.ndarray) -> np.ndarray:
        rho = 0.5 * (IDENTITY + v[0] * PAULIS[0] + v[1] * PAULIS[1] + v[2] * PAULIS[2])
        g = float(params.profile.rate(t))
        drho = -1j * (ham @ rho - rho @ ham)
        drho += g * (n + 1.0) * _dissipator(_LOWER, rho)
        drho += g * n * _dissipator(_RAISE, rho)
        return np.array([np.trace(p @ drho).real for p in PAULIS])

    return field


def classify_divisibility(
    profile: DampingProfile,
    horizon: float,
    grid: int = 2000,
    tol: float = 1e-12,
) -> Divisibility:
    """Scan gamma and its running integral on ``grid`` points over [0, horizon]."""
    if grid < 2 or horizon <= 0:
        raise ParameterOutOfRange("need grid >= 2 and horizon > 0")
    taus = np.linspace(0.0, horizon, grid)
    period = profile.period
    if period is not None and taus[1] - taus[0] > period / POINTS_PER_PERIOD:
        raise GridTooCoarse(
            f"grid spacing {taus[1] - taus[0]:.3g} does not resolve the period {period:.3g} "
            f"({POINTS_PER_PERIOD} points per period required)"
        )
    scale = max(float(np.max(np.abs(profile.rate(taus)))), 1.0)
    integrals = np.cumsum([0.0] + [rate_integral(profile, a, b) for a, b in zip(taus[:-1], taus[1:])])
    if np.min(integrals) < -tol * scale:
        return Divisibility.NOT_CP
    if np.min(profile.rate(taus)) < -tol * scale:
        return Divisibility.ESSENTIALLY_NON_MARKOVIAN
    return Divisibility.CP_DIVISIBLE


def _ratio_log(r: float) -> float:
    """log((1+r)/(1-r)) / r, with the limit 2 at r = 0."""
    if r < 1e-8:
        return 2.0
    return 2.0 * math.atanh(r) / r


def entropy_production_closed(rho0: QubitState, params: DampingParams, tau: float, method: str = "quad") -> float:
    """Closed-form sigma_tau written in terms of the initial Bloch vector."""
    big_gamma = gamma_integral(params.profile, params.spec, tau, method=method)
    state, _ = _solution(rho0, params, tau, big_gamma)
    r = state.r
    if r >= 1.0 - PURE_TOL:
        raise PureStateSingularity(f"r_tau={r!r} at tau={tau!r}")
    g = float(params.profile.rate(tau))
    zi = abs(params.z_inf)
    lead = g * params.coth * math.exp(-2.0 * big_gamma)
    shift = rho0.z + zi
    fr = _ratio_log(r)
    transverse = rho0.x ** 2 + rho0.y ** 2
    bracket = (transverse + 2.0 * math.exp(-2.0 * big_gamma) * shift ** 2) * fr / 4.0 + shift * (
        params.spec.beta * params.spec.omega / 2.0 - zi * fr / 2.0
    )
    return lead * bracket


def abc_decomposition(rho0: QubitState, params: DampingParams, tau: float, method: str = "quad"):
    """The three terms of sigma_tau = gamma coth e^{-2G} [A + B + C].

    A = (x0^2 + y0^2)/(4 r) L(r),  B = (z0 + |z_inf|)/2 L(|z_inf|),
    C = (z0 + |z_inf|) z_tau/(2 r) L(r),  with L(r) = log((1+r)/(1-r)).
    """
    big_gamma = gamma_integral(params.profile, params.spec, tau, method=method)
    return _abc(rho0, params, tau, big_gamma)


def _abc(rho0: QubitState, params: DampingParams, tau: float, big_gamma: float):
    state, _ = _solution(rho0, params, tau, big_gamma)
    r = state.r
    if r >= 1.0 - PURE_TOL:
        raise PureStateSingularity(f"r_tau={r!r} at tau={tau!r}")
    zi = abs(params.z_inf)
    shift = rho0.z + zi
    fr = _ratio_log(r)
    a_term = (rho0.x ** 2 + rho0.y ** 2) * fr / 4.0
    # L(|z_inf|) = 2 artanh(tanh(beta omega/2)) = beta omega
    b_term = shift * params.spec.beta * params.spec.omega / 2.0
    c_term = shift * state.z * fr / 2.0
    return a_term, b_term, c_term


def log_inequality_check(x: float) -> bool:
    """The four logarithm bounds used in the positivity proof, at ``x``."""
    if not (0.0 < x < 1.0):
        raise ParameterOutOfRange("x must lie in (0, 1)")
    lp = abs(math.log1p(x))
    lm = abs(math.log1p(-x))
    return (
        2 * x / (2 + x) <= lp <= x / 2 * (2 + x) / (1 + x)
        and 2 * x / (2 - x) <= lm <= x / 2 * (2 - x) / (1 - x)
    )


def f_log_ratio(x: float) -> float:
    """f(x) = (1/x) log((1+x)/(1-x))."""
    return _ratio_log(x)


def f_monotone_check(x1: float, x2: float) -> bool:
    if not (0.0 < x1 < x2 < 1.0):
        raise ParameterOutOfRange("need 0 < x1 < x2 < 1")
    return f_log_ratio(x1) <= f_log_ratio(x2)


@dataclass(frozen=True)
class SignCheck:
    beta: float
    omega: float
    tau: float
    gamma0: float
    a: float
    nu: float
    x0: float
    y0: float
    z0: float
    rate: float
    sigma: float
    abc: float

    @property
    def consistent(self) -> bool:
        return math.copysign(1.0, self.sigma) == math.copysign(1.0, self.rate) and self.sigma != 0.0


def random_sign_config(rng: np.random.Generator, max_big_gamma: float = 6.0):
    """Draw (rho0, params, tau) for the sign theorem.

    Profiles are oscillatory with a in (1.1, 4.5), so gamma changes sign
    while the map stays CP.  Draws with G_tau above ``max_big_gamma`` are
    rejected: sigma then scales like e^{-4G} and its sign drowns in rounding.
    Draws too close to the Gibbs state or to a zero of gamma are rejected as well.
    """
    while True:
        beta = rng.uniform(0.05, 5.0)
        omega = rng.uniform(0.1, 10.0)
        tau = rng.uniform(0.0, 10.0)
        gamma0 = 10.0 ** rng.uniform(-3.0, 0.0)
        a = rng.uniform(1.1, 4.5)
        nu = rng.uniform(0.5, 10.0)
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        r0 = rng.uniform(0.0, 1.0) ** (1.0 / 3.0)
        rho0 = QubitState.from_vector(r0 * direction)
        params = DampingParams(DampingProfile("osc", gamma0, a, nu), GibbsSpec(beta, omega))
        big_gamma = gamma_integral(params.profile, params.spec, tau, method="analytic")
        if not (0.0 < big_gamma <= max_big_gamma):
            continue
        if abs(params.profile.rate(tau)) < 1e-6 * gamma0:
            continue
        if np.linalg.norm(rho0.vector - np.array([0.0, 0.0, params.z_inf])) < 1e-3:
            continue
        state, _ = _solution(rho0, params, tau, big_gamma)
        if state.r >= 1.0 - 1e-9:
            continue
        return rho0, params, tau


def check_sign(rho0: QubitState, params: DampingParams, tau: float) -> SignCheck:
    big_gamma = gamma_integral(params.profile, params.spec, tau, method="analytic")
    state, vel = _solution(rho0, params, tau, big_gamma)
    sigma = entropy_production(state, vel, params.spec)
    a_term, b_term, c_term = _abc(rho0, params, tau, big_gamma)
    p = params.profile
    return SignCheck(
        params.spec.beta, params.spec.omega, tau, p.gamma0, p.a, p.nu,
        rho0.x, rho0.y, rho0.z, float(p.rate(tau)), sigma, a_term + b_term + c_term,
    )


def sign_theorem_sweep(count: int, seed: int, stream: int = 0) -> list[SignCheck]:
    rng = make_rng(seed, stream)
    return [check_sign(*random_sign_config(rng)) for _ in range(count)]
