"""Thermodynamic bookkeeping along a qubit trajectory.

For an undriven qubit with H = (omega/2) sz in contact with a bath at inverse
temperature beta:

    dQ     = Tr[drho H]          = (omega/2) dz
    dS     = -(1/2) log((1+r)/(1-r)) dr
    sigma  = dS - beta dQ        = -d/dt S(rho_t || rho_beta)
    Sigma  = int_0^t sigma       = S(rho_0 || rho_beta) - S(rho_t || rho_beta)
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np

from .errors import GridTooCoarse, PureStateSingularity
from .qstate import GibbsSpec, QubitState, relative_entropy_to_gibbs, von_neumann_entropy

PURE_TOL = 1e-12
SIGMA_RTOL = 1e-5
SIGMA_ATOL = 1e-9


@dataclass(frozen=True)
class ThermoSample:
    tau: float
    x: float
    y: float
    z: float
    S: float
    dS: float
    dQ: float
    sigma: float
    Sigma: float
    relent: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> tuple:
        return astuple(self)


def heat_flux(state: QubitState, dstate, spec: GibbsSpec) -> float:
    return 0.5 * spec.omega * float(dstate[2])


def entropy_rate(state: QubitState, dstate) -> float:
    r = state.r
    radial = float(np.dot(state.vector, np.asarray(dstate, dtype=float)))  # r * dr/dt
    if r == 0.0 or radial == 0.0:
        return 0.0
    if r >= 1.0 - PURE_TOL:
        raise PureStateSingularity(f"entropy rate diverges at r={r!r} with dr/dt != 0")
    # -(1/2) L(r) dr = -(artanh(r)/r) * (r dr)
    ratio = 1.0 if r < 1e-8 else math.atanh(r) / r
    return -ratio * radial


def entropy_production(state: QubitState, dstate, spec: GibbsSpec) -> float:
    return entropy_rate(state, dstate) - spec.beta * heat_flux(state, dstate, spec)


class IntegratedEntropyProduction(NamedTuple):
    quadrature: float
    relent_difference: float


def thermo_series(
    taus: Sequence[float],
    states: Sequence[QubitState],
    velocities: Sequence,
    spec: GibbsSpec,
) -> list[ThermoSample]:
    """Evaluate the full ledger on a time grid.

    ``Sigma`` is the running trapezoid integral of ``sigma``.  At a pure-state
    instant where the entropy rate diverges, ``sigma`` is reported as +inf and
    the adjacent trapezoid panel is replaced by the (finite) relative-entropy
    difference over that panel.
    """
    taus = np.asarray(taus, dtype=float)
    if len(taus) == 0:
        return []
    if np.any(np.diff(taus) <= 0):
        raise GridTooCoarse("time grid must be strictly increasing")
    relents, sigmas, dss, dqs, ents = [], [], [], [], []
    for state, vel in zip(states, velocities):
        dq = heat_flux(state, vel, spec)
        try:
            ds = entropy_rate(state, vel)
        except PureStateSingularity:
            ds = math.inf
        dss.append(ds)
        dqs.append(dq)
        sigmas.append(ds - spec.beta * dq)
        ents.append(von_neumann_entropy(state))
        relents.append(relative_entropy_to_gibbs(state, spec))

    cumulative = [0.0]
    for i in range(1, len(taus)):
        if math.isfinite(sigmas[i - 1]) and math.isfinite(sigmas[i]):
            panel = 0.5 * (sigmas[i - 1] + sigmas[i]) * (taus[i] - taus[i - 1])
        else:
            panel = relents[i - 1] - relents[i]
        cumulative.append(cumulative[-1] + panel)

    return [
        ThermoSample(float(t), s.x, s.y, s.z, float(S), float(dS), float(dQ), float(sig), float(Sig), float(rel))
        for t, s, S, dS, dQ, sig, Sig, rel in zip(taus, states, ents, dss, dqs, sigmas, cumulative, relents)
    ]


def integrated_entropy_production(
    series: Sequence[ThermoSample],
    spec: GibbsSpec,
    initial: QubitState,
    final: QubitState,
) -> IntegratedEntropyProduction:
    """Sigma at the end of ``series`` computed two ways: by the trapezoid rule
    on the sampled ``sigma`` and as the drop in relative entropy to the Gibbs
    state.  Raises :class:`GridTooCoarse` when they differ by more than ten
    times the nominal tolerance (1e-5 relative, 1e-9 absolute)."""
    if not series:
        raise GridTooCoarse("empty series")
    difference = relative_entropy_to_gibbs(initial, spec) - relative_entropy_to_gibbs(final, spec)
    quad = series[-1].Sigma
    if abs(quad - difference) > 10.0 * (SIGMA_RTOL * abs(difference) + SIGMA_ATOL):
        raise GridTooCoarse(
            f"trapezoid Sigma={quad!r} disagrees with relative-entropy difference {difference!r}"
        )
    return IntegratedEntropyProduction(quad, difference)
