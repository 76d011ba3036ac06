"""Qubit states in the Bloch representation, entropies and Gibbs states.

A state is stored as its Bloch vector ``(x, y, z)`` so that

    rho = (1 + x sx + y sy + z sz) / 2.

Matrices are only built on demand.  All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BlochOutOfBall, InfiniteRelativeEntropy, ParameterOutOfRange

BALL_TOL = 1e-12
EIG_CLAMP = 1e-14

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class QubitState:
    """Density matrix of one qubit, stored as a Bloch vector."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise BlochOutOfBall(f"Bloch component {name}={value!r} is not finite")
            object.__setattr__(self, name, float(value))
        if self.r > 1.0 + BALL_TOL:
            raise BlochOutOfBall(f"Bloch vector length {self.r!r} exceeds 1")

    @property
    def r(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def eigenvalues(self) -> tuple[float, float]:
        r = min(self.r, 1.0)
        return (1.0 - r) / 2.0, (1.0 + r) / 2.0

    def matrix(self) -> np.ndarray:
        return 0.5 * (IDENTITY + self.x * SIGMA_X + self.y * SIGMA_Y + self.z * SIGMA_Z)

    @classmethod
    def from_matrix(cls, rho: np.ndarray) -> "QubitState":
        rho = np.asarray(rho, dtype=complex)
        trace = np.trace(rho).real
        if abs(trace - 1.0) > 1e-10:
            raise BlochOutOfBall(f"trace {trace!r} differs from 1")
        x, y, z = (float(np.trace(rho @ p).real) for p in PAULIS)
        return cls(x, y, z)

    @classmethod
    def from_vector(cls, v) -> "QubitState":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)


@dataclass(frozen=True)
class GibbsSpec:
    """Inverse temperature ``beta`` and level splitting ``omega`` of H = (omega/2) sz."""

    beta: float
    omega: float

    def __post_init__(self):
        if not (self.beta >= 0.0):
            raise ParameterOutOfRange(f"beta must be >= 0, got {self.beta!r}")
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ParameterOutOfRange(f"omega must be > 0, got {self.omega!r}")

    @property
    def z_inf(self) -> float:
        return -math.tanh(self.beta * self.omega / 2.0)

    @property
    def occupation(self) -> float:
        """Bose occupation n = 1/(exp(beta*omega) - 1); infinite at beta = 0."""
        x = self.beta * self.omega
        if x == 0.0:
            return math.inf
        return 1.0 / math.expm1(x)

    @property
    def coth(self) -> float:
        """coth(beta*omega/2) = 2n + 1."""
        x = self.beta * self.omega / 2.0
        if x == 0.0:
            return math.inf
        return 1.0 / math.tanh(x)


def state_from_bloch(x: float, y: float, z: float) -> QubitState:
    return QubitState(x, y, z)


def gibbs_state(spec: GibbsSpec) -> QubitState:
    return QubitState(0.0, 0.0, spec.z_inf)


def _xlogx(p: float) -> float:
    if p <= EIG_CLAMP:
        return 0.0
    return p * math.log(p)


def binary_entropy_of_radius(r: float) -> float:
    """Entropy of a qubit whose Bloch vector has length ``r``."""
    r = min(abs(r), 1.0)
    return -_xlogx((1.0 + r) / 2.0) - _xlogx((1.0 - r) / 2.0)


def von_neumann_entropy(state: QubitState) -> float:
    return binary_entropy_of_radius(state.r)


def log_ratio(r: float) -> float:
    """log((1 + r)/(1 - r)) = 2 artanh(r)."""
    return 2.0 * math.atanh(r)


def relative_entropy(rho: QubitState, sigma: QubitState) -> float:
    """Quantum relative entropy Tr[rho log rho - rho log sigma] in nats.

    Both matrices are diagonalized explicitly: the eigenvectors of a qubit
    state point along +/- its Bloch direction with eigenvalues (1 +/- r)/2,
    so <b_pm|rho|b_pm> = (1 +/- r_rho . s_hat)/2.
    """
    s = sigma.r
    if s > 0.0:
        s_hat = sigma.vector / s
    else:
        s_hat = np.array([0.0, 0.0, 1.0])
    s = min(s, 1.0)
    overlap = float(np.dot(rho.vector, s_hat))

    weights = ((1.0 + overlap) / 2.0, (1.0 - overlap) / 2.0)
    mus = ((1.0 + s) / 2.0, (1.0 - s) / 2.0)
    cross = 0.0
    for w, mu in zip(weights, mus):
        if w <= EIG_CLAMP:
            continue
        if mu <= EIG_CLAMP:
            raise InfiniteRelativeEntropy(
                "support of rho is not contained in the support of sigma"
            )
        cross += w * math.log(mu)
    value = -binary_entropy_of_radius(rho.r) - cross
    # rounding residue around an exact zero
    if -EIG_CLAMP < value < 0.0:
        return 0.0
    return value


def relative_entropy_to_gibbs(rho: QubitState, spec: GibbsSpec) -> float:
    """S(rho || rho_beta) = -S(rho) + beta <H> + log Z.

    Written with log Z = log(2 cosh(beta omega/2)) so it stays finite when
    the Gibbs populations underflow at large beta * omega.
    """
    half = 0.5 * spec.beta * spec.omega
    log_z = float(np.logaddexp(half, -half))
    value = -von_neumann_entropy(rho) + half * rho.z + log_z
    if -EIG_CLAMP < value < 0.0:
        return 0.0
    return value
