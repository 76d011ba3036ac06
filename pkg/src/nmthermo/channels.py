"""One-qubit channels in three interchangeable forms and divisibility tests.

* :class:`KrausSet` -- operators E_i with sum E_i^dag E_i = 1.
* :class:`BlochAffineMap` -- r -> T r + t on Bloch vectors.
* :class:`ChoiMatrix` -- C = sum_ij |i><j| (x) Phi(|i><j|), unnormalized, so
  trace C = 2 for a trace-preserving map and the identity channel gives the
  projector onto |00> + |11> with spectrum {2, 0, 0, 0}.  Only the sign of
  the smallest eigenvalue is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import ParameterOutOfRange, SingularMap
from .qstate import IDENTITY, PAULIS, QubitState

COMPLETENESS_TOL = 1e-12
CP_TOL = 1e-10
POSITIVITY_TOL = 1e-9
MAX_COND = 1e12


@dataclass(frozen=True, eq=False)
class KrausSet:
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(op, dtype=complex) for op in self.operators)
        if not ops or any(op.shape != (2, 2) for op in ops):
            raise ParameterOutOfRange("Kraus operators must be a non-empty list of 2x2 matrices")
        object.__setattr__(self, "operators", ops)
        dev = np.abs(self.completeness() - IDENTITY).max()
        if dev > COMPLETENESS_TOL:
            raise ParameterOutOfRange(f"Kraus operators are not trace preserving (deviation {dev:.2e})")

    def completeness(self) -> np.ndarray:
        return sum(op.conj().T @ op for op in self.operators)

    def __call__(self, m: np.ndarray) -> np.ndarray:
        return sum(op @ m @ op.conj().T for op in self.operators)


@dataclass(frozen=True, eq=False)
class BlochAffineMap:
    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float).reshape(3, 3))
        object.__setattr__(self, "shift", np.asarray(self.shift, dtype=float).reshape(3))

    @classmethod
    def identity(cls) -> "BlochAffineMap":
        return cls(np.eye(3), np.zeros(3))

    def apply_vector(self, v) -> np.ndarray:
        return self.linear @ np.asarray(v, dtype=float) + self.shift

    def apply(self, rho: QubitState) -> QubitState:
        return QubitState.from_vector(self.apply_vector(rho.vector))

    def __matmul__(self, other: "BlochAffineMap") -> "BlochAffineMap":
        """Composition ``self o other``."""
        return BlochAffineMap(self.linear @ other.linear, self.linear @ other.shift + self.shift)

    def __call__(self, m: np.ndarray) -> np.ndarray:
        # linear extension to arbitrary 2x2 matrices m = (t 1 + c . sigma)/2
        m = np.asarray(m, dtype=complex)
        t = np.trace(m)
        c = np.array([np.trace(p @ m) for p in PAULIS])
        c_out = self.linear @ c + t * self.shift
        return 0.5 * (t * IDENTITY + sum(ci * p for ci, p in zip(c_out, PAULIS)))

    def inverse(self) -> "BlochAffineMap":
        cond = np.linalg.cond(self.linear)
        if not np.isfinite(cond) or cond > MAX_COND:
            raise SingularMap(f"linear part is not invertible (condition number {cond:.3e})")
        inv = np.linalg.inv(self.linear)
        return BlochAffineMap(inv, -inv @ self.shift)

    def distance(self, other: "BlochAffineMap") -> float:
        return float(max(np.abs(self.linear - other.linear).max(), np.abs(self.shift - other.shift).max()))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ParameterOutOfRange("Choi matrix must be 4x4")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ParameterOutOfRange("Choi matrix is not Hermitian")
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def kraus_gad(p: float, gamma: float) -> KrausSet:
    """Generalized amplitude damping channel with the four standard operators."""
    if not (0.0 <= p <= 1.0) or not (0.0 <= gamma <= 1.0):
        raise ParameterOutOfRange(f"p and gamma must lie in [0, 1], got p={p!r}, gamma={gamma!r}")
    k0 = np.array([[1, 0], [0, 0]], dtype=complex)
    k1 = np.array([[0, 0], [0, 1]], dtype=complex)
    up = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
    down = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    e0 = np.sqrt(p) * (k0 + np.sqrt(1 - gamma) * k1)
    e1 = np.sqrt(p * gamma) * up
    e2 = np.sqrt(1 - p) * (np.sqrt(1 - gamma) * k0 + k1)
    e3 = np.sqrt((1 - p) * gamma) * down
    return KrausSet((e0, e1, e2, e3))


def apply_channel(k: KrausSet, rho: QubitState) -> QubitState:
    out = k(rho.matrix())
    return QubitState.from_matrix(out)


def affine_from_kraus(k: KrausSet) -> BlochAffineMap:
    linear = np.empty((3, 3))
    for j, pj in enumerate(PAULIS):
        image = k(pj)
        for i, pi in enumerate(PAULIS):
            linear[i, j] = 0.5 * np.trace(pi @ image).real
    image = k(IDENTITY)
    shift = np.array([0.5 * np.trace(p @ image).real for p in PAULIS])
    return BlochAffineMap(linear, shift)


def choi_from(channel: BlochAffineMap | KrausSet) -> ChoiMatrix:
    blocks = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            blocks += np.kron(unit, channel(unit))
    # symmetrize rounding noise before the Hermiticity check
    return ChoiMatrix(0.5 * (blocks + blocks.conj().T))


def is_cp(c: ChoiMatrix, tol: float = CP_TOL) -> bool:
    return bool(c.eigenvalues()[0] >= -tol)


def _fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * k / n)
    azimuth = np.pi * (1.0 + 5.0 ** 0.5) * k
    return np.column_stack(
        (np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar))
    )


def max_image_radius(channel: BlochAffineMap, n_points: int = 20000, refine: int = 4) -> float:
    """Largest Bloch radius reached by the image of the unit sphere."""
    pts = _fibonacci_sphere(n_points)
    radii = np.linalg.norm(pts @ channel.linear.T + channel.shift, axis=1)
    best = float(radii.max())

    def neg_radius(angles):
        th, ph = angles
        n = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        return -float(np.linalg.norm(channel.apply_vector(n)))

    for idx in np.argsort(radii)[-refine:]:
        x, y, z = pts[idx]
        start = np.array([np.arccos(np.clip(z, -1, 1)), np.arctan2(y, x)])
        res = minimize(neg_radius, start, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
        best = max(best, -float(res.fun))
    return best


def is_positive_map(channel: BlochAffineMap, tol: float = POSITIVITY_TOL) -> bool:
    """True iff the Bloch ball is mapped into itself (sphere sampling plus
    local refinement of the worst samples)."""
    return max_image_radius(channel) <= 1.0 + tol


def intertwiner(family: Callable[[float], BlochAffineMap], tau: float, s: float) -> BlochAffineMap:
    """The map V with family(tau) = V o family(s)."""
    if not (0.0 <= s <= tau):
        raise ParameterOutOfRange(f"need 0 <= s <= tau, got s={s!r}, tau={tau!r}")
    return family(tau) @ family(s).inverse()


def random_kraus(rng: np.random.Generator, n_ops: int = 4) -> KrausSet:
    """Kraus set cut from a Haar-like random isometry C^2 -> C^(2 n_ops)."""
    g = rng.normal(size=(2 * n_ops, 2)) + 1j * rng.normal(size=(2 * n_ops, 2))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausSet(tuple(q[2 * i: 2 * i + 2, :] for i in range(n_ops)))


def affine_from_matrix_function(phi: Callable[[np.ndarray], np.ndarray]) -> BlochAffineMap:
    """Bloch form of an arbitrary linear, trace-preserving map on 2x2 matrices."""
    linear = np.array([[0.5 * np.trace(pi @ phi(pj)).real for pj in PAULIS] for pi in PAULIS])
    image = phi(IDENTITY)
    return BlochAffineMap(linear, np.array([0.5 * np.trace(p @ image).real for p in PAULIS]))


def transpose_map() -> BlochAffineMap:
    return BlochAffineMap(np.diag([1.0, -1.0, 1.0]), np.zeros(3))

