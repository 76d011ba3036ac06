"""Numerical plumbing: adaptive Gauss-Kronrod quadrature, an embedded
Runge-Kutta integrator for small systems, central differences and a
reproducible random generator.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MaxSubdivisions, StepUnderflow

QUAD_TOL = 1e-10
ODE_TOL = 1e-9
DEFAULT_SEED = 20170520

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
# Gauss nodes are the odd-indexed Kronrod nodes
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


@dataclass(frozen=True)
class QuadratureResult:
    value: float | np.ndarray
    error_estimate: float
    panels: int


def _gk15(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _XK), dtype=float)
    kron = half * np.tensordot(_WK, fx, axes=(0, 0))
    gauss = half * np.tensordot(_WG, fx, axes=(0, 0))
    err = float(np.max(np.abs(kron - gauss)))
    return kron, err


def adaptive_quad(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    rtol: float = 0.0,
    max_width: float | None = None,
    max_panels: int = 20000,
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod (7, 15) quadrature.

    ``f`` is called with a 1-D array of nodes and must return values of shape
    ``(nodes,)`` or ``(nodes, m)``; the latter integrates ``m`` functions at
    once, with the error estimate taken as the worst component.  The panel
    with the largest |K15 - G7| is bisected until the summed estimate drops
    below ``max(tol, rtol * |value|)``.  ``max_width`` caps the initial panel
    size, which is how oscillatory integrands are resolved.
    """
    a = float(a)
    b = float(b)
    if a == b:
        probe = np.asarray(f(np.array([a])), dtype=float)
        return QuadratureResult(np.zeros(probe.shape[1:]) if probe.ndim > 1 else 0.0, 0.0, 0)

    n0 = 1
    if max_width is not None and max_width > 0:
        n0 = max(1, int(np.ceil(abs(b - a) / max_width)))
    edges = np.linspace(a, b, n0 + 1)

    heap = []
    total = None
    total_err = 0.0
    counter = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _gk15(f, lo, hi)
        heap.append((-err, counter, lo, hi, val))
        counter += 1
        total = val if total is None else total + val
        total_err += err
    heapq.heapify(heap)

    while True:
        target = max(tol, rtol * float(np.max(np.abs(total))))
        if total_err <= target:
            break
        if len(heap) >= max_panels:
            raise MaxSubdivisions(
                f"quadrature on [{a}, {b}] did not converge within {max_panels} panels "
                f"(error estimate {total_err:.3e})"
            )
        neg_err, _, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            raise MaxSubdivisions(f"panel [{lo}, {hi}] cannot be bisected further")
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total = total - val + v1 + v2
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, counter, lo, mid, v1))
        heapq.heappush(heap, (-e2, counter + 1, mid, hi, v2))
        counter += 2

    # re-sum to shed the drift of the running updates
    total = sum((item[4] for item in sorted(heap, key=lambda it: it[2])), start=0.0 * total)
    total_err = sum(-item[0] for item in heap)
    value = float(total) if np.ndim(total) == 0 else np.asarray(total)
    return QuadratureResult(value, float(total_err), len(heap))


@dataclass(frozen=True)
class OdeTrajectory:
    """Grid of times and the Bloch vectors reached there (one row per time)."""

    grid: np.ndarray
    values: np.ndarray

    @property
    def states(self):
        from .qstate import QubitState

        return [QubitState.from_vector(v) for v in self.values]


# Dormand-Prince 5(4)
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def ode_rk(
    f: Callable[[float, np.ndarray], np.ndarray],
    rho0,
    t_end: float,
    tol: float = ODE_TOL,
    t_eval=None,
    t0: float = 0.0,
    h0: float | None = None,
) -> OdeTrajectory:
    """Integrate ``dy/dt = f(t, y)`` with the Dormand-Prince 5(4) pair.

    ``rho0`` may be a :class:`QubitState` or any array.  Steps are clipped so
    every time in ``t_eval`` (default: just ``t0`` and ``t_end``) is hit
    exactly.  The local error is measured as ``max |e_i| / (tol (1 + |y_i|))``.
    """
    if hasattr(rho0, "vector"):
        y = np.array(rho0.vector, dtype=float)
    else:
        y = np.array(rho0, dtype=float)
    if t_eval is None:
        t_eval = np.array([t0, t_end])
    t_eval = np.asarray(t_eval, dtype=float)
    if np.any(np.diff(t_eval) <= 0):
        raise ValueError("t_eval must be strictly increasing")

    out = np.empty((len(t_eval), y.size))
    t = float(t0)
    k1 = np.asarray(f(t, y), dtype=float)
    span = max(abs(t_end - t0), 1e-300)
    h = h0 if h0 is not None else min(1e-3 * span, 0.01)
    h_min = 1e-14 * max(1.0, abs(t_end))

    for i, target in enumerate(t_eval):
        while target - t > 1e-15 * max(1.0, abs(target)):
            step = min(h, target - t)
            if step < h_min:
                raise StepUnderflow(f"step size {step:.3e} underflowed at t={t!r}")
            ks = [k1]
            for j in range(1, 7):
                yj = y + step * sum(a * k for a, k in zip(_DP_A[j], ks))
                ks.append(np.asarray(f(t + _DP_C[j] * step, yj), dtype=float))
            y_new = y + step * np.tensordot(_DP_B5, np.array(ks), axes=(0, 0))
            err_vec = step * np.tensordot(_DP_E, np.array(ks), axes=(0, 0))
            err = float(np.max(np.abs(err_vec) / (tol * (1.0 + np.abs(y_new)))))
            if err <= 1.0:
                t += step
                y = y_new
                k1 = ks[6]  # first-same-as-last
                factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
                if step == h:
                    h = step * factor
            else:
                h = step * max(0.2, 0.9 * err ** -0.2)
                if h < h_min:
                    raise StepUnderflow(f"step size {h:.3e} underflowed at t={t!r}")
        t = float(target)
        out[i] = y
    return OdeTrajectory(t_eval.copy(), out)


def central_diff(g: Callable[[float], float], t: float, h: float, richardson: bool = False) -> float:
    """Symmetric difference quotient; with ``richardson`` the O(h^2) term is
    eliminated using steps h and h/2."""
    d1 = (g(t + h) - g(t - h)) / (2.0 * h)
    if not richardson:
        return d1
    h2 = h / 2.0
    d2 = (g(t + h2) - g(t - h2)) / (2.0 * h2)
    return (4.0 * d2 - d1) / 3.0


def make_rng(seed: int = DEFAULT_SEED, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator; ``stream`` selects an independent key
    so parallel workers can draw reproducibly regardless of scheduling."""
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, stream]))
