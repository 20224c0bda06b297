"""Plant and reference-model dynamics, regression bases and the RK4 step.

The plant is in companion form ``xdot = Lam x + b (W*^T Phi(x) + u)`` with
``b = [0, ..., 0, 1]``; the reference model is ``xrdot = A_r x_r + b_r r(t) b``.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonFiniteOutput, NotHurwitz
from .linalg import is_hurwitz


@dataclass(frozen=True)
class RegressionBasis:
    name: str
    dimension: int
    evaluator: Callable[[np.ndarray], np.ndarray]


def _pendulum_basis(x):
    x1, x2 = float(x[0]), float(x[1])
    try:
        growth = math.exp(x1 * x2)
    except OverflowError:
        growth = math.inf
    return np.array([math.sin(x1), abs(x2) * x2, growth])


BASES = {
    "inverted_pendulum": RegressionBasis("inverted_pendulum", 3, _pendulum_basis),
}


def get_basis(name):
    try:
        return BASES[name]
    except KeyError:
        raise KeyError(f"unknown basis {name!r}; registered: {sorted(BASES)}") from None


def eval_basis(basis, x):
    phi = np.asarray(basis.evaluator(x), dtype=float)
    if phi.shape != (basis.dimension,):
        raise DimensionMismatch(f"basis {basis.name} returned shape {phi.shape}")
    if not np.isfinite(phi).all():
        raise NonFiniteOutput(f"basis {basis.name} is not finite at x={list(x)}: {list(phi)}")
    return phi


@dataclass
class PlantModel:
    Lam: np.ndarray
    W_true: np.ndarray
    basis: RegressionBasis

    def __post_init__(self):
        self.Lam = np.asarray(self.Lam, dtype=float)
        self.W_true = np.asarray(self.W_true, dtype=float)
        n = self.Lam.shape[0]
        if self.Lam.shape != (n, n):
            raise DimensionMismatch("Lam must be square")
        if self.W_true.shape != (self.basis.dimension,):
            raise DimensionMismatch("W_true length must match the basis dimension")

    @property
    def n(self):
        return self.Lam.shape[0]

    @property
    def b(self):
        b = np.zeros(self.n)
        b[-1] = 1.0
        return b


@dataclass(frozen=True)
class ReferenceSignal:
    """Piecewise-constant signal: ``value`` on each half-open ``[start, end)`` segment."""

    segments: tuple = ()
    default: float = 0.0

    def __post_init__(self):
        prev_end = -math.inf
        for start, end, _ in self.segments:
            if not (math.isfinite(start) and math.isfinite(end) and start < end):
                raise ValueError(f"bad segment [{start}, {end})")
            if start < prev_end:
                raise ValueError("segments overlap or are out of order")
            prev_end = end


def signal_value(sig, t):
    for start, end, value in sig.segments:
        if start <= t < end:
            return float(value)
    return float(sig.default)


@dataclass
class ReferenceModel:
    A_r: np.ndarray
    b_r: float
    signal: ReferenceSignal = field(default_factory=ReferenceSignal)

    def __post_init__(self):
        self.A_r = np.asarray(self.A_r, dtype=float)
        if not is_hurwitz(self.A_r):
            raise NotHurwitz("reference model matrix A_r must be strictly Hurwitz")


def plant_derivative(plant, x, u):
    x = np.asarray(x, dtype=float)
    dx = plant.Lam @ x
    dx[-1] += plant.W_true @ eval_basis(plant.basis, x) + u
    return dx


def reference_derivative(ref, x_r, t, r=None):
    """``A_r x_r + b_r r(t) b``. Pass ``r`` to hold the signal fixed over a step."""
    if r is None:
        r = signal_value(ref.signal, t)
    dxr = ref.A_r @ np.asarray(x_r, dtype=float)
    dxr[-1] += ref.b_r * r
    return dxr


def rk4_step(deriv, t, state, h):
    """Advance ``state`` by one classical Runge-Kutta step of size ``h``."""
    if not h > 0:
        raise ValueError("step size must be positive")
    state = np.asarray(state, dtype=float)
    k1 = deriv(t, state)
    k2 = deriv(t + 0.5 * h, state + 0.5 * h * k1)
    k3 = deriv(t + 0.5 * h, state + 0.5 * h * k2)
    k4 = deriv(t + h, state + h * k3)
    out = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteOutput(f"RK4 step at t={t} produced non-finite state")
    return out
