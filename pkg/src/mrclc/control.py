"""Control law, projection, adaptation laws and the learning memories.

Three update laws for the parameter estimate ``W_hat`` are provided:

* ``mrac_rate``        tracking-error driven gradient law.
* ``concurrent_rate``  adds modelling errors over a stack of recorded points.
* ``composite_rate``   adds the prediction error ``G_e - Theta_e W_hat`` built
  from a moving-window integral of the regressor.

All rates pass through the ball projection ``project`` so that the estimate
stays within radius ``c_w``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, Infeasible
from .linalg import is_hurwitz, min_eig_sym, solve_lyapunov

LAWS = ("mrac", "concurrent", "composite")


@dataclass
class ControllerConfig:
    k_e: np.ndarray
    k_r: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    gamma: float
    k_w: float
    c_w: float
    tau_d: float
    omega: float
    zeta: float
    sigma_eval_period: float = 0.05
    stack_capacity: int = 10
    stack_threshold: float = 1e-6
    # Stack recording waits for the derivative filter transient to die out.
    record_start: float = 0.5

    def __post_init__(self):
        for name in ("k_e", "k_r", "Q", "P"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("gamma", "c_w", "tau_d", "omega", "zeta", "sigma_eval_period"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.k_w < 0:
            raise ValueError("k_w must be non-negative")
        n = self.k_e.shape[0]
        if self.k_r.shape != (n + 1,) or self.Q.shape != (n, n) or self.P.shape != (n, n):
            raise DimensionMismatch("controller gain shapes are inconsistent")

    @property
    def Pb(self):
        return self.P[:, -1]

    @classmethod
    def design(cls, Lam, A_r, b_r, k_e, Q, **learning):
        """Build a config from the plant/reference matrices, solving for k_r and P."""
        Lam = np.asarray(Lam, dtype=float)
        k_e = np.asarray(k_e, dtype=float)
        A = closed_loop_matrix(Lam, k_e)
        if not is_hurwitz(A):
            raise ValueError("Lam - b k_e^T is not Hurwitz for the chosen k_e")
        P = solve_lyapunov(A, Q)
        k_r = solve_feedforward_gain(Lam, A_r, b_r)
        return cls(k_e=k_e, k_r=k_r, Q=Q, P=P, **learning)


def closed_loop_matrix(Lam, k_e):
    """``A = Lam - b k_e^T`` for the companion input vector ``b = e_n``."""
    A = np.array(Lam, dtype=float)
    A[-1] -= np.asarray(k_e, dtype=float)
    return A


def solve_feedforward_gain(Lam, A_r, b_r):
    """Return k_r with ``b k_r^T [x_r; r] = (A_r - Lam) x_r + b_r r``."""
    D = np.asarray(A_r, dtype=float) - np.asarray(Lam, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise DimensionMismatch("A_r and Lam must be square and equal-sized")
    if np.any(np.abs(D[:-1]) > 1e-12):
        raise Infeasible("A_r - Lam must vanish outside its last row")
    return np.append(D[-1], float(b_r))


def control_input(cfg, e, x_re, phi, W_hat):
    """Return ``(u, (u_pd, u_re, u_ad))``."""
    u_pd = -float(cfg.k_e @ e)
    u_re = float(cfg.k_r @ x_re)
    u_ad = -float(W_hat @ phi)
    return u_pd + u_re + u_ad, (u_pd, u_re, u_ad)


def project(W_hat, v, c_w):
    """Ball projection: strip the outward radial part of ``v`` on or outside the ball."""
    W_hat = np.asarray(W_hat, dtype=float)
    v = np.asarray(v, dtype=float)
    w2 = float(W_hat @ W_hat)
    if w2 >= c_w * c_w:
        wv = float(W_hat @ v)
        if wv > 0.0:
            return v - W_hat * (wv / w2)
    return v


def clamp_to_ball(W_hat, c_w):
    """Pull a discretely integrated estimate back onto the ball if it overshot."""
    norm = float(np.linalg.norm(W_hat))
    if norm > c_w:
        return W_hat * (c_w / norm)
    return W_hat


# -- command filter ---------------------------------------------------------

@dataclass
class FilterState:
    e_hat: float
    edot_hat: float = 0.0

    @classmethod
    def initial(cls, e_n0):
        return cls(float(e_n0), 0.0)


def filter_derivative(e_hat, edot_hat, e_n, omega, zeta):
    return edot_hat, -2.0 * zeta * omega * edot_hat + omega * omega * (e_n - e_hat)


def filter_step(state, e_n, omega, zeta, h):
    """One RK4 step of the unit-gain filter with ``e_n`` held over the step."""
    from .dynamics import rk4_step

    def deriv(_t, s):
        return np.array(filter_derivative(s[0], s[1], e_n, omega, zeta))

    s = rk4_step(deriv, 0.0, np.array([state.e_hat, state.edot_hat]), h)
    return FilterState(float(s[0]), float(s[1]))


# -- moving-window integrals ------------------------------------------------

class WindowBuffer:
    """Ring of regressor samples with trapezoidal running sums over ``tau_d``.

    ``theta`` approximates the integral of ``Phi Phi^T`` over the last
    ``tau_d`` seconds and ``G`` the matching integral of ``Phi * y`` where
    ``y`` estimates ``W*^T Phi``. Before ``tau_d`` has elapsed the integral runs
    from 0.
    """

    def __init__(self, N, tau_d, h):
        self.N = N
        self.h = float(h)
        self.intervals = int(round(tau_d / h))
        if self.intervals < 1:
            raise ValueError("tau_d must span at least one step")
        size = self.intervals + 1
        self._outer = np.zeros((size, N, N))
        self._vec = np.zeros((size, N))
        self._head = 0  # slot of the oldest sample
        self.count = 0
        self._sum_outer = np.zeros((N, N))
        self._sum_vec = np.zeros(N)

    @property
    def capacity(self):
        return self._outer.shape[0]

    def push(self, phi, integrand):
        outer = np.outer(phi, phi)
        if self.count == self.capacity:
            self._sum_outer -= self._outer[self._head]
            self._sum_vec -= self._vec[self._head]
            slot = self._head
            self._head = (self._head + 1) % self.capacity
        else:
            slot = (self._head + self.count) % self.capacity
            self.count += 1
        self._outer[slot] = outer
        self._vec[slot] = integrand
        self._sum_outer += outer
        self._sum_vec += integrand

    def _ends(self, arr):
        return arr[self._head], arr[(self._head + self.count - 1) % self.capacity]

    @property
    def theta(self):
        if self.count < 2:
            return np.zeros((self.N, self.N))
        first, last = self._ends(self._outer)
        th = self.h * (self._sum_outer - 0.5 * (first + last))
        return 0.5 * (th + th.T)

    @property
    def G(self):
        if self.count < 2:
            return np.zeros(self.N)
        first, last = self._ends(self._vec)
        return self.h * (self._sum_vec - 0.5 * (first + last))

    def ordered(self):
        """Stored samples, oldest first."""
        idx = (self._head + np.arange(self.count)) % self.capacity
        return self._outer[idx], self._vec[idx]

    def direct_quadrature(self):
        """Recompute ``(theta, G)`` from the stored samples with ``np.trapezoid``."""
        outer, vec = self.ordered()
        if self.count < 2:
            return np.zeros((self.N, self.N)), np.zeros(self.N)
        return np.trapezoid(outer, dx=self.h, axis=0), np.trapezoid(vec, dx=self.h, axis=0)

    def recompute(self):
        """Rebuild the running sums from scratch to cancel add/subtract drift."""
        outer, vec = self.ordered()
        self._sum_outer = outer.sum(axis=0)
        self._sum_vec = vec.sum(axis=0)


def window_update(buf, phi, integrand, t=None, h=None):
    buf.push(phi, integrand)
    return buf


def window_integrand(phi, edot_n, W_hat, a_n, e):
    """Integrand whose window integral estimates ``Theta W*``.

    Uses ``edot_n - a_n^T e + W_hat^T Phi = W*^T Phi`` from the error
    dynamics, with ``a_n`` the last row of ``A``.
    """
    return phi * (edot_n + float(W_hat @ phi) - float(a_n @ e))


@dataclass
class ExcitationMemory:
    """Best-so-far snapshot of the window integrals, ranked by min eigenvalue."""

    N: int
    sigma_best: float = 0.0
    sigma_r: float = 0.0
    T_e: float | None = None
    theta_frozen: np.ndarray = None
    G_frozen: np.ndarray = None

    def __post_init__(self):
        if self.theta_frozen is None:
            self.theta_frozen = np.zeros((self.N, self.N))
        if self.G_frozen is None:
            self.G_frozen = np.zeros(self.N)


def excitation_update(mem, buf, t):
    theta = buf.theta
    mem.sigma_r = min_eig_sym(theta)
    if mem.sigma_r > mem.sigma_best:
        mem.sigma_best = mem.sigma_r
        mem.theta_frozen = theta
        mem.G_frozen = buf.G
        mem.T_e = float(t)
    return mem


# -- concurrent-learning data stack -----------------------------------------

@dataclass
class DataStack:
    N: int
    capacity: int
    threshold: float = 1e-6
    phis: list = field(default_factory=list)
    fhats: list = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < self.N:
            raise ValueError("stack capacity must be at least N")

    def __len__(self):
        return len(self.phis)

    def gram(self):
        """``Z Z^T`` with ``Z`` holding the stored regressors as columns."""
        S = np.zeros((self.N, self.N))
        for phi in self.phis:
            S += np.outer(phi, phi)
        return S

    def weighted_sum(self):
        s = np.zeros(self.N)
        for phi, f in zip(self.phis, self.fhats):
            s += f * phi
        return s

    def min_eig(self):
        return min_eig_sym(self.gram()) if self.phis else 0.0


def record_point(stack, phi, fhat):
    """Offer ``(phi, fhat)`` to the stack; keep it only if it enlarges min eig of ``Z Z^T``."""
    phi = np.array(phi, dtype=float)
    cand = np.outer(phi, phi)
    S = stack.gram()
    current = min_eig_sym(S) if stack.phis else 0.0
    if len(stack) < stack.capacity:
        rank_deficient = current < stack.threshold
        if (rank_deficient and np.any(phi != 0.0)) or min_eig_sym(S + cand) >= current + stack.threshold:
            stack.phis.append(phi)
            stack.fhats.append(float(fhat))
        return stack
    # full: drop the entry whose removal costs least, if the swap is a net gain
    removal = [min_eig_sym(S - np.outer(p, p)) for p in stack.phis]
    j = int(np.argmax(removal))
    swapped = S - np.outer(stack.phis[j], stack.phis[j]) + cand
    if min_eig_sym(swapped) >= current + stack.threshold:
        stack.phis[j] = phi
        stack.fhats[j] = float(fhat)
    return stack


class StackSums:
    """Cached ``Z Z^T`` and ``sum f_j Phi_j`` so a rate evaluation is O(N^2)."""

    def __init__(self, stack):
        self.gram = stack.gram()
        self.weighted = stack.weighted_sum()
        self.empty = len(stack) == 0


# -- adaptation rates -------------------------------------------------------

def mrac_rate(cfg, e, phi, W_hat):
    return project(W_hat, cfg.gamma * (float(e @ cfg.Pb) * phi), cfg.c_w)


def composite_rate(cfg, e, phi, mem, W_hat):
    eps = mem.G_frozen - mem.theta_frozen @ W_hat
    drive = float(e @ cfg.Pb) * phi + cfg.k_w * eps
    return project(W_hat, cfg.gamma * drive, cfg.c_w)


def concurrent_rate(cfg, e, phi, stack, W_hat):
    """Concurrent-learning rate; ``stack`` may be a DataStack or its StackSums."""
    sums = stack if isinstance(stack, StackSums) else StackSums(stack)
    drive = float(e @ cfg.Pb) * phi
    if not sums.empty:
        # sum_j (f_j - W_hat^T Phi_j) Phi_j
        drive = drive + (sums.weighted - sums.gram @ W_hat)
    return project(W_hat, cfg.gamma * drive, cfg.c_w)
