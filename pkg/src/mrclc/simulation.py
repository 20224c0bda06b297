"""Closed-loop simulation, run records, metrics and the Lyapunov monitor."""

from dataclasses import dataclass, field

import numpy as np

from . import control as ctl
from .dynamics import PlantModel, ReferenceModel, eval_basis, rk4_step, signal_value
from .errors import Diverged, NonFiniteOutput
from .linalg import min_eig_sym

DIVERGENCE_LIMIT = 1e6


@dataclass
class Scenario:
    name: str
    plant: PlantModel
    reference: ReferenceModel
    controller: ctl.ControllerConfig
    x0: np.ndarray
    xr0: np.ndarray
    W0: np.ndarray
    duration: float
    h: float = 0.001
    law: str = "composite"
    noise: float = 0.0
    seed: int = 0
    output_period: float = 0.01
    # "filter" uses the command filter for the e_n derivative; "exact" injects
    # the ground-truth derivative (simulation-only oracle mode).
    derivative_source: str = "filter"
    recompute_period: float = 1.0
    divergence_limit: float = DIVERGENCE_LIMIT

    def __post_init__(self):
        for name in ("x0", "xr0", "W0"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.law not in ctl.LAWS:
            raise ValueError(f"law must be one of {', '.join(ctl.LAWS)}; got {self.law!r}")
        if self.derivative_source not in ("filter", "exact"):
            raise ValueError("derivative_source must be 'filter' or 'exact'")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if np.linalg.norm(self.W0) > self.controller.c_w:
            raise ValueError("initial estimate lies outside the projection ball")
        if np.linalg.norm(self.plant.W_true) > self.controller.c_w:
            raise ValueError("true parameter vector lies outside the projection ball")
        if self.noise < 0:
            raise ValueError("noise amplitude must be non-negative")

    @property
    def n(self):
        return self.plant.n

    @property
    def N(self):
        return self.plant.basis.dimension


@dataclass
class RunRecord:
    """Decimated time series of one run plus diagnostics gathered at full rate."""

    scenario: Scenario
    t: np.ndarray
    x: np.ndarray
    xr: np.ndarray
    e: np.ndarray
    u: np.ndarray
    u_pd: np.ndarray
    u_re: np.ndarray
    u_ad: np.ndarray
    W_hat: np.ndarray
    Wtilde_norm: np.ndarray
    sigma_r: np.ndarray
    sigma_best: np.ndarray
    V: np.ndarray
    e_hat: np.ndarray
    edot_hat: np.ndarray
    edot_true: np.ndarray
    stack_min_eig: np.ndarray
    T_e: float | None = None
    theta_e: np.ndarray | None = None
    max_W_norm: float = 0.0
    # (t, |Theta_run - Theta_direct|_max, |G_run - G_direct|_max) every recompute period
    window_checks: list = field(default_factory=list)
    # (t, ||G - Theta W*||, ||Theta W*||) at each excitation evaluation
    identity_checks: list = field(default_factory=list)
    diverged: bool = False

    def __len__(self):
        return len(self.t)

    @property
    def W_true(self):
        return self.scenario.plant.W_true


class _Series:
    def __init__(self):
        self.rows = {}

    def add(self, **values):
        for k, v in values.items():
            self.rows.setdefault(k, []).append(v)

    def array(self, key, width=None):
        rows = self.rows.get(key, [])
        if not rows:
            return np.zeros((0, width)) if width else np.zeros(0)
        return np.array(rows, dtype=float)


def lyapunov_value(P, gamma, e, W_tilde):
    return 0.5 * float(e @ P @ e) + float(W_tilde @ W_tilde) / (2.0 * gamma)


def run(scenario):
    """Simulate the closed loop and return a RunRecord.

    Raises:
        Diverged: the plant state norm exceeded the divergence guard; the
            partial record is attached to the exception.
    """
    sc = scenario
    plant, ref, cfg = sc.plant, sc.reference, sc.controller
    n, N, h = sc.n, sc.N, sc.h
    Lam, b_r, W_true = plant.Lam, ref.b_r, plant.W_true
    A = ctl.closed_loop_matrix(Lam, cfg.k_e)
    a_n = A[-1]
    Pb = cfg.Pb
    omega, zeta = cfg.omega, cfg.zeta
    rng = np.random.default_rng(sc.seed)

    steps = int(round(sc.duration / h))
    decimate = max(1, int(round(sc.output_period / h)))
    eval_every = max(1, int(round(cfg.sigma_eval_period / h)))
    recompute_every = max(1, int(round(sc.recompute_period / h)))
    record_from = int(round(cfg.record_start / h))

    buf = ctl.WindowBuffer(N, cfg.tau_d, h)
    mem = ctl.ExcitationMemory(N)
    stack = ctl.DataStack(N, cfg.stack_capacity, cfg.stack_threshold) if cfg.stack_capacity > 0 else None
    sums = None

    state = np.concatenate([sc.x0, sc.xr0, [sc.x0[-1] - sc.xr0[-1], 0.0], sc.W0])
    sx, sxr, sf, sw = slice(0, n), slice(n, 2 * n), slice(2 * n, 2 * n + 2), slice(2 * n + 2, None)
    series = _Series()
    max_w = float(np.linalg.norm(sc.W0))

    law = sc.law
    ctx = {"r": 0.0, "noise": np.zeros(n)}

    def rate(e, phi, W):
        if law == "mrac":
            return ctl.mrac_rate(cfg, e, phi, W)
        if law == "composite":
            return ctl.composite_rate(cfg, e, phi, mem, W)
        return ctl.concurrent_rate(cfg, e, phi, sums, W)

    k_e, k_rx, k_rr, A_r = cfg.k_e, cfg.k_r[:n], cfg.k_r[n], ref.A_r

    def deriv(_t, s):
        x, xr, W = s[sx], s[sxr], s[sw]
        r = ctx["r"]
        x_meas = x + ctx["noise"] if sc.noise else x
        e = x_meas - xr
        phi = eval_basis(plant.basis, x_meas)
        u = k_rr * r - k_e @ e + k_rx @ xr - W @ phi
        out = np.empty_like(s)
        out[sx] = Lam @ x
        out[n - 1] += W_true @ (eval_basis(plant.basis, x) if sc.noise else phi) + u
        out[sxr] = A_r @ xr
        out[2 * n - 1] += b_r * r
        out[2 * n], out[2 * n + 1] = ctl.filter_derivative(s[2 * n], s[2 * n + 1], e[-1], omega, zeta)
        out[sw] = rate(e, phi, W)
        return out

    def partial_record():
        return _build_record(sc, series, mem, max_w, diagnostics)

    diagnostics = {"window": [], "identity": []}
    for k in range(steps + 1):
        t = k * h
        ctx["r"] = signal_value(ref.signal, t + 0.5 * h)
        if sc.noise:
            ctx["noise"] = sc.noise * rng.standard_normal(n)
        x, xr, W = state[sx], state[sxr], state[sw]
        x_meas = x + ctx["noise"] if sc.noise else x
        e_meas = x_meas - xr
        phi = eval_basis(plant.basis, x_meas)
        x_re = np.append(xr, ctx["r"])
        u, (u_pd, u_re, u_ad) = ctl.control_input(cfg, e_meas, x_re, phi, W)
        e_true = x - xr
        W_tilde = W_true - W
        phi_true = eval_basis(plant.basis, x)
        edot_true = float(a_n @ e_true) + float(W_tilde @ phi_true)
        edot_est = state[2 * n + 1] if sc.derivative_source == "filter" else edot_true

        buf.push(phi, ctl.window_integrand(phi, edot_est, W, a_n, e_meas))
        if k % recompute_every == 0 and k > 0:
            th_direct, g_direct = buf.direct_quadrature()
            diagnostics["window"].append(
                (t, float(np.max(np.abs(buf.theta - th_direct))), float(np.max(np.abs(buf.G - g_direct))))
            )
            buf.recompute()
        if k % eval_every == 0:
            ctl.excitation_update(mem, buf, t)
            th = buf.theta
            diagnostics["identity"].append(
                (t, float(np.linalg.norm(buf.G - th @ W_true)), float(np.linalg.norm(th @ W_true)))
            )
            if law == "concurrent" and stack is not None and k >= record_from:
                xr_dot_n = float(ref.A_r[-1] @ xr) + b_r * ctx["r"]
                fhat = edot_est + xr_dot_n - float(Lam[-1] @ x_meas) - u
                ctl.record_point(stack, phi, fhat)
                sums = None
        if law == "concurrent" and sums is None:
            sums = ctl.StackSums(stack) if stack is not None else ctl.StackSums(ctl.DataStack(N, N))

        if k % decimate == 0 or k == steps:
            series.add(
                t=t, x=x.copy(), xr=xr.copy(), e=e_true, u=u, u_pd=u_pd, u_re=u_re, u_ad=u_ad,
                W_hat=W.copy(), Wtilde_norm=float(np.linalg.norm(W_tilde)),
                sigma_r=mem.sigma_r, sigma_best=mem.sigma_best,
                V=lyapunov_value(cfg.P, cfg.gamma, e_true, W_tilde),
                e_hat=state[2 * n], edot_hat=state[2 * n + 1], edot_true=edot_true,
                stack_min_eig=stack.min_eig() if (stack is not None and law == "concurrent") else 0.0,
            )
        if k == steps:
            break

        try:
            state = rk4_step(deriv, t, state, h)
        except NonFiniteOutput as exc:
            exc.record = partial_record()
            raise
        state[sw] = ctl.clamp_to_ball(state[sw], cfg.c_w)
        max_w = max(max_w, float(np.linalg.norm(state[sw])))
        if np.linalg.norm(state[sx]) > sc.divergence_limit:
            rec = partial_record()
            rec.diverged = True
            raise Diverged(f"plant state norm exceeded {sc.divergence_limit:g} at t={t + h:.6g}", rec)

    return partial_record()


def _build_record(sc, series, mem, max_w, diagnostics):
    n, N = sc.n, sc.N
    return RunRecord(
        scenario=sc,
        t=series.array("t"),
        x=series.array("x", n),
        xr=series.array("xr", n),
        e=series.array("e", n),
        u=series.array("u"),
        u_pd=series.array("u_pd"),
        u_re=series.array("u_re"),
        u_ad=series.array("u_ad"),
        W_hat=series.array("W_hat", N),
        Wtilde_norm=series.array("Wtilde_norm"),
        sigma_r=series.array("sigma_r"),
        sigma_best=series.array("sigma_best"),
        V=series.array("V"),
        e_hat=series.array("e_hat"),
        edot_hat=series.array("edot_hat"),
        edot_true=series.array("edot_true"),
        stack_min_eig=series.array("stack_min_eig"),
        T_e=mem.T_e,
        theta_e=mem.theta_frozen.copy(),
        max_W_norm=max_w,
        window_checks=list(diagnostics["window"]),
        identity_checks=list(diagnostics["identity"]),
    )


# -- metrics and theorem monitor --------------------------------------------

def _rms(a):
    a = np.asarray(a, dtype=float)
    return float(np.sqrt(np.mean(a * a, axis=0))) if a.ndim == 1 else np.sqrt(np.mean(a * a, axis=0))


def metrics(record, tail_start):
    """Summary numbers of a run; tracking RMSE is taken over ``[tail_start, end]``."""
    if len(record) and not tail_start < record.t[-1] + 1e-12:
        raise ValueError("tail_start must precede the end of the run")
    mask = record.t >= tail_start - 1e-12
    W_true = record.W_true
    final_err = np.abs(record.W_hat[-1] - W_true) if len(record) else np.full(len(W_true), np.nan)
    rmse = np.sqrt(np.mean(record.e[mask] ** 2, axis=0)) if mask.any() else np.zeros(record.e.shape[1])
    return {
        "tracking_rmse": [float(v) for v in rmse],
        "final_Wtilde_norm": float(record.Wtilde_norm[-1]) if len(record) else float("nan"),
        "final_abs_error": [float(v) for v in final_err],
        "T_e": record.T_e,
        "sigma_best": float(record.sigma_best[-1]) if len(record) else 0.0,
        "max_abs_u": float(np.max(np.abs(record.u))) if len(record) else 0.0,
        "max_W_norm": record.max_W_norm,
    }


@dataclass
class TheoremMonitor:
    """Convergence rate and tolerances used by ``theorem_check``."""

    k_s: float
    slack: float
    envelope_factor: float = 1.05

    @classmethod
    def for_record(cls, record, slack_rel=1e-7, envelope_factor=1.05):
        cfg = record.scenario.controller
        sigma = float(record.sigma_best[-1]) if len(record) else 0.0
        lam_q = min_eig_sym(cfg.Q)
        lam_p = float(np.max(np.linalg.eigvalsh(cfg.P)))
        k_s = min(lam_q / lam_p, 2.0 * cfg.gamma * cfg.k_w * sigma)
        V0 = float(record.V[0]) if len(record) else 0.0
        return cls(k_s=k_s, slack=slack_rel * max(1.0, V0), envelope_factor=envelope_factor)


@dataclass
class TheoremReport:
    monotone_ok: bool
    worst_increase: float
    worst_increase_t: float | None
    envelope_checked: bool
    envelope_ok: bool | None
    worst_envelope_ratio: float | None
    worst_envelope_t: float | None
    k_s: float
    T_e: float | None
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return self.monotone_ok and (self.envelope_ok is not False)

    def lines(self):
        out = [
            f"V non-increasing: {'PASS' if self.monotone_ok else 'FAIL'} "
            f"(worst increase {self.worst_increase:.3e} at t={self.worst_increase_t})",
        ]
        if self.envelope_checked:
            out.append(
                f"exponential envelope: {'PASS' if self.envelope_ok else 'FAIL'} "
                f"(k_s={self.k_s:.6g}, T_e={self.T_e}, worst V/bound {self.worst_envelope_ratio:.4g} "
                f"at t={self.worst_envelope_t})"
            )
        else:
            out.append("exponential envelope: SKIPPED (law has no excitation memory)")
        return out


def theorem_check(record, monitor=None):
    """Check V(t) is non-increasing and, for composite runs, the exponential envelope after T_e."""
    monitor = monitor or TheoremMonitor.for_record(record)
    V, t = record.V, record.t
    violations = []
    worst, worst_t = 0.0, None
    if len(V) > 1:
        dV = np.diff(V)
        i = int(np.argmax(dV))
        worst, worst_t = float(dV[i]), float(t[i + 1])
        for j in np.nonzero(dV > monitor.slack)[0]:
            violations.append(("monotone", float(t[j + 1]), float(dV[j])))
    monotone_ok = worst <= monitor.slack

    checked = record.scenario.law == "composite" and record.T_e is not None and monitor.k_s > 0
    env_ok = ratio = ratio_t = None
    if checked:
        mask = t >= record.T_e - 1e-12
        V_te = float(np.interp(record.T_e, t, V))
        bound = monitor.envelope_factor * V_te * np.exp(-monitor.k_s * (t[mask] - record.T_e))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(bound > 0, V[mask] / bound, np.where(V[mask] > 0, np.inf, 0.0))
        i = int(np.argmax(r))
        ratio, ratio_t = float(r[i]), float(t[mask][i])
        env_ok = ratio <= 1.0
        for tj, rj in zip(t[mask][r > 1.0], r[r > 1.0]):
            violations.append(("envelope", float(tj), float(rj)))
    return TheoremReport(
        monotone_ok=monotone_ok, worst_increase=worst, worst_increase_t=worst_t,
        envelope_checked=checked, envelope_ok=env_ok, worst_envelope_ratio=ratio,
        worst_envelope_t=ratio_t, k_s=monitor.k_s, T_e=record.T_e, violations=violations,
    )
