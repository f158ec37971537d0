"""Inexact Newton iteration in Hilbert scales with discrepancy-principle stopping.

Each step applies a spectral filter to the linearized equation, written
with the symmetric operator ``A_n = F'(x_n) L^-s``::

    x_{n+1} = x_n - L^-s g_{alpha_n}(A_n^T A_n) A_n^T (F(x_n) - y_delta)

The iteration stops at the first ``n`` with
``||F(x_n) - y_delta|| <= tau * delta``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterFamily, check_alpha, filter_step_iterative, filter_step_spectral
from .hilbert_scale import norm_r
from .problems import ForwardProblem, NoisyData
from .schedules import AlphaSchedule

log = logging.getLogger(__name__)

STOP_REASONS = ("discrepancy", "max_iter", "left_ball", "stagnation")


@dataclass
class SolverConfig:
    """Parameters of one run.

    ``error_norms`` maps history column names to scale indices ``r`` at which
    ``||x_n - x_true||_r`` is recorded (only when the truth is known).
    """

    filter: FilterFamily
    schedule: AlphaSchedule
    x0: np.ndarray
    s: float = 0.0
    tau: float = 2.0
    max_iter: int = 1000
    filter_mode: str = "spectral"
    error_norms: dict = field(default_factory=dict)
    inner: dict = field(default_factory=dict)
    track_truth: bool = True

    def __post_init__(self):
        if not self.tau > 1:
            raise ValueError("tau must exceed 1 (discrepancy principle)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.filter_mode not in ("spectral", "iterative"):
            raise ValueError("filter_mode must be 'spectral' or 'iterative'")
        self.x0 = np.asarray(self.x0, dtype=float)
        for a in self.schedule.alphas[: self.max_iter]:
            check_alpha(self.filter, float(a))

    def validate_for(self, problem: ForwardProblem):
        if self.s < -problem.a:
            raise ValueError("s must satisfy s >= -a")
        if self.x0.shape != (problem.dim,):
            raise ValueError("x0 does not match the problem dimension")


@dataclass
class SolverResult:
    x_final: np.ndarray
    n_delta: int
    stop_reason: str
    history: list
    tau: float
    delta: float

    @property
    def residuals(self) -> np.ndarray:
        return np.array([h["residual"] for h in self.history])

    def error(self, name: str) -> float:
        return self.history[self.n_delta]["errors"][name]

    def to_dict(self) -> dict:
        return {
            "n_delta": self.n_delta,
            "stop_reason": self.stop_reason,
            "tau": self.tau,
            "delta": self.delta,
            "x_final": self.x_final.tolist(),
            "history": self.history,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    def history_csv(self, path, columns=("err_mu", "err_0", "err_minus_a")):
        """Write ``n, alpha_n, s_n, residual`` plus the requested error columns."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "alpha_n", "s_n", "residual", *columns])
            for h in self.history:
                errs = h.get("errors", {})
                w.writerow([h["n"], repr(h["alpha_n"]), repr(h["s_n"]), repr(h["residual"]),
                            *[repr(errs[c]) if c in errs else "" for c in columns]])


def _schedule_for(config: SolverConfig) -> AlphaSchedule:
    sched = config.schedule
    if len(sched) < config.max_iter:
        sched = sched.extended(config.max_iter)
    return sched


def newton_step(problem: ForwardProblem, config: SolverConfig, x_n, y_delta, n: int = 0,
                schedule: AlphaSchedule | None = None, Fx=None) -> np.ndarray:
    """One outer step from ``x_n`` with ``alpha = alpha_n``."""
    sched = schedule or config.schedule
    if n >= len(sched):
        raise IndexError(f"schedule has only {len(sched)} steps, step {n} requested")
    alpha = float(sched.alphas[n])
    x_n = np.asarray(x_n, dtype=float)
    res = (problem.eval(x_n) if Fx is None else Fx) - y_delta
    ls = problem.scale.power(-config.s)
    if config.filter_mode == "spectral":
        J = problem.jacobian(x_n)
        A = J * ls if J.ndim == 1 else J * ls[None, :]
        h = filter_step_spectral(config.filter, alpha, A, res)
    else:
        h = filter_step_iterative(
            config.filter, alpha,
            lambda u: problem.deriv_apply(x_n, ls * u),
            lambda w: ls * problem.adjoint_apply(x_n, w),
            res, **config.inner,
        )
    return x_n - ls * h


def run(problem: ForwardProblem, config: SolverConfig, data: NoisyData, stagnation_window: int = 10,
        stagnation_tol: float = 1e-14) -> SolverResult:
    """Iterate until the discrepancy principle fires or a safety monitor stops the run."""
    config.validate_for(problem)
    y = np.asarray(data.y_delta, dtype=float)
    if y.shape != (problem.dim,):
        raise ValueError("data dimension does not match the problem")
    sched = _schedule_for(config)
    threshold = config.tau * data.delta
    truth = problem.x_truth if config.track_truth else None

    x = config.x0.copy()
    history = []
    stop = "max_iter"
    n = 0
    while True:
        Fx = problem.eval(x)
        resid = float(np.linalg.norm(Fx - y))
        rec = {"n": n, "alpha_n": float(sched.alphas[n]) if n < len(sched) else math.nan,
               "s_n": float(sched.s[n]) if n < len(sched) else math.nan, "residual": resid}
        if truth is not None:
            e = x - truth
            rec["errors"] = {k: norm_r(problem.scale, r, e) for k, r in config.error_norms.items()}
        history.append(rec)
        if resid <= threshold:
            stop = "discrepancy"
            break
        if truth is not None and not problem.in_ball(x):
            stop = "left_ball"
            log.warning("iterate %d left the ball of radius %g", n, problem.rho)
            break
        if n >= stagnation_window:
            old = history[n - stagnation_window]["residual"]
            if abs(old - resid) <= stagnation_tol * old:
                stop = "stagnation"
                break
        if n >= config.max_iter:
            break
        x_new = newton_step(problem, config, x, y, n, sched, Fx=Fx)
        history[-1]["step_norm"] = float(np.linalg.norm(x_new - x))
        x = x_new
        n += 1
    log.info("stopped at n=%d (%s), residual %.3e, tau*delta %.3e", n, stop, resid, threshold)
    return SolverResult(x, n, stop, history, config.tau, data.delta)


def predicted_stop_index(schedule: AlphaSchedule, a: float, s: float, mu: float, omega_norm: float,
                         tau: float, c0: float, delta: float) -> int:
    """Smallest ``n`` with ``s_n^(-(a+mu)/(2(a+s))) <= (tau-1) delta / (2 c0 ||omega||)``."""
    if not a + s > 0:
        raise ValueError("need a + s > 0")
    if not tau > 1:
        raise ValueError("tau must exceed 1")
    if not omega_norm > 0:
        raise ValueError("omega must be nonzero")
    if not delta > 0:
        raise ValueError("no finite index exists for delta = 0")
    expo = (a + mu) / (2 * (a + s))
    bound = (tau - 1) * delta / (2 * c0 * omega_norm)
    lhs = schedule.s ** (-expo)
    hit = np.nonzero(lhs <= bound * (1 + 1e-12))[0]
    if hit.size == 0:
        if schedule.kind != "custom":
            # s_n grows at least linearly, so a long enough prefix always reaches the bound
            need = int(bound ** (-1 / expo) * schedule.c1) + 2
            if need > len(schedule) and need < 10**8:
                return predicted_stop_index(schedule.extended(need), a, s, mu, omega_norm, tau, c0, delta)
        raise ValueError("schedule prefix exhausted before the threshold; extend the schedule")
    return int(hit[0])
