"""Experiment drivers: convergence-rate fits, schedule-sum probes, filter certification."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .assumptions import AssumptionCheckConfig, check_assumption1, check_assumption2
from .filters import FilterFamily, InadmissibleAlpha
from .problems import ForwardProblem, make_noisy
from .schedules import AlphaSchedule
from .solver import SolverConfig, run

DEFAULT_DELTAS = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
CSV_COLUMNS = ("delta", "seed", "n_delta", "error_r", "r")


@dataclass
class RateReport:
    problem: str
    filter: str
    s: float
    mu: float
    a: float
    r: float
    rows: list = field(default_factory=list)
    fitted_slope: float = math.nan
    intercept: float = math.nan
    slope_ci: float = math.nan
    valid: bool = True
    notes: list = field(default_factory=list)

    @property
    def theory_slope(self) -> float:
        return theory_slope(self.mu, self.r, self.a)

    @property
    def superconvergent(self) -> bool:
        return self.fitted_slope > self.theory_slope + 0.1

    def mean_errors(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-delta geometric means of ``error_r``, deltas descending."""
        deltas = sorted({row["delta"] for row in self.rows}, reverse=True)
        means = [math.exp(np.mean([math.log(row["error_r"]) for row in self.rows if row["delta"] == d]))
                 for d in deltas]
        return np.array(deltas), np.array(means)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["theory_slope"] = self.theory_slope
        return out

    @classmethod
    def from_dict(cls, d: dict) -> RateReport:
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def theory_slope(mu: float, r: float, a: float) -> float:
    """Exponent ``(mu - r)/(a + mu)`` of the order-optimal rate."""
    return (mu - r) / (a + mu)


def fit_rate(report: RateReport) -> RateReport:
    """Least-squares slope of log mean error against log delta, with a 95% half-width."""
    deltas, means = report.mean_errors()
    if deltas.size < 2:
        raise ValueError("need at least two noise levels to fit a rate")
    fit = stats.linregress(np.log(deltas), np.log(means))
    report.fitted_slope = float(fit.slope)
    report.intercept = float(fit.intercept)
    if deltas.size > 2:
        report.slope_ci = float(stats.t.ppf(0.975, deltas.size - 2) * fit.stderr)
    else:
        report.slope_ci = 0.0
    return report


def rate_experiment(problem: ForwardProblem, config: SolverConfig, delta_list=DEFAULT_DELTAS,
                    r_list=(0.0,), seeds=DEFAULT_SEEDS, mu: float | None = None) -> dict:
    """Run the solver for every ``(delta, seed)`` and fit rates for every ``r``.

    ``config.x0`` must come from a source construction with smoothness
    ``mu``. Returns ``{r: RateReport}``. A run that does not stop by the
    discrepancy principle marks every report invalid.
    """
    delta_list = sorted(delta_list, reverse=True)
    if len(delta_list) < 2:
        raise ValueError("need at least two noise levels")
    if mu is None:
        raise ValueError("the smoothness index mu of the initial error is required")
    for r in r_list:
        if not -problem.a - 1e-12 <= r <= mu + 1e-12:
            raise ValueError(f"error index r={r} outside [-a, mu] = [{-problem.a}, {mu}]")
    names = {f"r={r!r}": float(r) for r in r_list}
    cfg = dataclasses.replace(config, error_norms=names, track_truth=True)
    reports = {float(r): RateReport(problem.name, config.filter.name, config.s, mu, problem.a, float(r))
               for r in r_list}
    for delta in delta_list:
        for seed in seeds:
            res = run(problem, cfg, make_noisy(problem, delta, seed))
            for key, r in names.items():
                rep = reports[r]
                rep.rows.append({"delta": float(delta), "seed": int(seed), "n_delta": res.n_delta,
                                 "error_r": res.error(key), "stop_reason": res.stop_reason})
                if res.stop_reason != "discrepancy":
                    rep.valid = False
                    rep.notes.append(f"delta={delta:g} seed={seed}: stopped by {res.stop_reason}")
    for rep in reports.values():
        rep.rows.sort(key=lambda row: (row["delta"], row["seed"]))
        fit_rate(rep)
    return reports


def lemma3_probe(schedule: AlphaSchedule, p: float, q: float, n_list) -> list:
    """Schedule sums ``S(n) = sum_j alpha_j^-1 (s_n - s_{j-1})^-p s_j^-q``.

    Each row holds ``S(n)`` and ``S(n) s_n^(p+q-1) / correction``, where the
    correction is ``1``, ``log(1 + s_n)`` or ``s_n^(max(p,q)-1)`` for
    ``max(p,q)`` below, equal to, or above 1.
    """
    if p < 0 or q < 0:
        raise ValueError("p and q must be nonnegative")
    n_list = [int(n) for n in n_list]
    if max(n_list) >= len(schedule):
        schedule = schedule.extended(max(n_list) + 1)
    inc = 1.0 / schedule.alphas
    s = schedule.s
    s_prev = np.concatenate([[0.0], s[:-1]])
    top = max(p, q)
    rows = []
    for n in n_list:
        terms = inc[: n + 1] * (s[n] - s_prev[: n + 1]) ** (-p) * s[: n + 1] ** (-q)
        S = math.fsum(terms.tolist())
        if top < 1:
            corr = 1.0
        elif top == 1:
            corr = math.log1p(s[n])
        else:
            corr = s[n] ** (top - 1)
        rows.append({"n": n, "s_n": float(s[n]), "S": S, "normalized": S * s[n] ** (p + q - 1) / corr})
    return rows


@dataclass
class CertificationCell:
    family: str
    schedule_kind: str
    admissible: bool
    max_V1: float | None = None
    b2_estimate: float | None = None
    b0_estimate: float | None = None
    b1_integral: float | None = None
    quadrature_refinement_delta: float | None = None
    reason: str = ""

    @property
    def passed(self) -> bool:
        if not self.admissible:
            return True
        return self.max_V1 <= 1.0 + 1e-10 and self.quadrature_refinement_delta < 0.01


@dataclass
class CertificationReport:
    cells: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "cells": [dataclasses.asdict(c) for c in self.cells]}


def certify_filters(families, schedules, cfg: AssumptionCheckConfig | None = None) -> CertificationReport:
    """Run both structure checks for every ``(family, schedule)`` pair.

    Contour integrals are taken at every distinct ``alpha`` of the schedule
    prefix (up to ``cfg.n_max``); the cell reports the largest.
    Inadmissible pairs are recorded, not raised.
    """
    cfg = cfg or AssumptionCheckConfig()
    cells = []
    for fam in families:
        for sched in schedules:
            try:
                a2 = check_assumption2(fam, sched, cfg)
            except InadmissibleAlpha as exc:
                cells.append(CertificationCell(fam.name, sched.kind, False, reason=str(exc)))
                continue
            alphas = np.unique(sched.alphas[: cfg.n_max + 1])
            a1 = [check_assumption1(fam, float(al), cfg) for al in alphas]
            cells.append(CertificationCell(
                fam.name, sched.kind, True,
                max_V1=a2.max_V1,
                b2_estimate=a2.b2_estimate,
                b0_estimate=max(r.b0_estimate for r in a1),
                b1_integral=max(r.b1_integral for r in a1),
                quadrature_refinement_delta=max(r.quadrature_refinement_delta for r in a1),
            ))
    return CertificationReport(cells)


_PLOT_SCRIPT = """\
# plot the rate experiment stored next to this file
import csv
import math
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({csv!r})))
deltas = sorted({{float(r["delta"]) for r in rows}})
means = [math.exp(sum(math.log(float(r["error_r"])) for r in rows if float(r["delta"]) == d)
                  / sum(1 for r in rows if float(r["delta"]) == d)) for d in deltas]
plt.loglog([float(r["delta"]) for r in rows], [float(r["error_r"]) for r in rows], ".", alpha=0.4)
plt.loglog(deltas, means, "o-", label="mean error")
plt.loglog(deltas, [means[-1] * (d / deltas[-1]) ** {slope!r} for d in deltas], "k--",
           label="slope {slope:.3g}")
plt.xlabel("delta")
plt.ylabel("error (r = {r:g})")
plt.legend()
plt.savefig({png!r})
"""


def export_report(report, path, format: str | None = None, plot_script: bool = False) -> list:
    """Write a report to ``path`` as CSV or JSON; returns the files written.

    ``RateReport`` supports both formats (the CSV holds the rows with columns
    ``delta, seed, n_delta, error_r, r``); any other report with a
    ``to_dict`` method is written as JSON.
    """
    format = format or os.path.splitext(str(path))[1].lstrip(".") or "json"
    written = [str(path)]
    if format == "csv":
        if not isinstance(report, RateReport):
            raise ValueError("CSV export is only defined for rate reports")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in report.rows:
                w.writerow([repr(row["delta"]), row["seed"], row["n_delta"], repr(row["error_r"]),
                            repr(report.r)])
        if plot_script:
            base = os.path.splitext(str(path))[0]
            script = base + "_plot.py"
            with open(script, "w") as fh:
                fh.write(_PLOT_SCRIPT.format(csv=os.path.basename(str(path)), slope=report.theory_slope,
                                             r=report.r, png=os.path.basename(base) + ".png"))
            written.append(script)
    elif format == "json":
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    else:
        raise ValueError(f"unknown format {format!r}")
    return written
