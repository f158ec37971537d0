"""Command line entry point: ``hsnewton {solve,rates,check-filters,problems}``.

Configuration is a JSON file; see ``configs/`` and the README for the
schema. Keys starting with ``_`` are treated as comments.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .assumptions import AssumptionCheckConfig
from .filters import KINDS, FilterFamily, InadmissibleAlpha, check_alpha
from .harness import DEFAULT_DELTAS, DEFAULT_SEEDS, certify_filters, export_report, rate_experiment
from .problems import CATALOG, construct_source, make_noisy, rescale_to_assumption3b
from .schedules import make_schedule
from .solver import SolverConfig, run

OUT_ENV = "HSNEWTON_OUT"

DEFAULTS = {
    "problem": {"name": "diagonal-linear", "K": 256, "a": 1.0, "gamma": 0.05, "rho": 1.0, "v": "harmonic"},
    "solver": {
        "s": 0.0,
        "tau": 2.0,
        "filter": {"kind": "tikhonov", "order": 1, "contour_R": 1.5, "contour_phi0": math.pi / 6},
        "schedule": {"kind": "constant", "alpha": 1.0},
        "max_iter": 1_000_000,
        "filter_mode": "spectral",
        "rescale": True,
    },
    "source": {"mu": 1.0, "omega": {"kind": "power", "exponent": -0.5, "norm": 1.0}},
    "experiment": {"deltas": list(DEFAULT_DELTAS), "seeds": list(DEFAULT_SEEDS), "r": None,
                   "delta": 1e-3, "seed": 0},
    "check": {
        "families": [{"kind": "tikhonov", "order": 1}, {"kind": "tikhonov", "order": 2},
                     {"kind": "exponential"}, {"kind": "landweber"}, {"kind": "lardy"}],
        "schedules": [{"kind": "constant", "alpha": 1.0}, {"kind": "geometric", "alpha0": 1.0, "q": 0.5},
                      {"kind": "reciprocal_integers", "k": "linear"}],
        "n_max": 50,
        "nu_grid": [0.0, 0.25, 0.5, 0.75, 1.0],
        "quadrature_nodes": 512,
    },
    "output": {"dir": None},
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every violation found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class UsageError(Exception):
    pass


def _strip_comments(obj):
    if isinstance(obj, dict):
        return {k: _strip_comments(v) for k, v in obj.items() if not k.startswith("_")}
    if isinstance(obj, list):
        return [_strip_comments(v) for v in obj]
    return obj


def _merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("filter", "schedule", "omega"):
            out[k] = _merge(out[k], v)
        elif isinstance(v, dict) and isinstance(out.get(k), dict):
            # kind-specific sub-objects: only inherit defaults for the same kind
            out[k] = _merge(out[k], v) if v.get("kind", out[k].get("kind")) == out[k].get("kind") else dict(v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    problem: dict
    solver: dict
    source: dict
    experiment: dict
    check: dict
    output: dict
    raw: dict = field(default_factory=dict)

    def make_filter(self) -> FilterFamily:
        return _make_filter(self.solver["filter"])

    def make_schedule(self, length: int | None = None):
        return _make_schedule(self.solver["schedule"], length or 64)

    def build(self, need_source: bool = True):
        """Problem (scaled), solver config and source element."""
        p = self.problem
        builder = CATALOG[p["name"]]
        if p["name"] == "quadratic-rank1":
            K = int(p["K"])
            v = np.ones(K) if p.get("v") == "uniform" else None
            problem = builder(K, float(p["a"]), gamma=float(p["gamma"]), rho=float(p["rho"]), v=v)
        else:
            problem = builder(int(p["K"]), float(p["a"]))
        sv = self.solver
        sched = self.make_schedule(min(int(sv["max_iter"]), 4096))
        if sv.get("rescale", True):
            problem, _ = rescale_to_assumption3b(problem, float(sv["s"]), float(sched.alphas[0]))
        omega = _make_omega(self.source["omega"], problem.dim)
        src, x0 = construct_source(problem, float(sv["s"]), float(self.source["mu"]), omega)
        cfg = SolverConfig(self.make_filter(), sched, x0, s=float(sv["s"]), tau=float(sv["tau"]),
                           max_iter=int(sv["max_iter"]), filter_mode=sv["filter_mode"])
        return problem, cfg, src

    def r_list(self):
        r = self.experiment.get("r")
        return [0.0, -float(self.problem["a"])] if r is None else [float(v) for v in r]


def _make_filter(spec) -> FilterFamily:
    kw = {k: spec[k] for k in ("contour_R", "contour_phi0") if k in spec}
    return FilterFamily(spec["kind"], order=int(spec.get("order", 1)), **kw)


def _make_schedule(spec, length):
    params = {k: v for k, v in spec.items() if k not in ("kind", "length")}
    return make_schedule(spec["kind"], int(spec.get("length", length)), **params)


def _make_omega(spec, K):
    kind = spec.get("kind", "power")
    if kind == "power":
        w = np.arange(1, K + 1, dtype=float) ** float(spec.get("exponent", -0.5))
    elif kind == "unit":
        w = np.zeros(K)
        w[int(spec.get("index", 0))] = 1.0
    elif kind == "values":
        w = np.asarray(spec["values"], dtype=float)
        if w.shape != (K,):
            raise ValueError("omega values must have length K")
    else:
        raise ValueError(f"unknown omega kind {kind!r}")
    if not np.any(w):
        raise ValueError("omega must be nonzero (source condition)")
    return w * (float(spec.get("norm", 1.0)) / np.linalg.norm(w))


def _validate(cfg: ExperimentConfig) -> list:
    errs = []
    p, sv, src, ex, ck = cfg.problem, cfg.solver, cfg.source, cfg.experiment, cfg.check

    def num(section, d, key, cond, msg):
        try:
            val = float(d[key])
        except (KeyError, TypeError, ValueError):
            errs.append(f"{section}.{key}: missing or not a number")
            return None
        if not cond(val):
            errs.append(f"{section}.{key}={val:g}: {msg}")
        return val

    if p.get("name") not in CATALOG:
        errs.append(f"problem.name={p.get('name')!r}: must be one of {sorted(CATALOG)}")
    K = num("problem", p, "K", lambda v: v >= 1 and v == int(v), "K must be an integer >= 1")
    a = num("problem", p, "a", lambda v: v >= 0, "a must be >= 0 (degree of ill-posedness)")
    if p.get("name") == "quadratic-rank1":
        g = num("problem", p, "gamma", lambda v: v > 0, "gamma must be positive")
        rho = num("problem", p, "rho", lambda v: v > 0, "rho must be positive (ball radius)")
        if g is not None and rho is not None and not g * rho < 1:
            errs.append(f"problem.gamma*rho={g * rho:g}: must be < 1 so that m = 1 - gamma*theta^a*rho > 0 "
                        "(frame condition on the ball)")
    num("solver", sv, "tau", lambda v: v > 1, "tau must exceed 1 (discrepancy principle)")
    s = num("solver", sv, "s", lambda v: a is None or v >= -a, "s must satisfy s >= -a (scaling condition)")
    num("solver", sv, "max_iter", lambda v: v >= 1 and v == int(v), "max_iter must be an integer >= 1")
    if sv.get("filter_mode") not in ("spectral", "iterative"):
        errs.append(f"solver.filter_mode={sv.get('filter_mode')!r}: must be 'spectral' or 'iterative'")

    fam = None
    fspec = sv.get("filter", {})
    if fspec.get("kind") not in KINDS:
        errs.append(f"solver.filter.kind={fspec.get('kind')!r}: must be one of {list(KINDS)}")
    else:
        try:
            fam = _make_filter(fspec)
        except (ValueError, TypeError) as exc:
            errs.append(f"solver.filter: {exc}")
    try:
        sched = _make_schedule(sv.get("schedule", {}), 64)
    except (ValueError, TypeError, KeyError) as exc:
        errs.append(f"solver.schedule: {exc} (schedule conditions: alpha_n > 0, s_n increasing)")
        sched = None
    if fam is not None and sched is not None:
        try:
            for al in sched.alphas:
                check_alpha(fam, float(al))
        except InadmissibleAlpha as exc:
            errs.append(f"solver.schedule: {exc} (admissible alpha for the filter family)")

    mu = num("source", src, "mu", lambda v: True, "")
    if None not in (a, s, mu):
        b, beta = a, 1.0  # both catalog problems have b = a, beta = 1
        if not a + s > 0:
            errs.append(f"solver.s={s:g}: need a + s > 0 for the source construction")
        lo, hi = (a - b) / beta, b + 2 * s
        if not lo < mu <= hi:
            errs.append(f"source.mu={mu:g}: must lie in ((a-b)/beta, b+2s] = ({lo:g}, {hi:g}] "
                        "(smoothness condition on x0 - x_true)")
    try:
        if K is not None and K >= 1 and K == int(K):
            _make_omega(src.get("omega", {}), int(K))
    except (ValueError, TypeError, KeyError) as exc:
        errs.append(f"source.omega: {exc}")

    deltas = ex.get("deltas", [])
    if not isinstance(deltas, list) or len(deltas) < 2 or any(not float(d) > 0 for d in deltas):
        errs.append("experiment.deltas: need at least two positive noise levels (delta > 0)")
    if not float(ex.get("delta", 0)) >= 0:
        errs.append("experiment.delta: noise level must be >= 0")
    if not ex.get("seeds"):
        errs.append("experiment.seeds: need at least one seed")
    if ex.get("r") is not None and None not in (a, mu):
        for r in ex["r"]:
            if not -a <= float(r) <= mu:
                errs.append(f"experiment.r={r}: error index must lie in [-a, mu] = [{-a:g}, {mu:g}] (rate range)")

    for i, f in enumerate(ck.get("families", [])):
        try:
            _make_filter(f)
        except (ValueError, TypeError, KeyError) as exc:
            errs.append(f"check.families[{i}]: {exc}")
    for i, sc in enumerate(ck.get("schedules", [])):
        try:
            _make_schedule(sc, 8)
        except (ValueError, TypeError, KeyError) as exc:
            errs.append(f"check.schedules[{i}]: {exc}")
    return errs


def parse_config(path) -> ExperimentConfig:
    """Load, fill defaults and validate a JSON configuration.

    Raises :class:`ConfigError` listing every violation.
    """
    try:
        with open(path) as fh:
            raw = _strip_comments(json.load(fh))
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    unknown = set(raw) - set(DEFAULTS)
    merged = _merge(DEFAULTS, raw)
    cfg = ExperimentConfig(**{k: merged[k] for k in DEFAULTS}, raw=raw)
    errs = [f"{k}: unknown section" for k in sorted(unknown)] + _validate(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg


# --- commands ----------------------------------------------------------------


def _outdir(args, cfg=None):
    d = args.out or (cfg.output.get("dir") if cfg else None) or os.environ.get(OUT_ENV) or "."
    os.makedirs(d, exist_ok=True)
    return d


def _cmd_problems(args):
    for name in CATALOG:
        print(name)
    return 0


def _cmd_solve(args):
    cfg = parse_config(args.config)
    problem, scfg, src = cfg.build()
    a, mu = problem.a, src.mu
    scfg.error_norms = {"err_mu": mu, "err_0": 0.0, "err_minus_a": -a}
    seed = args.seed if args.seed is not None else int(cfg.experiment["seed"])
    delta = float(cfg.experiment["delta"])
    res = run(problem, scfg, make_noisy(problem, delta, seed))
    out = _outdir(args, cfg)
    payload = {"problem": problem.describe(), "filter": scfg.filter.name,
               "schedule": scfg.schedule.to_dict(), "s": scfg.s, "mu": mu, "seed": seed,
               "omega_norm": src.omega_norm, "result": res.to_dict()}
    with open(os.path.join(out, "solve.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    res.history_csv(os.path.join(out, "solve_history.csv"))
    print(f"n_delta={res.n_delta} stop_reason={res.stop_reason} residual={res.history[-1]['residual']:.6e}")
    if delta > 0 and res.stop_reason != "discrepancy":
        return 2
    return 0


def _cmd_rates(args):
    cfg = parse_config(args.config)
    problem, scfg, src = cfg.build()
    seeds = [args.seed] if args.seed is not None else [int(s) for s in cfg.experiment["seeds"]]
    reports = rate_experiment(problem, scfg, cfg.experiment["deltas"], cfg.r_list(), seeds, mu=src.mu)
    out = _outdir(args, cfg)
    formats = ("csv", "json") if args.format in (None, "both") else (args.format,)
    ok = True
    for r, rep in reports.items():
        base = os.path.join(out, f"rates_r{r:+g}")
        for fmt in formats:
            export_report(rep, f"{base}.{fmt}", fmt, plot_script=(fmt == "csv"))
        print(f"r={r:+g}: slope {rep.fitted_slope:.4f} +- {rep.slope_ci:.4f} "
              f"(theory {rep.theory_slope:.4f}){'' if rep.valid else '  INVALID: ' + '; '.join(rep.notes[:3])}")
        ok = ok and rep.valid
    return 0 if ok else 2


def _cmd_check(args):
    cfg = parse_config(args.config)
    ck = cfg.check
    acfg = AssumptionCheckConfig(nu_grid=ck["nu_grid"], n_max=int(ck["n_max"]),
                                 quadrature_nodes=int(ck["quadrature_nodes"]))
    fams = [_make_filter(f) for f in ck["families"]]
    scheds = [_make_schedule(s, acfg.n_max + 1) for s in ck["schedules"]]
    rep = certify_filters(fams, scheds, acfg)
    out = _outdir(args, cfg)
    export_report(rep, os.path.join(out, "certification.json"), "json")
    for c in rep.cells:
        if c.admissible:
            print(f"{c.family:16s} {c.schedule_kind:20s} max_V1={c.max_V1:.12f} b2={c.b2_estimate:.4g} "
                  f"b1={c.b1_integral:.4g} b0={c.b0_estimate:.4g} dquad={c.quadrature_refinement_delta:.2e}")
        else:
            print(f"{c.family:16s} {c.schedule_kind:20s} inadmissible: {c.reason}")
    print("PASS" if rep.passed else "FAIL")
    return 0 if rep.passed else 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hsnewton", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, helptext in [
        ("solve", _cmd_solve, "single run; writes solve.json and solve_history.csv"),
        ("rates", _cmd_rates, "convergence-rate experiment; writes rates_r*.csv/json"),
        ("check-filters", _cmd_check, "certify filter families; writes certification.json"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
        p.add_argument("--format", choices=("csv", "json", "both"), default=None)
        p.set_defaults(func=fn)
    p = sub.add_parser("problems", help="list the problem catalog")
    p.set_defaults(func=_cmd_problems)
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_command())
