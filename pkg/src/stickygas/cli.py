"""Command-line front end for batch experiments.

One subcommand per experiment; every run writes a CSV result table plus a
flat key=value summary next to it. Configuration can come from a config
file (one experiment per file, ``key = value`` lines) with command-line
flags taking precedence. Fixed seed means byte-identical output, at any
thread count.

Environment overrides: ``STICKYGAS_OUTDIR`` for the output directory,
``STICKYGAS_THREADS`` for the default worker count.

Exit codes: 0 success, 1 validation-suite failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import dynamics, exact, hull, stats
from .errors import ConfigError
from .model import (Configuration, IncrementModel, derive_seed,
                    sample_coupled_pair, sample_id)

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def emit_plot_data(path: Path, header: Sequence[str], rows: Sequence[Sequence],
                   fmt: str = "csv") -> None:
    """Write a result table as CSV (header row, 17-significant-digit
    floats) or as a JSON list of records."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        def plain(v):
            if isinstance(v, (float, np.floating)):
                return float(v)
            if isinstance(v, np.integer):
                return int(v)
            return v

        records = [{k: plain(v) for k, v in zip(header, row)} for row in rows]
        with open(path, "w") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")
        return
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _emit_summary(path: Path, entries: Dict[str, object]) -> None:
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={_fmt(value)}\n")


def _parse_model(text: str) -> stats.ModelSpec:
    parts = text.split(":")
    name = parts[0]
    if name in ("poisson", "uniform", "deterministic") and len(parts) == 1:
        return name
    if name == "uniform-interval" and len(parts) == 2:
        return IncrementModel.uniform_interval(float(parts[1]))
    if name == "pareto" and len(parts) in (2, 3):
        mu = float(parts[2]) if len(parts) == 3 else 0.0
        return IncrementModel.pareto_shifted(float(parts[1]), mu)
    raise ConfigError(
        f"unknown model {text!r}; expected poisson, uniform, deterministic, "
        "uniform-interval:A or pareto:ALPHA[:MU]")


def _parse_grid(text: str) -> np.ndarray:
    try:
        start, step, stop = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"grid must be start:step:stop, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"bad grid {text!r}")
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


def _parse_int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v]


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_pairs(text: str) -> List[tuple]:
    out = []
    for chunk in text.split(","):
        s, t = chunk.split(":")
        out.append((float(s), float(t)))
    return out


def _load_config(path: str, known: Dict[str, object]) -> Dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


class _Options:
    """Merged view of CLI flags, config-file values and defaults."""

    def __init__(self, args: argparse.Namespace, defaults: Dict[str, object]):
        self.cli = vars(args)
        self.defaults = defaults
        self.file = {}
        if self.cli.get("config"):
            self.file = _load_config(self.cli["config"], defaults)

    def get(self, key: str, convert=None):
        value = self.cli.get(key)
        if value is None and key in self.file:
            value = self.file[key]
        if value is None:
            value = self.defaults[key]
        if value is not None and convert is not None and isinstance(value, str):
            value = convert(value)
        return value


def _threads_default() -> int:
    env = os.environ.get("STICKYGAS_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _out_path(opts: _Options, command: str) -> Path:
    explicit = opts.get("out")
    if explicit:
        return Path(explicit)
    outdir = os.environ.get("STICKYGAS_OUTDIR", "results")
    return Path(outdir) / f"{command}.csv"


def _check_collision(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise ConfigError(f"{path} exists; pass --force to overwrite")


def _add_common(sub, *names):
    sub.add_argument("--config", help="key = value experiment file")
    sub.add_argument("--out", help="output CSV path")
    sub.add_argument("--force", action="store_true", default=None,
                     help="overwrite existing outputs")
    sub.add_argument("--format", choices=("csv", "json"), default=None)
    sub.add_argument("--seed", type=int, default=None)
    if "threads" in names:
        sub.add_argument("--threads", type=int, default=None)
    if "model" in names:
        sub.add_argument("--model", default=None,
                         help="poisson | uniform | deterministic | "
                              "uniform-interval:A | pareto:ALPHA[:MU]")
    if "n" in names:
        sub.add_argument("--n", type=int, default=None)
    if "reps" in names:
        sub.add_argument("--reps", type=int, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stickygas",
        description="Sticky-gas cluster experiments: simulation, exact "
                    "merging times and Monte Carlo limit-law checks.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("simulate", help="run the event-driven engine once")
    _add_common(sub, "model", "n")
    sub.add_argument("--emit-events", action="store_true", default=None)

    sub = subs.add_parser("times", help="full merging-time vector")
    _add_common(sub, "model", "n")
    sub.add_argument("--engine", choices=("exact", "dynamics", "hull"),
                     default=None)

    sub = subs.add_parser("acurve", help="cluster fraction over a time grid")
    _add_common(sub, "model", "n", "reps", "threads")
    sub.add_argument("--grid", default=None, help="start:step:stop")

    sub = subs.add_parser("clt", help="Gaussianity diagnostics at one time")
    _add_common(sub, "model", "n", "reps", "threads")
    sub.add_argument("--t", type=float, default=None)

    sub = subs.add_parser("cov", help="count covariance at time pairs")
    _add_common(sub, "model", "n", "reps", "threads")
    sub.add_argument("--pairs", default=None, help="s:t[,s:t...]")

    sub = subs.add_parser("fig1", help="critical-time count distribution")
    _add_common(sub, "model", "n", "reps", "threads")

    sub = subs.add_parser("pk", help="stay-nonnegative probabilities")
    _add_common(sub, "reps", "threads")
    sub.add_argument("--k", default=None, help="comma-separated horizons")

    sub = subs.add_parser("driftform", help="truncated walk probability vs closed form")
    _add_common(sub, "reps", "threads")
    sub.add_argument("--t", type=float, default=None)
    sub.add_argument("--kmax", type=int, default=None)

    sub = subs.add_parser("product16", help="merging-time tail vs product form")
    _add_common(sub, "n", "reps", "threads")
    sub.add_argument("--j", type=int, default=None)
    sub.add_argument("--t", type=float, default=None)

    sub = subs.add_parser("localization", help="window-mismatch decay")
    _add_common(sub, "model", "n", "reps", "threads")
    sub.add_argument("--j", type=int, default=None)
    sub.add_argument("--windows", default=None, help="comma-separated radii")

    sub = subs.add_parser("lastcollision", help="final merge concentration")
    _add_common(sub, "model", "reps", "threads")
    sub.add_argument("--n-list", default=None, help="comma-separated sizes")
    sub.add_argument("--threshold", type=float, default=None)

    sub = subs.add_parser("validate", help="cross-engine equivalence suite")
    sub.add_argument("--quick", action="store_true", default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--config", help="key = value experiment file")

    return parser


def _sample(spec: stats.ModelSpec, n: int, seed: int) -> Configuration:
    sampler, _ = stats._resolve_model(spec)
    return sampler(n, seed)


def _cmd_simulate(opts: _Options) -> int:
    spec = opts.get("model", _parse_model)
    n = opts.get("n", int)
    seed = opts.get("seed", int)
    cfg = _sample(spec, n, seed)
    log = dynamics.simulate(cfg)
    path = _out_path(opts, "simulate")
    force = bool(opts.get("force"))
    _check_collision(path, force)
    path.parent.mkdir(parents=True, exist_ok=True)
    if opts.get("emit_events", _parse_bool):
        log.to_csv(path)
    else:
        emit_plot_data(path, ("n", "events", "t_last"),
                       [(n, n - 1, float(log.times[-1]))], opts.get("format"))
    _emit_summary(path.with_suffix(".summary"), {
        "n": n, "seed": seed, "events": n - 1,
        "t_first": float(log.times[0]), "t_last": float(log.times[-1]),
        "final_position": log.final_cluster.position,
        "final_velocity": log.final_cluster.velocity,
    })
    return 0


def _cmd_times(opts: _Options) -> int:
    spec = opts.get("model", _parse_model)
    n = opts.get("n", int)
    seed = opts.get("seed", int)
    engine = opts.get("engine")
    cfg = _sample(spec, n, seed)
    if engine == "exact":
        times = exact.all_merging_times(cfg).values
    elif engine == "hull":
        profile = hull.HullProfile.from_configuration(cfg)
        times = np.array([hull.merging_time_bisect(profile, j, 1e-10)
                          for j in range(1, n)])
    else:
        times = dynamics.merging_times_from_log(dynamics.simulate(cfg)).values
    path = _out_path(opts, "times")
    _check_collision(path, bool(opts.get("force")))
    emit_plot_data(path, ("j", "time"),
                   [(j + 1, times[j]) for j in range(n - 1)], opts.get("format"))
    _emit_summary(path.with_suffix(".summary"), {
        "n": n, "seed": seed, "engine": engine, "t_last": float(times.max()),
    })
    return 0


def _cmd_acurve(opts: _Options) -> int:
    spec = opts.get("model", _parse_model)
    n = opts.get("n", int)
    reps = opts.get("reps", int)
    seed = opts.get("seed", int)
    threads = opts.get("threads", int)
    grid = opts.get("grid", _parse_grid)
    estimates = stats.estimate_a(spec, n, grid, reps, seed, threads=threads)
    path = _out_path(opts, "acurve")
    _check_collision(path, bool(opts.get("force")))
    rows = [(float(t), e.value, e.stderr, stats.reference_cluster_fraction(float(t)))
            for t, e in zip(grid, estimates)]
    emit_plot_data(path, ("t", "a_hat", "stderr", "ref"), rows, opts.get("format"))
    _emit_summary(path.with_suffix(".summary"),
                  {"n": n, "reps": reps, "seed": seed, "points": len(rows)})
    return 0


def _cmd_clt(opts: _Options) -> int:
    spec = opts.get("model", _parse_model)
    report = stats.clt_check(spec, opts.get("n", int), opts.get("t", float),
                             opts.get("reps", int), opts.get("seed", int),
                             threads=opts.get("threads", int))
    path = _out_path(opts, "clt")
    _check_collision(path, bool(opts.get("force")))
    emit_plot_data(path, ("standardized",),
                   [(v,) for v in report.standardized], opts.get("format"))
    _emit_summary(path.with_suffix(".summary"), {
        "n": report.n, "t": report.t, "reps": report.replicates,
        "a_t": report.a_t, "sigma2": report.sigma2,
        "skewness": report.skewness, "skewness_stderr": report.skewness_stderr,
        "excess_kurtosis": report.excess_kurtosis,
        "kurtosis_stderr": report.kurtosis_stderr,
        "kolmogorov_stat": report.kolmogorov_stat,
    })
    return 0


def _cmd_cov(opts: _Options) -> int:
    spec = opts.get("model", _parse_model)
    pairs = opts.get("pairs", _parse_pairs)
    estimates = stats.estimate_R(spec, opts.get("n", int), pairs,
                                 opts.get("reps", int), opts.get("seed", int),
                                 threads=opts.get("threads", int))
    path = _out_path(opts, "cov")
    _check_collision(path, bool(opts.get("force")))
    emit_plot_data(path, ("s", "t", "cov", "stderr"),
                   [(e.s, e.t, e.value, e.stderr) for e in estimates],
                   opts.get("format"))
    _emit_summary(path.with_suffix(".summary"),
                  {"n": opts.get("n", int), "reps": opts.get("reps", int),
                   "seed": opts.get("seed", int), "pairs": len(pairs)})
    return 0


def _cmd_fig1(opts: _Options) -> int:
    report = stats.ecdf_k1(opts.get("model", _parse_model), opts.get("n", int),
                           opts.get("reps", int), opts.get("seed", int),
                           threads=opts.get("threads", int))
    path = _out_path(opts, "fig1")
    _check_collision(path, bool(opts.get("force")))
    values = report.ecdf.values
    rows = [(float(values[i]), (i + 1) / report.replicates)
            for i in range(values.size)]
    emit_plot_data(path, ("x", "F_hat"), rows, opts.get("format"))
    _emit_summary(path.with_suffix(".summary"), {
        "n": report.n, "reps": report.replicates,
        "mean": report.mean.value, "mean_stderr": report.mean.stderr,
        "second_moment": report.second_moment.value,
        "p_single": report.p_single, "p_single_stderr": report.p_single_stderr,
    })
    return 0


def _cmd_pk(opts: _Options) -> int:
    ks = opts.get("k", _parse_int_list)
    estimates = stats.estimate_pk(ks, opts.get("reps", int), opts.get("seed", int),
                                  threads=opts.get("threads", int))
    path = _out_path(opts, "pk")
    _check_collision(path, bool(opts.get("force")))
    rows = [(e.k, e.p_hat, e.stderr, e.p_hat * e.k ** 0.25) for e in estimates]
    emit_plot_data(path, ("k", "p_hat", "stderr", "p_scaled"), rows,
                   opts.get("format"))
    summary = {"reps": opts.get("reps", int), "seed": opts.get("seed", int)}
    if len(set(ks)) >= 3 and max(ks) / min(ks) >= 10:
        fit = stats.fit_c1(estimates)
        summary.update({"c1": fit.c1, "c1_stderr": fit.c1_stderr,
                        "free_exponent": fit.free_exponent,
                        "residual_rms": fit.residual_rms})
    _emit_summary(path.with_suffix(".summary"), summary)
    return 0


def _cmd_driftform(opts: _Options) -> int:
    report = stats.check_drift_closed_form(opts.get("t", float), opts.get("kmax", int),
                                           opts.get("reps", int), opts.get("seed", int),
                                           threads=opts.get("threads", int))
    path = _out_path(opts, "driftform")
    _check_collision(path, bool(opts.get("force")))
    rows = [(report.k_quarter, report.estimate_quarter.value,
             report.estimate_quarter.stderr, report.target),
            (report.k_max, report.estimate.value,
             report.estimate.stderr, report.target)]
    emit_plot_data(path, ("k", "estimate", "stderr", "target"), rows,
                   opts.get("format"))
    _emit_summary(path.with_suffix(".summary"), {
        "t": report.t, "kmax": report.k_max, "target": report.target,
        "estimate": report.estimate.value,
        "estimate_quarter": report.estimate_quarter.value,
        "reps": opts.get("reps", int),
    })
    return 0


def _cmd_product16(opts: _Options) -> int:
    report = stats.check_product_formula(opts.get("n", int), opts.get("j", int),
                                         opts.get("t", float), opts.get("reps", int),
                                         opts.get("seed", int),
                                         threads=opts.get("threads", int))
    path = _out_path(opts, "product16")
    _check_collision(path, bool(opts.get("force")))
    emit_plot_data(
        path, ("lhs", "lhs_stderr", "rhs", "rhs_stderr", "diff", "joint_stderr"),
        [(report.lhs.value, report.lhs.stderr, report.rhs_value,
          report.rhs_stderr, report.difference, report.joint_stderr)],
        opts.get("format"))
    _emit_summary(path.with_suffix(".summary"), {
        "n": report.n, "j": report.j, "t": report.t,
        "lhs": report.lhs.value, "rhs": report.rhs_value,
        "diff": report.difference, "joint_stderr": report.joint_stderr,
    })
    return 0


def _cmd_localization(opts: _Options) -> int:
    windows = opts.get("windows", _parse_int_list)
    estimates = stats.localization_decay(
        opts.get("model", _parse_model), opts.get("n", int), opts.get("j", int),
        windows, opts.get("reps", int), opts.get("seed", int),
        threads=opts.get("threads", int))
    path = _out_path(opts, "localization")
    _check_collision(path, bool(opts.get("force")))
    emit_plot_data(path, ("M", "mismatch", "stderr"),
                   [(m, e.value, e.stderr) for m, e in zip(windows, estimates)],
                   opts.get("format"))
    _emit_summary(path.with_suffix(".summary"),
                  {"n": opts.get("n", int), "j": opts.get("j", int),
                   "reps": opts.get("reps", int), "seed": opts.get("seed", int)})
    return 0


def _cmd_lastcollision(opts: _Options) -> int:
    report = stats.last_collision_convergence(
        opts.get("model", _parse_model), opts.get("n_list", _parse_int_list),
        opts.get("reps", int), opts.get("seed", int),
        threshold=opts.get("threshold", float), threads=opts.get("threads", int))
    path = _out_path(opts, "lastcollision")
    _check_collision(path, bool(opts.get("force")))
    emit_plot_data(path, ("n", "p_outside", "stderr"),
                   [(n, e.value, e.stderr)
                    for n, e in zip(report.n_list, report.estimates)],
                   opts.get("format"))
    _emit_summary(path.with_suffix(".summary"),
                  {"threshold": report.threshold, "reps": opts.get("reps", int),
                   "seed": opts.get("seed", int)})
    return 0


def _cmd_validate(opts: _Options) -> int:
    quick = bool(opts.get("quick", _parse_bool))
    seed = opts.get("seed", int)
    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
        if not ok:
            failures += 1

    for n in (2, 5, 50):
        cfg = sample_id(IncrementModel.deterministic(), n, seed)
        te = exact.all_merging_times(cfg).values
        td = dynamics.merging_times_from_log(dynamics.simulate(cfg)).values
        profile = hull.HullProfile.from_configuration(cfg)
        th = np.array([hull.merging_time_bisect(profile, j, 1e-10)
                       for j in range(1, n)])
        check(f"equally-spaced n={n}: all times 1",
              np.all(te == 1.0) and np.max(np.abs(td - 1.0)) < 1e-12
              and np.max(np.abs(th - 1.0)) < 1e-9)
        check(f"equally-spaced n={n}: count step",
              hull.cluster_count_at(profile, 0.99) == n
              and hull.cluster_count_at(profile, 1.0) == 1)

    configs = 10 if quick else 60
    grid = 0.05 * np.arange(29)
    worst = 0.0
    count_ok = True
    for r in range(configs):
        n = (8, 16, 24)[r % 3]
        cfg = sample_id(IncrementModel.exponential(), n, derive_seed(seed, 90, r))
        te = exact.all_merging_times(cfg)
        td = dynamics.merging_times_from_log(dynamics.simulate(cfg)).values
        profile = hull.HullProfile.from_configuration(cfg)
        th = np.array([hull.merging_time_bisect(profile, j, 1e-10)
                       for j in range(1, n)])
        worst = max(worst, float(np.max(np.abs(td - te.values))),
                    float(np.max(np.abs(th - te.values))))
        for t in grid:
            if hull.cluster_count_at(profile, float(t)) != exact.count_clusters(te, float(t)):
                count_ok = False
    check(f"three engines agree on {configs} random draws (worst {worst:.2e})",
          worst < 1e-9)
    check("hull count equals direct merge count on the grid", count_ok)

    pairs = 5 if quick else 20
    bad = stats.coupled_count_discrepancies(200, 0.07 * np.arange(20), pairs, seed)
    check("coupled Poisson/uniform counts identical", bad == 0)
    tmax = 0.0
    for r in range(pairs):
        poisson, uniform, beta = sample_coupled_pair(200, derive_seed(seed, 91, r))
        tp = dynamics.merging_times_from_log(dynamics.simulate(poisson)).values
        tu = dynamics.merging_times_from_log(dynamics.simulate(uniform)).values
        tmax = max(tmax, float(np.max(np.abs(tu * beta - tp))))
    check(f"coupled merging times rescale exactly (worst {tmax:.2e})", tmax < 1e-9)

    print(f"validate: {failures} failure(s)")
    return 1 if failures else 0


_DEFAULTS: Dict[str, Dict[str, object]] = {
    "simulate": {"model": "poisson", "n": 100, "seed": 0, "emit_events": False,
                 "out": None, "force": False, "format": "csv"},
    "times": {"model": "poisson", "n": 100, "seed": 0, "engine": "dynamics",
              "out": None, "force": False, "format": "csv"},
    "acurve": {"model": "poisson", "n": 10000, "reps": 1000, "seed": 0,
               "grid": "0:0.05:0.95", "threads": None, "out": None,
               "force": False, "format": "csv"},
    "clt": {"model": "poisson", "n": 10000, "reps": 1000, "t": 0.5, "seed": 0,
            "threads": None, "out": None, "force": False, "format": "csv"},
    "cov": {"model": "poisson", "n": 10000, "reps": 2000,
            "pairs": "0.4:0.4,0.4:0.6", "seed": 0, "threads": None,
            "out": None, "force": False, "format": "csv"},
    "fig1": {"model": "poisson", "n": 10000, "reps": 2000, "seed": 0,
             "threads": None, "out": None, "force": False, "format": "csv"},
    "pk": {"k": "256,1024,4096", "reps": 100000, "seed": 0, "threads": None,
           "out": None, "force": False, "format": "csv"},
    "driftform": {"t": 0.5, "kmax": 100000, "reps": 100000, "seed": 0,
                  "threads": None, "out": None, "force": False, "format": "csv"},
    "product16": {"n": 40, "j": 20, "t": 0.6, "reps": 100000, "seed": 0,
                  "threads": None, "out": None, "force": False, "format": "csv"},
    "localization": {"model": "poisson", "n": 1024, "j": 512,
                     "windows": "4,8,16,32,64", "reps": 2000, "seed": 0,
                     "threads": None, "out": None, "force": False,
                     "format": "csv"},
    "lastcollision": {"model": "poisson", "n_list": "1000,4000,16000",
                      "reps": 200, "threshold": 0.1, "seed": 0,
                      "threads": None, "out": None, "force": False,
                      "format": "csv"},
    "validate": {"quick": False, "seed": 0},
}

_HANDLERS = {
    "simulate": _cmd_simulate,
    "times": _cmd_times,
    "acurve": _cmd_acurve,
    "clt": _cmd_clt,
    "cov": _cmd_cov,
    "fig1": _cmd_fig1,
    "pk": _cmd_pk,
    "driftform": _cmd_driftform,
    "product16": _cmd_product16,
    "localization": _cmd_localization,
    "lastcollision": _cmd_lastcollision,
    "validate": _cmd_validate,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    defaults = dict(_DEFAULTS[args.command])
    if "threads" in defaults and defaults["threads"] is None:
        defaults["threads"] = _threads_default()
    try:
        opts = _Options(args, defaults)
        return _HANDLERS[args.command](opts)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
