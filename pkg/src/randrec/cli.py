"""Command-line front end.

Every subcommand resolves its flags (and an optional YAML/JSON config file)
into one canonical config, runs the experiment, and writes ``<prefix>.csv``
plus ``<prefix>.json`` into the output directory. The JSON embeds the
resolved config and its SHA-256 digest; ``randrec run summary.json`` replays it.

Exit codes: 0 success, 2 config error, 3 insufficient data (partial results
are still written).
"""

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np
import yaml

from . import __version__
from .correlations import Observable, correlation_curve, decay_fit
from .measure import LebesgueMeasure, WdrParams, build_empirical, dimension_summary, wdr_check
from .parallel import default_workers
from .phase_space import InvalidInputError, point
from .recurrence import (
    ReturnTimeQuery,
    annealed_rate,
    annealed_return_time,
    aperiodicity_atom,
    kac_check,
    noninstantaneous_equivalence,
    quenched_rate,
    quenched_return_time,
)
from .rng import STREAM_AUX, derive_seed, derive_seeds
from .slopes import InsufficientDataError, geometric_grid
from .systems import CATALOG, EMPIRICAL, NoiseStream, random_orbit, sample_stationary_point, sample_stationary_points, system_from_spec

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

COMMON = {"system": {"family": "markov23"}, "seed": 0, "measure_N": 100_000, "expect": {}}
GRID = {"r_max": 2.0**-6, "ratio": 0.5, "levels": 9, "r_list": None}
EXPERIMENTS = {
    "orbit": {"x": None, "n": 100},
    "return-time": {"x": None, "radius": 0.01, "p": 0, "n_max": None, "mode": "quenched", "M": 1000},
    "rate": {"x": None, **GRID, "p": 8, "n_max": None, "mode": "annealed", "M": 200},
    "dimension": {"x": None, "points": 20, "N": 1_000_000, "burn_in": 10_000, "exact": False,
                  **GRID, "r_max": 2.0**-4, "levels": 7},
    "kac": {"center": None, "radius": 0.05, "points": 1000, "realizations": 50, "n_max": None},
    "correlations": {"psi": {"kind": "fourier_cos", "m": 1}, "phi": {"kind": "fourier_cos", "m": 1},
                     "lags": 10, "M": 100_000, "powers": [1, 2, 3]},
    "aperiodicity": {"x": None, "radius": 1e-3, "M": 10_000, "p": 5, "samples": 1000, "n_max": 100_000},
    "wdr": {"x": None, "eta": 4.0, "eps": 0.1, "N": 1_000_000, "burn_in": 10_000, "exact": False,
            **GRID, "r_max": 2.0**-3, "levels": 8},
}
OBSERVABLE_KEYS = {"kind", "m", "center", "width", "index", "value", "scale"}


class ConfigError(Exception):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = problems


# ---------------------------------------------------------------- config


def load_config_file(path):
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    if "config" in data and "config_digest" in data:
        data = data["config"]  # a JSON summary written by this tool
    return data


def resolve(experiment, file_cfg, flag_cfg):
    """Merge defaults < config file < flags, rejecting unknown keys and bad values."""
    if experiment not in EXPERIMENTS:
        raise ConfigError([f"unknown experiment {experiment!r}"])
    allowed = {**COMMON, **EXPERIMENTS[experiment]}
    problems = []
    file_cfg = dict(file_cfg)
    file_exp = file_cfg.pop("experiment", experiment)
    if file_exp != experiment:
        problems.append(f"config is for experiment {file_exp!r}, not {experiment!r}")
    for key in sorted(set(file_cfg) - set(allowed)):
        problems.append(f"unknown key {key!r} for {experiment}")
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in allowed.items()}
    cfg.update({k: v for k, v in file_cfg.items() if k in allowed})
    cfg.update({k: v for k, v in flag_cfg.items() if v is not None})
    problems += _validate(experiment, cfg)
    if problems:
        raise ConfigError(problems)
    cfg["experiment"] = experiment
    return cfg


def _validate(experiment, cfg):
    bad = []

    def need(key, ok, what):
        if key in cfg and cfg[key] is not None and not ok(cfg[key]):
            bad.append(f"{key}={cfg[key]!r}: {what}")

    isint = lambda v: isinstance(v, int) and not isinstance(v, bool)
    isnum = lambda v: isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
    need("seed", lambda v: isint(v) and 0 <= v < 2**64, "integer in [0, 2^64)")
    for key in ("n", "p", "burn_in"):
        need(key, lambda v: isint(v) and v >= 0, "integer >= 0")
    for key in ("M", "points", "realizations", "N", "levels", "samples", "measure_N", "lags"):
        need(key, lambda v: isint(v) and v >= 1, "integer >= 1")
    need("n_max", lambda v: isint(v) and v > cfg.get("p", 0), "integer greater than p")
    for key in ("radius", "r_max", "eps"):
        need(key, lambda v: isnum(v) and v > 0, "positive number")
    need("ratio", lambda v: isnum(v) and 0 < v < 1, "number in (0, 1)")
    need("eta", lambda v: isnum(v) and v > 1, "number > 1")
    need("mode", lambda v: v in ("quenched", "annealed"), "quenched or annealed")
    need("exact", lambda v: isinstance(v, bool), "boolean")
    need("r_list", lambda v: isinstance(v, list) and len(v) >= 1 and all(isnum(r) and r > 0 for r in v)
         and all(a > b for a, b in zip(v, v[1:])), "strictly decreasing list of positive radii")
    need("powers", lambda v: isinstance(v, list) and all(isnum(p) and p > 0 for p in v), "list of positive numbers")
    for key in ("x", "center"):
        need(key, lambda v: isinstance(v, list) and all(isnum(c) for c in v), "list of coordinates")
    need("expect", lambda v: isinstance(v, dict) and all(
        isinstance(b, list) and len(b) == 2 and all(isnum(t) for t in b) for b in v.values()), "mapping key -> [lo, hi]")
    for key in ("psi", "phi"):
        if key in cfg:
            if not isinstance(cfg[key], dict):
                bad.append(f"{key}: must be a mapping")
            else:
                for k in sorted(set(cfg[key]) - OBSERVABLE_KEYS):
                    bad.append(f"unknown key {key}.{k!r}")
    if not isinstance(cfg.get("system"), dict):
        bad.append("system: must be a mapping with a 'family' key")
    return bad


def canonical(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(cfg):
    return hashlib.sha256(canonical(cfg).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- helpers


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    return v


def grid(cfg):
    if cfg.get("r_list"):
        return np.array(cfg["r_list"], dtype=np.float64)
    return geometric_grid(cfg["r_max"], cfg["ratio"], cfg["levels"])


def attach_measure(system, cfg):
    if system.stationary == EMPIRICAL and system.measure is None:
        return system.with_measure(build_empirical(system, cfg["measure_N"], seed=cfg["seed"]))
    return system


def start_point(system, cfg, key="x"):
    if cfg.get(key) is not None:
        return point(system.space, cfg[key])
    return sample_stationary_point(attach_measure(system, cfg), derive_seed(cfg["seed"], 0, STREAM_AUX))


def measure_for(system, cfg):
    if cfg["exact"]:
        if system.stationary == EMPIRICAL:
            raise InvalidInputError(f"{system.name} has no exact stationary measure")
        return LebesgueMeasure(system.space)
    r = grid(cfg)
    return build_empirical(system, cfg["N"], cfg["burn_in"], cfg["seed"], r_min=float(r.min()))


# ---------------------------------------------------------------- experiments
# each returns (header, rows, summary)


def exp_orbit(system, cfg, workers):
    x0 = start_point(system, cfg)
    pts = random_orbit(system, NoiseStream(system.noise, cfg["seed"]), x0, cfg["n"])
    header = ["step"] + [f"x{i}" for i in range(system.space.dim)]
    rows = [[k, *p] for k, p in enumerate(pts)]
    return header, rows, {"x0": x0, "n": cfg["n"]}


def _n_max(system, cfg):
    from .recurrence import default_n_max

    return cfg["n_max"] if cfg.get("n_max") is not None else default_n_max(system)


def exp_return_time(system, cfg, workers):
    x = start_point(system, cfg)
    n_max = _n_max(system, cfg)
    if cfg["mode"] == "quenched":
        out = quenched_return_time(system, NoiseStream(system.noise, cfg["seed"]),
                                   ReturnTimeQuery(x, cfg["radius"], cfg["p"], n_max))
        rows = [[cfg["radius"], out.value, int(not out.hit)]]
        return ["r", "tau", "capped_flag"], rows, {"x": x, "tau": out.value, "capped": not out.hit}
    est = annealed_return_time(system, x, cfg["radius"], cfg["p"], cfg["M"], n_max, cfg["seed"], workers)
    rows = [[cfg["radius"], est.mean, est.std_error, est.n_capped]]
    summary = {"x": x, "mean": est.mean, "std_error": est.std_error, "n_capped": est.n_capped,
               "lower_bound": est.lower_bound}
    return ["r", "T", "std_error", "n_capped"], rows, summary


RATE_HEADER = ["r", "tau_or_T", "log_tau", "neg_log_r", "capped_flag"]


def _rate_summary(est, x):
    return {"x": x, "mode": est.mode, "slope": est.slope, "slope_lower": est.slope_lower,
            "slope_upper": est.slope_upper, "residual_rms": est.residual_rms, "n_excluded": est.n_excluded}


def exp_rate(system, cfg, workers):
    x = start_point(system, cfg)
    n_max = _n_max(system, cfg)
    r = grid(cfg)
    try:
        if cfg["mode"] == "quenched":
            est = quenched_rate(system, cfg["seed"], x, r, cfg["p"], n_max)
        else:
            est = annealed_rate(system, x, r, cfg["p"], cfg["M"], n_max, cfg["seed"], workers)
    except InsufficientDataError as err:
        err.partial = (RATE_HEADER, err.partial.rows(), _rate_summary(err.partial, x))
        raise
    return RATE_HEADER, est.rows(), _rate_summary(est, x)


def exp_dimension(system, cfg, workers):
    mu = measure_for(system, cfg)
    r = grid(cfg)
    if cfg.get("x") is not None:
        pts = point(system.space, cfg["x"])[None, :]
    else:
        sys_mu = system if cfg["exact"] else system.with_measure(mu)
        pts = sample_stationary_points(sys_mu, derive_seeds(cfg["seed"], 0, cfg["points"], STREAM_AUX))
    header = ["point", "r", "mass", "log_mass"]
    rows = []
    for i, x in enumerate(pts):
        for rv in r:
            m = mu.ball_mass(x, float(rv))
            rows.append([i, rv, m, math.log(m) if m > 0 else float("nan")])
    try:
        summ = dimension_summary(mu, pts, r)
    except InsufficientDataError as err:
        err.partial = (header, rows, {"points": len(pts)})
        raise
    summary = {"ess_sup": summ.ess_sup, "median": summ.median, "quantiles": summ.quantiles,
               "slopes": summ.slopes, "n_failed": summ.n_failed, "exact": cfg["exact"]}
    if len(pts) == 1:
        summary["slope"] = summ.slopes[0]
    return header, rows, summary


def exp_kac(system, cfg, workers):
    system = attach_measure(system, cfg)
    center = start_point(system, cfg, "center")
    est = kac_check(system, center, cfg["radius"], cfg["points"], cfg["realizations"], _n_max(system, cfg),
                    cfg["seed"], workers)
    header = [f"c{i}" for i in range(system.space.dim)] + ["r", "ball_mass", "kac_integral", "std_error", "n_capped"]
    rows = [[*center, cfg["radius"], est.ball_mass, est.estimate, est.std_error, est.n_capped]]
    summary = {"center": center, "kac_integral": est.estimate, "std_error": est.std_error,
               "ball_mass": est.ball_mass, "n_capped": est.n_capped,
               "z_score": (est.estimate - 1.0) / est.std_error if est.std_error > 0 else 0.0}
    return header, rows, summary


def exp_correlations(system, cfg, workers):
    system = attach_measure(system, cfg)
    psi, phi = Observable(**cfg["psi"]), Observable(**cfg["phi"])
    ests = correlation_curve(system, psi, phi, range(1, cfg["lags"] + 1), cfg["M"], cfg["seed"], workers)
    header = ["n", "C_n", "signed", "std_error", "censored"]
    rows = [[e.n, e.value, e.signed, e.std_error, int(e.value <= 3 * e.std_error)] for e in ests]
    summary = {"max_C": max(e.value for e in ests), "max_ratio_to_se": max(
        (e.value / e.std_error if e.std_error > 0 else 0.0) for e in ests)}
    try:
        fit = decay_fit([(e.n, e.value, e.std_error) for e in ests], cfg["powers"])
        summary.update(model=fit.model, rate=fit.rate, power=fit.power, superpolynomial=fit.superpolynomial)
    except InsufficientDataError:
        summary.update(model="insufficient", superpolynomial=None)
    return header, rows, summary


def exp_aperiodicity(system, cfg, workers):
    system = attach_measure(system, cfg)
    x = start_point(system, cfg)
    atom = aperiodicity_atom(system, x, cfg["radius"], cfg["M"], cfg["seed"], workers)
    frac = noninstantaneous_equivalence(system, cfg["samples"], [cfg["radius"]], max(cfg["p"], 1),
                                        cfg["n_max"], cfg["seed"], workers)
    rows = [[cfg["radius"], atom, frac]]
    return ["r", "atom", "equal_fraction"], rows, {"x": x, "atom": atom, "equal_fraction": frac}


def exp_wdr(system, cfg, workers):
    mu = measure_for(system, cfg)
    x = start_point(system, cfg)
    res = wdr_check(mu, x, WdrParams(cfg["eta"], cfg["eps"], tuple(grid(cfg))))
    rows = [[r, o, i, int(h)] for r, o, i, h in zip(res.r_grid, res.outer, res.inner, res.holds)]
    return ["r", "mass_eta_r", "mass_r_times_r_pow_neg_eps", "holds"], rows, {
        "x": x, "delta_estimate": res.delta_estimate, "all_hold": bool(res.holds.all())}


RUNNERS = {
    "orbit": exp_orbit,
    "return-time": exp_return_time,
    "rate": exp_rate,
    "dimension": exp_dimension,
    "kac": exp_kac,
    "correlations": exp_correlations,
    "aperiodicity": exp_aperiodicity,
    "wdr": exp_wdr,
}


# ---------------------------------------------------------------- output


def write_outputs(out_dir, prefix, header, rows, record):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, prefix + ".csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    json_path = os.path.join(out_dir, prefix + ".json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(jsonable(record), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def check_expectations(expect, summary):
    out = {}
    for key, (lo, hi) in sorted(expect.items()):
        v = summary.get(key)
        ok = isinstance(v, (int, float, np.floating, np.integer)) and lo <= float(v) <= hi
        out[key] = {"value": jsonable(v), "range": [lo, hi], "passed": bool(ok)}
    return out


def execute(experiment, cfg, out_dir=".", prefix=None, workers=None, timing=False, stream=None):
    """Run a resolved config; returns the exit code."""
    stream = stream or sys.stdout
    prefix = prefix or experiment
    started = time.perf_counter()
    code = EXIT_OK
    record = {"experiment": experiment, "config": cfg, "config_digest": digest(cfg), "version": __version__}
    try:
        system = system_from_spec(cfg["system"])
        header, rows, summary = RUNNERS[experiment](system, cfg, workers)
        record["status"] = "ok"
    except InsufficientDataError as err:
        header, rows, summary = err.partial if isinstance(err.partial, tuple) else ([], [], {})
        summary = dict(summary, error=str(err))
        record["status"] = "insufficient-data"
        code = EXIT_DATA
    record["summary"] = summary
    if cfg["expect"]:
        record["expectations"] = check_expectations(cfg["expect"], summary)
        record["expectations_passed"] = all(e["passed"] for e in record["expectations"].values())
    if timing:
        record["runtime_s"] = time.perf_counter() - started
    csv_path, json_path = write_outputs(out_dir, prefix, header, rows, record)
    print(json.dumps(jsonable(record["summary"]), sort_keys=True), file=stream)
    if record.get("expectations_passed") is False:
        failed = [k for k, e in record["expectations"].items() if not e["passed"]]
        print(f"expectations failed: {', '.join(failed)}", file=sys.stderr)
    return code


# ---------------------------------------------------------------- argparse


def _system_from_flags(args):
    if args.system is None and not args.param and args.noise is None:
        return None
    spec = {"family": args.system or "markov23"}
    for item in args.param or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError([f"--param expects key=value, got {item!r}"])
        spec[key] = yaml.safe_load(val)
    if args.noise is not None:
        spec["noise"] = yaml.safe_load(args.noise)
    return spec


def _expect_from_flags(items):
    if not items:
        return None
    out = {}
    for item in items:
        key, sep, rng = item.partition("=")
        lo, sep2, hi = rng.partition(":")
        try:
            out[key] = [float(lo), float(hi)]
        except ValueError:
            raise ConfigError([f"--expect expects key=lo:hi, got {item!r}"]) from None
        if not (sep and sep2):
            raise ConfigError([f"--expect expects key=lo:hi, got {item!r}"])
    return out


def _observable_flag(text):
    if text is None:
        return None
    val = yaml.safe_load(text)
    if isinstance(val, str):
        kind, _, m = val.partition(":")
        return {"kind": kind, **({"m": int(m)} if m else {})}
    return val


def build_parser():
    parser = argparse.ArgumentParser(prog="randrec", description="Recurrence experiments for random dynamical systems.")
    parser.add_argument("--version", action="version", version=f"randrec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON config file (a JSON summary also works)")
    common.add_argument("--system", help="family name (see list-systems)")
    common.add_argument("--param", action="append", metavar="KEY=VALUE", help="family parameter, repeatable")
    common.add_argument("--noise", help="noise spec as YAML/JSON, e.g. '{kind: iid, weights: [0.5, 0.5]}'")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--measure-N", dest="measure_N", type=int, help="samples for an empirical measure when needed")
    common.add_argument("--workers", type=int, help="worker threads (default: RANDREC_WORKERS or CPU count)")
    common.add_argument("--out-dir", default=".", help="directory for the CSV and JSON outputs")
    common.add_argument("--prefix", help="output file stem (default: experiment name)")
    common.add_argument("--expect", action="append", metavar="KEY=LO:HI", help="declare an expected range for a summary value")
    common.add_argument("--timing", action="store_true", help="record wall time in the JSON (breaks byte-identity)")

    def floats(p, name, **kw):
        p.add_argument(name, type=float, nargs="+", **kw)

    def add_grid(p):
        p.add_argument("--r-max", dest="r_max", type=float)
        p.add_argument("--ratio", type=float)
        p.add_argument("--levels", type=int)
        floats(p, "--r-list", dest="r_list", help="explicit decreasing radii (overrides the geometric grid)")

    p = sub.add_parser("orbit", parents=[common], help="one random orbit")
    floats(p, "--x")
    p.add_argument("--n", type=int)

    p = sub.add_parser("return-time", parents=[common], help="quenched or annealed return time")
    floats(p, "--x")
    p.add_argument("--radius", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--mode", choices=["quenched", "annealed"])
    p.add_argument("--M", type=int)

    p = sub.add_parser("rate", parents=[common], help="recurrence rate over a radius grid")
    floats(p, "--x")
    add_grid(p)
    p.add_argument("--p", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--mode", choices=["quenched", "annealed"])
    p.add_argument("--M", type=int)

    p = sub.add_parser("dimension", parents=[common], help="local dimension of the stationary measure")
    floats(p, "--x")
    add_grid(p)
    p.add_argument("--points", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--exact", action="store_const", const=True)

    p = sub.add_parser("kac", parents=[common], help="random Kac integral over a ball")
    floats(p, "--center")
    p.add_argument("--radius", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--realizations", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("correlations", parents=[common], help="annealed correlations and decay fit")
    p.add_argument("--psi", help="observable, e.g. fourier_cos:1 or '{kind: tent, center: [0.5], width: 0.2}'")
    p.add_argument("--phi")
    p.add_argument("--lags", type=int)
    p.add_argument("--M", type=int)
    floats(p, "--powers")

    p = sub.add_parser("aperiodicity", parents=[common], help="atom of tau at 1 and p-equivalence fraction")
    floats(p, "--x")
    p.add_argument("--radius", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("wdr", parents=[common], help="weak diametric regularity spot check")
    floats(p, "--x")
    add_grid(p)
    p.add_argument("--eta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--exact", action="store_const", const=True)

    p = sub.add_parser("run", help="run an experiment from a config (or JSON summary) file")
    p.add_argument("config")
    p.add_argument("--workers", type=int)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix")
    p.add_argument("--timing", action="store_true")

    sub.add_parser("list-systems", help="print the built-in system catalog")
    return parser


FLAG_SKIP = {"command", "config", "system", "param", "noise", "workers", "out_dir", "prefix", "expect", "timing"}


def list_systems(stream=None):
    stream = stream or sys.stdout
    for name, info in CATALOG.items():
        print(name, file=stream)
        for key in ("space", "maps", "noise", "stationary", "notes"):
            print(f"  {key}: {info[key]}", file=stream)
        for pkey, pdesc in info["params"].items():
            print(f"  param {pkey}: {pdesc}", file=stream)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-systems":
        list_systems()
        return EXIT_OK
    try:
        if args.command == "run":
            file_cfg = load_config_file(args.config)
            experiment = file_cfg.get("experiment")
            cfg = resolve(experiment, file_cfg, {})
        else:
            experiment = args.command
            file_cfg = load_config_file(args.config) if args.config else {}
            flags = {k: v for k, v in vars(args).items() if k not in FLAG_SKIP}
            if flags.get("psi") is not None or flags.get("phi") is not None:
                flags["psi"] = _observable_flag(flags.get("psi"))
                flags["phi"] = _observable_flag(flags.get("phi"))
            flags["system"] = _system_from_flags(args)
            flags["expect"] = _expect_from_flags(args.expect)
            cfg = resolve(experiment, file_cfg, flags)
        workers = args.workers if args.workers is not None else default_workers()
        return execute(experiment, cfg, args.out_dir, args.prefix, workers, args.timing)
    except ConfigError as err:
        for problem in err.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInputError, ValueError, TypeError, KeyError, OSError, yaml.YAMLError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
