"""Command-line entry point: verify | train | stability | region | sweep.

Configs are TOML files with nested sections. Every key has a default and
unknown keys are rejected. Exit codes: 0 success, 1 check failure, 2 usage or
configuration error.
"""

import argparse
import copy
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bounds, datagen, loss, model, optimizer, stability, verify
from .datagen import derive_seed
from .errors import ConfigError, DivergenceError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "network": {"arch": "two_layer", "m": 64, "c": 0.5, "d": 5, "activation": "sigmoid",
                "signs": "balanced", "sign_seed": 0, "init_std": 0.1},
    "data": {"n": 50, "c_x": 1.0, "c_y": 1.0, "noise_std": 0.0, "noise_trunc": 3.0,
             "teacher": True, "teacher_m": 0, "teacher_std": 1.0, "teacher_mu": -1.0,
             "seed": 0},
    "train": {"eta": "auto", "t_max": 200, "strict": True, "snapshot_stride": 0},
    "run": {"seeds": [0], "n_mc": 10000, "coercivity": False, "per_step_distances": False,
            "save_data": False},
    "verify": {k: (list(v) if isinstance(v, tuple) else v)
               for k, v in verify.SuiteConfig().__dict__.items()},
    "sweep": {"m": [], "c": [], "n": [], "t_max": [], "eta": [], "stability": False,
              "max_runs": 500, "max_cost": 2.0e11},
    "region": {"arch": "two_layer", "n_c": 21, "n_mu": 21},
}


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------------
# config handling

def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where!r} must be a section")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def load_config(path=None) -> dict:
    """Defaults overlaid with the TOML file at path (if any)."""
    if path is None:
        return copy.deepcopy(DEFAULTS)
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return _merge(DEFAULTS, raw)


def parse_seeds(text: str) -> list:
    """'0,1,5' or '0-4' or a mix."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"bad seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError("no seeds given")
    return seeds


def validate(cfg: dict) -> None:
    """Architecture ranges and strict step rules, before anything runs."""
    net, data, train, run = cfg["network"], cfg["data"], cfg["train"], cfg["run"]
    model.NetworkConfig(net["arch"], int(net["m"]), float(net["c"]), int(net["d"]))
    from .activations import certified_bounds
    act = certified_bounds(net["activation"])
    if int(data["n"]) < 1:
        raise ConfigError("data.n must be at least 1")
    datagen.GenConfig(int(net["d"]), data["c_x"], data["c_y"], data["noise_std"], 0,
                      data["noise_trunc"])
    if not run["seeds"] or len(set(run["seeds"])) != len(run["seeds"]):
        raise ConfigError("run.seeds must be a nonempty list of distinct integers")
    if int(run["n_mc"]) < 100:
        raise ConfigError("run.n_mc must be at least 100")
    eta = train["eta"]
    if eta != "auto":
        if not isinstance(eta, (int, float)) or not eta > 0:
            raise ConfigError("train.eta must be a positive number or \"auto\"")
        optimizer.GDConfig(float(eta), int(train["t_max"]))
        if train["strict"]:
            limit = _eta_upper_limit(net["arch"], data, act, int(net["m"]), float(net["c"]))
            if eta > limit * (1 + 1e-12):
                raise ConfigError(f"train.eta={eta} exceeds the admissible step {limit} "
                                  "(strict mode)")
    else:
        optimizer.GDConfig(1.0, int(train["t_max"]))


def _eta_upper_limit(arch, data, act, m, c):
    """Largest step that can be admissible for any dataset under the envelopes."""
    if arch == "two_layer":
        return optimizer.max_safe_stepsize(arch, bounds.rho_two_layer(data["c_x"], data["c_y"],
                                                                      act, m, c))
    # rho_hat only grows with c0
    return optimizer.max_safe_stepsize(arch, bounds.three_layer_constants(data["c_x"], act, 0.0)[2])


def resolved_for_output(cfg: dict, section_keys) -> dict:
    return {k: cfg[k] for k in section_keys}


# ----------------------------------------------------------------------------
# output helpers

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(dumps_json(obj))


def _fmt(v):
    v = _clean(v)
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def csv_text(kind: str, config: dict, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: gdstab.{kind}/{SCHEMA_VERSION}\n")
    buf.write("# config: " + json.dumps(_clean(config), sort_keys=True, separators=(",", ":"))
              + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    return buf.getvalue() + csv_rows(rows)


def csv_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path: Path, kind, config, header, rows) -> None:
    path.write_text(csv_text(kind, config, header, rows))


def _table(header, rows) -> str:
    cells = [[str(h) for h in header]] + [[_short(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


# ----------------------------------------------------------------------------
# experiment plumbing

def build_network(net_cfg, m=None, c=None) -> model.Network:
    m = int(net_cfg["m"] if m is None else m)
    c = float(net_cfg["c"] if c is None else c)
    return model.Network.build(net_cfg["arch"], m, c, int(net_cfg["d"]), net_cfg["activation"],
                               net_cfg["signs"], int(net_cfg["sign_seed"]))


def build_generator(cfg, net: model.Network) -> datagen.DataGenerator:
    data = cfg["data"]
    teacher = None
    if data["teacher"]:
        tm = int(data["teacher_m"]) or net.config.m
        tnet = net if tm == net.config.m else build_network(cfg["network"], m=tm,
                                                              c=net.config.c)
        mu = None if data["teacher_mu"] < 0 else float(data["teacher_mu"])
        teacher = datagen.make_teacher(tnet, derive_seed(int(data["seed"]), 11),
                                       float(data["teacher_std"]), mu)
    gen = datagen.GenConfig(net.config.d, float(data["c_x"]), float(data["c_y"]),
                            float(data["noise_std"]), int(data["seed"]), float(data["noise_trunc"]))
    return datagen.DataGenerator(gen, teacher)


def resolve_eta(eta, arch, smooth) -> float:
    safe = optimizer.max_safe_stepsize(arch, smooth)
    return safe if eta == "auto" else float(eta)


def _wstar(gen, net):
    if gen.teacher is not None and gen.teacher.net.config == net.config:
        return gen.teacher.params
    return None


def train_job(cfg, seed):
    net = build_network(cfg["network"])
    gen = build_generator(cfg, net)
    n = int(cfg["data"]["n"])
    train = cfg["train"]
    S = gen.sample(n, derive_seed(seed, 1))
    w0 = model.init_params(net.config, float(cfg["network"]["init_std"]), derive_seed(seed, 3))
    c0 = loss.certify_c0(net, w0, S)
    S = S.with_c0(c0)
    smooth = optimizer.smoothness_constant(net, S)
    eta = resolve_eta(train["eta"], net.config.arch, smooth)
    gd = optimizer.GDConfig(eta, int(train["t_max"]), int(train["snapshot_stride"]),
                            bool(train["strict"]))
    traj = optimizer.gd_run(net, S, gd, w0, smooth)
    test, se = loss.population_risk_mc(net, traj.final, gen, int(cfg["run"]["n_mc"]),
                                       derive_seed(seed, 4))
    wstar = _wstar(gen, net)
    wdist = float(np.linalg.norm(wstar - w0)) if wstar is not None else 0.0
    wnorm = float(np.linalg.norm(wstar)) if wstar is not None else None
    widths = bounds.width_conditions(net.config.arch, eta, gd.t_max, n, net.config.c,
                                     net.config.m, S.c_x, S.c_y, net.act, c0,
                                     float(np.linalg.norm(w0)), wdist, wnorm)
    summary = {"seed": seed, "eta": eta, "t_max": gd.t_max, "c0": c0, "smoothness": smooth,
               "n_clipped": S.n_clipped, "clipped": S.clipped,
               "final_train_risk": float(traj.risks[-1]), "final_test_risk": test,
               "final_test_risk_se": se, "final_deviation": float(traj.deviations[-1]),
               "width_conditions": [r.to_dict() for r in widths],
               "certified": all(r.satisfied for r in widths),
               "teacher_digest": gen.teacher.digest() if gen.teacher is not None else None}
    return {"summary": summary, "rows": traj.to_rows(), "dataset": S}


def stability_job(cfg, seed):
    net = build_network(cfg["network"])
    gen = build_generator(cfg, net)
    n = int(cfg["data"]["n"])
    train, run = cfg["train"], cfg["run"]
    S = gen.sample(n, derive_seed(seed, 1))
    S_prime = gen.sample(n, derive_seed(seed, 2))
    w0 = model.init_params(net.config, float(cfg["network"]["init_std"]), derive_seed(seed, 3))
    c0 = loss.certify_c0(net, w0, S, S_prime)
    smooth = optimizer.smoothness_constant(net, S.with_c0(c0))
    eta = resolve_eta(train["eta"], net.config.arch, smooth)
    gd = optimizer.GDConfig(eta, int(train["t_max"]), 0, bool(train["strict"]))
    rep = stability.paired_stability_run(net, S, S_prime, gd, w0, gen, int(run["n_mc"]),
                                         derive_seed(seed, 4), _wstar(gen, net),
                                         bool(run["coercivity"]), bool(run["per_step_distances"]))
    out = rep.to_dict()
    out["seed"] = seed
    return out


def sweep_job(cfg, point, seed):
    """One row of a sweep: train once and optionally measure on-average stability."""
    m, c, n, t_max, eta = point
    net = build_network(cfg["network"], m=m, c=c)
    gen = build_generator(cfg, net)
    init_std = float(cfg["network"]["init_std"])
    S = gen.sample(n, derive_seed(seed, 1))
    S_prime = gen.sample(n, derive_seed(seed, 2))
    w0 = model.init_params(net.config, init_std, derive_seed(seed, 3))
    c0 = loss.certify_c0(net, w0, S, S_prime)
    smooth = optimizer.smoothness_constant(net, S.with_c0(c0))
    eta_v = resolve_eta(eta, net.config.arch, smooth)
    gd = optimizer.GDConfig(eta_v, int(t_max), 0, bool(cfg["train"]["strict"]))
    rec = stability.excess_risk_experiment(net, gen, n, gd, [seed], init_std,
                                           int(cfg["run"]["n_mc"]))[0]
    row = {"m": m, "c": c, "n": n, "t_max": int(t_max), "eta": eta_v, "eta_t": eta_v * t_max,
           "seed": seed, "train_risk": rec["final_train_risk"], "test_risk": rec["final_test_risk"],
           "gap": rec["final_gap"], "gen_bound": rec["final_gen_bound"],
           "certified": rec.get("certified", ""), "on_average_sq": "", "uniform_max": ""}
    if cfg["sweep"]["stability"]:
        rep = stability.paired_stability_run(net, S, S_prime, gd, w0, wstar=_wstar(gen, net))
        row["on_average_sq"] = rep.on_average_sq
        row["uniform_max"] = rep.uniform_max
    return row


def _executor(workers):
    if workers <= 1:
        return None
    return ProcessPoolExecutor(max_workers=workers)


def _map_jobs(fn, args_list, workers, on_result=None):
    """Run fn(*args) for each args; on_result(i, value) sees results in completion order."""
    results = [None] * len(args_list)
    ex = _executor(workers)
    if ex is None:
        for i, args in enumerate(args_list):
            results[i] = fn(*args)
            if on_result:
                on_result(i, results[i])
        return results
    with ex:
        futs = {ex.submit(fn, *args): i for i, args in enumerate(args_list)}
        for fut in as_completed(futs):
            i = futs[fut]
            results[i] = fut.result()
            if on_result:
                on_result(i, results[i])
    return results


# ----------------------------------------------------------------------------
# commands

def _suite_config(cfg) -> verify.SuiteConfig:
    v = dict(cfg["verify"])
    for k, val in v.items():
        if isinstance(val, list):
            v[k] = tuple(val)
    return verify.SuiteConfig(**v)


def cmd_verify(cfg, out_dir: Path, workers: int) -> int:
    suite = _suite_config(cfg)
    ex = _executor(workers)
    if ex is None:
        results = verify.run_suite(suite)
    else:
        with ex:
            results = verify.run_suite(suite, ex)
    doc = {"config": resolved_for_output(cfg, ["verify"]), "schema_version": SCHEMA_VERSION,
           "results": [r.to_dict() for r in results],
           "all_passed": all(r.passed for r in results)}
    write_json(out_dir / "verify.json", doc)
    header = ["check_id", "passed", "worst_violation", "tolerance", "n_checked", "location"]
    print(_table(header, [[r.check_id, "PASS" if r.passed else "FAIL", r.worst_violation,
                           r.tolerance, r.n_checked, r.location] for r in results]))
    return EXIT_OK if doc["all_passed"] else EXIT_FAIL


def cmd_train(cfg, out_dir: Path, workers: int) -> int:
    seeds = sorted(cfg["run"]["seeds"])
    results = _map_jobs(train_job, [(cfg, s) for s in seeds], workers)
    conf = resolved_for_output(cfg, ["network", "data", "train", "run"])
    for s, res in zip(seeds, results):
        write_csv(out_dir / f"train_seed{s}.csv", "trajectory", dict(conf, seed=s),
                  ["t", "train_risk", "deviation", "grad_norm"], res["rows"])
        if cfg["run"]["save_data"]:
            datagen.save_dataset(res["dataset"], out_dir / f"data_seed{s}.csv",
                                 {"seed": s, "teacher_digest": res["summary"]["teacher_digest"]})
    summaries = [r["summary"] for r in results]
    write_json(out_dir / "train.json", {"config": conf, "schema_version": SCHEMA_VERSION,
                                        "runs": summaries})
    print(_table(["seed", "eta", "train_risk", "test_risk", "deviation", "certified"],
                 [[r["seed"], r["eta"], r["final_train_risk"], r["final_test_risk"],
                   r["final_deviation"], r["certified"]] for r in summaries]))
    return EXIT_OK


def cmd_stability(cfg, out_dir: Path, workers: int) -> int:
    seeds = sorted(cfg["run"]["seeds"])
    reports = _map_jobs(stability_job, [(cfg, s) for s in seeds], workers)
    conf = resolved_for_output(cfg, ["network", "data", "train", "run"])
    failed = False
    for s, rep in zip(seeds, reports):
        write_json(out_dir / f"stability_seed{s}.json",
                   {"config": conf, "schema_version": SCHEMA_VERSION, "report": rep})
        write_csv(out_dir / f"stability_seed{s}.csv", "per_index_distance", dict(conf, seed=s),
                  ["index", "distance"], list(enumerate(rep["per_index_distance"])))
        if rep["certified"] and rep["uniform_max"] > rep["theoretical_uniform"]:
            failed = True
        if rep.get("coercivity") and rep["coercivity"]["violations"] > 0:
            failed = True
    on_avg = np.array([r["on_average_sq"] for r in reports])
    gaps = np.array([r["empirical_gen_gap"] for r in reports])
    k = len(reports)
    summary = {"config": conf, "schema_version": SCHEMA_VERSION, "seeds": seeds,
               "on_average_sq_mean": float(on_avg.mean()),
               "on_average_sq_se": float(on_avg.std(ddof=1) / math.sqrt(k)) if k > 1 else None,
               "empirical_gap_mean": float(gaps.mean()),
               "empirical_gap_se": float(gaps.std(ddof=1) / math.sqrt(k)) if k > 1 else None,
               "theoretical_gen_gap_mean": float(np.mean([r["theoretical_gen_gap"]
                                                          for r in reports])),
               "any_bound_violation": failed}
    write_json(out_dir / "stability_summary.json", summary)
    print(_table(["seed", "eta", "on_avg_sq", "uniform_max", "uniform_bound", "gap", "certified"],
                 [[r["seed"], r["eta"], r["on_average_sq"], r["uniform_max"],
                   r["theoretical_uniform"], r["empirical_gen_gap"], r["certified"]]
                  for r in reports]))
    return EXIT_FAIL if failed else EXIT_OK


def _parse_point(text):
    try:
        c, mu = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--point expects 'c,mu', got {text!r}") from exc
    return c, mu


def _parse_grid(text):
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"--grid expects 'NCxNMU', got {text!r}") from exc
    if a < 2 or b < 2:
        raise ConfigError("grid sizes must be at least 2")
    return a, b


def cmd_region(cfg, out_dir: Path, args) -> int:
    reg = dict(cfg["region"])
    if args.arch:
        reg["arch"] = args.arch
    if args.point:
        c, mu = _parse_point(args.point)
        verdicts = [bounds.classify_region(reg["arch"], c, mu)]
    else:
        if args.grid:
            reg["n_c"], reg["n_mu"] = _parse_grid(args.grid)
        verdicts = bounds.region_grid(reg["arch"], int(reg["n_c"]), int(reg["n_mu"]))
    rows = [[v.arch, v.c, v.mu, v.region, v.smallest_width_exponent, v.eta_t_window[0],
             v.eta_t_window[1]] for v in verdicts]
    conf = {"region": reg, "point": args.point}
    write_csv(out_dir / f"region_{reg['arch']}.csv", "region", conf,
              ["arch", "c", "mu", "region", "width_exponent", "eta_t_low", "eta_t_high"], rows)
    counts = {}
    for v in verdicts:
        counts[v.region] = counts.get(v.region, 0) + 1
    print(_table(["region", "points"], sorted(counts.items())))
    return EXIT_OK


SWEEP_HEADER = ["run_id", "m", "c", "n", "t_max", "eta", "eta_t", "seed", "train_risk",
                "test_risk", "gap", "gen_bound", "certified", "on_average_sq", "uniform_max"]


def sweep_points(cfg):
    net, data, train, sw = cfg["network"], cfg["data"], cfg["train"], cfg["sweep"]
    ms = sw["m"] or [net["m"]]
    cs = sw["c"] or [net["c"]]
    ns = sw["n"] or [data["n"]]
    ts = sw["t_max"] or [train["t_max"]]
    etas = sw["eta"] or [train["eta"]]
    return [(int(m), float(c), int(n), int(t), e)
            for m, c, n, t, e in itertools.product(ms, cs, ns, ts, etas)]


def sweep_cost(cfg, points, n_seeds) -> float:
    """Rough flop-count proxy: seeds * T * n * P * (n + 1 when stability is on)."""
    d = int(cfg["network"]["d"])
    arch = cfg["network"]["arch"]
    total = 0.0
    for m, c, n, t, _ in points:
        P = m * d if arch == "two_layer" else m * d + m * m
        runs = (n + 2) if cfg["sweep"]["stability"] else 1
        total += n_seeds * t * n * P * runs
    return total


def cmd_sweep(cfg, out_dir: Path, workers: int) -> int:
    seeds = sorted(cfg["run"]["seeds"])
    points = sweep_points(cfg)
    for m, c, n, t, e in points:
        validate(_merge(cfg, {"network": {"m": m, "c": c}, "data": {"n": n},
                              "train": {"t_max": t, "eta": e}}))
    n_runs = len(points) * len(seeds)
    if n_runs > int(cfg["sweep"]["max_runs"]):
        raise ConfigError(f"sweep has {n_runs} runs, over the budget max_runs="
                          f"{cfg['sweep']['max_runs']}")
    cost = sweep_cost(cfg, points, len(seeds))
    if cost > float(cfg["sweep"]["max_cost"]):
        raise ConfigError(f"sweep cost estimate {cost:.3g} exceeds max_cost="
                          f"{cfg['sweep']['max_cost']:.3g}")
    jobs = [(cfg, p, s) for p in points for s in seeds]
    conf = resolved_for_output(cfg, ["network", "data", "train", "run", "sweep"])
    path = out_dir / "sweep.csv"
    head = csv_text("sweep", conf, SWEEP_HEADER, [])
    with open(path, "w") as fh:
        fh.write(head)
        fh.flush()
        os.fsync(fh.fileno())
        # completed rows are appended and synced as they arrive
        def on_result(i, row):
            row["run_id"] = i
            fh.write(csv_rows([[row[k] for k in SWEEP_HEADER]]))
            fh.flush()
            os.fsync(fh.fileno())
        rows = _map_jobs(sweep_job, jobs, workers, on_result)
    rows = sorted(rows, key=lambda r: r["run_id"])
    tmp = path.with_suffix(".csv.tmp")
    write_csv(tmp, "sweep", conf, SWEEP_HEADER, [[r[k] for k in SWEEP_HEADER] for r in rows])
    os.replace(tmp, path)
    # seed-averaged summary per grid point
    summary = []
    for p in points:
        sel = [r for r in rows if (r["m"], r["c"], r["n"], r["t_max"]) == p[:4]
               and (p[4] == "auto" or r["eta"] == float(p[4]))]
        gaps = np.array([r["gap"] for r in sel])
        entry = {"m": p[0], "c": p[1], "n": p[2], "t_max": p[3], "eta": p[4],
                 "gap_mean": float(gaps.mean()),
                 "gap_se": float(gaps.std(ddof=1) / math.sqrt(len(gaps))) if len(gaps) > 1
                 else None,
                 "gen_bound_mean": float(np.mean([r["gen_bound"] for r in sel])),
                 "test_risk_mean": float(np.mean([r["test_risk"] for r in sel])),
                 "train_risk_mean": float(np.mean([r["train_risk"] for r in sel]))}
        if cfg["sweep"]["stability"]:
            entry["on_average_sq_mean"] = float(np.mean([r["on_average_sq"] for r in sel]))
        summary.append(entry)
    write_json(out_dir / "sweep_summary.json",
               {"config": conf, "schema_version": SCHEMA_VERSION, "points": summary})
    print(_table(["m", "c", "n", "t_max", "eta", "gap_mean", "gen_bound_mean"],
                 [[e["m"], e["c"], e["n"], e["t_max"], e["eta"], e["gap_mean"],
                   e["gen_bound_mean"]] for e in summary]))
    return EXIT_OK


# ----------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file (defaults apply when omitted)")
    common.add_argument("--out-dir", default=".", help="directory for result files")
    common.add_argument("--seeds", help="seed list such as 0,1,2 or 0-9 (overrides run.seeds)")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: number of processors)")
    common.add_argument("--strict", dest="strict", action="store_true", default=None,
                        help="enforce the step-size rule and divergence guard")
    common.add_argument("--no-strict", dest="strict", action="store_false")
    p = argparse.ArgumentParser(prog="gdstab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sub.add_parser("train", parents=[common], help="train and record trajectories")
    sub.add_parser("stability", parents=[common], help="paired stability runs")
    r = sub.add_parser("region", parents=[common], help="(c, mu) region classification")
    r.add_argument("--arch", choices=["two_layer", "three_layer"])
    r.add_argument("--grid", help="grid size NCxNMU, e.g. 21x21")
    r.add_argument("--point", help="single point 'c,mu'")
    sub.add_parser("sweep", parents=[common], help="grid sweep over m, c, n, T")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.seeds:
            cfg["run"]["seeds"] = parse_seeds(args.seeds)
        if args.strict is not None:
            cfg["train"]["strict"] = args.strict
            cfg["verify"]["strict"] = args.strict
        if args.command != "region":
            validate(cfg)
        if args.command == "verify":
            _suite_config(cfg)
        workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
        if workers < 1:
            raise ConfigError("--workers must be at least 1")
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir, workers)
        if args.command == "train":
            return cmd_train(cfg, out_dir, workers)
        if args.command == "stability":
            return cmd_stability(cfg, out_dir, workers)
        if args.command == "region":
            return cmd_region(cfg, out_dir, args)
        return cmd_sweep(cfg, out_dir, workers)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
