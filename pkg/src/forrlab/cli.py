"""Command line entry point: ``forrlab <subcommand> [options]``.

Options may also come from a config file (``--config``) with a single
``[forrlab]`` section of ``key = value`` lines; command line flags win.
Exit codes: 0 pass, 1 assertion failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from forrlab import dist, fourier, identities, instances, moments, protocols, quantum, suite, trees
from forrlab.params import DESK_EPSILON, ForrelationParams
from forrlab.problem import PromiseLabel, label_k_codes
from forrlab.report import ExperimentReport, emit, mean_report
from forrlab.rng import stream

OUTPUT_DIR_ENV = "FORRLAB_OUTPUT_DIR"
EXPERIMENTS = ("sample", "label", "quantum-success", "tree-advantage", "lift-eval", "fourier-mass",
               "estimate-moments", "verify")
QUANTUM_TASK_SIZE = 250
MOMENT_TASK_SIZE = 100_000


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    N: int = 16
    k: int = 1
    eps: float | None = DESK_EPSILON
    seed: int = 0
    workers: int = 1
    output: str | None = None
    fmt: str = "json-lines"
    options: dict = field(default_factory=dict)

    def params(self) -> ForrelationParams:
        try:
            return ForrelationParams(self.N, self.k, self.eps)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


def _map(fn, args_list, workers: int):
    """Run independent tasks; results come back in task order whatever the pool size."""
    if workers <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args_list)))


def _chunks(total: int, size: int):
    out = []
    start = 0
    while start < total:
        out.append(min(size, total - start))
        start += size
    return out


# --- task bodies (top level so worker processes can pickle them) ---------------

def _quantum_task(params_dict, n, seed, task_id, max_rejects):
    params = ForrelationParams(**params_dict)
    rng = stream(seed, 1, task_id)
    r = quantum.quantum_success(params, n, rng, max_rejects=max_rejects)
    return r.estimate * n, n, r.extra


def _moment_task(params_dict, distribution, I, n, seed, task_id):
    params = ForrelationParams(**params_dict)
    return moments.monomial_samples(distribution, I, params, n, stream(seed, 2, task_id))


def _verify_task(index, seed):
    started = time.perf_counter()
    report = suite.CHECKS[index](stream(seed, 3, index))
    report.seed = seed
    report.wall_time = time.perf_counter() - started
    return report


# --- experiments -----------------------------------------------------------------

def run_quantum_success(cfg: ExperimentConfig):
    params = cfg.params()
    trials = int(cfg.options.get("trials", 1000))
    max_rejects = int(cfg.options.get("max_rejects", 10_000))
    plan = quantum.make_plan(params)
    parts = _map(_quantum_task, [(params.as_dict(), n, cfg.seed, i, max_rejects)
                                 for i, n in enumerate(_chunks(trials, QUANTUM_TASK_SIZE))], cfg.workers)
    correct = sum(p[0] for p in parts)
    rate = correct / trials
    rejection = float(np.mean([p[2]["rejection_rate"] for p in parts]))
    se = float(np.sqrt(max(rate * (1 - rate), 0.0) / trials))
    min_rate = float(cfg.options.get("min_success", 0.85))
    yield ExperimentReport("quantum-success", params.as_dict(), rate, se, trials, cfg.seed,
                           passed=rate >= min_rate,
                           extra={"repetitions": plan.repetitions, "threshold": plan.threshold,
                                  "queries_per_instance": params.k * plan.repetitions,
                                  "rejection_rate": rejection, "min_success": min_rate})


def run_sample(cfg: ExperimentConfig):
    params = cfg.params()
    count = int(cfg.options.get("count", 10))
    which = cfg.options.get("distribution", "sigma-yes")
    rng = stream(cfg.seed, 0)
    if which in ("sigma-yes", "sigma-no"):
        lab = PromiseLabel.YES if which == "sigma-yes" else PromiseLabel.NO
        zs, stats = dist.sample_sigma_batch(params, lab, count, rng)
        extra = {"rejection_rate": stats.rejection_rate}
    elif which in ("mu0", "mu1"):
        zs = dist.sample_mu(params, dist.EVEN if which == "mu0" else dist.ODD, True, rng, count)
        extra = {}
    elif which == "uniform":
        zs = dist.sample_uniform(params.length, rng, count)
        extra = {}
    else:
        raise UsageError(f"unknown distribution {which!r}")
    labels = label_k_codes(zs, params)
    path = cfg.options.get("instances")
    if path:
        instances.save(path, params, zs, labels)
        extra["instances"] = str(path)
    extra["distribution"] = which
    yield mean_report("sample", params.as_dict(), (labels == -1).astype(float), cfg.seed, **extra)


def run_label(cfg: ExperimentConfig):
    path = cfg.options.get("instances")
    if not path:
        raise UsageError("label needs --instances FILE")
    params, zs, stored = instances.load(path)
    codes = label_k_codes(zs, params)
    mismatches = int(np.sum(codes != stored))
    yield ExperimentReport("label", params.as_dict(), float(np.mean(codes == -1)), 0.0, int(codes.size), cfg.seed,
                           passed=mismatches == 0,
                           extra={"yes": int(np.sum(codes == -1)), "no": int(np.sum(codes == 1)),
                                  "outside": int(np.sum(codes == 0)), "stored_label_mismatches": mismatches,
                                  "labels": [int(c) for c in codes]})


def run_tree_advantage(cfg: ExperimentConfig):
    params = cfg.params()
    yield trees.tree_advantage_scan(
        params, int(cfg.options.get("depth", 2)), cfg.options.get("strategy", "exhaustive"),
        int(cfg.options.get("samples", 20_000)), cfg.seed, source=cfg.options.get("source", "sigma"))


def _protocol_from_options(cfg: ExperimentConfig):
    path = cfg.options.get("protocol")
    if path:
        return protocols.load_protocol(path)
    M = int(cfg.options.get("arity", 6))
    cost = int(cfg.options.get("cost", 4))
    return protocols.random_protocol(M, cost, stream(cfg.seed, 4))


def run_lift_eval(cfg: ExperimentConfig):
    C = _protocol_from_options(cfg)
    l = int(cfg.options.get("extend", 0))
    if l:
        C = protocols.extend_protocol(C, l)
    C.validate()
    table = protocols.xor_lift_table(C)
    direct = fourier.brute_fourier(table)
    via_rect = protocols.lift_fourier_from_rectangles(C)
    dev = float(np.abs(direct.coeffs - via_rect.coeffs).max())
    k = int(cfg.options.get("level_k", 1))
    mass = fourier.level_mass(direct, 2 * k) if 2 * k <= C.arity else 0.0
    bound = fourier.lift_weight_bound(k, max(C.cost, 1))
    yield ExperimentReport("lift-eval", {"arity": C.arity, "cost": C.cost, "min_cost": C.min_cost, "k": k},
                           mass, 0.0, 2 ** C.arity, cfg.seed, passed=dev < 1e-12,
                           extra={"fourier_identity_dev": dev, "weight_bound_shape": bound,
                                  "ratio_to_bound": mass / bound, "rectangles": C.n_rectangles,
                                  "H": [float(x) for x in table]})


def _read_truth_table(path) -> np.ndarray:
    text = Path(path).read_text().replace(",", " ").split()
    return np.array([float(t) for t in text])


def run_fourier_mass(cfg: ExperimentConfig):
    if cfg.options.get("truth_table"):
        table = fourier.brute_fourier(_read_truth_table(cfg.options["truth_table"]))
        source = str(cfg.options["truth_table"])
    else:
        C = _protocol_from_options(cfg)
        table = fourier.brute_fourier(protocols.xor_lift_table(C))
        source = str(cfg.options.get("protocol", "random-protocol"))
    for level, mass in enumerate(fourier.level_masses(table)):
        yield ExperimentReport("fourier-mass", {"arity": table.arity, "level": level, "source": source},
                               float(mass), 0.0, 2 ** table.arity, cfg.seed)


def run_estimate_moments(cfg: ExperimentConfig):
    params = cfg.params()
    distribution = cfg.options.get("distribution", "gaussian")
    I = [int(x) for x in str(cfg.options.get("index", "0")).replace(",", " ").split()]
    n = int(cfg.options.get("samples", 100_000))
    parts = _map(_moment_task, [(params.as_dict(), distribution, I, m, cfg.seed, i)
                                for i, m in enumerate(_chunks(n, MOMENT_TASK_SIZE))], cfg.workers)
    values = np.concatenate(parts)
    extra = {"distribution": distribution, "I": I}
    if distribution == "gaussian" and len(I) <= moments.MOMENT_GUARD and max(I) < params.copy_length:
        S, T = moments.split_copy_index(I, params.N)
        extra["exact"] = moments.gaussian_moment_exact(S, T, params)
    report = mean_report("estimate-moments", params.as_dict(), values, cfg.seed, **extra)
    if "exact" in extra:
        report.passed = report.within(extra["exact"], 4.0)
    yield report


def run_verify(cfg: ExperimentConfig):
    results = _map(_verify_task, [(i, cfg.seed) for i in range(len(suite.CHECKS))], cfg.workers)
    yield from results


RUNNERS = {
    "sample": run_sample,
    "label": run_label,
    "quantum-success": run_quantum_success,
    "tree-advantage": run_tree_advantage,
    "lift-eval": run_lift_eval,
    "fourier-mass": run_fourier_mass,
    "estimate-moments": run_estimate_moments,
    "verify": run_verify,
}


def run(cfg: ExperimentConfig) -> list[ExperimentReport]:
    """Dispatch to the experiment driver; deterministic given (config, seed)."""
    if cfg.experiment not in RUNNERS:
        raise UsageError(f"unknown experiment {cfg.experiment!r}")
    started = time.perf_counter()
    reports = []
    for r in RUNNERS[cfg.experiment](cfg):
        if r.seed is None:
            r.seed = cfg.seed
        if r.wall_time is None:
            r.wall_time = time.perf_counter() - started
        reports.append(r)
    return reports


# --- argument handling -----------------------------------------------------------

COMMON = {"N": int, "k": int, "eps": float, "seed": int, "workers": int}
OPTION_FLAGS = {
    "sample": {"count": int, "distribution": str, "instances": str},
    "label": {"instances": str},
    "quantum-success": {"trials": int, "max_rejects": int, "min_success": float},
    "tree-advantage": {"depth": int, "strategy": str, "samples": int, "source": str},
    "lift-eval": {"protocol": str, "arity": int, "cost": int, "extend": int, "level_k": int},
    "fourier-mass": {"truth_table": str, "protocol": str, "arity": int, "cost": int},
    "estimate-moments": {"distribution": str, "index": str, "samples": int},
    "verify": {},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forrlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="config file with a [forrlab] section")
        p.add_argument("--output", "-o", help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
        p.add_argument("--format", dest="fmt", choices=("json-lines", "csv"), default=None)
        p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
        for key, typ in COMMON.items():
            p.add_argument(f"--{key}", type=typ, default=None)
        for key, typ in OPTION_FLAGS[name].items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)
    return parser


def _read_config(path) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(path):
        raise UsageError(f"cannot read config {path}")
    if "forrlab" not in cp:
        raise UsageError(f"config {path} has no [forrlab] section")
    return dict(cp["forrlab"])


def config_from_args(args) -> ExperimentConfig:
    raw = _read_config(args.config) if args.config else {}
    typed = {**COMMON, **OPTION_FLAGS[args.experiment], "fmt": str, "output": str}
    merged = {}
    for key, value in raw.items():
        key = key.replace("-", "_")
        if key not in typed:
            raise UsageError(f"unknown config key {key!r}")
        try:
            merged[key] = typed[key](value)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
    for key in typed:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    cfg = ExperimentConfig(args.experiment)
    for key in ("N", "k", "eps", "seed", "workers", "output", "fmt"):
        if key in merged:
            setattr(cfg, key, merged.pop(key))
    cfg.options = merged
    if cfg.workers < 1:
        raise UsageError("workers must be >= 1")
    return cfg


def _destination(cfg: ExperimentConfig) -> Path | None:
    if cfg.output:
        return Path(cfg.output)
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        ext = "csv" if cfg.fmt == "csv" else "jsonl"
        return Path(out_dir) / f"{cfg.experiment}.{ext}"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        reports = run(cfg)
        text = emit(reports, cfg.fmt, timing=args.timing)
    except (UsageError, protocols.ProtocolError, instances.InstanceFormatError, FileNotFoundError) as exc:
        print(f"forrlab: error: {exc}", file=sys.stderr)
        return 2
    except dist.PromiseFailure as exc:
        print(f"forrlab: promise failure: {exc}", file=sys.stderr)
        return 1
    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
    return 1 if any(r.passed is False for r in reports) else 0


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
