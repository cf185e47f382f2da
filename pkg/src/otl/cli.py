"""Command-line front end: ``otl <rates|classify|ot-demo> --config <path>``.

Configs are strict JSON documents: unknown keys are rejected so a typo in
a tolerance name cannot silently fall back to a default. Every output file
embeds the seed and a hash of the effective config; reruns with equal
configs are byte-identical (the summary additionally records wall time).

Exit codes: 0 success, 2 config error, 3 statistical invalidation,
4 numerical failure.
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

from .entropic import EntropicTransportMap, NumericalError
from .quantile_map import QuantileTransportMap1D
from .rates import (
    CLASSIFICATION_METRICS,
    RateConfig,
    run_classification_experiment,
    run_rate_experiment,
)
from .samples import child_seed
from .synthetic import GaussianTaskSpec, build_ground_truth, sample_target, sample_task

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4

SOLVER_KEYS = {
    "epsilon", "epsilon_scale", "bandwidth", "sinkhorn_tol",
    "sinkhorn_max_iter", "method", "coupling_cap",
}


class ConfigError(ValueError):
    pass


def _check_keys(doc, required, optional, context):
    if not isinstance(doc, dict):
        raise ConfigError(f"{context} must be an object")
    unknown = set(doc) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")
    missing = set(required) - set(doc)
    if missing:
        raise ConfigError(f"missing {context} keys: {sorted(missing)}")


def _parse_solver(doc):
    solver = doc.get("solver", {})
    _check_keys(solver, required=(), optional=SOLVER_KEYS, context="solver")
    if "epsilon" in solver and solver["epsilon"] is not None and solver["epsilon"] <= 0:
        raise ConfigError(f"solver epsilon must be positive, got {solver['epsilon']}")
    if "epsilon_scale" in solver and solver["epsilon_scale"] <= 0:
        raise ConfigError("solver epsilon_scale must be positive")
    if "sinkhorn_tol" in solver and solver["sinkhorn_tol"] <= 0:
        raise ConfigError("solver sinkhorn_tol must be positive")
    return dict(solver)


def _parse_alpha(value):
    if value in ("inf", "infinity"):
        return math.inf
    return float(value)


def _rate_config(doc, seed, need_threshold):
    common = {"task", "m_grid", "trials", "m_source", "seed"}
    optional = {"n_eval", "p", "alpha", "bandwidth_scale", "solver", "out_dir", "threshold"}
    if need_threshold:
        common = common | {"threshold"}
        optional = optional - {"threshold"}
    _check_keys(doc, required=common, optional=optional, context="config")
    try:
        task = GaussianTaskSpec.from_dict(doc["task"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid task: {exc}") from exc
    solver = _parse_solver(doc)
    kwargs = dict(
        task=task,
        m_grid=tuple(doc["m_grid"]),
        trials=int(doc["trials"]),
        m_source=int(doc["m_source"]),
        seed=seed,
    )
    for key in ("n_eval", "p", "bandwidth_scale"):
        if key in doc:
            kwargs[key] = doc[key]
    if "alpha" in doc:
        kwargs["alpha"] = _parse_alpha(doc["alpha"])
    if "threshold" in doc and doc["threshold"] is not None:
        kwargs["threshold"] = float(doc["threshold"])
    kwargs.update(solver)
    kwargs.pop("method", None)  # RateConfig pins solver method selection to auto
    try:
        return RateConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _config_hash(doc, seed):
    effective = dict(doc)
    effective["seed"] = seed
    canonical = json.dumps(effective, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, provenance, header, rows):
    with open(path, "w", newline="") as buf:
        buf.write(f"# {provenance}\n")
        writer = csv.writer(buf)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_summary(out_dir, command, seed, config_hash, wall_time, results):
    payload = {
        "command": command,
        "seed": seed,
        "config_hash": config_hash,
        "wall_time_s": wall_time,
        "results": results,
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as buf:
        json.dump(payload, buf, indent=2, sort_keys=True, default=_json_default)
        buf.write("\n")


def _json_default(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    raise TypeError(f"not JSON serializable: {value!r}")


def cmd_rates(doc, out_dir, seed):
    config = _rate_config(doc, seed, need_threshold=False)
    config_hash = _config_hash(doc, seed)
    start = time.perf_counter()
    result = run_rate_experiment(config)
    provenance = f"seed={seed} config_hash={config_hash}"
    _write_csv(
        os.path.join(out_dir, "rates.csv"),
        provenance,
        ["m", "mean_err_transfer", "sd_transfer", "mean_err_direct", "sd_direct"],
        [
            (r.m, r.mean_err_transfer, r.sd_transfer, r.mean_err_direct, r.sd_direct)
            for r in result.rows
        ],
    )
    summary = result.summary()
    summary["config"] = doc
    _write_summary(out_dir, "rates", seed, config_hash, time.perf_counter() - start, summary)
    if not result.valid:
        print("rate experiment invalidated: an m-row lost more than half of its trials",
              file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_classify(doc, out_dir, seed):
    config = _rate_config(doc, seed, need_threshold=True)
    config_hash = _config_hash(doc, seed)
    start = time.perf_counter()
    result = run_classification_experiment(config)
    provenance = f"seed={seed} config_hash={config_hash}"
    metric_header = ["m"]
    for metric in CLASSIFICATION_METRICS:
        metric_header += [f"{metric}_direct", f"{metric}_transfer"]
    _write_csv(
        os.path.join(out_dir, "metrics.csv"),
        provenance,
        metric_header,
        [
            [r.m] + [
                v
                for metric in CLASSIFICATION_METRICS
                for v in (r.metrics_direct[metric], r.metrics_transfer[metric])
            ]
            for r in result.rows
        ],
    )
    _write_csv(
        os.path.join(out_dir, "improvement.csv"),
        provenance,
        ["m"] + [f"delta_{metric}_pct" for metric in CLASSIFICATION_METRICS],
        [
            [r.m] + [r.improvement[metric] for metric in CLASSIFICATION_METRICS]
            for r in result.rows
        ],
    )
    summary = {
        "threshold": result.threshold,
        "warning_count": result.warning_count,
        "rows": [
            {
                "m": r.m,
                "metrics_transfer": r.metrics_transfer,
                "metrics_direct": r.metrics_direct,
                "improvement": r.improvement,
                "degenerate_trials": r.degenerate_trials,
                "failed_trials": r.failed_trials,
            }
            for r in result.rows
        ],
        "config": doc,
    }
    _write_summary(out_dir, "classify", seed, config_hash, time.perf_counter() - start, summary)
    if not result.valid:
        print("classification sweep invalidated: a row lost more than half of its trials",
              file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_ot_demo(doc, out_dir, seed):
    _check_keys(
        doc,
        required={"task", "m", "seed"},
        optional={"m_source", "n_eval", "solver", "out_dir"},
        context="config",
    )
    try:
        task = GaussianTaskSpec.from_dict(doc["task"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid task: {exc}") from exc
    solver = _parse_solver(doc)
    solver.pop("coupling_cap", None)
    solver = {
        {"sinkhorn_tol": "tol", "sinkhorn_max_iter": "max_iter"}.get(k, k): v
        for k, v in solver.items()
    }
    m = int(doc["m"])
    m_source = int(doc.get("m_source", m))
    n_eval = int(doc.get("n_eval", 2000))
    if m < 1 or m_source < 1 or n_eval < 1:
        raise ConfigError("m, m_source, n_eval must be >= 1")
    config_hash = _config_hash(doc, seed)
    start = time.perf_counter()

    truth = build_ground_truth(task)
    src, tgt = sample_task(task, m, m_source, child_seed(seed, 21))
    entropic = EntropicTransportMap(**solver).fit(tgt.X, src.X)
    quantile = QuantileTransportMap1D().fit(truth.source_model(src.X), tgt.y)

    X_eval = sample_target(task, n_eval, child_seed(seed, 22)).X
    input_gap = np.linalg.norm(entropic.transform(X_eval) - truth.input_map(X_eval), axis=1)
    source_eval = truth.source_model(
        sample_task(task, 1, n_eval, child_seed(seed, 23))[0].X
    )
    output_gap = np.abs(quantile.transform(source_eval) - truth.output_map(source_eval))

    bbox = np.vstack([tgt.X, src.X])
    input_diameter = float(np.linalg.norm(bbox.max(axis=0) - bbox.min(axis=0)))
    output_values = np.concatenate([tgt.y, truth.source_model(src.X)])
    output_diameter = float(output_values.max() - output_values.min())

    provenance = f"seed={seed} config_hash={config_hash}"
    entropic.to_csv(os.path.join(out_dir, "entropic_map.csv"))
    quantile.to_csv(os.path.join(out_dir, "quantile_map.csv"))
    # map CSVs carry their own schema; stamp provenance in the summary and
    # a sidecar so reruns remain comparable
    _write_csv(
        os.path.join(out_dir, "deviations.csv"),
        provenance,
        ["map", "sup_deviation", "l2_deviation", "diameter"],
        [
            ("input", float(input_gap.max()), float(np.sqrt(np.mean(input_gap**2))),
             input_diameter),
            ("output", float(output_gap.max()), float(np.sqrt(np.mean(output_gap**2))),
             output_diameter),
        ],
    )
    results = {
        "input_map": {
            "sup_deviation": float(input_gap.max()),
            "l2_deviation": float(np.sqrt(np.mean(input_gap**2))),
            "diameter": input_diameter,
            "sinkhorn_iterations": entropic.coupling_.iterations,
            "sinkhorn_converged": entropic.coupling_.converged,
            "epsilon": entropic.epsilon_,
            "bandwidth": entropic.bandwidth_,
        },
        "output_map": {
            "sup_deviation": float(output_gap.max()),
            "l2_deviation": float(np.sqrt(np.mean(output_gap**2))),
            "diameter": output_diameter,
        },
        "m": m,
        "m_source": m_source,
        "n_eval": n_eval,
        "config": doc,
    }
    _write_summary(out_dir, "ot-demo", seed, config_hash, time.perf_counter() - start, results)
    return EXIT_OK


COMMANDS = {"rates": cmd_rates, "classify": cmd_classify, "ot-demo": cmd_ot_demo}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="otl",
        description="Optimal-transport transfer learning experiments",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--out", default=None, help="output directory (default: config out_dir or '.')")
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as buf:
            doc = json.load(buf)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        seed = args.seed if args.seed is not None else doc.get("seed")
        if seed is None:
            raise ConfigError("no seed given (config 'seed' or --seed)")
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        out_dir = args.out if args.out is not None else doc.get("out_dir", ".")
        try:
            os.makedirs(out_dir, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out_dir!r}: {exc}") from exc
        return COMMANDS[args.command](doc, out_dir, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
