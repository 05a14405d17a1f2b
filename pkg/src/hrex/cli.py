"""Command-line interface.

Subcommands:

    hlambda    evaluate the bivariate limit CDF H_lambda
    theta      Monte Carlo extremal coefficient from a coefficient spec
    converge   empirical maxima vs. limit CDF across a sweep of n
    check      asymptotic-condition diagnostics across a sweep of n
    lemma1     exact exceedance-decomposition identity on a discrete law
    sample     write Gaussian path replicates in the binary dump format

Commands that write files put them in --out (overridden by the HREX_OUT
environment variable when set) together with a manifest.json listing
every output file with its SHA-256 hash.  Exit status is 0 only when all
requested checks pass; failures are reported as machine-readable JSON.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import (
    BlockParameters,
    CorrelationModel,
    DeltaSpec,
    check_long_range,
    check_short_range,
    check_simplified,
    constant_model,
    geometric_model,
    hr_family,
    iid_model,
    tabulated_model,
)
from .errors import ToolkitError
from .experiments import (
    DiscreteMatrixDistribution,
    ExperimentConfig,
    build_report,
    compare_to_limit,
    lemma1_check,
    run_maxima_experiment,
    weakly_decreasing,
    write_convergence_csv,
    write_convergence_json,
    report_jsonable,
)
from .jsonio import to_jsonable
from .norming import hr_bivariate_cdf
from .rng import RngKey
from .sampler import sample_paths, write_path
from .theta import theta_for_spec

LEMMA1_TOL = 1e-12


def model_from_jsonable(obj: dict) -> CorrelationModel:
    name = obj.get("name")
    if name == "hr":
        return hr_family(DeltaSpec.from_jsonable(obj["delta_spec"]))
    if name == "iid":
        return iid_model(int(obj["d"]))
    if name == "tabulated":
        table = {
            (item["i"], item["j"], item["k"]): float(item["rho"])
            for item in obj.get("entries", [])
        }
        return tabulated_model(int(obj["d"]), table)
    if name == "geometric":
        return geometric_model(
            int(obj["d"]), float(obj["rate"]), float(obj.get("cross", 0.0))
        )
    if name == "constant":
        return constant_model(int(obj["d"]), float(obj["rho"]))
    raise ValueError("unknown model name %r" % (name,))


def _resolve_out(args) -> Path | None:
    env = os.environ.get("HREX_OUT")
    out = env if env else args.out
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(
    out_dir: Path, subcommand: str, config_path, seed, files: list[Path], started: float
) -> None:
    entries = []
    for f in sorted(files):
        digest = hashlib.sha256(f.read_bytes()).hexdigest()
        entries.append({"name": f.name, "sha256": digest})
    manifest = {
        "subcommand": subcommand,
        "config": str(config_path) if config_path else None,
        "seed": seed,
        "version": __version__,
        "out_dir": str(out_dir),
        "duration_seconds": round(time.time() - started, 3),
        "files": entries,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _extended_float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise argparse.ArgumentTypeError("NaN is not accepted")
    return value


def cmd_hlambda(args) -> int:
    value = hr_bivariate_cdf(args.lam, args.x, args.y)
    print(repr(value))
    return 0


def cmd_theta(args) -> int:
    with open(args.spec_file) as fh:
        spec = DeltaSpec.from_jsonable(json.load(fh))
    x = [float(v) for v in args.x.split(",")]
    estimate, gap = theta_for_spec(
        spec,
        x,
        args.i,
        samples=args.samples,
        key=RngKey(args.seed).child(0),
        max_lag=args.max_lag,
    )
    payload = estimate.to_jsonable()
    if gap is not None:
        payload["truncation_gap"] = {
            "lag": gap.lag,
            "lag_doubled": gap.lag_doubled,
            "value": gap.value,
            "value_doubled": gap.value_doubled,
            "gap": gap.gap,
        }
    print(json.dumps(to_jsonable(payload), sort_keys=True))
    return 0


def _theta_grid(cfg: dict, model: CorrelationModel, x_grid, seed: int):
    theta_cfg = cfg.get("theta", {})
    method = theta_cfg.get("method", "mc" if model.delta_spec is not None else "ones")
    if method == "ones":
        return [[1.0] * model.d for _ in x_grid]
    if method == "values":
        values = theta_cfg["values"]
        if len(values) != len(x_grid):
            raise ValueError("need one theta vector per grid point")
        return values
    if method == "mc":
        if model.delta_spec is None:
            raise ValueError("theta method 'mc' needs a model with a coefficient spec")
        samples = int(theta_cfg.get("samples", 100_000))
        max_lag = theta_cfg.get("max_lag")
        key = RngKey(seed)
        out = []
        for g, x in enumerate(x_grid):
            row = []
            for i in range(1, model.d + 1):
                estimate, _ = theta_for_spec(
                    model.delta_spec, x, i, samples, key.child(0, g, i), max_lag=max_lag
                )
                row.append(estimate.value)
            out.append(row)
        return out
    raise ValueError("unknown theta method %r" % (method,))


def cmd_converge(args) -> int:
    started = time.time()
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    model = model_from_jsonable(cfg["model"])
    experiment = ExperimentConfig(
        model=model,
        n_list=tuple(cfg["n_list"]),
        replicates=int(cfg["replicates"]),
        x_grid=tuple(tuple(p) for p in cfg["x_grid"]),
        seed=seed,
        sampler=args.sampler or cfg.get("sampler", "cholesky"),
    )
    thetas = _theta_grid(cfg, model, experiment.x_grid, seed)
    empirical = run_maxima_experiment(experiment, threads=args.threads)
    report = build_report([compare_to_limit(e, thetas) for e in empirical])

    out_dir = _resolve_out(args)
    if out_dir is not None:
        csv_path = out_dir / "report.csv"
        json_path = out_dir / "report.json"
        write_convergence_csv(report, csv_path)
        write_convergence_json(report, json_path)
        _write_manifest(out_dir, "converge", args.config, seed, [csv_path, json_path], started)
    failures = []
    for step, slack in enumerate(report.step_slacks):
        a, b = report.entries[step], report.entries[step + 1]
        if b.sup_deviation > a.sup_deviation + slack:
            failures.append(
                {
                    "from_n": a.n,
                    "to_n": b.n,
                    "increase": b.sup_deviation - a.sup_deviation,
                    "slack": slack,
                }
            )
    summary = {
        "verdict": report.verdict,
        "sup_deviation": {str(e.n): e.sup_deviation for e in report.entries},
        "failures": failures,
    }
    print(json.dumps(to_jsonable(summary), sort_keys=True))
    return 0 if report.verdict == "decreasing" else 1


def cmd_check(args) -> int:
    started = time.time()
    cfg = _load_config(args.config)
    model = model_from_jsonable(cfg["model"])
    n_list = [int(n) for n in cfg["n_list"]]
    l_exp = float(cfg.get("l_exponent", 0.4))
    r_exp = float(cfg.get("r_exponent", 0.6))
    m_list = [int(m) for m in cfg.get("m_list", [1])]
    rows = []
    for n in n_list:
        l_n = max(1, int(n**l_exp))
        r_n = min(n, max(l_n + 1, int(n**r_exp)))
        params = BlockParameters(n=n, l_n=l_n, r_n=r_n)
        row = {
            "n": n,
            "l_n": l_n,
            "r_n": r_n,
            "long_range": check_long_range(model, params),
            "simplified": check_simplified(model, n, l_n),
        }
        for m in m_list:
            row["short_range_m%d" % m] = check_short_range(model, n, m, r_n)
        rows.append(row)

    metrics = ["long_range", "simplified"] + ["short_range_m%d" % m for m in m_list]
    verdicts = {}
    for metric in metrics:
        values = [row[metric] for row in rows]
        slacks = [1e-12 * max(1.0, abs(v)) for v in values[:-1]]
        verdicts[metric] = "pass" if weakly_decreasing(values, slacks) else "fail"

    out_dir = _resolve_out(args)
    if out_dir is not None:
        files = []
        if args.format == "json":
            path = out_dir / "conditions.json"
            with open(path, "w") as fh:
                json.dump(
                    to_jsonable({"rows": rows, "verdicts": verdicts}),
                    fh,
                    indent=2,
                    sort_keys=True,
                )
                fh.write("\n")
            files.append(path)
        else:
            path = out_dir / "conditions.csv"
            with open(path, "w") as fh:
                header = ["n", "l_n", "r_n"] + metrics
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(repr(row[h]) if isinstance(row[h], float) else str(row[h]) for h in header) + "\n")
            files.append(path)
        _write_manifest(out_dir, "check", args.config, cfg.get("seed"), files, started)

    print(json.dumps(to_jsonable({"rows": rows, "verdicts": verdicts}), sort_keys=True))
    return 0 if all(v == "pass" for v in verdicts.values()) else 1


def cmd_lemma1(args) -> int:
    started = time.time()
    cfg = _load_config(args.config)
    dist = DiscreteMatrixDistribution.iid_cells(
        n=int(cfg["n"]),
        d=int(cfg["d"]),
        atoms=[float(a) for a in cfg["atoms"]],
        probs=[float(p) for p in cfg["probs"]] if "probs" in cfg else None,
    )
    report = lemma1_check(dist, [float(v) for v in cfg["thresholds"]])
    payload = {
        "lhs": report.lhs,
        "rhs": report.rhs,
        "difference": report.difference,
        "support_size": report.support_size,
        "tolerance": LEMMA1_TOL,
        "pass": report.difference <= LEMMA1_TOL,
    }
    out_dir = _resolve_out(args)
    if out_dir is not None:
        path = out_dir / "lemma1.json"
        with open(path, "w") as fh:
            json.dump(to_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
        _write_manifest(out_dir, "lemma1", args.config, cfg.get("seed"), [path], started)
    print(json.dumps(to_jsonable(payload), sort_keys=True))
    return 0 if payload["pass"] else 1


def cmd_sample(args) -> int:
    started = time.time()
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    model = model_from_jsonable(cfg["model"])
    length = int(cfg.get("length", cfg.get("n")))
    count = int(cfg["count"])
    sampler = args.sampler or cfg.get("sampler", "cholesky")
    model_n = cfg.get("model_n")
    paths = sample_paths(
        model, length, RngKey(seed).child(length), count, method=sampler, n=model_n
    )
    out_dir = _resolve_out(args)
    if out_dir is None:
        raise ValueError("sample needs an output directory (--out or HREX_OUT)")
    files = []
    for r, path in enumerate(paths):
        f = out_dir / ("path_%06d.bin" % r)
        with open(f, "wb") as fh:
            write_path(path, fh)
        files.append(f)
    _write_manifest(out_dir, "sample", args.config, seed, files, started)
    print(json.dumps({"paths": count, "out_dir": str(out_dir)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrex", description=__doc__)
    parser.add_argument("--version", action="version", version="hrex " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--out", default=None, help="output directory (HREX_OUT overrides)")
        p.add_argument("--sampler", choices=["cholesky", "circulant"], default=None)
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("hlambda", help="bivariate limit CDF")
    p.add_argument("--lambda", dest="lam", type=_extended_float, required=True,
                   help="dependence parameter in [0, inf]; 'inf' accepted")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.set_defaults(func=cmd_hlambda)

    p = sub.add_parser("theta", help="extremal coefficient estimate")
    p.add_argument("--spec-file", required=True, help="coefficient spec JSON")
    p.add_argument("--i", type=int, required=True, help="target component (1-based)")
    p.add_argument("--x", required=True, help="comma-separated levels, one per component")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--max-lag", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("converge", help="maxima vs. limit across n")
    common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("check", help="asymptotic-condition diagnostics")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("lemma1", help="exceedance-decomposition identity")
    common(p)
    p.set_defaults(func=cmd_lemma1)

    p = sub.add_parser("sample", help="write Gaussian path replicates")
    common(p)
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ToolkitError, ValueError, OSError, KeyError) as exc:
        failure = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(failure), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
