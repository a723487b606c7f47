"""Command line front end: ``qubofs <command> ...``.

Datasets are given as CSV paths or as one of the bundled names
``breast-cancer``, ``german-credit`` and ``lending-standin``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dataio, harness, heuristics, measures, mleval, quantum, qubo

BUNDLED = {
    "breast-cancer": dataio.load_breast_cancer,
    "german-credit": dataio.load_german_credit,
    "lending-standin": dataio.make_lending_standin,
}


def _out(args, name) -> Path:
    path = Path(name)
    if not path.is_absolute():
        path = Path(args.output_dir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _dataset(args) -> dataio.Dataset:
    source = args.input
    if source in BUNDLED:
        ds = BUNDLED[source]()
        if getattr(args, "standardize", False):
            ds = dataio.standardize(ds)
        return ds
    return dataio.load_csv(
        source,
        args.target,
        standardize=getattr(args, "standardize", False),
        drop_constant=getattr(args, "drop_constant", False),
    )


def _bits(text: str) -> np.ndarray:
    text = text[2:] if text.startswith("0b") else text
    return qubo.as_bits(text)


def _phi_grid(text: str) -> np.ndarray:
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        return np.round(np.arange(lo, hi + step / 2, step), 10)
    return np.array([float(v) for v in text.split(",")])


# ---------------------------------------------------------------------------
# commands


def cmd_data(args) -> int:
    ds = _dataset(args)
    if args.action == "load":
        if args.output:
            dataio.write_csv(ds, _out(args, args.output), args.target)
        _emit(ds.summary())
        return 0
    seed = args.seed if args.split_seed is None else args.split_seed
    a, b = dataio.split(ds, dataio.SplitSpec(args.fraction, seed))
    stem = args.output or "split"
    dataio.write_csv(a, _out(args, f"{stem}_a.csv"), args.target)
    dataio.write_csv(b, _out(args, f"{stem}_b.csv"), args.target)
    _emit({"a": a.summary(), "b": b.summary()})
    return 0


def cmd_measures(args) -> int:
    mats = measures.build_matrices(_dataset(args), measures.DependencyTuple.parse(args.tuple), args.bins)
    _write_json(_out(args, args.output), mats.to_json())
    return 0


def cmd_qubo(args) -> int:
    if args.action == "build":
        if args.matrices:
            mats = measures.DependencyMatrices.from_json(json.loads(Path(args.matrices).read_text()))
            label = Path(args.matrices).stem
        else:
            ds = _dataset(args)
            mats = measures.build_matrices(ds, measures.DependencyTuple.parse(args.tuple), args.bins)
            label = ds.label
        qubo.build(mats, args.phi, label).save(_out(args, args.output))
        return 0
    path = args.instance or args.input
    if not path:
        raise ValueError("qubo exact needs --input/--instance")
    sol = qubo.exact_minmax(qubo.QuboInstance.load(path))
    if args.output:
        _write_json(_out(args, args.output), sol.to_json())
    _emit(sol.to_json())
    return 0


def cmd_solve(args) -> int:
    inst = qubo.QuboInstance.load(args.instance)
    if args.config:
        config = heuristics.SolverConfig.load(args.config, algorithm=args.algo, budget=args.budget)
    else:
        config = heuristics.tuned_config(args.algo, inst.n, args.budget or 5000)
    config = config.replace(seed=args.seed)
    trace = heuristics.run(inst, config)
    if args.trace:
        trace.to_csv(_out(args, args.trace))
    _emit(
        {
            "algorithm": config.algorithm,
            "evaluations": len(trace),
            "best_value": trace.best_value,
            "best_bits": qubo.bitstring(trace.best_bits),
            "config": config.to_json(),
        }
    )
    return 0


def cmd_quantum(args) -> int:
    inst = qubo.QuboInstance.load(args.instance)
    if args.action == "qaoa":
        res = quantum.optimize_qaoa(
            inst, args.p_max, warm_start=args.warm_start, maxfev=args.maxfev, shots=args.shots, seed=args.seed
        )
        out = res.to_json()
    else:
        res = quantum.optimize_vqe(inst, args.layers, maxiter=args.maxfev, shots=args.shots, seed=args.seed)
        out = res.to_json()
    _write_json(_out(args, args.out), out)
    if args.trace:
        res.trace.to_csv(_out(args, args.trace))
    return 0


def cmd_eval(args) -> int:
    ds = _dataset(args)
    if args.method == "subset":
        if not args.subset:
            raise SystemExit("eval: --subset is required")
        rows = [{"method": "subset", **harness.score_subset(ds, _bits(args.subset)).to_json()}]
    elif args.method == "brute":
        rows = [{"method": "brute force", **mleval.brute_force_subset(ds).score.to_json()}]
    elif args.method == "rfe":
        rows = [{"method": "RFE", **mleval.rfe(ds).score.to_json()}]
    elif args.method == "lasso":
        rows = [{"method": "LASSO", **mleval.lasso_path(ds, seed=args.seed).score.to_json()}]
    else:
        rows = harness.selection_table(ds, seed=args.seed)
    if args.report:
        harness.report(rows, _out(args, args.report))
    _emit(rows)
    return 0


def cmd_sweep_phi(args) -> int:
    points = harness.sweep_phi(_dataset(args), measures.DependencyTuple.parse(args.tuple), _phi_grid(args.phi), bins=args.bins)
    harness.report([p.row() for p in points], _out(args, args.output))
    return 0


def cmd_compare_tuples(args) -> int:
    rows = harness.compare_tuples(_dataset(args), args.phi, bins=args.bins)
    harness.report([r.row() for r in rows], _out(args, args.output))
    return 0


def cmd_tune(args) -> int:
    inst = qubo.QuboInstance.load(args.instance)
    spec = harness.TuningSpec(args.algo, args.n_configs, args.runs, args.budget, args.seed)
    res = harness.tune(inst, spec, args.threads)
    harness.report(res.rows(), _out(args, args.output))
    best = res.best_config.to_json()
    best.pop("seed")
    _write_json(_out(args, args.best), best)
    _emit(res.summary())
    return 0


def cmd_validate(args) -> int:
    inst = qubo.QuboInstance.load(args.instance)
    configs = None
    if args.configs:
        configs = {
            k.upper(): heuristics.SolverConfig.from_json({**v, "algorithm": k})
            for k, v in json.loads(Path(args.configs).read_text()).items()
        }
    res = harness.validate(inst, configs, runs=args.runs, budget=args.budget, seed=args.seed, threads=args.threads)
    harness.report(res.summary_rows(), _out(args, "validation_summary.csv"))
    harness.report(res.run_rows(), _out(args, "validation_runs.csv"))
    harness.report(res.curve_rows(floor=True), _out(args, "gap_curves.csv"))
    _write_json(_out(args, "exact.json"), res.exact.to_json())
    return 0


def cmd_report(args) -> int:
    rows = json.loads(Path(args.input).read_text())
    if isinstance(rows, dict):
        rows = rows.get("rows", rows.get("layers", [rows]))
    harness.report(rows, _out(args, args.output), args.format)
    return 0


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes (default 1)")
    common.add_argument("--output-dir", default=argparse.SUPPRESS, help="directory for relative outputs")
    return common


def _data_args(p, required=True):
    p.add_argument("--input", "--data", dest="input", required=required, help="CSV path or bundled dataset name")
    p.add_argument("--target", default="target", help="target column of a CSV input")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--drop-constant", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qubofs", description="QUBO-based feature selection toolkit", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("data", parents=[common], help="load or split a dataset")
    p.add_argument("action", choices=["load", "split"])
    _data_args(p)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--split-seed", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_data)

    p = sub.add_parser("measures", parents=[common], help="dependency matrices")
    _data_args(p)
    p.add_argument("--tuple", default="Correl,Correl")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--output", default="matrices.json")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("qubo", parents=[common], help="build or exactly solve a QUBO instance")
    p.add_argument("action", choices=["build", "exact"])
    _data_args(p, required=False)
    p.add_argument("--matrices", default=None)
    p.add_argument("--tuple", default="Correl,Correl")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--phi", type=float, default=0.75)
    p.add_argument("--instance", default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_qubo)

    p = sub.add_parser("solve", parents=[common], help="run one metaheuristic")
    p.add_argument("--algo", required=True, type=str.upper, choices=heuristics.ALGORITHMS)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--instance", required=True)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("quantum", parents=[common], help="simulate QAOA or VQE")
    p.add_argument("action", choices=["qaoa", "vqe"])
    p.add_argument("--instance", required=True)
    p.add_argument("--p-max", type=int, default=3)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--warm-start", default="all")
    p.add_argument("--maxfev", type=int, default=2000)
    p.add_argument("--out", default="quantum.json")
    p.add_argument("--trace", default=None)
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("eval", parents=[common], help="score subsets and selection baselines")
    p.add_argument("method", nargs="?", default="subset", choices=["subset", "brute", "rfe", "lasso", "table"])
    _data_args(p)
    p.add_argument("--subset", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-phi", parents=[common], help="exact selection over a phi grid")
    _data_args(p)
    p.add_argument("--tuple", default="Correl,Correl")
    p.add_argument("--phi", default="0:1:0.05", help="'lo:hi:step' or comma list")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--output", default="sweep_phi.csv")
    p.set_defaults(func=cmd_sweep_phi)

    p = sub.add_parser("compare-tuples", parents=[common], help="all eight dependency tuples at one phi")
    _data_args(p)
    p.add_argument("--phi", type=float, default=0.75)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--output", default="tuples.csv")
    p.set_defaults(func=cmd_compare_tuples)

    p = sub.add_parser("tune", parents=[common], help="random-search tuning of one algorithm")
    p.add_argument("--algo", required=True, type=str.upper, choices=heuristics.ALGORITHMS)
    p.add_argument("--instance", required=True)
    p.add_argument("--n-configs", type=int, default=100)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--output", default="tuning.csv")
    p.add_argument("--best", default="tuned_config.json")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("validate", parents=[common], help="multi-run comparison of all metaheuristics")
    p.add_argument("--instance", required=True)
    p.add_argument("--configs", default=None, help="JSON mapping algorithm -> config (default: tuned)")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--budget", type=int, default=5000)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", parents=[common], help="re-emit JSON rows as CSV or JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", 0), ("threads", 1), ("output_dir", ".")):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"qubofs {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
