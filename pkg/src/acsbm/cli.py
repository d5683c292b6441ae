"""Command-line interface: generate, fit, eval, bench."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .benchmark import (ExperimentPlan, MODEL_NAMES, model_fit_config,
                        run_ppm_sweep, run_real, run_sbm_ensemble)
from .core import load_edge_list, read_labels
from .generators import (PpmSpec, SbmSpec, generate_ppm, generate_sbm,
                         ppm_rates, write_instance)
from .metrics import nmi
from .search import multi_start
from .solver import AssortativityMode, SolverConfig

__all__ = ["main"]


def _cmd_generate_ppm(args) -> int:
    spec = PpmSpec(n=args.n, k=args.k, avg_degree=args.avg_degree,
                   ratio=args.ratio, seed=args.seed)
    graph, truth = generate_ppm(spec)
    p_in, p_out = ppm_rates(spec.n, spec.k, spec.avg_degree, spec.ratio)
    meta = {"kind": "ppm", "avg_degree": spec.avg_degree, "ratio": spec.ratio,
            "seed": spec.seed, "p_in": p_in, "p_out": p_out}
    paths = write_instance(args.out, graph, truth, meta)
    print(f"wrote {paths['edges']} ({graph.n} nodes, m={graph.total_weight})")
    return 0


def _parse_range(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def _cmd_generate_sbm(args) -> int:
    spec = SbmSpec(n=args.n, k=args.k, seed=args.seed,
                   diag_range=_parse_range(args.diag_range),
                   offdiag_range=_parse_range(args.offdiag_range))
    graph, truth, planted = generate_sbm(spec)
    meta = {"kind": "sbm", "seed": spec.seed,
            "diag_range": list(spec.diag_range),
            "offdiag_range": list(spec.offdiag_range),
            "planted_omega": planted.tolist()}
    paths = write_instance(args.out, graph, truth, meta)
    print(f"wrote {paths['edges']} ({graph.n} nodes, m={graph.total_weight})")
    return 0


def _cmd_fit(args) -> int:
    if args.mode is not None and args.model != "ac-dc-sbm":
        raise ValueError("--mode only applies to --model ac-dc-sbm")
    graph = load_edge_list(args.graph, index_base=1 if args.one_based else 0)
    solver = SolverConfig(tol=args.tol)
    mode = AssortativityMode(args.mode) if args.mode else None
    cfg = model_fit_config(args.model, args.k, args.seed, solver, mode=mode)
    if args.max_sweeps is not None:
        cfg = replace(cfg, max_sweeps=args.max_sweeps)
    results = multi_start(graph, cfg, args.runs, workers=args.workers)
    best = results[0]
    payload = {
        "graph": str(args.graph),
        "model": args.model,
        "k": args.k,
        "runs": args.runs,
        "base_seed": args.seed,
        "best": best.to_dict(),
        "runs_summary": [
            {"seed": r.seed, "log_likelihood": r.log_likelihood,
             "modularity": r.modularity, "sweeps": r.sweeps,
             "constrained_solves": r.constrained_solves}
            for r in results
        ],
    }
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    sizes = best.partition.block_sizes()
    print(f"best loglik={best.log_likelihood:.6f} modularity={best.modularity:.6f} "
          f"block_sizes={sizes}")
    return 0


def _cmd_eval(args) -> int:
    pred = read_labels(args.pred)
    truth = read_labels(args.truth)
    print(nmi(pred, truth))
    return 0


def _cmd_bench(args) -> int:
    plan = ExperimentPlan.from_json(args.plan)
    if args.workers is not None:
        plan.workers = args.workers
    out = Path(args.out)
    if args.experiment == "ppm":
        if plan.kind != "ppm-sweep":
            raise ValueError(f"plan kind {plan.kind!r} does not match 'ppm'")
        rows = run_ppm_sweep(plan, out_dir=out)
        print(f"wrote {out / 'ppm_sweep.csv'} ({len(rows)} rows)")
    elif args.experiment == "sbm":
        if plan.kind != "sbm-ensemble":
            raise ValueError(f"plan kind {plan.kind!r} does not match 'sbm'")
        rows = run_sbm_ensemble(plan, out_dir=out)
        print(f"wrote {out / 'sbm_ensemble.csv'} ({len(rows)} rows)")
    else:
        if plan.kind != "real-network":
            raise ValueError(f"plan kind {plan.kind!r} does not match 'real'")
        report = run_real(plan, graph_path=args.graph, k=args.k, out_dir=out)
        for model, info in report["models"].items():
            print(f"{model}: loglik={info['log_likelihood']:.4f} "
                  f"level={info['assortativity_level']} "
                  f"block_sizes={info['block_sizes']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acsbm",
        description="Fit (assortativity-constrained) degree-corrected "
                    "stochastic block models and run benchmark experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-ppm", help="sample a planted-partition network")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--avg-degree", type=float, required=True)
    g.add_argument("--ratio", type=float, required=True,
                   help="omega_out / omega_in in [0, 1]")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output path prefix")
    g.set_defaults(func=_cmd_generate_ppm)

    g = sub.add_parser("generate-sbm", help="sample a general SBM network")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--diag-range", default="0.45,0.55", metavar="LO,HI")
    g.add_argument("--offdiag-range", default="0.0,0.4", metavar="LO,HI")
    g.add_argument("--out", required=True, help="output path prefix")
    g.set_defaults(func=_cmd_generate_sbm)

    g = sub.add_parser("fit", help="fit a block model to an edge list")
    g.add_argument("--graph", required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--model", choices=MODEL_NAMES, default="ac-dc-sbm")
    g.add_argument("--mode", choices=["strong", "weak"], default=None,
                   help="assortativity constraints (ac-dc-sbm only)")
    g.add_argument("--runs", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=1e-8)
    g.add_argument("--max-sweeps", type=int, default=None)
    g.add_argument("--workers", type=int, default=None,
                   help="parallel runs (default from ACSBM_WORKERS, else 1)")
    g.add_argument("--one-based", action="store_true",
                   help="input file uses 1-based node ids")
    g.add_argument("--out", default=None, help="result JSON path")
    g.set_defaults(func=_cmd_fit)

    g = sub.add_parser("eval", help="print the NMI of two label files")
    g.add_argument("--pred", required=True)
    g.add_argument("--truth", required=True)
    g.set_defaults(func=_cmd_eval)

    g = sub.add_parser("bench", help="run a planned experiment")
    g.add_argument("experiment", choices=["ppm", "sbm", "real"])
    g.add_argument("--plan", required=True, help="plan JSON path")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--graph", default=None, help="edge list (real only)")
    g.add_argument("--k", type=int, default=None, help="block count (real only)")
    g.add_argument("--workers", type=int, default=None)
    g.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
