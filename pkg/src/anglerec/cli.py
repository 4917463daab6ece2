"""Command-line surface tying the pipelines together.

Subcommands: gen, solve-exact, build-db, encode, cluster, recommend,
eval-cv, eval-size-split, rqaoa, report-ecdf. Exit codes: 0 success,
1 domain error, 2 usage error. All randomness flows from --seed; every
output gets its resolved configuration written next to it.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import store
from .errors import AnglerecError, ParameterError
from .instances import (ProblemInstance, generate_dense_qubo, generate_er_graph,
                        generate_benchmark_suite, load_instances, save_instances)
from .ising import ExactSolution, solve_instance
from .angle_opt import AngleRecord, build_database, load_database, records_by_id
from .features import (SOURCE_ANGLES, SOURCE_EMBEDDING, SOURCE_FEATURES,
                       Encoding, angle_encoding, instance_features,
                       load_encodings, save_encodings, standardize)
from .clustering import RULE_CENTROID, RULE_CLOSEST, ClusterModel, kmeans_fit, representatives
from .recommend import RecommendationSet, recommend_and_evaluate
from .evalharness import (MethodConfig, ecdf, read_samples_csv, run_cv,
                          run_size_split, summarize, write_samples_csv,
                          finite_median)
from .rqaoa import MODE_BUDGETED_BFGS, MODE_RANDOM, run_rqaoa, run_rqaoa_baseline

log = logging.getLogger("anglerec")

_SOURCES = {"angles": SOURCE_ANGLES, "features": SOURCE_FEATURES,
            "embedding": SOURCE_EMBEDDING}
_RULES = {"closest": RULE_CLOSEST, "centroid": RULE_CENTROID}


def _parse_depths(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise ParameterError(f"bad depth list {text!r}")


def _load_exact(path: str) -> dict[str, ExactSolution]:
    out = {}
    for d in store.read_jsonl(path):
        out[d["instance_id"]] = ExactSolution.from_dict(d)
    return out


def _save_exact(path: str, solutions: dict[str, ExactSolution]) -> None:
    store.write_jsonl(path, ({"instance_id": k, **v.to_dict()}
                             for k, v in solutions.items()))


# ---------------------------------------------------------------------------
# subcommand handlers

def cmd_gen(args) -> int:
    if args.benchmark_suite:
        insts = generate_benchmark_suite(args.seed)
    else:
        if args.family == "maxcut":
            insts = [generate_er_graph(args.n, args.p, args.seed, index=k)
                     for k in range(args.count)]
        else:
            insts = [generate_dense_qubo(args.n, args.seed, index=k)
                     for k in range(args.count)]
    n = save_instances(args.out, insts)
    store.write_run_config(args.out, vars_of(args))
    log.info("wrote %d instances to %s", n, args.out)
    return 0


def cmd_solve_exact(args) -> int:
    insts = load_instances(args.instances)
    cache: dict[str, ExactSolution] = {}
    if store.exists_nonempty(args.out):
        cache = _load_exact(args.out)
    solved = 0
    for inst in insts:
        if inst.id in cache:
            continue
        cache[inst.id] = solve_instance(inst)
        solved += 1
    _save_exact(args.out, cache)
    store.write_run_config(args.out, vars_of(args))
    log.info("solved %d new instances (%d cached)", solved, len(cache) - solved)
    return 0


def _db_worker(payload) -> list[dict]:
    inst_dict, depths, restarts, seed = payload
    inst = ProblemInstance.from_dict(inst_dict)
    recs = build_database([inst], depths, restarts, seed)
    return [r.to_dict() for r in recs]


def cmd_build_db(args) -> int:
    insts = load_instances(args.instances)
    depths = _parse_depths(args.depths)
    exact = _load_exact(args.exact) if args.exact else None
    if args.jobs > 1:
        done: set[tuple[str, int]] = set()
        if store.exists_nonempty(args.out):
            done = {(r.instance_id, r.p) for r in load_database(args.out)}
        todo = [i for i in insts
                if any((i.id, p) not in done for p in depths)]
        payloads = [(i.to_dict(), depths, args.restarts, args.seed) for i in todo]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for recs in pool.map(_db_worker, payloads):
                for rec in recs:
                    if (rec["instance_id"], rec["p"]) not in done:
                        store.append_jsonl(args.out, rec)
                        done.add((rec["instance_id"], rec["p"]))
    else:
        build_database(insts, depths, args.restarts, args.seed,
                       exact=exact, out_path=args.out)
    store.write_run_config(args.out, vars_of(args))
    return 0


def cmd_encode(args) -> int:
    if args.import_embeddings:
        encs = load_encodings(args.import_embeddings)
        bad = [e.instance_id for e in encs if e.source != SOURCE_EMBEDDING]
        if bad:
            raise ParameterError(
                f"imported encodings must have source {SOURCE_EMBEDDING}; offenders: {bad[:5]}")
        save_encodings(args.out, encs)
        store.write_run_config(args.out, vars_of(args))
        return 0
    insts = load_instances(args.instances)
    if args.source == "features":
        encs = [instance_features(i, include_counts=not args.no_count_features)
                for i in insts]
        if args.standardize:
            encs, scaler = standardize(encs)
            store.write_json(args.out + ".scaler.json", scaler.to_dict())
    elif args.source == "angles":
        if not args.angle_db or args.depth is None:
            raise ParameterError("encode --source angles needs --angle-db and --depth")
        db = records_by_id(load_database(args.angle_db), args.depth)
        encs = []
        for inst in insts:
            if inst.id not in db:
                raise ParameterError(f"angle database has no depth-{args.depth} "
                                     f"record for {inst.id}")
            encs.append(angle_encoding(inst.id, db[inst.id].angles))
    else:
        raise ParameterError(f"unknown encode source {args.source!r}")
    save_encodings(args.out, encs)
    store.write_run_config(args.out, vars_of(args))
    return 0


def cmd_cluster(args) -> int:
    encs = load_encodings(args.encodings)
    model = kmeans_fit(encs, args.k, seed=args.seed,
                       representative_rule=_RULES[args.rule])
    model.save(args.out)
    store.write_run_config(args.out, vars_of(args))
    log.info("k=%d inertia=%.6g", model.k, model.inertia)
    return 0


def cmd_recommend(args) -> int:
    model = ClusterModel.load(args.cluster_model)
    encs = load_encodings(args.encodings)
    db = records_by_id(load_database(args.angle_db), args.depth)
    reps = representatives(model, encs, db)
    recs = RecommendationSet(depth=args.depth, angles=tuple(reps),
                             provenance={"cluster_model": args.cluster_model,
                                         "source": model.source})
    if args.rec_out:
        recs.save(args.rec_out)
    test = load_instances(args.test)
    outcomes = recommend_and_evaluate(recs, test)
    store.write_jsonl(args.out, (o.to_dict() for o in outcomes))
    store.write_run_config(args.out, vars_of(args))
    return 0


def _method_config(args) -> MethodConfig:
    embeddings = {}
    if args.source == "embedding":
        if not args.embeddings:
            raise ParameterError("--source embedding requires --embeddings")
        embeddings = {e.instance_id: e for e in load_encodings(args.embeddings)}
    return MethodConfig(source=_SOURCES[args.source], k=args.k,
                        rule=_RULES[args.rule], embeddings=embeddings)


def cmd_eval_cv(args) -> int:
    insts = load_instances(args.instances)
    db = load_database(args.angle_db)
    exact = _load_exact(args.exact)
    config = _method_config(args)
    samples = run_cv(config, insts, db, exact, _parse_depths(args.depths),
                     folds=args.folds, seed=args.seed)
    write_samples_csv(args.out, samples)
    store.write_json(args.out + ".summary.json", summarize(samples, seed=args.seed))
    store.write_run_config(args.out, vars_of(args))
    return 0


def cmd_eval_size_split(args) -> int:
    insts = load_instances(args.instances)
    db = load_database(args.angle_db)
    exact = _load_exact(args.exact)
    config = _method_config(args)
    samples = run_size_split(config, insts, db, exact, _parse_depths(args.depths),
                             train_frac=args.train_frac, seed=args.seed)
    write_samples_csv(args.out, samples)
    store.write_json(args.out + ".summary.json", summarize(samples, seed=args.seed))
    store.write_run_config(args.out, vars_of(args))
    return 0


def cmd_rqaoa(args) -> int:
    insts = load_instances(args.instances)
    exact = _load_exact(args.exact) if args.exact else {}
    rec_sets = []
    if args.rec_sets:
        for path in args.rec_sets.split(","):
            rec_sets.append((path, RecommendationSet.load(path)))
    traces = []
    for inst in insts:
        per_method = {}
        for path, recs in rec_sets:
            trace = run_rqaoa(inst, args.depth, recs, seed=args.seed)
            per_method[path] = trace
        if args.baseline == "random":
            per_method["baseline-random"] = run_rqaoa_baseline(
                inst, args.depth, MODE_RANDOM, budget=args.k, seed=args.seed)
        elif args.baseline == "bfgs":
            per_method["baseline-bfgs"] = run_rqaoa_baseline(
                inst, args.depth, MODE_BUDGETED_BFGS, budget=args.k, seed=args.seed)
        for name, trace in per_method.items():
            d = trace.to_dict()
            d["method"] = name
            if inst.id in exact:
                d["approximation_ratio"] = trace.objective / exact[inst.id].c_opt
            traces.append(d)
    if not traces:
        raise ParameterError("nothing to run: provide --rec-sets and/or --baseline")
    store.write_jsonl(args.out, traces)
    ratios = [t["approximation_ratio"] for t in traces if "approximation_ratio" in t]
    if ratios:
        med, _ = finite_median(ratios)
        store.write_json(args.out + ".summary.json",
                         {"median_approximation_ratio": med, "runs": len(traces)})
    store.write_run_config(args.out, vars_of(args))
    return 0


def cmd_report_ecdf(args) -> int:
    samples = []
    for path in args.samples.split(","):
        samples.extend(read_samples_csv(path))
    if not samples:
        raise ParameterError("no ratio samples found in the given files")
    lo, hi, num = (float(x) for x in args.grid.split(":"))
    grid = np.linspace(lo, hi, int(num))
    curves = {}
    for method in sorted({s.method for s in samples}):
        vals = [min(s.ratio, 10.0) if np.isfinite(s.ratio) else 10.0
                for s in samples if s.method == method]
        curve = ecdf(vals, grid)
        curves[method] = {"grid": list(curve.grid), "values": list(curve.values),
                          "count": len(vals)}
    store.write_json(args.out, {"curves": curves})
    store.write_run_config(args.out, vars_of(args))
    return 0


# ---------------------------------------------------------------------------

def vars_of(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anglerec")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate benchmark instances")
    p.add_argument("--benchmark-suite", action="store_true")
    p.add_argument("--family", choices=["maxcut", "qubo"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, help="edge probability (maxcut)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve-exact", help="brute-force optima with caching")
    p.add_argument("--instances", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("build-db", help="build the optimal-angle database")
    p.add_argument("--instances", required=True)
    p.add_argument("--exact")
    p.add_argument("--depths", default="1,2,3")
    p.add_argument("--restarts", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_db)

    p = sub.add_parser("encode", help="compute or import instance encodings")
    p.add_argument("--instances")
    p.add_argument("--source", choices=["features", "angles"], default="features")
    p.add_argument("--no-count-features", action="store_true")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--angle-db")
    p.add_argument("--depth", type=int)
    p.add_argument("--import-embeddings")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("cluster", help="fit k-means over encodings")
    p.add_argument("--encodings", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rule", choices=["closest", "centroid"], default="closest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("recommend", help="evaluate K recommended angles on test instances")
    p.add_argument("--cluster-model", required=True)
    p.add_argument("--encodings", required=True)
    p.add_argument("--angle-db", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--rec-out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recommend)

    for name, handler in (("eval-cv", cmd_eval_cv),
                          ("eval-size-split", cmd_eval_size_split)):
        p = sub.add_parser(name)
        p.add_argument("--instances", required=True)
        p.add_argument("--angle-db", required=True)
        p.add_argument("--exact", required=True)
        p.add_argument("--source", choices=["angles", "features", "embedding"],
                       default="angles")
        p.add_argument("--embeddings")
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--rule", choices=["closest", "centroid"], default="closest")
        p.add_argument("--depths", default="1")
        p.add_argument("--out", required=True)
        if name == "eval-cv":
            p.add_argument("--folds", type=int, default=5)
        else:
            p.add_argument("--train-frac", type=float, default=0.6)
        p.set_defaults(func=handler)

    p = sub.add_parser("rqaoa", help="recursive QAOA with budgeted recommendations")
    p.add_argument("--instances", required=True)
    p.add_argument("--rec-sets", help="comma-separated RecommendationSet JSON files")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--k", type=int, default=3, help="baseline per-iteration budget")
    p.add_argument("--baseline", choices=["none", "random", "bfgs"], default="none")
    p.add_argument("--exact")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rqaoa)

    p = sub.add_parser("report-ecdf", help="ECDF curves per method from sample CSVs")
    p.add_argument("--samples", required=True)
    p.add_argument("--grid", default="0:1.05:106", help="lo:hi:num")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report_ecdf)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except AnglerecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
