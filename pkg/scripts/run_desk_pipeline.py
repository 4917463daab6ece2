#!/usr/bin/env python3
"""End-to-end desk-scale pipeline driven through the CLI.

Generates a small MaxCut corpus, solves exact optima, builds the angle
database, fits k-means recommendations from both encoding sources, runs the
cross-validation and size-split protocols, a recursive-QAOA comparison
against the random-angle baseline, and an ECDF report. Every stage is a
plain `anglerec` invocation, so this doubles as usage documentation; with
--full the corpus and restart counts grow to something closer to the real
experiments (hours of runtime).
"""

import argparse
import json
import subprocess
import sys
import time
from pathlib import Path


def sh(*argv):
    cmd = [sys.executable, "-m", "anglerec.cli", *map(str, argv)]
    print("+", " ".join(cmd[2:]))
    t0 = time.time()
    subprocess.run(cmd, check=True)
    print(f"  ({time.time() - t0:.1f}s)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="desk_run", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full", action="store_true",
                    help="larger corpus and 1000 restarts (slow)")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    restarts = 1000 if args.full else 50
    sizes = (10, 12, 14, 16) if args.full else (8, 10)
    count = 10 if args.full else 6

    # corpus: a few ER graphs per size, merged into one file
    parts = []
    for n in sizes:
        part = out / f"graphs-n{n}.jsonl"
        sh("--seed", args.seed, "gen", "--family", "maxcut", "--n", n,
           "--p", 0.6, "--count", count, "--out", part)
        parts.append(part)
    instances = out / "instances.jsonl"
    with open(instances, "w") as fh:
        for part in parts:
            fh.write(part.read_text())

    sh("solve-exact", "--instances", instances, "--out", out / "exact.jsonl")
    sh("--seed", args.seed, "build-db", "--instances", instances,
       "--depths", "1,2", "--restarts", restarts, "--out", out / "angle_db.jsonl")

    # encodings -> clusters -> frozen recommendations, evaluated on the corpus
    sh("encode", "--instances", instances, "--source", "angles",
       "--angle-db", out / "angle_db.jsonl", "--depth", 1,
       "--out", out / "enc-angles.jsonl")
    sh("encode", "--instances", instances, "--source", "features",
       "--standardize", "--out", out / "enc-features.jsonl")
    sh("--seed", args.seed, "cluster", "--encodings", out / "enc-angles.jsonl",
       "--k", 3, "--out", out / "cluster-angles.json")
    sh("recommend", "--cluster-model", out / "cluster-angles.json",
       "--encodings", out / "enc-angles.jsonl", "--angle-db", out / "angle_db.jsonl",
       "--depth", 1, "--test", instances, "--rec-out", out / "recs.json",
       "--out", out / "outcomes.jsonl")

    # evaluation protocols for both sources
    for source in ("angles", "features"):
        sh("--seed", args.seed, "eval-cv", "--instances", instances,
           "--angle-db", out / "angle_db.jsonl", "--exact", out / "exact.jsonl",
           "--source", source, "--k", 3, "--depths", "1,2",
           "--out", out / f"cv-{source}.csv")
    sh("--seed", args.seed, "eval-size-split", "--instances", instances,
       "--angle-db", out / "angle_db.jsonl", "--exact", out / "exact.jsonl",
       "--source", "features", "--k", 3, "--depths", "1",
       "--out", out / "size-split.csv")

    # recursive QAOA with the frozen recommendations vs the random baseline
    sh("--seed", args.seed, "rqaoa", "--instances", instances,
       "--rec-sets", out / "recs.json", "--depth", 1, "--k", 3,
       "--baseline", "random", "--exact", out / "exact.jsonl",
       "--out", out / "rqaoa.jsonl")

    sh("report-ecdf", "--samples",
       ",".join(str(out / f"cv-{s}.csv") for s in ("angles", "features")),
       "--out", out / "ecdf.json")

    for name in ("cv-angles.csv.summary.json", "cv-features.csv.summary.json",
                 "rqaoa.jsonl.summary.json"):
        path = out / name
        if path.exists():
            print(f"\n== {name} ==")
            print(json.dumps(json.loads(path.read_text()), indent=2))


if __name__ == "__main__":
    main()
