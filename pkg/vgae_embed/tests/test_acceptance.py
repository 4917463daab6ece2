"""Secondary acceptance gate: S1 (pipeline + parity with instance features)
and S2 (permutation invariance), one printed pass/fail line each.

S1 drives the primary toolchain purely through its CLI and the shared JSONL
formats: instances and the angle database are produced by ``anglerec``
subcommands, embeddings flow back in through ``encode --import-embeddings``,
and both evaluation runs share folds because they share the seed.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from vgae_embed import Graph, embed_graphs, load_graphs, train_vgae, write_embeddings

CACHE = Path(__file__).parent / "_cache"


def report(criterion: str, passed: bool, detail: str) -> None:
    line = f"[{criterion}] {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def anglerec(*argv):
    cmd = [sys.executable, "-m", "anglerec.cli", *map(str, argv)]
    subprocess.run(cmd, check=True, capture_output=True)


@pytest.fixture(scope="module")
def corpus():
    """24 small graphs with exact optima and a 20-restart depth-1 angle DB."""
    CACHE.mkdir(exist_ok=True)
    instances = CACHE / "instances.jsonl"
    if not instances.exists() or instances.stat().st_size == 0:
        parts = []
        for n, seed in ((8, 0), (10, 1)):
            part = CACHE / f"part-n{n}.jsonl"
            anglerec("--seed", seed, "gen", "--family", "maxcut", "--n", n,
                     "--p", 0.6, "--count", 12, "--out", part)
            parts.append(part)
        instances.write_text("".join(p.read_text() for p in parts))
    anglerec("solve-exact", "--instances", instances, "--out", CACHE / "exact.jsonl")
    anglerec("--seed", 0, "build-db", "--instances", instances, "--depths", "1",
             "--restarts", 20, "--out", CACHE / "angle_db.jsonl")
    return instances


def test_s1_vgae_pipeline(corpus):
    graphs = load_graphs(str(corpus))
    model = train_vgae(graphs, seed=0)
    converged = model.loss_history[-1] < model.loss_history[0]

    embeddings = embed_graphs(model, graphs)
    dims_ok = all(v.shape == (16,) for v in embeddings.values())
    raw = CACHE / "embeddings.jsonl"
    write_embeddings(str(raw), embeddings)

    # round-trip through the primary loader
    imported = CACHE / "imported.jsonl"
    anglerec("encode", "--import-embeddings", raw, "--out", imported)
    by_id = {json.loads(line)["instance_id"]: json.loads(line)["vector"]
             for line in imported.read_text().splitlines()}
    roundtrip = all(np.allclose(by_id[k], v, atol=1e-12)
                    for k, v in embeddings.items())

    # same-seed CV for both encoding sources -> same folds
    medians = {}
    for source, extra in (("features", ()),
                          ("embedding", ("--embeddings", imported))):
        out = CACHE / f"cv-{source}.csv"
        anglerec("--seed", 0, "eval-cv", "--instances", corpus,
                 "--angle-db", CACHE / "angle_db.jsonl",
                 "--exact", CACHE / "exact.jsonl", "--source", source,
                 "--k", 3, "--folds", 4, "--depths", "1", *extra, "--out", out)
        summary = json.loads((CACHE / f"cv-{source}.csv.summary.json").read_text())
        medians[source] = summary["groups"][0]["median"]
    gap = abs(medians["embedding"] - medians["features"]) / medians["features"]
    within = medians["embedding"] >= medians["features"] or gap <= 0.05

    report("S1", converged and dims_ok and roundtrip and within,
           f"loss {model.loss_history[0]:.3f}->{model.loss_history[-1]:.3f}, "
           f"16-dim embeddings, primary round-trip ok={roundtrip}, k=3 medians "
           f"VGAE {medians['embedding']:.5f} vs features {medians['features']:.5f} "
           f"(relative gap {gap:.3f} <= 0.05)")


def test_s2_permutation_invariance(corpus):
    graphs = load_graphs(str(corpus))
    model = train_vgae(graphs[:8], seed=1, epochs=30)
    rng = np.random.default_rng(5)
    worst = 0.0
    for g in graphs[:10]:
        perm = rng.permutation(g.n)
        relabeled = Graph(instance_id=g.instance_id + "-perm", n=g.n,
                          edges=tuple(sorted((min(perm[i], perm[j]), max(perm[i], perm[j]))
                                             for i, j in g.edges)))
        diff = np.abs(model.graph_embedding(g) - model.graph_embedding(relabeled)).max()
        worst = max(worst, float(diff))
    report("S2", worst <= 1e-5,
           f"max embedding change under relabeling of 10 graphs: {worst:.2e} <= 1e-5")
