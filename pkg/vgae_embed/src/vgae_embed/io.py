"""Shared JSONL formats: instance records in, Encoding records out.

Both sides carry ``schema_version`` so mismatched producers are rejected
rather than misread. Only unweighted MaxCut graphs are accepted; the
auto-encoder has no notion of edge weights or QUBO matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

SCHEMA_VERSION = 1
SOURCE_EMBEDDING = "ExternalEmbedding"


class VgaeInputError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    instance_id: str
    n: int
    edges: tuple[tuple[int, int], ...]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a


def load_graphs(path: str) -> list[Graph]:
    """Read the shared instance JSONL; rejects weighted graphs and QUBOs."""
    graphs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            version = d.get("schema_version")
            if version != SCHEMA_VERSION:
                raise VgaeInputError(
                    f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION}")
            if d.get("kind") != "MaxCutGraph":
                raise VgaeInputError(
                    f"{d.get('id')}: VGAE embeddings need MaxCut graphs, got "
                    f"{d.get('kind')!r}")
            bad = [e for e in d["edges"] if float(e[2]) != 1.0]
            if bad:
                raise VgaeInputError(
                    f"{d['id']}: only unweighted graphs are supported "
                    f"(found weight {bad[0][2]})")
            graphs.append(Graph(instance_id=d["id"], n=int(d["n"]),
                                edges=tuple((int(i), int(j)) for i, j, _ in d["edges"])))
    return graphs


def load_folds(path: str) -> dict[str, int]:
    """JSON mapping instance_id -> fold index (optionally under a "folds" key)."""
    with open(path) as fh:
        obj = json.load(fh)
    mapping = obj.get("folds", obj)
    return {str(k): int(v) for k, v in mapping.items()
            if k != "schema_version"}


def write_embeddings(path: str, embeddings: dict[str, np.ndarray]) -> int:
    count = 0
    with open(path, "w") as fh:
        for instance_id, vec in embeddings.items():
            if not np.all(np.isfinite(vec)):
                raise VgaeInputError(f"non-finite embedding for {instance_id}")
            rec = {"instance_id": instance_id, "source": SOURCE_EMBEDDING,
                   "vector": [float(v) for v in vec],
                   "schema_version": SCHEMA_VERSION}
            fh.write(json.dumps(rec) + "\n")
            count += 1
    return count
