"""Seeded generation of the two benchmark families and their serialization.

All randomness flows through ``numpy.random.default_rng`` (PCG64), a named,
counter-based generator with a documented cross-platform bitstream, so the
same seed regenerates byte-identical datasets anywhere.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ParameterError, ContractError
from . import store

KIND_MAXCUT = "MaxCutGraph"
KIND_QUBO = "DenseQubo"

NODE_COUNTS = (10, 12, 14, 16, 18)
EDGE_PROBS = (0.5, 0.6, 0.7, 0.8)
GRAPHS_PER_CELL = 10
QUBOS_PER_SIZE = 20


@dataclass(frozen=True)
class ProblemInstance:
    """A MaxCut graph or dense QUBO with generation metadata.

    Exactly one of ``edges`` / ``qubo`` is populated, selected by ``kind``.
    Edges are (i, j, w) with i < j; ``qubo`` is an upper-triangular matrix.
    """

    id: str
    kind: str
    n: int
    edges: Optional[tuple[tuple[int, int, float], ...]] = None
    qubo: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (KIND_MAXCUT, KIND_QUBO):
            raise ContractError(f"unknown instance kind {self.kind!r}")
        if (self.edges is None) == (self.qubo is None):
            raise ContractError("exactly one of edges/qubo must be populated")
        if self.edges is not None:
            seen = set()
            for i, j, _w in self.edges:
                if not (0 <= i < j < self.n):
                    raise ContractError(f"bad edge ({i},{j}) for n={self.n}")
                if (i, j) in seen:
                    raise ContractError(f"duplicate edge ({i},{j})")
                seen.add((i, j))

    @property
    def is_weighted(self) -> bool:
        return self.kind == KIND_MAXCUT and any(w != 1.0 for _, _, w in self.edges)

    def density(self) -> float:
        if self.kind != KIND_MAXCUT:
            raise ContractError("density is defined for MaxCut graphs")
        return len(self.edges) / (self.n * (self.n - 1) / 2)

    def to_dict(self) -> dict:
        d = {"id": self.id, "kind": self.kind, "n": self.n, "meta": self.meta}
        if self.kind == KIND_MAXCUT:
            d["edges"] = [[i, j, w] for i, j, w in self.edges]
        else:
            d["qubo"] = self.qubo.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemInstance":
        if d["kind"] == KIND_MAXCUT:
            edges = tuple((int(i), int(j), float(w)) for i, j, w in d["edges"])
            return cls(id=d["id"], kind=KIND_MAXCUT, n=int(d["n"]), edges=edges,
                       meta=d.get("meta", {}))
        qubo = np.asarray(d["qubo"], dtype=float)
        return cls(id=d["id"], kind=KIND_QUBO, n=int(d["n"]), qubo=qubo,
                   meta=d.get("meta", {}))


def stable_instance_key(instance_id: str) -> int:
    """Deterministic 32-bit key for seeding per-instance RNG streams."""
    return zlib.crc32(instance_id.encode())


def generate_er_graph(n: int, edge_prob: float, seed: int, index: int = 0) -> ProblemInstance:
    """Erdős–Rényi G(n, p) with unit edge weights, fixed by (n, p, seed)."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not (0.0 < edge_prob < 1.0):
        raise ParameterError(f"edge_prob must be in (0, 1), got {edge_prob}")
    rng = np.random.default_rng([seed, n, int(round(edge_prob * 1000)), index])
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((i, j, 1.0))
    inst_id = f"maxcut-n{n}-p{edge_prob:g}-s{seed}-k{index}"
    return ProblemInstance(id=inst_id, kind=KIND_MAXCUT, n=n, edges=tuple(edges),
                           meta={"edge_probability": edge_prob, "seed": seed, "index": index})


def generate_dense_qubo(n: int, seed: int, index: int = 0) -> ProblemInstance:
    """Dense QUBO with upper-triangular coefficients i.i.d. uniform on [-1, 1]."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng([seed, n, 0, index, 1])
    q = np.zeros((n, n))
    iu = np.triu_indices(n)
    q[iu] = rng.uniform(-1.0, 1.0, size=len(iu[0]))
    inst_id = f"qubo-n{n}-s{seed}-k{index}"
    return ProblemInstance(id=inst_id, kind=KIND_QUBO, n=n, qubo=q,
                           meta={"seed": seed, "index": index})


def generate_benchmark_suite(seed: int) -> list[ProblemInstance]:
    """200 ER MaxCut graphs + 100 dense QUBOs at the benchmark sizes."""
    out: list[ProblemInstance] = []
    for n in NODE_COUNTS:
        for p in EDGE_PROBS:
            for k in range(GRAPHS_PER_CELL):
                out.append(generate_er_graph(n, p, seed, index=k))
    for n in NODE_COUNTS:
        for k in range(QUBOS_PER_SIZE):
            out.append(generate_dense_qubo(n, seed, index=k))
    return out


def save_instances(path: str, insts: Sequence[ProblemInstance]) -> int:
    return store.write_jsonl(path, (i.to_dict() for i in insts))


def load_instances(path: str) -> list[ProblemInstance]:
    return [ProblemInstance.from_dict(d) for d in store.read_jsonl(path)]


def iter_instances(path: str) -> Iterator[ProblemInstance]:
    for d in store.read_jsonl(path):
        yield ProblemInstance.from_dict(d)
