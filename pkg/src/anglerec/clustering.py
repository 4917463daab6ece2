"""K-means over encodings, representative extraction, and aggregation baselines.

Lloyd iterations with k-means++ initialization, best of 10 seeded restarts
by within-cluster sum of squares. Empty clusters are re-seeded with the
point currently farthest from its assigned centroid. Angle-value encodings
are clustered as raw reals (no circular metric).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, ParameterError
from .features import Encoding, SOURCE_ANGLES
from .qaoa_sim import AngleVector
from .angle_opt import AngleRecord
from . import store

RULE_CENTROID = "Centroid"
RULE_CLOSEST = "ClosestPoint"

N_RESTARTS = 10
MAX_ITER = 300
SHIFT_TOL = 1e-8


@dataclass
class ClusterModel:
    k: int
    source: str
    centroids: np.ndarray
    representative_rule: str
    assignments: dict[str, int]
    inertia: float
    seed: int
    inertia_history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"k": self.k, "source": self.source,
                "centroids": self.centroids.tolist(),
                "representative_rule": self.representative_rule,
                "assignments": self.assignments, "inertia": self.inertia,
                "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterModel":
        return cls(k=int(d["k"]), source=d["source"],
                   centroids=np.asarray(d["centroids"], dtype=float),
                   representative_rule=d["representative_rule"],
                   assignments={k: int(v) for k, v in d["assignments"].items()},
                   inertia=float(d["inertia"]), seed=int(d["seed"]))

    def save(self, path: str) -> None:
        store.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: str) -> "ClusterModel":
        return cls.from_dict(store.read_json(path))


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[c] = x[rng.integers(n)]
        else:
            centroids[c] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centroids[c]) ** 2, axis=1))
    return centroids


def _assign(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _inertia(x: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(((x - centroids[labels]) ** 2).sum())


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator
           ) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    centroids = _kmeanspp_init(x, k, rng)
    history: list[float] = []
    labels = _assign(x, centroids)
    for _ in range(MAX_ITER):
        history.append(_inertia(x, centroids, labels))
        new_centroids = centroids.copy()
        for c in range(k):
            members = x[labels == c]
            if len(members):
                new_centroids[c] = members.mean(axis=0)
        # re-seed empty clusters with the point farthest from its centroid
        for c in range(k):
            if not np.any(labels == c):
                dist = ((x - new_centroids[labels]) ** 2).sum(axis=1)
                far = int(dist.argmax())
                new_centroids[c] = x[far]
                labels[far] = c
        shift = np.abs(new_centroids - centroids).max()
        centroids = new_centroids
        labels = _assign(x, centroids)
        if shift < SHIFT_TOL:
            break
    history.append(_inertia(x, centroids, labels))
    return centroids, labels, history[-1], history


def kmeans_fit(encodings: Sequence[Encoding], k: int, seed: int,
               representative_rule: str = RULE_CLOSEST) -> ClusterModel:
    """Best of N_RESTARTS seeded k-means++/Lloyd runs by inertia."""
    if not encodings:
        raise ParameterError("no encodings to cluster")
    if k < 1 or k > len(encodings):
        raise ParameterError(f"k={k} must be in [1, {len(encodings)}]")
    sources = {e.source for e in encodings}
    if len(sources) != 1:
        raise ContractError(f"mixed encoding sources: {sources}")
    x = np.array([e.vector for e in encodings], dtype=float)
    best = None
    for r in range(N_RESTARTS):
        rng = np.random.default_rng([seed, r])
        centroids, labels, inertia, history = _lloyd(x, k, rng)
        if best is None or inertia < best[2]:
            best = (centroids, labels, inertia, history)
    centroids, labels, inertia, history = best
    assignments = {e.instance_id: int(labels[i]) for i, e in enumerate(encodings)}
    return ClusterModel(k=k, source=sources.pop(), centroids=centroids,
                        representative_rule=representative_rule,
                        assignments=assignments, inertia=inertia, seed=seed,
                        inertia_history=history)


def representatives(model: ClusterModel, encodings: Sequence[Encoding],
                    angle_db: dict[str, AngleRecord]) -> list[AngleVector]:
    """One angle vector per cluster.

    ClosestPoint: the optimal angles of the training encoding nearest each
    centroid (mandatory for non-angle sources, whose centroids are not
    angles). Centroid: the centroid read directly as an angle vector;
    AngleValues source only.
    """
    if model.representative_rule == RULE_CENTROID:
        if model.source != SOURCE_ANGLES:
            raise ContractError("Centroid rule requires the AngleValues source")
        return [AngleVector.from_flat(c) for c in model.centroids]
    if model.representative_rule != RULE_CLOSEST:
        raise ContractError(f"unknown representative rule {model.representative_rule!r}")
    x = np.array([e.vector for e in encodings], dtype=float)
    out = []
    for c in model.centroids:
        nearest = int(((x - c) ** 2).sum(axis=1).argmin())
        inst_id = encodings[nearest].instance_id
        if inst_id not in angle_db:
            raise ContractError(f"instance {inst_id} missing from the angle database")
        out.append(angle_db[inst_id].angles)
    return out


def aggregate_baseline(records: Sequence[AngleRecord], stat: str) -> AngleVector:
    """Component-wise mean or median of the optimal angle vectors."""
    if not records:
        raise ParameterError("empty angle database")
    depths = {r.p for r in records}
    if len(depths) != 1:
        raise ContractError("aggregate_baseline needs records of a single depth")
    x = np.array([r.angles.flat() for r in records])
    if stat == "Mean":
        return AngleVector.from_flat(x.mean(axis=0))
    if stat == "Median":
        return AngleVector.from_flat(np.median(x, axis=0))
    raise ParameterError(f"unknown statistic {stat!r}")
