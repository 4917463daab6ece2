"""Fixed-length instance encodings and the standardization scaler.

MaxCut graphs get [density, log n, log |E|, log(l1/dbar), log(l2/dbar),
log(l1/l2)] where l1 >= l2 are the two largest Laplacian eigenvalues and
dbar the average degree; the two count features can be dropped for the
train-small/test-big protocol. QUBOs are reduced to a weighted MaxCut first
and use [log n, log(l1/dbar_w), log(l2/dbar_w), log(l1/l2)].

Degrees of the weighted Laplacian use absolute edge weights (reduction
weights can be negative and a signed spectrum has no standard ordering).
Natural logarithms throughout; eigenvalues and ratios are floored at 1e-12
before taking logs so degenerate spectra (e.g. K2) stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, FeatureError, ParameterError
from .instances import KIND_MAXCUT, KIND_QUBO, ProblemInstance
from .ising import qubo_to_maxcut
from . import store

SOURCE_ANGLES = "AngleValues"
SOURCE_FEATURES = "InstanceFeatures"
SOURCE_EMBEDDING = "ExternalEmbedding"

EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class Encoding:
    instance_id: str
    source: str
    vector: tuple[float, ...]
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        if not all(np.isfinite(self.vector)):
            raise ContractError(f"non-finite encoding for {self.instance_id}")

    def to_dict(self) -> dict:
        d = {"instance_id": self.instance_id, "source": self.source,
             "vector": list(self.vector)}
        if self.feature_names:
            d["feature_names"] = list(self.feature_names)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Encoding":
        return cls(instance_id=d["instance_id"], source=d["source"],
                   vector=tuple(float(v) for v in d["vector"]),
                   feature_names=tuple(d.get("feature_names", ())))


def _safe_log(x: float) -> float:
    return float(np.log(max(x, EIG_FLOOR)))


def _laplacian_spectrum_features(n: int, edges) -> tuple[float, float, float]:
    """(log(l1/dbar), log(l2/dbar), log(l1/l2)) of the |w|-degree Laplacian."""
    lap = np.zeros((n, n))
    for i, j, w in edges:
        lap[i, j] -= w
        lap[j, i] -= w
        lap[i, i] += abs(w)
        lap[j, j] += abs(w)
    eigs = np.sort(np.linalg.eigvalsh(lap))
    l1, l2 = eigs[-1], eigs[-2]
    dbar = np.trace(lap) / n
    if dbar <= 0:
        raise FeatureError("graph has zero total degree")
    l1 = max(l1, EIG_FLOOR)
    l2 = max(l2, EIG_FLOOR)
    return (_safe_log(l1 / dbar), _safe_log(l2 / dbar), _safe_log(l1 / l2))


def maxcut_features(inst: ProblemInstance, include_counts: bool = True) -> Encoding:
    """Hand-crafted spectral/structural features for a MaxCut graph."""
    if inst.kind != KIND_MAXCUT:
        raise ContractError(f"expected a MaxCut instance, got {inst.kind}")
    if not inst.edges:
        raise FeatureError(f"{inst.id}: edgeless graph has undefined spectral features")
    spec = _laplacian_spectrum_features(inst.n, inst.edges)
    if include_counts:
        names = ("density", "log_nodes", "log_edges",
                 "log_l1_over_avg_degree", "log_l2_over_avg_degree", "log_l1_over_l2")
        vec = (inst.density(), float(np.log(inst.n)), float(np.log(len(inst.edges)))) + spec
    else:
        names = ("density", "log_l1_over_avg_degree", "log_l2_over_avg_degree",
                 "log_l1_over_l2")
        vec = (inst.density(),) + spec
    return Encoding(instance_id=inst.id, source=SOURCE_FEATURES, vector=vec,
                    feature_names=names)


def qubo_features(inst: ProblemInstance, include_counts: bool = True) -> Encoding:
    """Features of the QUBO's weighted MaxCut reduction."""
    if inst.kind != KIND_QUBO:
        raise ContractError(f"expected a DenseQubo instance, got {inst.kind}")
    reduced = qubo_to_maxcut(inst)
    if not reduced.edges:
        raise FeatureError(f"{inst.id}: reduction produced an edgeless graph")
    spec = _laplacian_spectrum_features(reduced.n, reduced.edges)
    if include_counts:
        names = ("log_nodes", "log_l1_over_avg_degree", "log_l2_over_avg_degree",
                 "log_l1_over_l2")
        vec = (float(np.log(reduced.n)),) + spec
    else:
        names = ("log_l1_over_avg_degree", "log_l2_over_avg_degree", "log_l1_over_l2")
        vec = spec
    return Encoding(instance_id=inst.id, source=SOURCE_FEATURES, vector=vec,
                    feature_names=names)


def instance_features(inst: ProblemInstance, include_counts: bool = True) -> Encoding:
    if inst.kind == KIND_MAXCUT:
        return maxcut_features(inst, include_counts=include_counts)
    return qubo_features(inst, include_counts=include_counts)


def angle_encoding(instance_id: str, angles) -> Encoding:
    """Raw (gamma, beta) values as a clustering input; no rescaling."""
    return Encoding(instance_id=instance_id, source=SOURCE_ANGLES,
                    vector=tuple(angles.flat()))


@dataclass(frozen=True)
class Scaler:
    """Per-dimension z-score from training statistics only."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    def transform(self, enc: Encoding) -> Encoding:
        x = np.asarray(enc.vector)
        mean = np.asarray(self.mean)
        std = np.asarray(self.std)
        z = np.where(std > 0, (x - mean) / np.where(std > 0, std, 1.0), 0.0)
        return Encoding(instance_id=enc.instance_id, source=enc.source,
                        vector=tuple(z), feature_names=enc.feature_names)

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(mean=tuple(d["mean"]), std=tuple(d["std"]))


def standardize(encodings: Sequence[Encoding]) -> tuple[list[Encoding], Scaler]:
    """Fit a z-score scaler on the given encodings and apply it to them.

    Zero-variance dimensions map to 0. The returned scaler must be reused
    unchanged on test encodings.
    """
    if not encodings:
        raise ParameterError("cannot standardize an empty encoding list")
    sources = {e.source for e in encodings}
    if len(sources) != 1:
        raise ContractError(f"mixed encoding sources: {sources}")
    x = np.array([e.vector for e in encodings], dtype=float)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std < 1e-15, 0.0, std)
    scaler = Scaler(mean=tuple(mean), std=tuple(std))
    return [scaler.transform(e) for e in encodings], scaler


def save_encodings(path: str, encodings: Sequence[Encoding]) -> int:
    return store.write_jsonl(path, (e.to_dict() for e in encodings))


def load_encodings(path: str) -> list[Encoding]:
    encs = [Encoding.from_dict(d) for d in store.read_jsonl(path)]
    if encs:
        lengths = {len(e.vector) for e in encs}
        sources = {e.source for e in encs}
        if len(lengths) != 1 or len(sources) != 1:
            raise ContractError(f"{path}: encodings must share source and dimension")
    return encs
