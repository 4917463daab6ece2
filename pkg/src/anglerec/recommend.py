"""K-angle recommendation: evaluate a frozen set of K angle vectors on test
instances and keep the best QAOA output; no optimizer runs afterward."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError, ParameterError
from .instances import ProblemInstance
from .ising import instance_to_ising
from .qaoa_sim import AngleVector, cost_diagonal, evolve_many, expectation_many
from . import store


@dataclass(frozen=True)
class RecommendationSet:
    depth: int
    angles: tuple[AngleVector, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.angles:
            raise ParameterError("a recommendation set needs at least one angle vector")
        if any(a.p != self.depth for a in self.angles):
            raise ContractError("all recommended angle vectors must match the depth")

    @property
    def k(self) -> int:
        return len(self.angles)

    def to_dict(self) -> dict:
        return {"depth": self.depth, "angles": [a.to_dict() for a in self.angles],
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> "RecommendationSet":
        return cls(depth=int(d["depth"]),
                   angles=tuple(AngleVector.from_dict(a) for a in d["angles"]),
                   provenance=d.get("provenance", {}))

    def save(self, path: str) -> None:
        store.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: str) -> "RecommendationSet":
        return cls.from_dict(store.read_json(path))


@dataclass(frozen=True)
class RecommendationOutcome:
    instance_id: str
    best_expectation: float
    best_angle_index: int
    per_angle_expectations: tuple[float, ...]

    @property
    def circuit_calls(self) -> int:
        return len(self.per_angle_expectations)

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id,
                "best_expectation": self.best_expectation,
                "best_angle_index": self.best_angle_index,
                "per_angle_expectations": list(self.per_angle_expectations),
                "circuit_calls": self.circuit_calls}

    @classmethod
    def from_dict(cls, d: dict) -> "RecommendationOutcome":
        return cls(instance_id=d["instance_id"],
                   best_expectation=float(d["best_expectation"]),
                   best_angle_index=int(d["best_angle_index"]),
                   per_angle_expectations=tuple(float(v) for v in d["per_angle_expectations"]))


def evaluate_on_instance(recs: RecommendationSet,
                         inst: ProblemInstance) -> RecommendationOutcome:
    """Exactly K circuit evaluations; ties broken toward the lowest index."""
    model = instance_to_ising(inst)
    diag = cost_diagonal(model)
    amps = evolve_many(model, recs.angles, diag=diag)
    vals = expectation_many(model, amps, diag=diag)
    best = int(np.argmin(vals))  # argmin returns the first minimum
    return RecommendationOutcome(instance_id=inst.id,
                                 best_expectation=float(vals[best]),
                                 best_angle_index=best,
                                 per_angle_expectations=tuple(float(v) for v in vals))


def recommend_and_evaluate(recs: RecommendationSet,
                           test: Sequence[ProblemInstance]) -> list[RecommendationOutcome]:
    return [evaluate_on_instance(recs, inst) for inst in test]
