"""Metrics, cross-validation, the size-split protocol, and ECDF aggregation.

Ratio-to-optimal compares recommended angles against the per-instance
optimized angles, with every quantity in the instance's NATIVE convention
(cut value for MaxCut, QUBO value for QUBO) so both differences share a
sign; a value above 1 means the recommendation beat the optimizer.

The ECDF implements the literal formula F(t) = (1/R) sum_i 1_[0, r_i](t),
i.e. the fraction of sample points r_i with t <= r_i. Note this DECREASES
in t (a survival-style count); the accompanying prose reading "fraction
less or equal" conflicts with the formula, and comparisons here use the
formula's orientation consistently: at a fixed t, a higher curve has more
mass at high ratios.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, DomainError, ParameterError
from .instances import KIND_MAXCUT, ProblemInstance
from .ising import ExactSolution
from .angle_opt import AngleRecord, records_by_id
from .features import (Encoding, SOURCE_ANGLES, SOURCE_EMBEDDING, SOURCE_FEATURES,
                       Scaler, angle_encoding, instance_features, standardize)
from .clustering import (RULE_CENTROID, RULE_CLOSEST, aggregate_baseline,
                         kmeans_fit, representatives)
from .recommend import RecommendationSet, recommend_and_evaluate

log = logging.getLogger(__name__)

OPTIMUM_HIT = math.inf


@dataclass(frozen=True)
class RatioSample:
    instance_id: str
    method: str
    depth: int
    k: int
    ratio: float

    def to_row(self) -> list:
        return [self.instance_id, self.method, self.depth, self.k, self.ratio]


@dataclass(frozen=True)
class EcdfCurve:
    method: str
    sample: tuple[float, ...]       # sorted ascending
    grid: tuple[float, ...]
    values: tuple[float, ...]       # F(t) on the grid


@dataclass(frozen=True)
class MethodConfig:
    """What to cluster and how to turn clusters into recommendations."""

    source: str = SOURCE_ANGLES
    k: int = 3
    rule: str = RULE_CLOSEST
    aggregate_stat: Optional[str] = None   # "Mean"/"Median" baseline instead of k-means
    include_count_features: bool = True
    standardize_features: bool = True
    embeddings: dict[str, Encoding] = field(default_factory=dict)
    name: Optional[str] = None

    @property
    def method_name(self) -> str:
        if self.name:
            return self.name
        if self.aggregate_stat:
            return f"aggregate-{self.aggregate_stat.lower()}"
        rule = "centroid" if self.rule == RULE_CENTROID else "closest"
        return f"kmeans-{self.source}-{rule}"


# ---------------------------------------------------------------------------
# metrics

def approximation_ratio(expectation_ising: float, c_opt_cut: float) -> float:
    """E(cut) / C_opt for unweighted MaxCut; upper bounded by 1."""
    if c_opt_cut <= 0:
        raise DomainError(f"approximation ratio needs c_opt > 0, got {c_opt_cut}")
    return -expectation_ising / c_opt_cut


def optimality_gap(expectation: float, c_opt: float) -> float:
    """(C_opt - E) / C_opt for minimization with negative optimum; 0 is perfect."""
    if c_opt >= 0:
        raise DomainError(
            f"optimality gap needs c_opt < 0, got {c_opt}; regenerate or exclude the instance")
    return (c_opt - expectation) / c_opt


def ratio_to_optimal(c_opt: float, e_opt: float, e_cluster: float) -> float:
    """(C_opt - E_opt) / (C_opt - E_cluster), native convention on both."""
    denom = c_opt - e_cluster
    if denom == 0.0:
        return OPTIMUM_HIT
    return (c_opt - e_opt) / denom


def native_expectation(inst: ProblemInstance, expectation_ising: float) -> float:
    """Ising-convention expectation -> the instance's native objective value."""
    if inst.kind == KIND_MAXCUT:
        return -expectation_ising
    return expectation_ising


# ---------------------------------------------------------------------------
# recommendation fitting (train side of Algorithm 1)

def _train_encodings(config: MethodConfig, train_insts: Sequence[ProblemInstance],
                     train_db: dict[str, AngleRecord]
                     ) -> tuple[list[Encoding], Optional[Scaler]]:
    if config.source == SOURCE_ANGLES:
        return [angle_encoding(i.id, train_db[i.id].angles) for i in train_insts], None
    if config.source == SOURCE_FEATURES:
        encs = [instance_features(i, include_counts=config.include_count_features)
                for i in train_insts]
    elif config.source == SOURCE_EMBEDDING:
        missing = [i.id for i in train_insts if i.id not in config.embeddings]
        if missing:
            raise ContractError(f"embeddings missing for instances: {missing[:5]}")
        encs = [config.embeddings[i.id] for i in train_insts]
    else:
        raise ParameterError(f"unknown encoding source {config.source!r}")
    if config.standardize_features:
        scaled, scaler = standardize(encs)
        return scaled, scaler
    return encs, None


def fit_recommendations(config: MethodConfig, train_insts: Sequence[ProblemInstance],
                        train_db: dict[str, AngleRecord], depth: int,
                        seed: int) -> RecommendationSet:
    """Fit on training data only and freeze K recommended angle vectors."""
    if config.aggregate_stat:
        angles = (aggregate_baseline([train_db[i.id] for i in train_insts],
                                     config.aggregate_stat),)
        return RecommendationSet(depth=depth, angles=angles,
                                 provenance={"method": config.method_name})
    rule = config.rule
    if config.source != SOURCE_ANGLES and rule == RULE_CENTROID:
        raise ContractError("Centroid rule is only defined for the AngleValues source")
    encs, _scaler = _train_encodings(config, train_insts, train_db)
    model = kmeans_fit(encs, config.k, seed=seed, representative_rule=rule)
    reps = representatives(model, encs, train_db)
    return RecommendationSet(depth=depth, angles=tuple(reps),
                             provenance={"method": config.method_name,
                                         "k": config.k, "seed": seed,
                                         "inertia": model.inertia})


def _samples_for(config: MethodConfig, recs: RecommendationSet,
                 test_insts: Sequence[ProblemInstance],
                 db: dict[str, AngleRecord],
                 exact: dict[str, ExactSolution]) -> list[RatioSample]:
    out = []
    for inst, outcome in zip(test_insts, recommend_and_evaluate(recs, test_insts)):
        c_opt = exact[inst.id].c_opt
        e_opt = native_expectation(inst, db[inst.id].expectation)
        e_cluster = native_expectation(inst, outcome.best_expectation)
        ratio = ratio_to_optimal(c_opt, e_opt, e_cluster)
        out.append(RatioSample(instance_id=inst.id, method=config.method_name,
                               depth=recs.depth, k=recs.k, ratio=ratio))
    return out


# ---------------------------------------------------------------------------
# protocols

def make_folds(instances: Sequence[ProblemInstance], folds: int, seed: int,
               stratify_by_size: bool = True) -> list[int]:
    """Fold index per instance; stratified by node count by default."""
    if folds < 2:
        raise ParameterError("need at least 2 folds")
    rng = np.random.default_rng([seed, 7])
    assignment = [0] * len(instances)
    if stratify_by_size:
        groups: dict[int, list[int]] = {}
        for idx, inst in enumerate(instances):
            groups.setdefault(inst.n, []).append(idx)
        offset = 0
        for n in sorted(groups):
            order = rng.permutation(groups[n])
            for pos, idx in enumerate(order):
                assignment[idx] = (offset + pos) % folds
            offset += len(order)
    else:
        order = rng.permutation(len(instances))
        for pos, idx in enumerate(order):
            assignment[idx] = pos % folds
    return assignment


def run_cv(config: MethodConfig, instances: Sequence[ProblemInstance],
           angle_db: Sequence[AngleRecord], exact: dict[str, ExactSolution],
           depths: Sequence[int], folds: int = 5, seed: int = 0,
           stratify_by_size: bool = True) -> list[RatioSample]:
    """Seeded k-fold protocol; each instance is tested exactly once per depth."""
    fold_of = make_folds(instances, folds, seed, stratify_by_size=stratify_by_size)
    samples: list[RatioSample] = []
    for depth in depths:
        db = records_by_id(angle_db, depth)
        missing = [i.id for i in instances if i.id not in db]
        if missing:
            raise ContractError(f"angle database missing depth-{depth} records "
                                f"for {missing[:5]}")
        for fold in range(folds):
            train = [i for i, f in zip(instances, fold_of) if f != fold]
            test = [i for i, f in zip(instances, fold_of) if f == fold]
            if not test:
                continue
            if not config.aggregate_stat and len(train) < config.k:
                log.warning("fold %d skipped: %d training points < k=%d",
                            fold, len(train), config.k)
                continue
            recs = fit_recommendations(config, train, db, depth,
                                       seed=seed * 1000 + depth * 10 + fold)
            samples.extend(_samples_for(config, recs, test, db, exact))
    return samples


def run_size_split(config: MethodConfig, instances: Sequence[ProblemInstance],
                   angle_db: Sequence[AngleRecord], exact: dict[str, ExactSolution],
                   depths: Sequence[int], train_frac: float = 0.6,
                   seed: int = 0) -> list[RatioSample]:
    """Train on the smallest node counts (~train_frac), test on the largest.

    InstanceFeatures encodings drop the log-count features here, since node
    and edge counts differ systematically between the two sides.
    """
    counts = sorted({i.n for i in instances})
    if len(counts) < 2:
        raise ParameterError("size split needs at least two distinct node counts")
    total = len(instances)
    train_sizes: set[int] = set()
    acc = 0
    for n in counts[:-1]:  # always keep the largest size for testing
        group = sum(1 for i in instances if i.n == n)
        if acc + group > round(train_frac * total) and train_sizes:
            break
        train_sizes.add(n)
        acc += group
    train = [i for i in instances if i.n in train_sizes]
    test = [i for i in instances if i.n not in train_sizes]
    config = replace(config, include_count_features=False)
    samples: list[RatioSample] = []
    for depth in depths:
        db = records_by_id(angle_db, depth)
        recs = fit_recommendations(config, train, db, depth,
                                   seed=seed * 1000 + depth * 10)
        samples.extend(_samples_for(config, recs, test, db, exact))
    return samples


# ---------------------------------------------------------------------------
# aggregation

def ecdf(samples: Sequence[float], grid: Sequence[float]) -> EcdfCurve:
    """F(t) = fraction of sample points r_i with t in [0, r_i]."""
    if not len(samples):
        raise ParameterError("ECDF of an empty sample is undefined")
    arr = np.sort(np.asarray(samples, dtype=float))
    g = np.asarray(grid, dtype=float)
    counts = np.array([(np.logical_and(t >= 0.0, t <= arr)).mean() for t in g])
    return EcdfCurve(method="", sample=tuple(arr), grid=tuple(g),
                     values=tuple(counts))


def finite_median(ratios: Sequence[float]) -> tuple[float, int]:
    """Median of the finite ratios plus the count of optimum hits (+inf)."""
    arr = np.asarray(ratios, dtype=float)
    hits = int(np.isinf(arr).sum())
    finite = arr[np.isfinite(arr)]
    if finite.size == 0:
        return math.nan, hits
    return float(np.median(finite)), hits


def bootstrap_median_ci(ratios: Sequence[float], n_boot: int = 1000,
                        seed: int = 0, alpha: float = 0.05) -> tuple[float, float]:
    """Percentile bootstrap interval for the median of the finite ratios."""
    arr = np.asarray(ratios, dtype=float)
    finite = arr[np.isfinite(arr)]
    if finite.size == 0:
        return math.nan, math.nan
    rng = np.random.default_rng([seed, 13])
    medians = np.median(
        finite[rng.integers(0, finite.size, size=(n_boot, finite.size))], axis=1)
    lo, hi = np.quantile(medians, [alpha / 2, 1 - alpha / 2])
    return float(lo), float(hi)


def summarize(samples: Sequence[RatioSample], seed: int = 0) -> dict:
    """Median (excluding optimum hits, count disclosed) per (method, depth, k)."""
    keys = sorted({(s.method, s.depth, s.k) for s in samples})
    out = {"groups": []}
    for method, depth, k in keys:
        ratios = [s.ratio for s in samples
                  if (s.method, s.depth, s.k) == (method, depth, k)]
        med, hits = finite_median(ratios)
        lo, hi = bootstrap_median_ci(ratios, seed=seed)
        out["groups"].append({
            "method": method, "depth": depth, "k": k, "count": len(ratios),
            "optimum_hits": hits, "median": med,
            "median_ci95": [lo, hi],
        })
    return out


def write_samples_csv(path: str, samples: Sequence[RatioSample]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_id", "method", "depth", "k", "ratio"])
        for s in samples:
            writer.writerow(s.to_row())


def read_samples_csv(path: str) -> list[RatioSample]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RatioSample(instance_id=row["instance_id"],
                                   method=row["method"], depth=int(row["depth"]),
                                   k=int(row["k"]), ratio=float(row["ratio"])))
    return out
