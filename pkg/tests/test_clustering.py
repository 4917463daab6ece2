import numpy as np
import pytest

from anglerec.angle_opt import AngleRecord
from anglerec.clustering import (RULE_CENTROID, RULE_CLOSEST, aggregate_baseline,
                                 kmeans_fit, representatives)
from anglerec.errors import ContractError, ParameterError
from anglerec.features import Encoding, angle_encoding
from anglerec.qaoa_sim import AngleVector


def enc(i, vec, source="InstanceFeatures"):
    return Encoding(f"i{i}", source, tuple(float(v) for v in vec))


def fake_record(inst_id, gamma, beta):
    return AngleRecord(instance_id=inst_id, p=len(gamma),
                       angles=AngleVector(gamma=tuple(gamma), beta=tuple(beta)),
                       expectation=-1.0, c_opt=1.0, n_restarts=1,
                       n_circuit_calls=1, best_restart_calls=1)


def test_k_equals_points_zero_inertia():
    encs = [enc(i, [float(i), 0.0]) for i in range(4)]
    model = kmeans_fit(encs, k=4, seed=0)
    assert model.inertia == pytest.approx(0.0, abs=1e-12)
    assert sorted(map(tuple, model.centroids)) == [(float(i), 0.0) for i in range(4)]


def test_two_separated_pairs():
    encs = [enc(0, [0.0]), enc(1, [1.0]), enc(2, [10.0]), enc(3, [11.0])]
    model = kmeans_fit(encs, k=2, seed=0)
    assert sorted(c[0] for c in model.centroids) == [0.5, 10.5]


def test_k_too_large_rejected():
    with pytest.raises(ParameterError):
        kmeans_fit([enc(0, [1.0])], k=2, seed=0)


def test_inertia_matches_wcss_and_history_monotone():
    rng = np.random.default_rng(5)
    encs = [enc(i, rng.normal(size=3)) for i in range(40)]
    model = kmeans_fit(encs, k=4, seed=2)
    x = np.array([e.vector for e in encs])
    labels = np.array([model.assignments[e.instance_id] for e in encs])
    wcss = ((x - model.centroids[labels]) ** 2).sum()
    assert model.inertia == pytest.approx(wcss, abs=1e-9)
    hist = model.inertia_history
    assert all(hist[i + 1] <= hist[i] + 1e-9 for i in range(len(hist) - 1))


def test_inertia_non_increasing_in_k():
    rng = np.random.default_rng(11)
    encs = [enc(i, rng.normal(size=4), source="AngleValues") for i in range(60)]
    inertias = [kmeans_fit(encs, k=k, seed=3).inertia for k in range(3, 11)]
    assert all(b <= a + 1e-9 for a, b in zip(inertias, inertias[1:]))


def test_deterministic():
    rng = np.random.default_rng(1)
    encs = [enc(i, rng.normal(size=2)) for i in range(20)]
    a = kmeans_fit(encs, k=3, seed=7)
    b = kmeans_fit(encs, k=3, seed=7)
    assert np.array_equal(a.centroids, b.centroids)
    assert a.assignments == b.assignments


def test_assignment_invariant_under_common_rescaling():
    rng = np.random.default_rng(3)
    encs = [enc(i, rng.normal(size=3)) for i in range(25)]
    scaled = [Encoding(e.instance_id, e.source, tuple(7.5 * v for v in e.vector))
              for e in encs]
    a = kmeans_fit(encs, k=4, seed=5)
    b = kmeans_fit(scaled, k=4, seed=5)
    # cluster labels may permute; compare the induced partitions
    def partition(model):
        groups = {}
        for iid, c in model.assignments.items():
            groups.setdefault(c, set()).add(iid)
        return sorted(map(frozenset, groups.values()), key=sorted)
    assert partition(a) == partition(b)


class TestRepresentatives:
    def test_centroid_k1_is_mean(self):
        recs = {f"i{i}": fake_record(f"i{i}", [0.2 * i], [0.1 * i]) for i in range(5)}
        encs = [angle_encoding(f"i{i}", recs[f"i{i}"].angles) for i in range(5)]
        model = kmeans_fit(encs, k=1, seed=0, representative_rule=RULE_CENTROID)
        (rep,) = representatives(model, encs, recs)
        assert rep.gamma[0] == pytest.approx(np.mean([0.2 * i for i in range(5)]))

    def test_closest_point_membership(self):
        rng = np.random.default_rng(9)
        recs = {f"i{i}": fake_record(f"i{i}", rng.uniform(0, 6, 2), rng.uniform(0, 6, 2))
                for i in range(12)}
        encs = [enc(i, rng.normal(size=3)) for i in range(12)]
        model = kmeans_fit(encs, k=3, seed=1, representative_rule=RULE_CLOSEST)
        reps = representatives(model, encs, recs)
        db_angles = {r.angles for r in recs.values()}
        assert all(rep in db_angles for rep in reps)

    def test_centroid_rule_needs_angle_source(self):
        encs = [enc(i, [float(i)]) for i in range(4)]
        model = kmeans_fit(encs, k=2, seed=0, representative_rule=RULE_CENTROID)
        with pytest.raises(ContractError):
            representatives(model, encs, {})


class TestAggregateBaseline:
    def test_single_record(self):
        rec = fake_record("a", [0.5], [1.5])
        assert aggregate_baseline([rec], "Mean") == rec.angles
        assert aggregate_baseline([rec], "Median") == rec.angles

    def test_symmetric_mean_is_zero(self):
        recs = [fake_record("a", [0.7], [0.3]), fake_record("b", [-0.7], [-0.3])]
        mean = aggregate_baseline(recs, "Mean")
        assert mean.gamma == (0.0,) and mean.beta == (0.0,)

    def test_empty_rejected(self):
        with pytest.raises(ParameterError):
            aggregate_baseline([], "Mean")
