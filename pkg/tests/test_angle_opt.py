import numpy as np
import pytest

import oracles
from anglerec.angle_opt import (AngleRecord, build_database, load_database,
                                optimize_angles)
from anglerec.instances import generate_er_graph
from anglerec.ising import maxcut_to_ising, solve_instance
from anglerec.qaoa_sim import AngleVector, evolve, expectation


def test_k2_reaches_exact_optimum(k2):
    model = maxcut_to_ising(k2)
    rec = optimize_angles(model, p=1, n_restarts=50, seed=0)
    # grid+refine oracle puts the p=1 optimum of a single edge at -1 exactly
    assert rec.expectation == pytest.approx(-1.0, abs=1e-6)
    oracle_best, _ = oracles.k2_p1_optimum(model)
    assert rec.expectation <= oracle_best + 1e-6


def test_descent_monotone(triangle):
    model = maxcut_to_ising(triangle)
    rec = optimize_angles(model, p=1, n_restarts=1, seed=5)
    x0 = np.random.default_rng([5, 0, 1, 0]).uniform(0, 2 * np.pi, 2)
    initial = expectation(model, evolve(model, AngleVector(gamma=(x0[0],), beta=(x0[1],))))
    assert rec.expectation <= initial + 1e-12


def test_call_accounting(triangle):
    model = maxcut_to_ising(triangle)
    rec = optimize_angles(model, p=2, n_restarts=3, seed=1)
    assert rec.n_circuit_calls >= rec.n_restarts
    assert rec.best_restart_calls <= rec.n_circuit_calls
    # central differences: every gradient costs 4p stencil evaluations
    assert rec.n_gradient_calls % (4 * 2) == 0
    assert rec.expectation >= model.energies_table(include_offset=True).min() - 1e-9


def test_deterministic(triangle):
    model = maxcut_to_ising(triangle)
    a = optimize_angles(model, p=1, n_restarts=5, seed=9)
    b = optimize_angles(model, p=1, n_restarts=5, seed=9)
    assert a.angles == b.angles and a.expectation == b.expectation


def test_more_restarts_never_worse():
    insts = [generate_er_graph(6, 0.5, seed=s) for s in range(5)]
    for inst in insts:
        model = maxcut_to_ising(inst)
        few = optimize_angles(model, p=1, n_restarts=10, seed=3, seed_key=1)
        many = optimize_angles(model, p=1, n_restarts=50, seed=3, seed_key=1)
        assert many.expectation <= few.expectation + 1e-12


class TestBuildDatabase:
    def test_counts_and_content(self, tmp_path):
        insts = [generate_er_graph(5, 0.5, seed=s) for s in range(3)]
        out = tmp_path / "db.jsonl"
        recs = build_database(insts, depths=[1, 2], n_restarts=2, seed=0,
                              out_path=str(out))
        assert len(recs) == 6
        for rec in recs:
            sol = solve_instance(next(i for i in insts if i.id == rec.instance_id))
            assert rec.c_opt == sol.c_opt
            assert rec.expectation >= -sol.c_opt - 1e-9  # >= min Ising energy
        assert len(load_database(str(out))) == 6

    def test_empty(self):
        assert build_database([], depths=[1], n_restarts=1, seed=0) == []

    def test_resume_idempotent(self, tmp_path):
        insts = [generate_er_graph(5, 0.5, seed=s) for s in range(2)]
        out = tmp_path / "db.jsonl"
        build_database(insts, depths=[1], n_restarts=2, seed=0, out_path=str(out))
        before = out.read_bytes()
        recs = build_database(insts, depths=[1], n_restarts=2, seed=0, out_path=str(out))
        assert out.read_bytes() == before  # no new optimizations appended
        assert len(recs) == 2

    def test_roundtrip(self, tmp_path):
        insts = [generate_er_graph(4, 0.5, seed=1)]
        out = tmp_path / "db.jsonl"
        recs = build_database(insts, depths=[1], n_restarts=1, seed=0, out_path=str(out))
        loaded = load_database(str(out))
        assert loaded == recs
