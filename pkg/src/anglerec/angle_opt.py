"""Multi-restart BFGS optimization of the QAOA expectation over 2p angles.

Each restart starts from angles drawn uniformly in [0, 2pi)^{2p} and runs
unconstrained BFGS (strong-Wolfe line search, c1=1e-4, c2=0.9, as provided
by scipy) with gradients from central finite differences, batched through
``evolve_many``. Circuit-call accounting separates plain objective
evaluations from gradient-stencil evaluations (4p per gradient).

Restart r of seed s always uses the RNG stream [s, key, p, r], so a run with
more restarts strictly extends a run with fewer (nested candidate sets).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ParameterError
from .instances import ProblemInstance, stable_instance_key
from .ising import IsingModel, instance_to_ising, solve_instance, ExactSolution
from .qaoa_sim import AngleVector, cost_diagonal, evolve_many, expectation_many
from . import store

log = logging.getLogger(__name__)

FD_STEP = 1e-6
MAX_ITER = 200
GRAD_TOL = 1e-8


@dataclass(frozen=True)
class AngleRecord:
    """Database row pairing an instance with its best-found angles."""

    instance_id: str
    p: int
    angles: AngleVector
    expectation: float
    c_opt: float
    n_restarts: int
    n_circuit_calls: int
    best_restart_calls: int
    n_gradient_calls: int = 0
    best_restart_gradient_calls: int = 0

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id, "p": self.p,
            "angles": self.angles.to_dict(), "expectation": self.expectation,
            "c_opt": self.c_opt, "n_restarts": self.n_restarts,
            "n_circuit_calls": self.n_circuit_calls,
            "best_restart_calls": self.best_restart_calls,
            "n_gradient_calls": self.n_gradient_calls,
            "best_restart_gradient_calls": self.best_restart_gradient_calls,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AngleRecord":
        return cls(instance_id=d["instance_id"], p=int(d["p"]),
                   angles=AngleVector.from_dict(d["angles"]),
                   expectation=float(d["expectation"]), c_opt=float(d["c_opt"]),
                   n_restarts=int(d["n_restarts"]),
                   n_circuit_calls=int(d["n_circuit_calls"]),
                   best_restart_calls=int(d["best_restart_calls"]),
                   n_gradient_calls=int(d.get("n_gradient_calls", 0)),
                   best_restart_gradient_calls=int(d.get("best_restart_gradient_calls", 0)))


class _CountingObjective:
    """QAOA expectation as a function of the flat angle vector, with counters."""

    def __init__(self, model: IsingModel):
        self.diag = cost_diagonal(model)
        self.model = model
        self.objective_calls = 0
        self.gradient_stencil_calls = 0

    def value(self, x: np.ndarray) -> float:
        self.objective_calls += 1
        amps = evolve_many(self.model, x[None, :], diag=self.diag)
        return float(expectation_many(self.model, amps, diag=self.diag)[0])

    def gradient(self, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
        """Central differences; one batched evaluation of 4p circuits."""
        dim = x.size
        self.gradient_stencil_calls += 2 * dim
        points = np.repeat(x[None, :], 2 * dim, axis=0)
        for k in range(dim):
            points[2 * k, k] += step
            points[2 * k + 1, k] -= step
        amps = evolve_many(self.model, points, diag=self.diag)
        vals = expectation_many(self.model, amps, diag=self.diag)
        return (vals[0::2] - vals[1::2]) / (2.0 * step)


def optimize_angles(model: IsingModel, p: int, n_restarts: int, seed: int,
                    instance_id: str = "", c_opt: float = float("nan"),
                    seed_key: int = 0) -> AngleRecord:
    """Best-of-restarts BFGS minimization of expectation(evolve(model, .))."""
    if n_restarts < 1:
        raise ParameterError("n_restarts must be >= 1")
    if p < 1:
        raise ParameterError("depth must be >= 1")
    obj = _CountingObjective(model)
    best_x: Optional[np.ndarray] = None
    best_val = np.inf
    best_calls = 0
    best_grad_calls = 0
    for r in range(n_restarts):
        rng = np.random.default_rng([seed, seed_key, p, r])
        x0 = rng.uniform(0.0, 2.0 * np.pi, size=2 * p)
        calls_before = obj.objective_calls
        grad_before = obj.gradient_stencil_calls
        try:
            res = minimize(obj.value, x0, jac=obj.gradient, method="BFGS",
                           options={"maxiter": MAX_ITER, "gtol": GRAD_TOL})
            x_final, val_final = res.x, float(res.fun)
        except (FloatingPointError, ValueError) as exc:
            log.warning("restart %d aborted: %s", r, exc)
            continue
        if not np.isfinite(val_final):
            log.warning("restart %d produced a non-finite objective; skipped", r)
            continue
        if val_final < best_val:
            best_val = val_final
            best_x = x_final
            best_calls = obj.objective_calls - calls_before
            best_grad_calls = obj.gradient_stencil_calls - grad_before
    if best_x is None:
        raise ParameterError("all restarts failed")
    return AngleRecord(
        instance_id=instance_id, p=p, angles=AngleVector.from_flat(best_x),
        expectation=best_val, c_opt=c_opt, n_restarts=n_restarts,
        n_circuit_calls=obj.objective_calls, best_restart_calls=best_calls,
        n_gradient_calls=obj.gradient_stencil_calls,
        best_restart_gradient_calls=best_grad_calls)


def load_database(path: str) -> list[AngleRecord]:
    return [AngleRecord.from_dict(d) for d in store.read_jsonl(path)]


def records_by_id(records: Sequence[AngleRecord], p: int) -> dict[str, AngleRecord]:
    return {r.instance_id: r for r in records if r.p == p}


def build_database(instances: Sequence[ProblemInstance], depths: Sequence[int],
                   n_restarts: int, seed: int,
                   exact: Optional[dict[str, ExactSolution]] = None,
                   out_path: Optional[str] = None,
                   existing: Sequence[AngleRecord] = ()) -> list[AngleRecord]:
    """One AngleRecord per (instance, depth); resumable via ``existing``.

    Pairs already present in ``existing`` (or in ``out_path`` on disk) are
    skipped; new records are appended to ``out_path`` as they complete.
    """
    exact = exact or {}
    done: dict[tuple[str, int], AngleRecord] = {}
    if out_path and store.exists_nonempty(out_path):
        existing = load_database(out_path)
    for rec in existing:
        done[(rec.instance_id, rec.p)] = rec
    records = list(done.values())
    for inst in instances:
        sol = exact.get(inst.id)
        if sol is None:
            sol = solve_instance(inst)
            exact[inst.id] = sol
        model = instance_to_ising(inst)
        key = stable_instance_key(inst.id)
        for p in depths:
            if (inst.id, p) in done:
                continue
            rec = optimize_angles(model, p, n_restarts, seed,
                                  instance_id=inst.id, c_opt=sol.c_opt,
                                  seed_key=key)
            records.append(rec)
            done[(inst.id, p)] = rec
            if out_path:
                store.append_jsonl(out_path, rec.to_dict())
    return records
