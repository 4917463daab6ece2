"""Recursive QAOA with a fixed per-iteration recommendation budget.

Each iteration evaluates the K frozen recommended angle vectors on the
current (shrunken) Ising model, takes the best output state, computes the
ZZ correlations M_ij over currently coupled pairs, and substitutes the
variable pair with the largest |M_ij| (s_removed = sign(M) * s_kept). After
ceil(n/2) eliminations the residual model is brute-forced and the
substitutions are undone in reverse order to reconstruct a full assignment.

Correlations are computed only for pairs with a nonzero coupling in the
current model: eliminating an uncoupled pair cannot change the energy.
Argmax ties go to the lexicographically smallest (i, j) at 1e-12 tolerance;
within a pair the smaller index is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ContractError, ParameterError
from .instances import KIND_MAXCUT, ProblemInstance
from .ising import IsingModel, instance_to_ising, brute_force_solve, NATIVE_MINIMIZE_QUBO
from .qaoa_sim import (AngleVector, QaoaState, cost_diagonal, evolve_many,
                       expectation_many, zz_correlations)
from .recommend import RecommendationSet

MODE_RANDOM = "RandomAngles"
MODE_BUDGETED_BFGS = "BudgetedBfgs"

TIE_TOL = 1e-12


@dataclass(frozen=True)
class Elimination:
    kept: int          # original variable label, the smaller of the pair
    removed: int
    sign: int
    correlation: float
    iteration: int

    def to_dict(self) -> dict:
        return {"kept": self.kept, "removed": self.removed, "sign": self.sign,
                "correlation": self.correlation, "iteration": self.iteration}


@dataclass
class RqaoaTrace:
    instance_id: str
    depth: int
    eliminations: list[Elimination]
    final_assignment: dict[int, int]      # original label -> spin, residual vars
    reconstructed: tuple[int, ...]        # spin per original variable
    objective: float                      # native convention
    circuit_calls: int

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id, "depth": self.depth,
                "eliminations": [e.to_dict() for e in self.eliminations],
                "final_assignment": {str(k): v for k, v in self.final_assignment.items()},
                "reconstructed": list(self.reconstructed),
                "objective": self.objective, "circuit_calls": self.circuit_calls}


def eliminate(model: IsingModel, i: int, j: int, sign: int) -> IsingModel:
    """Substitute s_j = sign * s_i and drop variable j (indices above shift down)."""
    if sign not in (-1, 1):
        raise ParameterError("sign must be -1 or +1")
    if not (0 <= i < model.n and 0 <= j < model.n) or i == j:
        raise ContractError(f"bad elimination pair ({i}, {j}) for n={model.n}")
    n = model.n
    h = model.h.copy()
    couplings = dict(model.couplings)
    offset = model.offset

    h[i] += sign * h[j]
    h[j] = 0.0
    for (a, b), v in list(couplings.items()):
        if j not in (a, b):
            continue
        del couplings[(a, b)]
        other = b if a == j else a
        if other == i:
            offset += sign * v      # J_ij s_i s_j -> sign * J_ij
            continue
        key = (min(other, i), max(other, i))
        merged = couplings.get(key, 0.0) + sign * v
        if merged == 0.0:
            couplings.pop(key, None)
        else:
            couplings[key] = merged

    def remap(x: int) -> int:
        return x if x < j else x - 1

    new_h = np.delete(h, j)
    new_couplings = {}
    for (a, b), v in couplings.items():
        na, nb = remap(a), remap(b)
        new_couplings[(min(na, nb), max(na, nb))] = v
    return IsingModel(n=n - 1, h=new_h, couplings=new_couplings, offset=offset)


def _argmax_pair(corr: dict[tuple[int, int], float]) -> tuple[int, int, float]:
    best_pair, best_val = None, -1.0
    for (i, j) in sorted(corr):
        v = abs(corr[(i, j)])
        if v > best_val + TIE_TOL:
            best_pair, best_val = (i, j), v
    i, j = best_pair
    return i, j, corr[(i, j)]


def _best_state(model: IsingModel, angle_sets: Sequence[AngleVector]) -> QaoaState:
    diag = cost_diagonal(model)
    amps = evolve_many(model, angle_sets, diag=diag)
    vals = expectation_many(model, amps, diag=diag)
    return QaoaState(n=model.n, amplitudes=amps[int(np.argmin(vals))])


class _AngleSource:
    """Per-iteration angle proposals: frozen recommendations or a baseline."""

    def __init__(self, recs: Optional[RecommendationSet], depth: int,
                 mode: Optional[str], budget: int, seed: int):
        self.recs = recs
        self.depth = depth
        self.mode = mode
        self.budget = budget
        self.seed = seed

    def calls_per_iteration(self) -> int:
        return self.recs.k if self.recs is not None else self.budget

    def propose(self, model: IsingModel, iteration: int) -> QaoaState:
        if self.recs is not None:
            return _best_state(model, self.recs.angles)
        rng = np.random.default_rng([self.seed, iteration])
        if self.mode == MODE_RANDOM:
            flat = rng.uniform(0.0, 2.0 * np.pi, size=(self.budget, 2 * self.depth))
            angle_sets = [AngleVector.from_flat(x) for x in flat]
            return _best_state(model, angle_sets)
        if self.mode == MODE_BUDGETED_BFGS:
            return self._budgeted_bfgs(model, rng)
        raise ParameterError(f"unknown baseline mode {self.mode!r}")

    def _budgeted_bfgs(self, model: IsingModel, rng) -> QaoaState:
        diag = cost_diagonal(model)
        best = {"x": None, "val": np.inf, "calls": 0}

        class _Exhausted(Exception):
            pass

        def fun(x):
            if best["calls"] >= self.budget:
                raise _Exhausted
            best["calls"] += 1
            amps = evolve_many(model, x[None, :], diag=diag)
            val = float(expectation_many(model, amps, diag=diag)[0])
            if val < best["val"]:
                best["val"], best["x"] = val, x.copy()
            return val

        def jac(x):
            step = 1e-6
            dim = x.size
            points = np.repeat(x[None, :], 2 * dim, axis=0)
            for k in range(dim):
                points[2 * k, k] += step
                points[2 * k + 1, k] -= step
            amps = evolve_many(model, points, diag=diag)
            vals = expectation_many(model, amps, diag=diag)
            return (vals[0::2] - vals[1::2]) / (2 * step)

        x0 = rng.uniform(0.0, 2.0 * np.pi, size=2 * self.depth)
        try:
            minimize(fun, x0, jac=jac, method="BFGS", options={"maxiter": 50})
        except _Exhausted:
            pass
        amps = evolve_many(model, best["x"][None, :], diag=diag)
        return QaoaState(n=model.n, amplitudes=amps[0])


def _run(inst: ProblemInstance, depth: int, source: _AngleSource,
         n_iterations: Optional[int], stop_size: Optional[int]) -> RqaoaTrace:
    if inst.kind != KIND_MAXCUT:
        raise ContractError("RQAOA is run on MaxCut instances only")
    original = instance_to_ising(inst)
    model = original
    labels = list(range(inst.n))   # compressed index -> original label
    if n_iterations is None:
        if stop_size is not None:
            n_iterations = max(0, inst.n - stop_size)
        else:
            n_iterations = math.ceil(inst.n / 2)
    eliminations: list[Elimination] = []
    calls = 0
    for it in range(n_iterations):
        if not model.couplings or model.n <= 1:
            break   # nothing left to correlate; residual solved exactly below
        state = source.propose(model, it)
        calls += source.calls_per_iteration()
        corr = zz_correlations(state, sorted(model.couplings))
        ci, cj, m = _argmax_pair(corr)
        sign = 1 if m >= 0 else -1
        li, lj = labels[ci], labels[cj]
        kept, removed = (li, lj) if li < lj else (lj, li)
        keep_c, drop_c = (ci, cj) if labels[ci] == kept else (cj, ci)
        eliminations.append(Elimination(kept=kept, removed=removed, sign=sign,
                                        correlation=float(m), iteration=it))
        model = eliminate(model, keep_c, drop_c, sign)
        labels.pop(drop_c)

    residual = brute_force_solve(model, NATIVE_MINIMIZE_QUBO)
    spins: dict[int, int] = {}
    for comp_idx, label in enumerate(labels):
        spins[label] = 1 - 2 * residual.argmin_config[comp_idx]
    final_assignment = dict(spins)
    for e in reversed(eliminations):
        spins[e.removed] = e.sign * spins[e.kept]
    reconstructed = tuple(spins[v] for v in range(inst.n))
    energy = original.energy(np.array(reconstructed, dtype=float))
    objective = -energy   # native cut value
    return RqaoaTrace(instance_id=inst.id, depth=depth, eliminations=eliminations,
                      final_assignment=final_assignment, reconstructed=reconstructed,
                      objective=float(objective), circuit_calls=calls)


def run_rqaoa(inst: ProblemInstance, depth: int, recs: RecommendationSet,
              seed: int = 0, n_iterations: Optional[int] = None,
              stop_size: Optional[int] = None) -> RqaoaTrace:
    """RQAOA with K frozen recommended angle vectors per iteration."""
    if recs.depth != depth:
        raise ContractError("recommendation set depth does not match")
    source = _AngleSource(recs, depth, None, recs.k, seed)
    return _run(inst, depth, source, n_iterations, stop_size)


def run_rqaoa_baseline(inst: ProblemInstance, depth: int, mode: str,
                       budget: int = 3, seed: int = 0,
                       n_iterations: Optional[int] = None,
                       stop_size: Optional[int] = None) -> RqaoaTrace:
    """Baselines under the same per-iteration call budget.

    RandomAngles draws ``budget`` fresh uniform angle sets per iteration and
    keeps the best; BudgetedBfgs runs BFGS from a random start hard-capped
    at ``budget`` objective evaluations per iteration.
    """
    source = _AngleSource(None, depth, mode, budget, seed)
    return _run(inst, depth, source, n_iterations, stop_size)
