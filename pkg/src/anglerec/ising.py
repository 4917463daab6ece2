"""Canonical Ising representation, conversions, and the brute-force oracle.

One sign convention holds throughout the toolkit: the simulator and all
optimizers MINIMIZE the Ising energy

    energy(s) = offset + sum_i h_i s_i + sum_{j>i} J_ij s_i s_j,  s in {-1,+1}^n.

MaxCut instances are encoded so that energy(s) = -cut(s); QUBO instances so
that energy(s) equals the QUBO value at x_i = (1 - s_i) / 2. Metrics convert
back to each problem's native convention at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractError, ResourceError
from .instances import KIND_MAXCUT, KIND_QUBO, ProblemInstance

BRUTE_FORCE_CAP = 24

NATIVE_MAXIMIZE_CUT = "maximize_cut"
NATIVE_MINIMIZE_QUBO = "minimize_qubo"

# Bit convention everywhere: bit i of the integer index x is variable/qubit i
# (little-endian), and spin s_i = 1 - 2 * bit_i, so bit 1 <-> spin -1 <-> x_i = 1.


@dataclass
class IsingModel:
    """Sparse Ising Hamiltonian; couplings hold only nonzero J_ij with i < j."""

    n: int
    h: np.ndarray
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        if self.h.shape != (self.n,):
            raise ContractError(f"h must have shape ({self.n},)")
        for (i, j), v in list(self.couplings.items()):
            if not (0 <= i < j < self.n):
                raise ContractError(f"bad coupling index ({i},{j})")
            if v == 0.0:
                del self.couplings[(i, j)]

    def energy(self, spins: np.ndarray) -> float:
        """Energy of one configuration s in {-1,+1}^n."""
        s = np.asarray(spins, dtype=float)
        e = self.offset + float(self.h @ s)
        for (i, j), v in self.couplings.items():
            e += v * s[i] * s[j]
        return e

    def energies_table(self, include_offset: bool = False) -> np.ndarray:
        """Energy of every bitstring 0 .. 2^n - 1, bit i = variable i.

        The offset is excluded by default since phase layers and expectation
        handle it separately.
        """
        if self.n > BRUTE_FORCE_CAP:
            raise ResourceError(f"n={self.n} exceeds dense-table cap {BRUTE_FORCE_CAP}")
        dim = 1 << self.n
        idx = np.arange(dim, dtype=np.int64)
        spins = [None] * self.n

        def spin(i: int) -> np.ndarray:
            if spins[i] is None:
                spins[i] = 1.0 - 2.0 * ((idx >> i) & 1)
            return spins[i]

        e = np.zeros(dim)
        for i in range(self.n):
            if self.h[i] != 0.0:
                e += self.h[i] * spin(i)
        for (i, j), v in self.couplings.items():
            e += v * spin(i) * spin(j)
        if include_offset:
            e += self.offset
        return e


@dataclass(frozen=True)
class ExactSolution:
    """Optimal value in the instance's native convention plus one optimizer."""

    c_opt: float
    argmin_config: tuple[int, ...]
    native: str

    def to_dict(self) -> dict:
        return {"c_opt": self.c_opt, "argmin_config": list(self.argmin_config),
                "native": self.native}

    @classmethod
    def from_dict(cls, d: dict) -> "ExactSolution":
        return cls(c_opt=float(d["c_opt"]),
                   argmin_config=tuple(int(b) for b in d["argmin_config"]),
                   native=d["native"])


def maxcut_to_ising(inst: ProblemInstance) -> IsingModel:
    """Encode so that energy(s) = -cut(s): J_ij = w_ij / 2, offset = -sum(w) / 2."""
    if inst.kind != KIND_MAXCUT:
        raise ContractError(f"expected a MaxCut instance, got {inst.kind}")
    couplings = {(i, j): w / 2.0 for i, j, w in inst.edges if w != 0.0}
    offset = -sum(w for _, _, w in inst.edges) / 2.0
    return IsingModel(n=inst.n, h=np.zeros(inst.n), couplings=couplings, offset=offset)


def qubo_to_ising(inst: ProblemInstance) -> IsingModel:
    """Substitute x_i = (1 - s_i) / 2 into sum_{i<=j} x_i Q_ij x_j, exactly."""
    if inst.kind != KIND_QUBO:
        raise ContractError(f"expected a DenseQubo instance, got {inst.kind}")
    n = inst.n
    q = inst.qubo
    h = np.zeros(n)
    couplings: dict[tuple[int, int], float] = {}
    offset = 0.0
    for i in range(n):
        # Q_ii x_i^2 = Q_ii x_i = Q_ii (1 - s_i) / 2
        offset += q[i, i] / 2.0
        h[i] -= q[i, i] / 2.0
        for j in range(i + 1, n):
            v = q[i, j]
            if v == 0.0:
                continue
            # Q_ij (1 - s_i)(1 - s_j) / 4
            offset += v / 4.0
            h[i] -= v / 4.0
            h[j] -= v / 4.0
            couplings[(i, j)] = couplings.get((i, j), 0.0) + v / 4.0
    return IsingModel(n=n, h=h, couplings=couplings, offset=offset)


def qubo_to_maxcut(inst: ProblemInstance) -> ProblemInstance:
    """Ancilla-node reduction of a dense QUBO to a weighted (n+1)-node MaxCut.

    Going through the field-free Ising form: each bias h_i becomes a coupling
    to an extra node a = n (global spin-flip symmetry makes the restriction
    s_a = +1 lossless), and a coupling J'_ij maps to edge weight 2 J'_ij.
    With W' = sum of all J' the identity  qubo(x) = constant - cut(s)  holds,
    where constant = ising_offset + W'; it is recorded in the instance meta.
    """
    if inst.kind != KIND_QUBO:
        raise ContractError(f"expected a DenseQubo instance, got {inst.kind}")
    model = qubo_to_ising(inst)
    n = inst.n
    edges = []
    total_jprime = 0.0
    for (i, j), v in sorted(model.couplings.items()):
        edges.append((i, j, 2.0 * v))
        total_jprime += v
    for i in range(n):
        if model.h[i] != 0.0:
            edges.append((i, n, 2.0 * model.h[i]))
            total_jprime += model.h[i]
    meta = {
        "seed": inst.meta.get("seed"),
        "reduced_from": inst.id,
        "cut_to_qubo_constant": model.offset + total_jprime,
        "cut_to_qubo_sign": -1,
    }
    return ProblemInstance(id=inst.id + "-as-maxcut", kind=KIND_MAXCUT, n=n + 1,
                           edges=tuple(edges), meta=meta)


def instance_to_ising(inst: ProblemInstance) -> IsingModel:
    if inst.kind == KIND_MAXCUT:
        return maxcut_to_ising(inst)
    return qubo_to_ising(inst)


def cut_value(inst: ProblemInstance, bits) -> float:
    """Cut value of a 0/1 assignment (bit i = side of node i)."""
    if inst.kind != KIND_MAXCUT:
        raise ContractError("cut_value needs a MaxCut instance")
    b = np.asarray(bits)
    return float(sum(w for i, j, w in inst.edges if b[i] != b[j]))


def qubo_value(inst: ProblemInstance, x) -> float:
    if inst.kind != KIND_QUBO:
        raise ContractError("qubo_value needs a DenseQubo instance")
    xv = np.asarray(x, dtype=float)
    return float(xv @ np.triu(inst.qubo) @ xv)


def _lex_key(index: int, n: int) -> int:
    """Integer whose ordering matches lexicographic order of (b_0, ..., b_{n-1})."""
    key = 0
    for i in range(n):
        key = (key << 1) | ((index >> i) & 1)
    return key


def brute_force_solve(model: IsingModel, native: str,
                      cap: int = BRUTE_FORCE_CAP) -> ExactSolution:
    """Exhaustive scan over all 2^n configurations.

    Ties are broken toward the lexicographically smallest bit vector. The
    returned value is in the requested native convention: max cut value
    (= -min energy) or minimum QUBO value (= min energy).
    """
    if native not in (NATIVE_MAXIMIZE_CUT, NATIVE_MINIMIZE_QUBO):
        raise ContractError(f"unknown native convention {native!r}")
    if model.n > cap:
        raise ResourceError(f"n={model.n} exceeds brute-force cap {cap}")
    energies = model.energies_table(include_offset=True)
    e_min = energies.min()
    candidates = np.flatnonzero(energies == e_min)
    best = min((int(c) for c in candidates), key=lambda c: _lex_key(c, model.n))
    bits = tuple((best >> i) & 1 for i in range(model.n))
    c_opt = -e_min if native == NATIVE_MAXIMIZE_CUT else e_min
    return ExactSolution(c_opt=float(c_opt), argmin_config=bits, native=native)


def solve_instance(inst: ProblemInstance, cap: int = BRUTE_FORCE_CAP) -> ExactSolution:
    """Brute-force an instance in its natural optimization direction."""
    if inst.kind == KIND_MAXCUT:
        return brute_force_solve(maxcut_to_ising(inst), NATIVE_MAXIMIZE_CUT, cap=cap)
    return brute_force_solve(qubo_to_ising(inst), NATIVE_MINIMIZE_QUBO, cap=cap)
