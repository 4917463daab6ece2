"""Dense statevector simulation of the depth-p QAOA circuit.

Bit ordering is little-endian: bit i of the amplitude index is qubit i, and
spin s_i = 1 - 2 * bit_i. The cost diagonal (energy of every bitstring,
offset excluded) is computed once per model and reused by phase layers,
expectations and ZZ correlations; the constant offset never enters a phase
and is added once inside ``expectation``.

For unweighted-MaxCut-style models the diagonal takes few distinct values,
so phases are computed on the unique values and gathered, which dominates
the cost of repeated evaluation during angle optimization. ``evolve_many``
runs a batch of angle sets through vectorized layers; the finite-difference
gradient in ``angle_opt`` relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, ParameterError, ResourceError
from .ising import IsingModel

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a soft dependency
    _HAVE_NUMBA = False

SIM_QUBIT_CAP = 24
_UNIQUE_COMPRESSION_MAX = 4096


if _HAVE_NUMBA:
    @njit(cache=True)
    def _evolve_kernel(uniq, inv, gammas, betas, n):
        """JIT evolution of a batch of QAOA circuits on one cost diagonal.

        uniq/inv factor the cost diagonal through its distinct values;
        gammas/betas are (m, p). Returns (m, 2^n) amplitudes.
        """
        m, p = gammas.shape
        dim = 1 << n
        out = np.empty((m, dim), dtype=np.complex128)
        amp0 = 1.0 / np.sqrt(dim)
        for b in range(m):
            state = np.full(dim, amp0 + 0.0j)
            for layer in range(p):
                phase = np.exp(-1j * gammas[b, layer] * uniq)
                for x in range(dim):
                    state[x] *= phase[inv[x]]
                c = np.cos(betas[b, layer])
                s = -1j * np.sin(betas[b, layer])
                for q in range(n):
                    step = 1 << q
                    for base in range(0, dim, 2 * step):
                        for off in range(base, base + step):
                            a0 = state[off]
                            a1 = state[off + step]
                            state[off] = c * a0 + s * a1
                            state[off + step] = s * a0 + c * a1
            out[b] = state
        return out


@dataclass(frozen=True)
class AngleVector:
    """2p QAOA angles in radians; no range restriction."""

    gamma: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        if len(self.gamma) != len(self.beta) or not self.gamma:
            raise ParameterError("gamma and beta must have equal positive length")
        if not all(np.isfinite(self.gamma)) or not all(np.isfinite(self.beta)):
            raise ParameterError("angles must be finite")

    @property
    def p(self) -> int:
        return len(self.gamma)

    def flat(self) -> np.ndarray:
        """Concatenated (gamma_1..gamma_p, beta_1..beta_p)."""
        return np.array(self.gamma + self.beta, dtype=float)

    @classmethod
    def from_flat(cls, x: Sequence[float]) -> "AngleVector":
        x = np.asarray(x, dtype=float)
        if x.size % 2 != 0:
            raise ParameterError("flat angle vector must have even length")
        p = x.size // 2
        return cls(gamma=tuple(x[:p]), beta=tuple(x[p:]))

    def to_dict(self) -> dict:
        return {"gamma": list(self.gamma), "beta": list(self.beta)}

    @classmethod
    def from_dict(cls, d: dict) -> "AngleVector":
        return cls(gamma=tuple(float(g) for g in d["gamma"]),
                   beta=tuple(float(b) for b in d["beta"]))


@dataclass(frozen=True)
class QaoaState:
    n: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


class CostDiagonal:
    """Cached per-model cost diagonal with optional unique-value compression."""

    def __init__(self, model: IsingModel):
        if model.n > SIM_QUBIT_CAP:
            raise ResourceError(f"n={model.n} exceeds simulator cap {SIM_QUBIT_CAP}")
        self.n = model.n
        self.offset = model.offset
        self.energies = model.energies_table(include_offset=False)
        uniq, inv = np.unique(self.energies, return_inverse=True)
        if uniq.size <= _UNIQUE_COMPRESSION_MAX:
            self._uniq = uniq
            self._inv = inv.astype(np.int32)
        else:
            self._uniq = None
            self._inv = None

    def phases(self, gamma: float) -> np.ndarray:
        if self._uniq is not None:
            return np.exp(-1j * gamma * self._uniq)[self._inv]
        return np.exp(-1j * gamma * self.energies)

    def phases_many(self, gammas: np.ndarray) -> np.ndarray:
        """(m, 2^n) phase factors for m gamma values."""
        if self._uniq is not None:
            table = np.exp(-1j * np.outer(gammas, self._uniq))
            return table[:, self._inv]
        return np.exp(-1j * np.outer(gammas, self.energies))

    def kernel_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """(uniq, inv) with energies = uniq[inv], for the JIT kernel."""
        if self._uniq is not None:
            return self._uniq, self._inv
        return self.energies, np.arange(self.energies.size, dtype=np.int32)


def cost_diagonal(model: IsingModel) -> CostDiagonal:
    """Diagonal cached on the model object; models are immutable once built."""
    diag = getattr(model, "_cost_diagonal", None)
    if diag is None:
        diag = CostDiagonal(model)
        object.__setattr__(model, "_cost_diagonal", diag)
    return diag


def _apply_mixer(states: np.ndarray, betas: np.ndarray, n: int) -> np.ndarray:
    """Apply e^{-i beta X} on every qubit; states is (m, 2^n), betas is (m,)."""
    c = np.cos(betas)[:, None, None, None]
    s = (-1j * np.sin(betas))[:, None, None, None]
    m = states.shape[0]
    for q in range(n):
        psi = states.reshape(m, 1 << (n - q - 1), 2, 1 << q)
        a0 = psi[:, :, 0, :].copy()
        a1 = psi[:, :, 1, :]
        psi[:, :, 0, :] = c[:, :, 0, :] * a0 + s[:, :, 0, :] * a1
        psi[:, :, 1, :] = s[:, :, 0, :] * a0 + c[:, :, 0, :] * a1
    return states


def evolve_many(model: IsingModel, angle_sets: Sequence[AngleVector] | np.ndarray,
                diag: CostDiagonal | None = None) -> np.ndarray:
    """Amplitudes (m, 2^n) for a batch of angle sets on one model.

    ``angle_sets`` may be AngleVectors or a flat (m, 2p) array in the
    (gammas, betas) layout of ``AngleVector.flat``.
    """
    if diag is None:
        diag = cost_diagonal(model)
    if isinstance(angle_sets, np.ndarray):
        flat = np.atleast_2d(np.asarray(angle_sets, dtype=float))
    else:
        flat = np.stack([a.flat() for a in angle_sets])
    m, twop = flat.shape
    if twop % 2 != 0 or twop == 0:
        raise ParameterError("angle array must have an even, positive width")
    p = twop // 2
    gammas, betas = flat[:, :p], flat[:, p:]
    if _HAVE_NUMBA:
        uniq, inv = diag.kernel_factors()
        return _evolve_kernel(uniq, inv, np.ascontiguousarray(gammas),
                              np.ascontiguousarray(betas), model.n)
    dim = 1 << model.n
    states = np.full((m, dim), 1.0 / np.sqrt(dim), dtype=np.complex128)
    for layer in range(p):
        states *= diag.phases_many(gammas[:, layer])
        states = _apply_mixer(states, betas[:, layer], model.n)
    return states


def evolve(model: IsingModel, angles: AngleVector,
           diag: CostDiagonal | None = None) -> QaoaState:
    """State after p alternating cost-phase and mixer layers on |+>^n."""
    amps = evolve_many(model, [angles], diag=diag)[0]
    return QaoaState(n=model.n, amplitudes=amps)


def expectation_many(model: IsingModel, amplitudes: np.ndarray,
                     diag: CostDiagonal | None = None) -> np.ndarray:
    if diag is None:
        diag = cost_diagonal(model)
    probs = np.abs(np.atleast_2d(amplitudes)) ** 2
    return probs @ diag.energies + model.offset


def expectation(model: IsingModel, state: QaoaState,
                diag: CostDiagonal | None = None) -> float:
    """<state| H_C |state> including the model offset (Ising convention)."""
    if state.amplitudes.shape != (1 << model.n,):
        raise ContractError("state dimension does not match the model")
    return float(expectation_many(model, state.amplitudes[None, :], diag=diag)[0])


def zz_correlations(state: QaoaState,
                    pairs: Iterable[tuple[int, int]]) -> dict[tuple[int, int], float]:
    """M_ij = <Z_i Z_j> = sum_x |amp_x|^2 (-1)^(x_i xor x_j), each in [-1, 1]."""
    probs = state.probabilities()
    idx = np.arange(probs.size, dtype=np.int64)
    out: dict[tuple[int, int], float] = {}
    for i, j in pairs:
        if not (0 <= i < j < state.n):
            raise ParameterError(f"pair ({i},{j}) out of range for n={state.n}")
        parity = ((idx >> i) ^ (idx >> j)) & 1
        out[(i, j)] = float(probs @ (1.0 - 2.0 * parity))
    return out


def sample_bitstrings(state: QaoaState, shots: int, seed: int) -> np.ndarray:
    """Seeded samples of basis-state indices from |amp|^2 (test utility)."""
    rng = np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    return rng.choice(probs.size, size=shots, p=probs)
