"""Truncated Fock-space states and matrix-free bosonic operators.

A network of N oscillator modes is represented on the tensor product of
per-mode Fock spaces truncated at ``levels`` states (photon numbers
0 .. levels-1).  States are flat complex vectors of length ``levels**N``.

Index convention (fixed): the flat basis index decomposes mixed-radix with
mode 1 as the slowest-varying digit,

    index = n_1 * levels**(N-1) + n_2 * levels**(N-2) + ... + n_N

so that ``amplitudes.reshape((levels,)*N)[n1, n2, ..., nN]`` is the
amplitude of the photon-number state ``|n1, n2, ..., nN>``.

Operators act matrix-free through strided views; nothing of size
``dim x dim`` is ever materialized here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Operators accepted by :func:`apply_mode_operator`.
MODE_OPERATORS = ("a", "adag", "n", "a2", "adag2", "kerr", "x")


@dataclass(frozen=True)
class FockCutoff:
    """Number of retained Fock states per mode.

    The default keeps photon numbers 0..14, the truncation used for all
    full-scale runs in this package.
    """

    levels: int = 15

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError(f"cutoff needs at least 2 levels, got {self.levels}")


@dataclass
class QuantumState:
    """Complex amplitude vector over the truncated tensor-product space."""

    amplitudes: np.ndarray
    mode_count: int
    cutoff: FockCutoff = field(default_factory=FockCutoff)

    def __post_init__(self):
        dim = self.cutoff.levels ** self.mode_count
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (dim,):
            raise ValueError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"expected ({dim},) for {self.mode_count} modes at "
                f"{self.cutoff.levels} levels"
            )

    @property
    def dim(self) -> int:
        return self.cutoff.levels ** self.mode_count

    def tensor(self) -> np.ndarray:
        """View of the amplitudes shaped (levels, ..., levels), one axis per mode."""
        L = self.cutoff.levels
        return self.amplitudes.reshape((L,) * self.mode_count)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuantumState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return QuantumState(self.amplitudes / n, self.mode_count, self.cutoff)

    def inner(self, other: "QuantumState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def copy(self) -> "QuantumState":
        return QuantumState(self.amplitudes.copy(), self.mode_count, self.cutoff)


def vacuum_state(mode_count: int, cutoff: FockCutoff = FockCutoff()) -> QuantumState:
    """All modes empty; the adiabatic protocols all start here or one photon up."""
    if mode_count < 1:
        raise ValueError("need at least one mode")
    amps = np.zeros(cutoff.levels ** mode_count, dtype=np.complex128)
    amps[0] = 1.0
    return QuantumState(amps, mode_count, cutoff)


def single_photon_state(mode_count: int, mode: int, cutoff: FockCutoff = FockCutoff()) -> QuantumState:
    """One photon in ``mode`` (1-based), all other modes empty."""
    if not 1 <= mode <= mode_count:
        raise ValueError(f"mode {mode} out of range 1..{mode_count}")
    amps = np.zeros(cutoff.levels ** mode_count, dtype=np.complex128)
    amps[cutoff.levels ** (mode_count - mode)] = 1.0
    return QuantumState(amps, mode_count, cutoff)


def _mode_axis(state: QuantumState, mode: int) -> int:
    if not 1 <= mode <= state.mode_count:
        raise ValueError(f"mode {mode} out of range 1..{state.mode_count}")
    return mode - 1


def apply_mode_operator(state: QuantumState, mode: int, op: str) -> QuantumState:
    """Apply a single-mode operator along one tensor axis.

    ``op`` is one of ``a`` (annihilation), ``adag`` (creation), ``n``
    (number, a^dag a), ``a2``, ``adag2``, ``kerr`` (a^dag^2 a^2) or ``x``
    (a + a^dag).  The result is generally unnormalized; amplitude shifted
    past the cutoff is discarded silently.
    """
    if op not in MODE_OPERATORS:
        raise ValueError(f"unknown operator {op!r}, expected one of {MODE_OPERATORS}")
    axis = _mode_axis(state, mode)
    L = state.cutoff.levels
    src = state.tensor()
    out = np.zeros_like(src)
    # move the acted-on axis to the front so slices below read naturally
    s = np.moveaxis(src, axis, 0)
    o = np.moveaxis(out, axis, 0)
    ns = np.arange(L, dtype=np.float64)
    if op == "a":
        # a|n> = sqrt(n)|n-1>
        o[:-1] = np.sqrt(ns[1:]).reshape(-1, *([1] * (s.ndim - 1))) * s[1:]
    elif op == "adag":
        o[1:] = np.sqrt(ns[1:]).reshape(-1, *([1] * (s.ndim - 1))) * s[:-1]
    elif op == "n":
        o[:] = ns.reshape(-1, *([1] * (s.ndim - 1))) * s
    elif op == "a2":
        coef = np.sqrt(ns[2:] * (ns[2:] - 1.0))
        o[:-2] = coef.reshape(-1, *([1] * (s.ndim - 1))) * s[2:]
    elif op == "adag2":
        coef = np.sqrt(ns[2:] * (ns[2:] - 1.0))
        o[2:] = coef.reshape(-1, *([1] * (s.ndim - 1))) * s[:-2]
    elif op == "kerr":
        o[:] = (ns * (ns - 1.0)).reshape(-1, *([1] * (s.ndim - 1))) * s
    elif op == "x":
        o[:-1] = np.sqrt(ns[1:]).reshape(-1, *([1] * (s.ndim - 1))) * s[1:]
        o[1:] += np.sqrt(ns[1:]).reshape(-1, *([1] * (s.ndim - 1))) * s[:-1]
    return QuantumState(out.reshape(-1), state.mode_count, state.cutoff)


def apply_hopping(state: QuantumState, i: int, j: int) -> QuantumState:
    """Apply a_i^dag a_j (modes 1-based, i != j)."""
    if i == j:
        raise ValueError("hopping requires distinct modes (diagonal couplings are zero)")
    ai = _mode_axis(state, i)
    aj = _mode_axis(state, j)
    L = state.cutoff.levels
    src = state.tensor()
    out = np.zeros_like(src)
    ns = np.arange(L, dtype=np.float64)
    # bring (i, j) to the two leading axes
    s = np.moveaxis(src, (ai, aj), (0, 1))
    o = np.moveaxis(out, (ai, aj), (0, 1))
    ci = np.sqrt(ns[1:])  # for a_i^dag: sqrt(n_i) landing on n_i
    cj = np.sqrt(ns[1:])  # for a_j: sqrt(n_j) leaving n_j
    coef = ci.reshape(-1, 1) * cj.reshape(1, -1)
    o[1:, :-1] = coef.reshape(L - 1, L - 1, *([1] * (s.ndim - 2))) * s[:-1, 1:]
    return QuantumState(out.reshape(-1), state.mode_count, state.cutoff)


def mode_occupations(state: QuantumState) -> np.ndarray:
    """Per-mode expectation <a_m^dag a_m> (length N, 1-based mode order)."""
    L = state.cutoff.levels
    p = np.abs(state.tensor()) ** 2
    ns = np.arange(L, dtype=np.float64)
    occ = np.empty(state.mode_count)
    for m in range(state.mode_count):
        marg = np.moveaxis(p, m, 0).reshape(L, -1).sum(axis=1)
        occ[m] = float(marg @ ns)
    return occ


def top_level_populations(state: QuantumState) -> np.ndarray:
    """Population of the highest retained Fock level, per mode.

    This is the truncation-leakage monitor: on an adequately truncated run
    it stays small (below 1e-4 for the schedules used here).
    """
    L = state.cutoff.levels
    p = np.abs(state.tensor()) ** 2
    pops = np.empty(state.mode_count)
    for m in range(state.mode_count):
        pops[m] = float(np.moveaxis(p, m, 0)[L - 1].sum())
    return pops


def photon_parity(state: QuantumState) -> float:
    """Expectation of the global parity (-1)^(total photon number)."""
    L = state.cutoff.levels
    N = state.mode_count
    idx = np.arange(state.dim)
    total = np.zeros(state.dim, dtype=np.int64)
    for m in range(N):
        total += (idx // L ** (N - 1 - m)) % L
    sign = np.where(total % 2 == 0, 1.0, -1.0)
    return float(np.sum(sign * np.abs(state.amplitudes) ** 2))
