"""Ising problem instances, exact solving, and landscape analysis.

Energy convention (dimensionless):

    E(s) = -1/2 * sum_ij J[i,j] s_i s_j - sum_i h[i] s_i

with J symmetric, zero diagonal, and both sums running over all ordered
index pairs.  Instances are normalized so the largest magnitude among all
couplings and fields is 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

BRUTE_FORCE_LIMIT = 24
LANDSCAPE_LIMIT = 16


class InstanceFormatError(ValueError):
    pass


@dataclass
class IsingInstance:
    """Couplings J (N x N, symmetric, zero diagonal) and local fields h (N)."""

    J: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        self.J = np.asarray(self.J, dtype=np.float64)
        self.h = np.asarray(self.h, dtype=np.float64)
        n = self.h.shape[0]
        if self.J.shape != (n, n):
            raise ValueError(f"J has shape {self.J.shape}, expected ({n}, {n})")
        if not np.array_equal(self.J, self.J.T):
            raise ValueError("J must be exactly symmetric")
        if np.any(np.diag(self.J) != 0.0):
            raise ValueError("J must have zero diagonal")

    @property
    def N(self) -> int:
        return self.h.shape[0]


def spin_configuration(s) -> np.ndarray:
    s = np.asarray(s, dtype=np.int64)
    if not np.all(np.abs(s) == 1):
        raise ValueError("spins must be exactly +1 or -1")
    return s


def ising_energy(inst: IsingInstance, s) -> float:
    s = spin_configuration(s)
    if s.shape[0] != inst.N:
        raise ValueError(f"configuration has {s.shape[0]} spins, instance has {inst.N}")
    sf = s.astype(np.float64)
    return float(-0.5 * sf @ inst.J @ sf - inst.h @ sf)


def _all_configurations(n: int) -> np.ndarray:
    """All 2^n spin vectors, row c encoding bit k of c as spin s_{k+1} (+1 for bit 0)."""
    codes = np.arange(2 ** n, dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    return 1 - 2 * bits.astype(np.int64)


def _energies_for(inst: IsingInstance, configs: np.ndarray) -> np.ndarray:
    sf = configs.astype(np.float64)
    return -0.5 * np.einsum("ci,ij,cj->c", sf, inst.J, sf) - sf @ inst.h


def brute_force_solve(inst: IsingInstance) -> tuple[np.ndarray, float]:
    """Exhaustive minimum over all 2^N configurations.

    Ties break toward the lexicographically smallest configuration with
    s_1 = +1 preferred (+1 sorts before -1).
    """
    if inst.N > BRUTE_FORCE_LIMIT:
        raise ValueError(f"N={inst.N} exceeds enumeration bound {BRUTE_FORCE_LIMIT}")
    best_e = np.inf
    best_s = None
    # chunked so N=24 stays within memory
    chunk = 1 << 18
    total = 1 << inst.N
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        bits = (codes[:, None] >> np.arange(inst.N, dtype=np.uint32)[None, :]) & 1
        configs = 1 - 2 * bits.astype(np.int64)
        energies = _energies_for(inst, configs)
        k = int(np.argmin(energies))
        if energies[k] < best_e - 1e-15:
            best_e = float(energies[k])
            best_s = configs[k]
        elif abs(energies[k] - best_e) <= 1e-15:
            # resolve near-ties within the chunk lexicographically
            close = np.nonzero(np.abs(energies - best_e) <= 1e-15)[0]
            for idx in close:
                cand = configs[idx]
                if _lex_before(cand, best_s):
                    best_s = cand.copy()
    return best_s.copy(), best_e


def _lex_before(a: np.ndarray, b: np.ndarray) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return x > y  # +1 preferred over -1
    return False


def ground_states(inst: IsingInstance, atol: float = 1e-12) -> tuple[np.ndarray, float]:
    """All configurations within ``atol`` of the global minimum, plus that minimum."""
    if inst.N > LANDSCAPE_LIMIT:
        raise ValueError(f"N={inst.N} exceeds enumeration bound {LANDSCAPE_LIMIT}")
    configs = _all_configurations(inst.N)
    energies = _energies_for(inst, configs)
    e_min = float(energies.min())
    return configs[energies <= e_min + atol], e_min


def random_instance(n: int, rng_seed: int) -> IsingInstance:
    """Random instance: J (upper triangle) and h uniform on (-1, 1), then all
    entries divided by the largest magnitude among them.

    Draw order is fixed (upper triangle of J row by row, then h) so a seed
    pins the instance exactly.
    """
    if n < 2:
        raise ValueError("need at least 2 spins")
    rng = np.random.default_rng(rng_seed)
    J = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            J[i, j] = J[j, i] = rng.uniform(-1.0, 1.0)
    h = rng.uniform(-1.0, 1.0, size=n)
    scale = max(np.abs(J).max(), np.abs(h).max())
    return IsingInstance(J / scale, h / scale)


def energy_landscape(inst: IsingInstance) -> list[tuple[np.ndarray, int, float]]:
    """(configuration, Hamming distance to the optimum, energy) for all 2^N rows."""
    if inst.N > LANDSCAPE_LIMIT:
        raise ValueError(f"N={inst.N} exceeds enumeration bound {LANDSCAPE_LIMIT}")
    opt, _ = brute_force_solve(inst)
    configs = _all_configurations(inst.N)
    energies = _energies_for(inst, configs)
    dists = np.sum(configs != opt[None, :], axis=1)
    return [(configs[k], int(dists[k]), float(energies[k])) for k in range(configs.shape[0])]


# ---------------------------------------------------------------------------
# Instance file format: JSON document with decimal-string values so shipped
# coefficients stay exactly as printed.
#   {"n": 4, "j_upper": [[1, 2, "0.266654"], ...], "h": ["-0.340697", ...]}
# Indices in j_upper are 1-based.
# ---------------------------------------------------------------------------

def instance_to_document(inst: IsingInstance) -> dict:
    j_upper = []
    for i in range(inst.N):
        for j in range(i + 1, inst.N):
            if inst.J[i, j] != 0.0:
                j_upper.append([i + 1, j + 1, repr(float(inst.J[i, j]))])
    return {
        "n": inst.N,
        "j_upper": j_upper,
        "h": [repr(float(v)) for v in inst.h],
    }


def instance_from_document(doc: dict) -> IsingInstance:
    try:
        n = int(doc["n"])
        J = np.zeros((n, n))
        for i, j, val in doc["j_upper"]:
            i, j = int(i), int(j)
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise InstanceFormatError(f"bad coupling indices ({i}, {j})")
            J[i - 1, j - 1] = J[j - 1, i - 1] = float(val)
        h = np.array([float(v) for v in doc["h"]], dtype=np.float64)
        if h.shape[0] != n:
            raise InstanceFormatError(f"h has {h.shape[0]} entries, expected {n}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"malformed instance document: {exc}") from exc
    return IsingInstance(J, h)


def load_instance(path: str | Path) -> IsingInstance:
    with open(path) as f:
        return instance_from_document(json.load(f))


def save_instance(inst: IsingInstance, path: str | Path):
    with open(path, "w") as f:
        json.dump(instance_to_document(inst), f, indent=2)
        f.write("\n")


def hard_instance() -> IsingInstance:
    """The bundled hard four-spin instance used by the full-scale benchmarks."""
    ref = resources.files("kponet.data").joinpath("hard_instance.json")
    return instance_from_document(json.loads(ref.read_text()))
