"""Instantaneous spectra of the network Hamiltonian along the ramp.

The full matrix (levels^N square) is far too large to diagonalize, so the
calculation follows the low-energy product-basis reduction: diagonalize
each mode's single-oscillator term at the instantaneous (Delta_i(t), p(t)),
keep the N_e lowest eigenvectors per mode, and represent the full H(t) in
the product of those subspaces.  With all basis vectors retained this is
exact; with N_e = 6 the low-lying levels are converged to well below the
gap scales of interest while the matrix stays a manageable N_e^N.

Level continuity across the sweep (which curve the evolving state rides)
is resolved by maximal eigenvector overlap between adjacent grid points,
with the per-mode basis rotations folded into the overlap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .fock import FockCutoff
from .hamiltonian import KpoParameters, schedule_at
from .ising import IsingInstance

DEFAULT_NE = 6
DEFAULT_GRID_POINTS = 201


def single_kpo_diagonalize(
    K: float, delta: float, p: float, cutoff: FockCutoff = FockCutoff()
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of (K/2) a^dag^2 a^2 + delta a^dag a - (p/2)(a^2 + a^dag^2).

    Returns ascending eigenvalues and the matching eigenvector columns.
    """
    L = cutoff.levels
    n = np.arange(L, dtype=np.float64)
    H = np.diag(0.5 * K * n * (n - 1.0) + delta * n)
    c = np.sqrt(n[2:] * (n[2:] - 1.0))
    H -= 0.5 * p * (np.diag(c, 2) + np.diag(c, -2))
    vals, vecs = np.linalg.eigh(H)
    return vals, vecs


@dataclass
class ReducedBasis:
    """Per-mode low-energy eigenbases at one schedule point."""

    vectors: list[np.ndarray]  # (levels, n_e) per mode
    energies: list[np.ndarray]  # (n_e,) per mode, ascending
    n_e: int

    @property
    def n_modes(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return self.n_e ** self.n_modes


def build_reduced_basis(
    K: float,
    delta: np.ndarray,
    p: float,
    cutoff: FockCutoff = FockCutoff(),
    n_e: int = DEFAULT_NE,
) -> ReducedBasis:
    if not 1 <= n_e <= cutoff.levels:
        raise ValueError(f"n_e must be in 1..{cutoff.levels}")
    vecs, vals = [], []
    for d in np.asarray(delta, dtype=np.float64):
        v, w = single_kpo_diagonalize(K, d, p, cutoff)
        vals.append(v[:n_e].copy())
        vecs.append(w[:, :n_e].copy())
    return ReducedBasis(vectors=vecs, energies=vals, n_e=n_e)


def _kron_chain(mats) -> np.ndarray:
    out = np.array([[1.0]])
    for m in mats:
        out = np.kron(out, m)
    return out


def reduced_hamiltonian(
    inst: IsingInstance,
    xi: float,
    A: float,
    basis: ReducedBasis,
    cutoff: FockCutoff = FockCutoff(),
) -> np.ndarray:
    """Project H(t) onto the product basis built at the same schedule point.

    The single-mode parts are diagonal there by construction; hopping and
    drive transform through the per-mode eigenvector matrices.
    """
    if basis.n_modes != inst.N:
        raise ValueError("basis mode count does not match the instance")
    L = cutoff.levels
    ne = basis.n_e
    a = np.diag(np.sqrt(np.arange(1, L, dtype=np.float64)), 1)
    a_red = [V.T @ a @ V for V in basis.vectors]
    x_red = [V.T @ (a + a.T) @ V for V in basis.vectors]
    eye = np.eye(ne)

    H = np.zeros((basis.dim, basis.dim))
    for m in range(inst.N):
        H += _kron_chain([np.diag(basis.energies[k]) if k == m else eye
                          for k in range(inst.N)])
    if xi != 0.0:
        for i in range(inst.N):
            for j in range(inst.N):
                if i != j and inst.J[i, j] != 0.0:
                    H += -xi * inst.J[i, j] * _kron_chain(
                        [a_red[k].T if k == i else (a_red[k] if k == j else eye)
                         for k in range(inst.N)]
                    )
        for m in range(inst.N):
            if inst.h[m] != 0.0:
                H += (-xi * A * inst.h[m]) * _kron_chain(
                    [x_red[k] if k == m else eye for k in range(inst.N)]
                )
    return H


@dataclass
class SpectrumTrace:
    ts: np.ndarray
    ps: np.ndarray
    gaps: np.ndarray  # (n_grid, m) excitation energies E_k - E_0
    tracked_level: np.ndarray  # adiabatic continuation of the initial state
    min_gap: float
    min_gap_t: float
    min_gap_p: float

    def rows(self):
        for k in range(self.ts.size):
            yield (self.ts[k], self.ps[k], *self.gaps[k], int(self.tracked_level[k]))


def _product_state_coefficients(basis: ReducedBasis, occupations) -> np.ndarray:
    """Photon-number product state expressed in the reduced product basis."""
    vec = np.array([1.0])
    for V, n in zip(basis.vectors, occupations):
        vec = np.kron(vec, V[n, :])
    return vec


def trace_spectrum(
    inst: IsingInstance,
    params: KpoParameters,
    grid: np.ndarray | None = None,
    m: int = 3,
    n_e: int = DEFAULT_NE,
    cutoff: FockCutoff = FockCutoff(),
    initial_occupations=None,
) -> SpectrumTrace:
    """Lowest-m excitation energies along the ramp plus level tracking.

    ``initial_occupations`` (per-mode photon numbers, default all zero)
    seeds the adiabatic-continuation pointer at t=0.
    """
    if grid is None:
        grid = np.linspace(0.0, params.T, DEFAULT_GRID_POINTS)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("empty spectrum grid")
    if initial_occupations is None:
        initial_occupations = [0] * inst.N
    n_keep = max(m + 3, 6)

    ts, ps, gap_rows, tracked = [], [], [], []
    prev_basis: ReducedBasis | None = None
    prev_vec: np.ndarray | None = None
    min_gap, min_t, min_p = np.inf, 0.0, 0.0
    for t in grid:
        pt = schedule_at(params, t, inst.N)
        basis = build_reduced_basis(params.K, pt.delta, pt.p, cutoff, n_e)
        H = reduced_hamiltonian(inst, pt.xi, pt.A, basis, cutoff)
        hi = min(n_keep, H.shape[0]) - 1
        vals, vecs = scipy.linalg.eigh(H, subset_by_index=[0, hi])
        gaps = vals[1:m + 1] - vals[0]
        ts.append(t)
        ps.append(pt.p)
        gap_rows.append(gaps)

        if prev_vec is None:
            target = _product_state_coefficients(basis, initial_occupations)
        else:
            target = _map_between_bases(prev_vec, prev_basis, basis)
        ov = np.abs(vecs.T @ target)
        idx = int(np.argmax(ov))
        tracked.append(idx)
        prev_vec = vecs[:, idx]
        prev_basis = basis

        if 0.0 < t < params.T and gaps[0] < min_gap:
            min_gap, min_t, min_p = float(gaps[0]), float(t), float(pt.p)
    return SpectrumTrace(
        ts=np.array(ts),
        ps=np.array(ps),
        gaps=np.array(gap_rows),
        tracked_level=np.array(tracked),
        min_gap=min_gap,
        min_gap_t=min_t,
        min_gap_p=min_p,
    )


def _map_between_bases(vec: np.ndarray, old: ReducedBasis, new: ReducedBasis) -> np.ndarray:
    """Re-express reduced-basis coefficients after the per-mode bases moved."""
    maps = [Vo.T @ Vn for Vo, Vn in zip(old.vectors, new.vectors)]
    ne = old.n_e
    t = vec.reshape((ne,) * old.n_modes)
    for ax, M in enumerate(maps):
        t = np.tensordot(M.T, t, axes=([1], [ax]))
        t = np.moveaxis(t, 0, ax)
    return t.reshape(-1)
