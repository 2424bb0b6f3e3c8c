"""Map final oscillator states to spin statistics.

The computational basis at the end of a run is the pair of coherent
branches with amplitudes +alpha_f and -alpha_f along the real axis, so a
spin is read out as the sign of the x quadrature, x = (a + a^dag)/sqrt(2).
The per-mode projector onto x > 0 is assembled once per cutoff from
harmonic-oscillator eigenfunctions:

    P(+)_mn = integral_0^inf psi_m(x) psi_n(x) dx
    P(-)    = 1 - P(+)

Exact structure used to validate the quadrature: diagonal entries are 1/2,
same-parity off-diagonal entries vanish, and P_01 = 1/sqrt(2*pi).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import FockCutoff, QuantumState
from .ising import IsingInstance, ground_states, ising_energy

_ORTHO_TOL = 1e-9


@dataclass
class SignProjector:
    """Fock-basis matrix of the projector onto the positive x half-line."""

    plus_matrix: np.ndarray

    @property
    def levels(self) -> int:
        return self.plus_matrix.shape[0]

    def minus_matrix(self) -> np.ndarray:
        return np.eye(self.levels) - self.plus_matrix

    def idempotency_residual(self) -> float:
        """|P^2 - P|; nonzero only through the Fock truncation."""
        P = self.plus_matrix
        return float(np.linalg.norm(P @ P - P, 2))


def _hermite_functions(levels: int, x: np.ndarray) -> np.ndarray:
    """psi_n(x) for n < levels, rows indexed by n (recurrence, stable)."""
    out = np.empty((levels, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if levels > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(2, levels):
        out[n] = np.sqrt(2.0 / n) * x * out[n - 1] - np.sqrt((n - 1) / n) * out[n - 2]
    return out


@lru_cache(maxsize=8)
def _projector_matrix(levels: int) -> np.ndarray:
    # Gauss-Legendre on [0, R]; the integrand decays like exp(-x^2), and the
    # highest retained eigenfunction turns over near sqrt(2*levels)
    R = np.sqrt(2.0 * levels) + 8.0
    nodes, weights = np.polynomial.legendre.leggauss(80 + 12 * levels)
    x = 0.5 * R * (nodes + 1.0)
    w = 0.5 * R * weights
    psi = _hermite_functions(levels, x)
    P = (psi * w) @ psi.T
    # enforce the exact symmetries the quadrature only approximates
    P = 0.5 * (P + P.T)
    np.fill_diagonal(P, 0.5)
    n = np.arange(levels)
    same_parity = (n[:, None] - n[None, :]) % 2 == 0
    P[same_parity & (n[:, None] != n[None, :])] = 0.0
    return P


def build_sign_projector(cutoff: FockCutoff = FockCutoff()) -> SignProjector:
    return SignProjector(plus_matrix=_projector_matrix(cutoff.levels).copy())


def all_sign_patterns(n: int) -> np.ndarray:
    """All 2^n patterns; row c has spin k = +1 when bit k of c is 0."""
    codes = np.arange(2 ** n, dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1
    return 1 - 2 * bits.astype(np.int64)


def configuration_probabilities(
    state: QuantumState, proj: SignProjector | None = None
) -> dict[tuple[int, ...], float]:
    """P(s) = <psi| prod_i P(s_i) |psi> over all sign patterns.

    The patterns partition unity exactly (P(-) is defined as 1 - P(+)), so
    the probabilities sum to 1 for a normalized state; tiny negative values
    from the truncated projector are clipped.
    """
    if proj is None:
        proj = build_sign_projector(state.cutoff)
    nrm = state.norm()
    if abs(nrm - 1.0) > 1e-6:
        raise ValueError(f"state norm {nrm} too far from 1 for readout")
    N = state.mode_count
    Pp = proj.plus_matrix
    Pm = proj.minus_matrix()
    t = state.tensor()
    # split each mode axis into the two sign branches on the ket, then
    # contract with the bra; the branches partition unity exactly
    kets = [t]
    for m in range(N):
        branched = []
        for k in kets:
            for mat in (Pp, Pm):
                kb = np.tensordot(mat, k, axes=([1], [m]))
                branched.append(np.moveaxis(kb, 0, m))
        kets = branched
    bra = t.conj()
    out: dict[tuple[int, ...], float] = {}
    for idx, k in enumerate(kets):
        # branch order: mode 1 is the most significant bit, bit 0 means "+"
        signs = tuple(1 - 2 * ((idx >> (N - 1 - m)) & 1) for m in range(N))
        out[signs] = float(np.real(np.sum(bra * k)))
    total = sum(out.values())
    if abs(total - nrm ** 2) > _ORTHO_TOL:
        raise ValueError(
            f"readout probabilities sum to {total}, expected {nrm ** 2}"
        )
    clipped = {s: max(v, 0.0) for s, v in out.items()}
    scale = sum(clipped.values())
    return {s: v / scale for s, v in clipped.items()}


@dataclass
class RunMetrics:
    """Readout statistics of one run (or a trajectory average)."""

    config_probs: dict[tuple[int, ...], float]
    failure_probability: float
    residual_energy: float
    n_traj: int = 1
    failure_std_error: float = 0.0

    @property
    def success_probability(self) -> float:
        return 1.0 - self.failure_probability


def metrics_from_probabilities(
    config_probs: dict[tuple[int, ...], float],
    inst: IsingInstance,
    n_traj: int = 1,
    failure_std_error: float = 0.0,
) -> RunMetrics:
    optima, e_min = ground_states(inst)
    opt_set = {tuple(int(v) for v in s) for s in optima}
    p_success = sum(p for s, p in config_probs.items() if s in opt_set)
    mean_e = sum(p * ising_energy(inst, np.array(s)) for s, p in config_probs.items())
    residual = mean_e - e_min
    if residual < -1e-9:
        raise ValueError(f"negative residual energy {residual}")
    return RunMetrics(
        config_probs=config_probs,
        failure_probability=min(max(1.0 - p_success, 0.0), 1.0),
        residual_energy=max(residual, 0.0),
        n_traj=n_traj,
        failure_std_error=failure_std_error,
    )


def compute_metrics(
    state_or_states: QuantumState | list[QuantumState],
    inst: IsingInstance,
    proj: SignProjector | None = None,
) -> RunMetrics:
    """Metrics for one state, or the trajectory mean over an ensemble.

    Averaging the per-trajectory probability tables and averaging the
    per-trajectory metrics are the same thing (everything is linear in the
    table); the standard error reported for ensembles is the one of the
    per-trajectory failure probabilities.
    """
    states = (
        [state_or_states]
        if isinstance(state_or_states, QuantumState)
        else list(state_or_states)
    )
    if not states:
        raise ValueError("no states to read out")
    if proj is None:
        proj = build_sign_projector(states[0].cutoff)
    tables = [configuration_probabilities(s, proj) for s in states]
    mean = {s: float(np.mean([t[s] for t in tables])) for s in tables[0]}
    per_run = [metrics_from_probabilities(t, inst) for t in tables]
    fails = np.array([m.failure_probability for m in per_run])
    se = float(fails.std(ddof=1) / np.sqrt(len(fails))) if len(fails) > 1 else 0.0
    return metrics_from_probabilities(mean, inst, n_traj=len(states), failure_std_error=se)
