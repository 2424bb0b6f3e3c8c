"""Time-dependent Hamiltonian of the pumped Kerr-oscillator network.

In units hbar = 1, with the Kerr coefficient K as the frequency unit,

    H(t) = sum_i [ K/2 a_i^dag^2 a_i^2 + Delta_i(t) a_i^dag a_i
                   - p(t)/2 (a_i^2 + a_i^dag^2) ]
         + xi(t) [ - sum_ij J_ij a_i^dag a_j
                   - A(t) sum_i h_i (a_i + a_i^dag) ]

with the standard ramps

    p(t)      = p_f sin(pi t / 2T)
    Delta_i(t)= Delta_i^(0) cos(pi t / 2T)
    xi(t)     = xi_f sin(pi t / 2T)
    A(t)      = sqrt(p(t) / K)

so the pump and couplings switch on while the detunings switch off.  The
non-Hermitian variant H - i*kappa*sum_i a_i^dag a_i drives the no-jump
segments of the trajectory solver.

Application is matrix-free: the operator holds per-mode strided views and
never forms the dim x dim matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import FockCutoff, QuantumState
from .ising import IsingInstance


@dataclass
class KpoParameters:
    """Physical settings for one run, all in hbar = K = 1 units."""

    K: float = 1.0
    p_f: float = 4.0
    xi_f: float = 0.25
    delta0: np.ndarray | None = None  # length-N initial detunings, default all K
    T: float = 400.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("K must be positive")
        if self.p_f <= self.K:
            raise ValueError("final pump p_f must exceed K")
        if not 0 < self.xi_f < self.K:
            raise ValueError("final coupling xi_f must lie in (0, K)")
        if self.T <= 0:
            raise ValueError("computation time T must be positive")
        if self.kappa < 0:
            raise ValueError("decay rate kappa must be nonnegative")
        if self.delta0 is not None:
            self.delta0 = np.asarray(self.delta0, dtype=np.float64)
            if np.any(self.delta0 <= -self.K / 2):
                # below -K/2 the two-photon level undercuts the single-photon
                # one and the vacuum-as-first-excited-state construction breaks
                raise ValueError("initial detunings must exceed -K/2")

    def detunings(self, n_modes: int) -> np.ndarray:
        if self.delta0 is None:
            return np.full(n_modes, self.K)
        if self.delta0.shape[0] != n_modes:
            raise ValueError(
                f"delta0 has {self.delta0.shape[0]} entries, expected {n_modes}"
            )
        return self.delta0

    @property
    def alpha_f(self) -> float:
        """Final coherent amplitude sqrt(p_f / K)."""
        return math.sqrt(self.p_f / self.K)


@dataclass(frozen=True)
class SchedulePoint:
    p: float
    delta: np.ndarray
    xi: float
    A: float


def schedule_at(params: KpoParameters, t: float, n_modes: int) -> SchedulePoint:
    """Ramp values at time t in [0, T]."""
    if not 0.0 <= t <= params.T * (1 + 1e-12):
        raise ValueError(f"t={t} outside [0, {params.T}]")
    phase = math.pi * t / (2.0 * params.T)
    p = params.p_f * math.sin(phase)
    delta = params.detunings(n_modes) * math.cos(phase)
    xi = params.xi_f * math.sin(phase)
    A = math.sqrt(p / params.K)
    return SchedulePoint(p=p, delta=delta, xi=xi, A=A)


class KpoNetworkOperator:
    """Matrix-free H(t) acting on flat state vectors.

    Precomputes the static per-basis-state diagonals (Kerr and number
    weights); the time dependence enters only through the four schedule
    scalars, so one instance serves a whole run.
    """

    def __init__(self, inst: IsingInstance, cutoff: FockCutoff = FockCutoff()):
        self.inst = inst
        self.cutoff = cutoff
        self.N = inst.N
        L = cutoff.levels
        self.dim = L ** self.N
        idx = np.arange(self.dim)
        self._digits = np.empty((self.dim, self.N), dtype=np.int64)
        for m in range(self.N):
            self._digits[:, m] = (idx // L ** (self.N - 1 - m)) % L
        ns = self._digits.astype(np.float64)
        self._kerr_diag = 0.5 * (ns * (ns - 1.0)).sum(axis=1)
        self._number_cols = ns  # per-mode photon numbers, shape (dim, N)
        self._pairs = [
            (i, j)
            for i in range(self.N)
            for j in range(i + 1, self.N)
            if inst.J[i, j] != 0.0
        ]
        sq = np.sqrt(np.arange(L + 1, dtype=np.float64))
        self._sq = sq

    def _shaped(self, psi: np.ndarray) -> np.ndarray:
        L = self.cutoff.levels
        return psi.reshape((L,) * self.N)

    def apply(
        self,
        psi: np.ndarray,
        K: float,
        p: float,
        delta: np.ndarray,
        xi: float,
        A: float,
        kappa: float = 0.0,
    ) -> np.ndarray:
        """H psi (plus -i*kappa*sum_i n_i psi when kappa > 0)."""
        if psi.shape != (self.dim,):
            raise ValueError(f"state has shape {psi.shape}, expected ({self.dim},)")
        L = self.cutoff.levels
        sq = self._sq
        diag = K * self._kerr_diag + self._number_cols @ np.asarray(delta)
        if kappa != 0.0:
            diag = diag.astype(np.complex128) - 1j * kappa * self._number_cols.sum(axis=1)
        out = diag * psi
        s = self._shaped(psi)
        o = self._shaped(out)
        ns = np.arange(L, dtype=np.float64)
        sq2 = np.sqrt(ns[2:] * (ns[2:] - 1.0))
        # pump: -(p/2)(a^2 + a^dag^2) per mode
        if p != 0.0:
            for m in range(self.N):
                sm = np.moveaxis(s, m, 0)
                om = np.moveaxis(o, m, 0)
                c = (-0.5 * p) * sq2
                om[:-2] += c.reshape(-1, *([1] * (self.N - 1))) * sm[2:]
                om[2:] += c.reshape(-1, *([1] * (self.N - 1))) * sm[:-2]
        if xi != 0.0:
            # hopping: -xi * J_ij (a_i^dag a_j + a_j^dag a_i)
            for (i, j) in self._pairs:
                c = -xi * self.inst.J[i, j]
                sm = np.moveaxis(s, (i, j), (0, 1))
                om = np.moveaxis(o, (i, j), (0, 1))
                coef = c * sq[1:L].reshape(-1, 1) * sq[1:L].reshape(1, -1)
                coef = coef.reshape(L - 1, L - 1, *([1] * (self.N - 2)))
                om[1:, :-1] += coef * sm[:-1, 1:]
                om[:-1, 1:] += coef * sm[1:, :-1]
            # drive: -xi * A * h_i (a_i + a_i^dag)
            cA = -xi * A
            if cA != 0.0:
                for m in range(self.N):
                    hm = self.inst.h[m]
                    if hm == 0.0:
                        continue
                    sm = np.moveaxis(s, m, 0)
                    om = np.moveaxis(o, m, 0)
                    c = (cA * hm) * sq[1:L]
                    om[:-1] += c.reshape(-1, *([1] * (self.N - 1))) * sm[1:]
                    om[1:] += c.reshape(-1, *([1] * (self.N - 1))) * sm[:-1]
        return out


def apply_hamiltonian(
    inst: IsingInstance,
    params: KpoParameters,
    t: float,
    state: QuantumState,
    op: KpoNetworkOperator | None = None,
) -> QuantumState:
    """H(t)|psi> as an (unnormalized) state."""
    if op is None:
        op = KpoNetworkOperator(inst, state.cutoff)
    pt = schedule_at(params, t, inst.N)
    out = op.apply(state.amplitudes, params.K, pt.p, pt.delta, pt.xi, pt.A)
    return QuantumState(out, state.mode_count, state.cutoff)


def apply_effective_nonhermitian(
    inst: IsingInstance,
    params: KpoParameters,
    t: float,
    state: QuantumState,
    op: KpoNetworkOperator | None = None,
) -> QuantumState:
    """(H(t) - i kappa sum_i a_i^dag a_i)|psi>, the no-jump generator."""
    if op is None:
        op = KpoNetworkOperator(inst, state.cutoff)
    pt = schedule_at(params, t, inst.N)
    out = op.apply(
        state.amplitudes, params.K, pt.p, pt.delta, pt.xi, pt.A, kappa=params.kappa
    )
    return QuantumState(out, state.mode_count, state.cutoff)


def final_hamiltonian_check(
    inst: IsingInstance,
    params: KpoParameters,
    state: QuantumState,
) -> float:
    """<psi|H(T)|psi> for a normalized state.

    On coherent-product trial states with amplitudes s_i * alpha_f, energy
    differences between spin patterns reduce to 2*xi_f*alpha_f^2 times the
    Ising energy difference (up to truncation error), which is what makes
    the final state encode the optimization problem.
    """
    h_psi = apply_hamiltonian(inst, params, params.T, state)
    return float(np.real(state.inner(h_psi)))


def coherent_product_state(
    inst_n: int, alphas, cutoff: FockCutoff = FockCutoff()
) -> QuantumState:
    """Truncated tensor product of coherent states (normalized after truncation)."""
    alphas = np.asarray(alphas, dtype=np.complex128)
    if alphas.shape[0] != inst_n:
        raise ValueError("one amplitude per mode required")
    L = cutoff.levels
    ns = np.arange(L)
    lognf = np.cumsum(np.log(np.maximum(ns, 1)))
    vec = None
    for a in alphas:
        if a == 0:
            single = np.zeros(L, dtype=np.complex128)
            single[0] = 1.0
        else:
            single = np.exp(ns * np.log(a) - 0.5 * lognf)
        single = single / np.linalg.norm(single)
        vec = single if vec is None else np.kron(vec, single)
    return QuantumState(vec, inst_n, cutoff)
