"""Time integration: closed-system evolution, quantum-jump trajectories,
and a dense master-equation reference solver for small systems.

All integrators use the classic fourth-order Runge-Kutta scheme at a fixed
step (default 1/500 in units of 1/K); the step count is the rounded-down
integer part of T/dt with an explicit final partial step.  Dissipation is
unraveled with the norm-threshold jump method: integrate the non-Hermitian
equation, jump when the squared norm crosses a pre-drawn uniform variate,
pick the decaying mode proportionally to its occupation, apply its
annihilation operator, renormalize, redraw.

The density-matrix solver exists purely as a validation oracle: it
materializes dense operators and is guarded to small total dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import BatchEvolver, ColumnSpec, NumericalError
from .fock import FockCutoff, QuantumState
from .hamiltonian import KpoParameters, schedule_at
from .ising import IsingInstance

DENSE_DIM_LIMIT = 4096


@dataclass
class IntegratorConfig:
    """Fixed-step RK4 settings."""

    dt: float = 1.0 / 500.0
    method: str = "rk4"  # the only implemented scheme; kept for config echo
    renormalize_each_step: bool = True
    precision: str = "double"  # "double" | "single"; ensembles may trade down
    batch_width: int = 16

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.method != "rk4":
            raise ValueError("only the fixed-step rk4 scheme is implemented")
        if self.precision not in ("double", "single"):
            raise ValueError("precision must be 'double' or 'single'")

    @property
    def dtype(self):
        return np.float64 if self.precision == "double" else np.float32


@dataclass
class TrajectoryRecord:
    rng_seed: int | None
    jump_times: list[tuple[float, int]]  # (time, mode 1-based), increasing times
    final_state: QuantumState
    max_norm_drift: float = 0.0
    max_top_level_population: float = 0.0


@dataclass
class EnsembleStats:
    """Per-trajectory spread of the headline numbers."""

    n_traj: int
    success_mean: float
    success_std_error: float
    residual_mean: float
    residual_std_error: float
    mean_jumps: float


@dataclass
class EnsembleResult:
    records: list[TrajectoryRecord]
    metrics: "RunMetrics"
    stats: EnsembleStats


def _evolve_columns(
    columns: list[ColumnSpec],
    params: KpoParameters,
    cutoff: FockCutoff,
    cfg: IntegratorConfig,
    renorm_flags=None,
    observe_every: int = 0,
):
    ev = BatchEvolver(
        columns,
        K=params.K,
        p_f=params.p_f,
        xi_f=params.xi_f,
        T=params.T,
        dt=cfg.dt,
        cutoff=cutoff,
        dtype=cfg.dtype,
        renormalize_each_step=(
            cfg.renormalize_each_step if renorm_flags is None else renorm_flags
        ),
        observe_every=observe_every,
    )
    return ev.run()


def evolve_schrodinger(
    inst: IsingInstance,
    params: KpoParameters,
    initial: QuantumState,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> TrajectoryRecord:
    """Closed-system evolution from t=0 to t=T; requires kappa = 0."""
    if params.kappa != 0.0:
        raise ValueError("evolve_schrodinger requires kappa = 0")
    col = ColumnSpec(
        inst=inst,
        delta0=params.detunings(inst.N),
        initial=initial.amplitudes,
        kappa=0.0,
    )
    res = _evolve_columns([col], params, initial.cutoff, cfg)
    c = res.columns[0]
    return TrajectoryRecord(
        rng_seed=None,
        jump_times=[],
        final_state=QuantumState(c.final_state, initial.mode_count, initial.cutoff),
        max_norm_drift=c.max_norm_drift,
        max_top_level_population=c.max_top_level_population,
    )


def evolve_quantum_jump(
    inst: IsingInstance,
    params: KpoParameters,
    initial: QuantumState,
    cfg: IntegratorConfig = IntegratorConfig(),
    seed: int | np.random.SeedSequence = 0,
) -> TrajectoryRecord:
    """One stochastic trajectory of the dissipative evolution."""
    col = ColumnSpec(
        inst=inst,
        delta0=params.detunings(inst.N),
        initial=initial.amplitudes,
        kappa=params.kappa,
        seed=seed if params.kappa > 0 else None,
    )
    res = _evolve_columns([col], params, initial.cutoff, cfg)
    c = res.columns[0]
    return TrajectoryRecord(
        rng_seed=seed if isinstance(seed, int) else None,
        jump_times=c.jumps,
        final_state=QuantumState(c.final_state, initial.mode_count, initial.cutoff),
        max_norm_drift=c.max_norm_drift,
        max_top_level_population=c.max_top_level_population,
    )


def derive_trajectory_seeds(master_seed: int, n_traj: int) -> list[int]:
    """Deterministic per-trajectory seeds from a master seed."""
    state = np.random.SeedSequence(master_seed).generate_state(n_traj, np.uint64)
    return [int(v) for v in state]


def run_trajectory_ensemble(
    inst: IsingInstance,
    params: KpoParameters,
    initial: QuantumState,
    cfg: IntegratorConfig = IntegratorConfig(),
    n_traj: int = 1,
    seed: int = 0,
    collapse_deterministic: bool = True,
) -> EnsembleResult:
    """n_traj independent trajectories with seeds derived from ``seed``.

    With kappa = 0 the trajectories are all the same deterministic
    Schrodinger evolution (no jump can trigger), so by default a single
    representative run stands in for the whole ensemble; the reported
    spread is exactly zero either way.
    """
    from .readout import compute_metrics  # local import to keep modules acyclic

    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if params.kappa == 0.0 and collapse_deterministic:
        rec = evolve_schrodinger(inst, params, initial, cfg)
        metrics = compute_metrics(rec.final_state, inst)
        metrics.n_traj = n_traj
        stats = EnsembleStats(
            n_traj=n_traj,
            success_mean=metrics.success_probability,
            success_std_error=0.0,
            residual_mean=metrics.residual_energy,
            residual_std_error=0.0,
            mean_jumps=0.0,
        )
        return EnsembleResult(records=[rec], metrics=metrics, stats=stats)

    seeds = derive_trajectory_seeds(seed, n_traj)
    records: list[TrajectoryRecord] = []
    width = max(cfg.batch_width, 1)
    for start in range(0, n_traj, width):
        cols = [
            ColumnSpec(
                inst=inst,
                delta0=params.detunings(inst.N),
                initial=initial.amplitudes,
                kappa=params.kappa,
                seed=s if params.kappa > 0 else None,
            )
            for s in seeds[start:start + width]
        ]
        res = _evolve_columns(cols, params, initial.cutoff, cfg)
        for k, c in enumerate(res.columns):
            records.append(TrajectoryRecord(
                rng_seed=seeds[start + k],
                jump_times=c.jumps,
                final_state=QuantumState(
                    c.final_state, initial.mode_count, initial.cutoff
                ),
                max_norm_drift=c.max_norm_drift,
                max_top_level_population=c.max_top_level_population,
            ))
    return _summarize_ensemble(records, inst, n_traj)


def _summarize_ensemble(
    records: list[TrajectoryRecord], inst: IsingInstance, n_traj: int
) -> EnsembleResult:
    from .readout import compute_metrics

    metrics = compute_metrics([r.final_state for r in records], inst)
    per = [compute_metrics(r.final_state, inst) for r in records]
    succ = np.array([m.success_probability for m in per])
    resid = np.array([m.residual_energy for m in per])
    n = len(records)
    se = lambda v: float(v.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    stats = EnsembleStats(
        n_traj=n,
        success_mean=float(succ.mean()),
        success_std_error=se(succ),
        residual_mean=float(resid.mean()),
        residual_std_error=se(resid),
        mean_jumps=float(np.mean([len(r.jump_times) for r in records])),
    )
    return EnsembleResult(records=records, metrics=metrics, stats=stats)


# ---------------------------------------------------------------------------
# dense reference solver
# ---------------------------------------------------------------------------

def dense_mode_operators(cutoff: FockCutoff):
    L = cutoff.levels
    a = np.diag(np.sqrt(np.arange(1, L, dtype=np.float64)), 1)
    return a, a.T.copy()


def dense_hamiltonian(
    inst: IsingInstance,
    params: KpoParameters,
    t: float,
    cutoff: FockCutoff,
) -> np.ndarray:
    """Full H(t) as a dense matrix; oracle use only (dimension-guarded)."""
    L = cutoff.levels
    N = inst.N
    dim = L ** N
    if dim > DENSE_DIM_LIMIT:
        raise ValueError(f"dense construction refused at dim {dim} > {DENSE_DIM_LIMIT}")
    pt = schedule_at(params, t, N)
    a, ad = dense_mode_operators(cutoff)
    I = np.eye(L)

    def emb(mat, m):
        out = np.array([[1.0]])
        for k in range(N):
            out = np.kron(out, mat if k == m else I)
        return out

    H = np.zeros((dim, dim))
    for m in range(N):
        single = (
            0.5 * params.K * (ad @ ad @ a @ a)
            + pt.delta[m] * (ad @ a)
            - 0.5 * pt.p * (a @ a + ad @ ad)
            - pt.xi * pt.A * inst.h[m] * (a + ad)
        )
        H += emb(single, m)
    for i in range(N):
        for j in range(N):
            if i != j and inst.J[i, j] != 0.0:
                out = np.array([[1.0]])
                for k in range(N):
                    out = np.kron(out, ad if k == i else (a if k == j else I))
                H += -pt.xi * inst.J[i, j] * out
    return H


def dense_master_evolve(
    inst: IsingInstance,
    params: KpoParameters,
    initial_density: np.ndarray,
    cfg: IntegratorConfig = IntegratorConfig(),
    cutoff: FockCutoff = FockCutoff(),
    t_end: float | None = None,
) -> np.ndarray:
    """RK4 on the Lindblad equation with per-mode decay at rate kappa.

    Convention fixed by the jump form kappa*(2 a rho a^dag - a^dag a rho
    - rho a^dag a): mode occupations decay at rate 2*kappa.
    """
    L = cutoff.levels
    N = inst.N
    dim = L ** N
    if dim > DENSE_DIM_LIMIT:
        raise ValueError(f"dense solver refused at dim {dim} > {DENSE_DIM_LIMIT}")
    rho = np.asarray(initial_density, dtype=np.complex128).copy()
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape}, expected ({dim},{dim})")
    tr0 = np.trace(rho).real
    if abs(tr0 - 1.0) > 1e-9:
        raise ValueError("initial density matrix must have unit trace")

    a, ad = dense_mode_operators(cutoff)
    I = np.eye(L)
    a_ops = []
    for m in range(N):
        out = np.array([[1.0]])
        for k in range(N):
            out = np.kron(out, a if k == m else I)
        a_ops.append(out)
    n_ops = [op.T @ op for op in a_ops]
    kappa = params.kappa

    def rhs(rho_, t_):
        H = dense_hamiltonian(inst, params, t_, cutoff)
        d = -1j * (H @ rho_ - rho_ @ H)
        if kappa:
            for am, nm in zip(a_ops, n_ops):
                d += kappa * (2.0 * am @ rho_ @ am.T - nm @ rho_ - rho_ @ nm)
        return d

    horizon = params.T if t_end is None else t_end
    if not 0 < horizon <= params.T:
        raise ValueError("t_end must lie in (0, T]")
    dt = cfg.dt
    n_full = int(np.floor(horizon / dt + 1e-9))
    dt_last = horizon - n_full * dt
    steps = [(k * dt, dt) for k in range(n_full)]
    if dt_last > 1e-12 * horizon:
        steps.append((n_full * dt, dt_last))
    for t, h in steps:
        k1 = rhs(rho, t)
        k2 = rhs(rho + 0.5 * h * k1, t + 0.5 * h)
        k3 = rhs(rho + 0.5 * h * k2, t + 0.5 * h)
        k4 = rhs(rho + h * k3, t + h)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    tr = np.trace(rho).real
    if abs(tr - tr0) > 1e-8:
        raise NumericalError(f"trace drifted by {abs(tr - tr0):.2e}")
    return rho
