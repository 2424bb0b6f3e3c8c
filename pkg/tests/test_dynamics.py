"""Integrators: engine-vs-reference equivalence, jump statistics, and the
dense master-equation oracle."""
import numpy as np
import pytest

from kponet.dynamics import (
    IntegratorConfig,
    dense_hamiltonian,
    dense_master_evolve,
    evolve_quantum_jump,
    evolve_schrodinger,
    run_trajectory_ensemble,
)
from kponet.engine import BatchEvolver, ColumnSpec, NumericalError
from kponet.fock import FockCutoff, QuantumState, single_photon_state, vacuum_state
from kponet.hamiltonian import KpoParameters, schedule_at
from kponet.ising import IsingInstance


@pytest.fixture
def two_mode():
    J = np.array([[0.0, 0.3], [0.3, 0.0]])
    return IsingInstance(J, np.array([0.5, -0.2]))


def reference_rk4(inst, params, psi0, T, dt, cutoff, renorm=True):
    from kponet.hamiltonian import KpoNetworkOperator

    op = KpoNetworkOperator(inst, cutoff)
    psi = psi0.copy()
    nst = int(round(T / dt))
    for k in range(nst):
        t = k * dt

        def rhs(p_, tt):
            pt = schedule_at(params, tt, inst.N)
            return -1j * op.apply(p_, params.K, pt.p, pt.delta, pt.xi, pt.A,
                                  kappa=params.kappa)

        k1 = rhs(psi, t)
        k2 = rhs(psi + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(psi + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(psi + dt * k3, t + dt)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if renorm:
            psi = psi / np.linalg.norm(psi)
    return psi


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(precision="half")


def test_engine_matches_reference(two_mode):
    cut = FockCutoff(6)
    params = KpoParameters(T=4.0)
    rng = np.random.default_rng(7)
    amps = rng.standard_normal(36) + 1j * rng.standard_normal(36)
    psi0 = amps / np.linalg.norm(amps)
    ref = reference_rk4(two_mode, params, psi0, 4.0, 1 / 500, cut)
    st = QuantumState(psi0.copy(), 2, cut)
    rec = evolve_schrodinger(two_mode, params, st, IntegratorConfig())
    assert np.abs(rec.final_state.amplitudes - ref).max() < 1e-12


def test_single_precision_close(two_mode):
    cut = FockCutoff(6)
    params = KpoParameters(T=4.0)
    st = vacuum_state(2, cut)
    ref = evolve_schrodinger(two_mode, params, st, IntegratorConfig())
    got = evolve_schrodinger(two_mode, params, st,
                             IntegratorConfig(precision="single"))
    assert np.abs(got.final_state.amplitudes - ref.final_state.amplitudes).max() < 1e-4


def test_schrodinger_requires_zero_kappa(two_mode):
    with pytest.raises(ValueError):
        evolve_schrodinger(two_mode, KpoParameters(T=1.0, kappa=0.01),
                           vacuum_state(2, FockCutoff(4)))


def test_detuning_phase_frozen_schedule():
    # constant detuning only: |1> picks up exp(-i*Delta*tau)
    inst = IsingInstance(np.zeros((1, 1)), np.zeros(1))
    cut = FockCutoff(4)
    delta, tau = 0.73, 2.0
    col = ColumnSpec(inst=inst, delta0=np.array([delta]),
                     initial=single_photon_state(1, 1, cut).amplitudes)
    ev = BatchEvolver([col], K=0.0, T=tau, dt=1 / 500, cutoff=cut,
                      dtype=np.float64, renormalize_each_step=False,
                      schedule_fn=lambda t: (0.0, 1.0, 0.0, 0.0))
    res = ev.run()
    got = res.columns[0].final_state[1]
    assert abs(got - np.exp(-1j * delta * tau)) < 1e-9


def test_zero_hamiltonian_leaves_state(two_mode):
    cut = FockCutoff(4)
    rng = np.random.default_rng(5)
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    amps /= np.linalg.norm(amps)
    col = ColumnSpec(inst=two_mode, delta0=np.zeros(2), initial=amps.copy())
    ev = BatchEvolver([col], K=0.0, T=2.0, dt=1 / 100, cutoff=cut,
                      dtype=np.float64, schedule_fn=lambda t: (0.0, 0.0, 0.0, 0.0))
    res = ev.run()
    assert np.abs(res.columns[0].final_state - amps).max() < 1e-13


def test_jump_free_kappa_run_matches_schrodinger(two_mode):
    # with kappa = 0 the jump path reduces to the closed-system one
    cut = FockCutoff(5)
    params = KpoParameters(T=2.0)
    st = vacuum_state(2, cut)
    a = evolve_schrodinger(two_mode, params, st)
    b = evolve_quantum_jump(two_mode, params, st, seed=1)
    assert b.jump_times == []
    assert np.abs(a.final_state.amplitudes - b.final_state.amplitudes).max() < 1e-12


def test_seed_determinism(two_mode):
    cut = FockCutoff(5)
    params = KpoParameters(T=3.0, kappa=0.05)
    st = vacuum_state(2, cut)
    r1 = evolve_quantum_jump(two_mode, params, st, seed=42)
    r2 = evolve_quantum_jump(two_mode, params, st, seed=42)
    assert r1.jump_times == r2.jump_times
    assert np.array_equal(r1.final_state.amplitudes, r2.final_state.amplitudes)
    r3 = evolve_quantum_jump(two_mode, params, st, seed=43)
    assert (r1.jump_times != r3.jump_times) or not np.array_equal(
        r1.final_state.amplitudes, r3.final_state.amplitudes
    )


def test_jump_times_increasing_within_horizon():
    inst = IsingInstance(np.zeros((1, 1)), np.zeros(1))
    cut = FockCutoff(6)
    params = KpoParameters(T=30.0, kappa=0.05)
    st = single_photon_state(1, 1, cut)
    rec = evolve_quantum_jump(inst, params, st, seed=3)
    times = [t for t, _ in rec.jump_times]
    assert times == sorted(times)
    assert all(0 < t <= 30.0 for t in times)
    assert all(m == 1 for _, m in rec.jump_times)


def test_decay_law_two_kappa():
    # pure decay of |1>: <n>(t) = exp(-2 kappa t), away from any drive
    inst = IsingInstance(np.zeros((1, 1)), np.zeros(1))
    cut = FockCutoff(3)
    kappa, T, n_traj = 0.06, 8.0, 400
    cols = [ColumnSpec(inst=inst, delta0=np.zeros(1),
                       initial=single_photon_state(1, 1, cut).amplitudes,
                       kappa=kappa, seed=s)
            for s in range(n_traj)]
    ev = BatchEvolver(cols, K=0.0, T=T, dt=1 / 100, cutoff=cut,
                      dtype=np.float64, schedule_fn=lambda t: (0.0, 0.0, 0.0, 0.0),
                      observe_every=200)
    res = ev.run()
    obs = res.observations
    for k, t in enumerate(obs.times):
        if t == 0.0:
            continue
        mean_n = obs.occupations[k, 0, :].mean()
        se = obs.occupations[k, 0, :].std(ddof=1) / np.sqrt(n_traj)
        assert abs(mean_n - np.exp(-2 * kappa * t)) < 3.5 * max(se, 1e-4), (
            f"t={t}: {mean_n} vs {np.exp(-2 * kappa * t)}"
        )


def test_ensemble_collapse_and_stats(two_mode):
    cut = FockCutoff(5)
    params = KpoParameters(T=2.0)
    st = vacuum_state(2, cut)
    ens = run_trajectory_ensemble(two_mode, params, st, n_traj=8, seed=5)
    assert len(ens.records) == 1  # deterministic collapse
    assert ens.stats.success_std_error == 0.0
    assert ens.metrics.n_traj == 8
    direct = evolve_schrodinger(two_mode, params, st)
    assert np.abs(
        ens.records[0].final_state.amplitudes - direct.final_state.amplitudes
    ).max() == 0.0


def test_ensemble_stochastic_summary(two_mode):
    cut = FockCutoff(5)
    params = KpoParameters(T=2.0, kappa=0.05)
    st = vacuum_state(2, cut)
    ens = run_trajectory_ensemble(two_mode, params, st, n_traj=6, seed=5)
    assert len(ens.records) == 6
    assert ens.stats.n_traj == 6
    assert 0 <= ens.metrics.failure_probability <= 1
    # deterministic rerun
    again = run_trajectory_ensemble(two_mode, params, st, n_traj=6, seed=5)
    for a, b in zip(ens.records, again.records):
        assert np.array_equal(a.final_state.amplitudes, b.final_state.amplitudes)


def test_master_matches_schrodinger_when_closed(two_mode):
    cut = FockCutoff(4)
    params = KpoParameters(T=2.0)
    st = vacuum_state(2, cut)
    rho0 = np.outer(st.amplitudes, st.amplitudes.conj())
    rho = dense_master_evolve(two_mode, params, rho0, IntegratorConfig(), cut)
    pure = evolve_schrodinger(two_mode, params, st).final_state.amplitudes
    fidelity = float(np.real(pure.conj() @ rho @ pure))
    assert fidelity > 1 - 1e-8


def test_master_decay_population():
    # stop early in a very slow ramp: the drive is still negligible there
    # and the population follows the bare decay law exp(-2 kappa t)
    inst = IsingInstance(np.zeros((1, 1)), np.zeros(1))
    cut = FockCutoff(5)
    params = KpoParameters(T=4000.0, kappa=0.1)
    rho0 = np.zeros((5, 5), dtype=complex)
    rho0[1, 1] = 1.0
    rho = dense_master_evolve(inst, params, rho0, IntegratorConfig(), cut, t_end=0.5)
    n_final = float(np.real(np.sum(np.arange(5) * np.diag(rho))))
    assert abs(n_final - np.exp(-2 * 0.1 * 0.5)) < 1e-4


def test_master_positivity_and_hermiticity(two_mode):
    cut = FockCutoff(3)
    params = KpoParameters(T=3.0, kappa=0.02)
    rng = np.random.default_rng(8)
    v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    v /= np.linalg.norm(v)
    rho0 = np.outer(v, v.conj())
    rho = dense_master_evolve(two_mode, params, rho0, IntegratorConfig(), cut)
    assert np.abs(rho - rho.T.conj()).max() < 1e-10
    evals = np.linalg.eigvalsh(rho)
    assert evals.min() > -1e-8
    assert abs(np.trace(rho).real - 1.0) < 1e-8


def test_master_dimension_guard():
    # 15^4 exceeds the dense limit; the guard fires before touching rho
    inst = IsingInstance(np.zeros((4, 4)), np.zeros(4))
    params = KpoParameters(T=1.0)
    with pytest.raises(ValueError, match="dense solver refused"):
        dense_master_evolve(inst, params, np.eye(4), IntegratorConfig())


def test_trajectories_converge_to_master(two_mode):
    # driven two-mode system with decay: trajectory average approaches the
    # master-equation state at the Monte Carlo rate
    cut = FockCutoff(3)
    params = KpoParameters(T=6.0, kappa=0.03)
    st = vacuum_state(2, cut)
    rho0 = np.outer(st.amplitudes, st.amplitudes.conj())
    rho_exact = dense_master_evolve(two_mode, params, rho0, IntegratorConfig(), cut)
    ens = run_trajectory_ensemble(two_mode, params, st, n_traj=220, seed=11)
    rho_traj = np.zeros_like(rho_exact)
    for r in ens.records:
        a = r.final_state.amplitudes
        rho_traj += np.outer(a, a.conj())
    rho_traj /= len(ens.records)
    dist = 0.5 * np.abs(np.linalg.eigvalsh(rho_traj - rho_exact)).sum()
    assert dist < 0.08, f"trace distance {dist}"


def test_divergence_guard_fires():
    # a absurdly large step makes RK4 blow up; the guard must catch it
    inst = IsingInstance(np.zeros((1, 1)), np.zeros(1))
    cut = FockCutoff(12)
    col = ColumnSpec(inst=inst, delta0=np.ones(1),
                     initial=single_photon_state(1, 1, cut).amplitudes)
    ev = BatchEvolver([col], K=1.0, T=50.0, dt=0.5, cutoff=cut,
                      dtype=np.float64, renormalize_each_step=False)
    with pytest.raises(NumericalError):
        ev.run()
