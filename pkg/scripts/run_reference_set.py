#!/usr/bin/env python3
"""Full-scale reference runs on the bundled hard instance.

Produces results/reference_set.json consumed by the acceptance suite:
  stage 1: deterministic protocol batch (ground, 4x vacuum-start excited,
           4x photon-start excited, parity run, unrenormalized drift run)
  stage 2: step-halved ground run (dt/2 convergence check)
  stage 3: single-KPO trajectory ensemble vs dense master equation

Run time is hours at full fidelity on one core; progress goes to
results/reference_set.log and the JSON is rewritten after each stage.
"""
import json
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from kponet.dynamics import IntegratorConfig, dense_master_evolve
from kponet.engine import BatchEvolver, ColumnSpec
from kponet.fock import FockCutoff, QuantumState, photon_parity, single_photon_state, vacuum_state
from kponet.hamiltonian import KpoParameters
from kponet.ising import IsingInstance, hard_instance
from kponet.readout import compute_metrics

RESULTS = Path(__file__).resolve().parents[1] / "results"
RESULTS.mkdir(exist_ok=True)
LOG = RESULTS / "reference_set.log"
OUT = RESULTS / "reference_set.json"

import os
T = float(os.environ.get("KPONET_REF_T", 400.0))
DT = float(os.environ.get("KPONET_REF_DT", 1.0 / 500.0))
LEVELS = int(os.environ.get("KPONET_REF_LEVELS", 15))
N_TRAJ3 = int(os.environ.get("KPONET_REF_NTRAJ", 1000))


def log(msg):
    stamp = time.strftime("%H:%M:%S")
    with open(LOG, "a") as f:
        f.write(f"[{stamp}] {msg}\n")


def save(doc):
    OUT.write_text(json.dumps(doc, indent=2) + "\n")


def metrics_doc(m):
    return {
        "failure_probability": m.failure_probability,
        "residual_energy": m.residual_energy,
        "config_probs": {
            "".join("+" if v > 0 else "-" for v in s): p
            for s, p in m.config_probs.items()
        },
    }


def main():
    doc = {
        "schema": "kponet-reference-set-v1",
        "params": {"K": 1.0, "p_f": 4.0, "xi_f": 0.25, "T": T, "dt": DT,
                   "levels": LEVELS, "precision": "double"},
        "stages": {},
    }
    inst = hard_instance()
    cut = FockCutoff(LEVELS)
    vac = vacuum_state(4, cut)
    N = 4

    # ---- stage 1: deterministic protocol batch
    log("stage 1: deterministic batch starting")
    cols, renorm, names = [], [], []

    def add(name, delta0, initial, renormalize=True, inst_override=None):
        cols.append(ColumnSpec(inst=inst_override or inst, delta0=np.asarray(delta0),
                               initial=initial.amplitudes.copy(), kappa=0.0))
        renorm.append(renormalize)
        names.append(name)

    add("ground", np.ones(N), vac)
    for m in range(N):
        d = np.ones(N)
        d[m] = -0.25
        add(f"excited_vacuum_m{m + 1}", d, vac)
    for m in range(N):
        d = np.ones(N)
        d[m] = 0.25
        add(f"excited_photon_m{m + 1}", d, single_photon_state(N, m + 1, cut))
    inst_h0 = IsingInstance(inst.J, np.zeros(N))
    add("parity_h0", np.ones(N), vac, inst_override=inst_h0)
    add("ground_unrenormalized", np.ones(N), vac, renormalize=False)

    ev = BatchEvolver(cols, T=T, dt=DT, cutoff=cut, dtype=np.float64,
                      renormalize_each_step=np.array(renorm), observe_every=5000)
    res = ev.run(progress_cb=lambda s, n, _: log(f"stage 1: step {s}/{n}"),
                 progress_every=10000)
    log(f"stage 1 done in {res.wall_time:.0f}s")

    stage1 = {"wall_time": res.wall_time, "runs": {}}
    for name, c in zip(names, res.columns):
        state = QuantumState(c.final_state, N, cut)
        entry = {
            "max_norm_drift": c.max_norm_drift,
            "max_top_level_population": c.max_top_level_population,
        }
        if name == "parity_h0":
            entry["photon_parity"] = photon_parity(state)
            entry["metrics"] = metrics_doc(compute_metrics(state, inst_h0))
        else:
            entry["metrics"] = metrics_doc(compute_metrics(state, inst))
        stage1["runs"][name] = entry
    doc["stages"]["deterministic"] = stage1
    save(doc)
    np.savez_compressed(RESULTS / "reference_final_states.npz",
                        **{n: c.final_state for n, c in zip(names, res.columns)})
    log("stage 1 saved")

    # ---- stage 2: step-halved ground run
    log("stage 2: dt/2 ground run starting")
    col = ColumnSpec(inst=inst, delta0=np.ones(N), initial=vac.amplitudes.copy(), kappa=0.0)
    ev2 = BatchEvolver([col], T=T, dt=DT / 2, cutoff=cut, dtype=np.float64)
    res2 = ev2.run(progress_cb=lambda s, n, _: log(f"stage 2: step {s}/{n}"),
                   progress_every=40000)
    m2 = compute_metrics(QuantumState(res2.columns[0].final_state, N, cut), inst)
    doc["stages"]["step_halved_ground"] = {
        "dt": DT / 2,
        "wall_time": res2.wall_time,
        "metrics": metrics_doc(m2),
    }
    save(doc)
    log(f"stage 2 done in {res2.wall_time:.0f}s")

    # ---- stage 3: single-KPO jump ensemble vs dense master equation
    log("stage 3: single-KPO oracle comparison starting")
    kappa = 0.005
    inst1 = IsingInstance(np.zeros((1, 1)), np.zeros(1))
    cut1 = FockCutoff(LEVELS)
    vac1 = vacuum_state(1, cut1)
    n_traj = N_TRAJ3
    seeds = np.random.SeedSequence(20250810).generate_state(n_traj, np.uint64)
    cols3 = [ColumnSpec(inst=inst1, delta0=np.ones(1), initial=vac1.amplitudes.copy(),
                        kappa=kappa, seed=int(s)) for s in seeds]
    obs_every = max(int(round(T / DT / 10)), 1)  # 10 checkpoints
    ev3 = BatchEvolver(cols3, T=T, dt=DT, cutoff=cut1, dtype=np.float64,
                       observe_every=obs_every)
    res3 = ev3.run(progress_cb=lambda s, n, _: log(f"stage 3: step {s}/{n}"),
                   progress_every=20000)
    obs = res3.observations
    # trajectory-averaged density matrix at final time
    rho_traj = np.zeros((LEVELS, LEVELS), dtype=complex)
    for c in res3.columns:
        rho_traj += np.outer(c.final_state, c.final_state.conj())
    rho_traj /= n_traj

    params1 = KpoParameters(T=T, kappa=kappa, delta0=np.ones(1))
    cfg = IntegratorConfig(dt=DT)
    rho = np.zeros((LEVELS, LEVELS), dtype=complex)
    rho[0, 0] = 1.0
    master_occ = [0.0]
    seg_T = T / 10
    ns_diag = np.arange(LEVELS)
    t_master = [0.0]
    for k in range(10):
        params_seg = KpoParameters(T=T, kappa=kappa, delta0=np.ones(1))
        rho = _master_segment(inst1, params_seg, rho, cfg, cut1, k * seg_T, (k + 1) * seg_T)
        master_occ.append(float(np.real(np.sum(ns_diag * np.diag(rho)))))
        t_master.append((k + 1) * seg_T)
        log(f"stage 3: master segment {k + 1}/10")
    ev_vals = np.linalg.eigvalsh(rho_traj - rho)
    trace_distance = 0.5 * float(np.abs(ev_vals).sum())

    traj_occ_mean = obs.occupations[:, 0, :].mean(axis=1)
    traj_occ_se = obs.occupations[:, 0, :].std(axis=1, ddof=1) / np.sqrt(n_traj)
    doc["stages"]["single_kpo_oracle"] = {
        "kappa": kappa,
        "n_traj": n_traj,
        "wall_time": res3.wall_time,
        "checkpoints": [
            {"t": float(t), "traj_mean_n": float(mn), "traj_se_n": float(se),
             "master_n": float(mo)}
            for t, mn, se, mo in zip(obs.times, traj_occ_mean, traj_occ_se,
                                     [master_occ[int(round(t / seg_T))] for t in obs.times])
        ],
        "trace_distance_final": trace_distance,
        "mean_jumps": float(np.mean([len(c.jumps) for c in res3.columns])),
    }
    save(doc)
    log(f"stage 3 done in {res3.wall_time:.0f}s; trace distance {trace_distance:.4f}")
    log("all stages complete")


def _master_segment(inst, params, rho, cfg, cutoff, t0, t1):
    """Advance the dense master equation from t0 to t1 with the global schedule."""
    from kponet.dynamics import dense_hamiltonian
    from kponet.engine import NumericalError

    L = cutoff.levels
    a = np.diag(np.sqrt(np.arange(1, L, dtype=np.float64)), 1)
    nmat = a.T @ a
    kappa = params.kappa

    def rhs(rho_, t_):
        H = dense_hamiltonian(inst, params, t_, cutoff)
        d = -1j * (H @ rho_ - rho_ @ H)
        if kappa:
            d += kappa * (2.0 * a @ rho_ @ a.T - nmat @ rho_ - rho_ @ nmat)
        return d

    dt = cfg.dt
    nst = int(round((t1 - t0) / dt))
    for k in range(nst):
        t = t0 + k * dt
        k1 = rhs(rho, t)
        k2 = rhs(rho + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(rho + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(rho + dt * k3, t + dt)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise NumericalError("master-equation trace drift")
    return rho


if __name__ == "__main__":
    main()
