#!/usr/bin/env python3
"""Full-scale dissipation sweep on the hard instance (resumable).

Accumulates trajectories into results/kappa_sweep.json in chunks; rerun to
resume after interruption.  Optional arguments:

    python scripts/run_kappa_sweep.py [n_traj_target] [max_new_traj]

The excited-protocol special modes default to the best performers recorded
in results/reference_set.json when that file exists.
"""
import json
import os
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from kponet.driver import kappa_sweep, sweep_table, write_sweep_csv
from kponet.dynamics import IntegratorConfig
from kponet.hamiltonian import KpoParameters
from kponet.ising import hard_instance

RESULTS = Path(__file__).resolve().parents[1] / "results"
RESULTS.mkdir(exist_ok=True)
CHECKPOINT = RESULTS / "kappa_sweep.json"
LOG = RESULTS / "kappa_sweep.log"


def log(msg):
    stamp = time.strftime("%H:%M:%S")
    with open(LOG, "a") as f:
        f.write(f"[{stamp}] {msg}\n")
    print(msg, flush=True)


def best_modes():
    ref = RESULTS / "reference_set.json"
    vac, photon = 1, 1
    if ref.exists():
        runs = json.loads(ref.read_text())["stages"]["deterministic"]["runs"]
        vac = min(range(1, 5),
                  key=lambda m: runs[f"excited_vacuum_m{m}"]["metrics"]["failure_probability"])
        photon = min(range(1, 5),
                     key=lambda m: runs[f"excited_photon_m{m}"]["metrics"]["failure_probability"])
    return vac, photon


def main():
    n_target = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    max_new = int(sys.argv[2]) if len(sys.argv) > 2 else None
    kappas = tuple(
        float(k) for k in
        os.environ.get("KPONET_SWEEP_KAPPAS", "0,0.0025,0.005,0.0075,0.01").split(",")
    )
    vac, photon = best_modes()
    log(f"sweep: target {n_target}/cell over kappas {kappas}, "
        f"special modes vacuum={vac} photon={photon}")
    doc = kappa_sweep(
        hard_instance(),
        KpoParameters(),
        kappas=kappas,
        n_traj=n_target,
        seed=7,
        special_mode_vacuum=vac,
        special_mode_photon=photon,
        integrator=IntegratorConfig(precision="single"),
        checkpoint_path=CHECKPOINT,
        traj_chunk=16,
        progress=lambda done, total: log(f"sweep: {done}/{total} trajectories"),
        max_new_traj=max_new,
    )
    write_sweep_csv(sweep_table(doc), RESULTS / "kappa_sweep.csv")
    log("sweep: checkpoint saved")


if __name__ == "__main__":
    main()
