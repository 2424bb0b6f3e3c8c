#!/usr/bin/env python3
"""Full-scale 100-instance random batch (resumable).

    python scripts/run_batch_100.py [count]

Appends per-instance rows to results/batch_100.json as they complete.
"""
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from kponet.driver import batch_random, write_batch_csv
from kponet.dynamics import IntegratorConfig
from kponet.hamiltonian import KpoParameters

RESULTS = Path(__file__).resolve().parents[1] / "results"
RESULTS.mkdir(exist_ok=True)
CHECKPOINT = RESULTS / "batch_100.json"
LOG = RESULTS / "batch_100.log"


def log(msg):
    stamp = time.strftime("%H:%M:%S")
    with open(LOG, "a") as f:
        f.write(f"[{stamp}] {msg}\n")
    print(msg, flush=True)


def main():
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    rows = batch_random(
        count,
        4,
        KpoParameters(),
        seed=1,
        integrator=IntegratorConfig(precision="single"),
        checkpoint_path=CHECKPOINT,
        progress=lambda done, total: log(f"batch: {done}/{total} instances"),
    )
    write_batch_csv(rows, RESULTS / "batch_100.csv")
    log(f"batch: {len(rows)} instances complete")


if __name__ == "__main__":
    main()
