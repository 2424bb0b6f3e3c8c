#!/usr/bin/env python3
"""Render every available result CSV under results/ into its figure kind.

Builds the frontend if needed, then drives its CLI once per figure job and
re-renders to confirm byte-identical output. SVGs land in results/figures/.
"""
import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
RESULTS = ROOT / "results"
FIGDIR = RESULTS / "figures"
FRONTEND = ROOT / "frontend"

JOBS = [
    # (figure kind, input csv, output svg, extras)
    ("landscape", "landscape_hard.csv", "landscape_hard.svg", {}),
    ("levels", "spectrum_ground.csv", "levels_ground.svg", {}),
    ("levels", "spectrum_excited_vacuum.csv", "levels_excited_vacuum.svg", {}),
    ("levels", "spectrum_excited_photon.csv", "levels_excited_photon.svg", {}),
    ("sweep", "kappa_sweep.csv", "sweep_kappa.svg", {}),
    ("histogram", "batch_100.csv", "hist_ground_failure.svg",
     {"x": "ground_failure", "xscale": "log"}),
    ("histogram", "batch_100.csv", "hist_strategy_failure.svg",
     {"x": "strategy_failure", "xscale": "log"}),
    ("histogram", "batch_100.csv", "hist_ground_residual.svg",
     {"x": "ground_residual", "xscale": "log"}),
    ("scatter2d", "batch_100.csv", "scatter_ground.svg",
     {"x": "ground_failure", "y": "ground_residual"}),
    ("scatter2d", "batch_100.csv", "scatter_strategy.svg",
     {"x": "strategy_failure", "y": "strategy_residual"}),
]


def main():
    cli = FRONTEND / "dist" / "main.js"
    if not cli.exists():
        subprocess.run(["npx", "tsc"], cwd=FRONTEND, check=True)
    FIGDIR.mkdir(parents=True, exist_ok=True)
    rendered, skipped = 0, []
    for kind, csv_name, svg_name, extras in JOBS:
        src = RESULTS / csv_name
        if not src.exists():
            skipped.append(csv_name)
            continue
        out = FIGDIR / svg_name
        job = {"kind": kind, "input": str(src), "output": str(out), **extras}
        job_path = FIGDIR / (svg_name + ".job.json")
        job_path.write_text(json.dumps(job, indent=2))
        subprocess.run(["node", str(cli), "render", str(job_path)], check=True)
        first = out.read_bytes()
        subprocess.run(["node", str(cli), "render", str(job_path)], check=True)
        if out.read_bytes() != first:
            print(f"ERROR: {svg_name} changed between reruns", file=sys.stderr)
            return 1
        rendered += 1
    print(f"rendered {rendered} figures into {FIGDIR}")
    if skipped:
        print("skipped (input not yet produced): " + ", ".join(sorted(set(skipped))))
    return 0


if __name__ == "__main__":
    sys.exit(main())
