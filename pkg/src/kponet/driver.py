"""Experiment orchestration: protocol setup, strategy sweeps, batches,
dissipation scans, and the result-document / CSV formats.

Protocols
  ground          all detunings start at the base value, vacuum start
  excited_vacuum  one detuning starts negative (vacuum becomes the first
                  excited state), vacuum start
  excited_photon  one detuning starts at a small positive value and that
                  oscillator starts with a single photon (a really excited
                  initial state)

The best-of strategy runs ground plus excited_vacuum for every mode and
keeps the lowest failure probability (ties: lower residual energy, then
lower mode index).

All stochastic work derives per-item seeds deterministically from the
master seed, so any document produced here is reproducible bit for bit
from its config echo on the same build.
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    IntegratorConfig,
    derive_trajectory_seeds,
    evolve_schrodinger,
    run_trajectory_ensemble,
)
from .engine import BatchEvolver, ColumnSpec
from .fock import FockCutoff, QuantumState, single_photon_state, vacuum_state
from .hamiltonian import KpoParameters
from .ising import (
    IsingInstance,
    energy_landscape,
    hard_instance,
    instance_from_document,
    instance_to_document,
    load_instance,
    random_instance,
)
from .readout import RunMetrics, compute_metrics

PROTOCOL_KINDS = ("ground", "excited_vacuum", "excited_photon")


class ConfigError(ValueError):
    pass


@dataclass
class ProtocolSpec:
    kind: str = "ground"
    special_mode: int | None = None  # 1-based
    special_detuning: float | None = None
    base_detuning: float = 1.0

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ConfigError(f"unknown protocol kind {self.kind!r}")
        if self.kind == "ground":
            if self.special_mode is not None:
                raise ConfigError("ground protocol takes no special mode")
            return
        if self.special_mode is None:
            raise ConfigError(f"{self.kind} needs a special_mode")
        if self.special_detuning is None:
            self.special_detuning = -0.25 if self.kind == "excited_vacuum" else 0.25
        if self.kind == "excited_vacuum" and not -0.5 < self.special_detuning < 0:
            raise ConfigError(
                "excited_vacuum needs a special detuning in (-K/2, 0); "
                f"got {self.special_detuning}"
            )
        if self.kind == "excited_photon" and not 0 < self.special_detuning < self.base_detuning:
            raise ConfigError(
                "excited_photon needs a special detuning in (0, base); "
                f"got {self.special_detuning}"
            )

    def detunings(self, n_modes: int) -> np.ndarray:
        d = np.full(n_modes, self.base_detuning)
        if self.kind != "ground":
            if not 1 <= self.special_mode <= n_modes:
                raise ConfigError(f"special_mode {self.special_mode} out of range")
            d[self.special_mode - 1] = self.special_detuning
        return d

    def initial_state(self, n_modes: int, cutoff: FockCutoff) -> QuantumState:
        if self.kind == "excited_photon":
            return single_photon_state(n_modes, self.special_mode, cutoff)
        return vacuum_state(n_modes, cutoff)

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "special_mode": self.special_mode,
            "special_detuning": self.special_detuning,
            "base_detuning": self.base_detuning,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ProtocolSpec":
        return cls(
            kind=doc.get("kind", "ground"),
            special_mode=doc.get("special_mode"),
            special_detuning=doc.get("special_detuning"),
            base_detuning=doc.get("base_detuning", 1.0),
        )


@dataclass
class RunConfig:
    instance: IsingInstance
    protocol: ProtocolSpec = field(default_factory=ProtocolSpec)
    params: KpoParameters = field(default_factory=KpoParameters)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    cutoff: FockCutoff = field(default_factory=FockCutoff)
    n_traj: int = 1
    seed: int | None = None

    def __post_init__(self):
        if self.params.kappa > 0 and self.seed is None:
            raise ConfigError("stochastic runs require a seed")

    def effective_params(self) -> KpoParameters:
        return KpoParameters(
            K=self.params.K,
            p_f=self.params.p_f,
            xi_f=self.params.xi_f,
            delta0=self.protocol.detunings(self.instance.N) * self.params.K,
            T=self.params.T,
            kappa=self.params.kappa,
        )


# ---------------------------------------------------------------------------
# config documents
# ---------------------------------------------------------------------------

def resolve_instance(doc: dict) -> IsingInstance:
    """Instance reference: {"hard": true} | {"path": ...} | {"inline": {...}}
    | {"random": {"n": int, "seed": int}}."""
    if not isinstance(doc, dict):
        raise ConfigError("instance reference must be an object")
    keys = [k for k in ("hard", "path", "inline", "random") if k in doc]
    if len(keys) != 1:
        raise ConfigError(
            "instance reference needs exactly one of hard/path/inline/random"
        )
    try:
        if keys[0] == "hard":
            return hard_instance()
        if keys[0] == "path":
            return load_instance(doc["path"])
        if keys[0] == "inline":
            return instance_from_document(doc["inline"])
        spec = doc["random"]
        return random_instance(int(spec["n"]), int(spec["seed"]))
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad instance reference: {exc}") from exc


def run_config_from_doc(doc: dict) -> RunConfig:
    try:
        inst = resolve_instance(doc.get("instance", {"hard": True}))
        proto = ProtocolSpec.from_doc(doc.get("protocol", {}))
        p = doc.get("params", {})
        params = KpoParameters(
            K=p.get("K", 1.0),
            p_f=p.get("p_f", 4.0),
            xi_f=p.get("xi_f", 0.25),
            T=p.get("T", 400.0),
            kappa=p.get("kappa", 0.0),
        )
        i = doc.get("integrator", {})
        integ = IntegratorConfig(
            dt=i.get("dt", 1.0 / 500.0),
            renormalize_each_step=i.get("renormalize_each_step", True),
            precision=i.get("precision", "double"),
            batch_width=i.get("batch_width", 16),
        )
        cutoff = FockCutoff(doc.get("levels", 15))
        return RunConfig(
            instance=inst,
            protocol=proto,
            params=params,
            integrator=integ,
            cutoff=cutoff,
            n_traj=int(doc.get("n_traj", 1)),
            seed=doc.get("seed"),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def run_config_to_doc(cfg: RunConfig) -> dict:
    return {
        "instance": {"inline": instance_to_document(cfg.instance)},
        "protocol": cfg.protocol.to_doc(),
        "params": {
            "K": cfg.params.K,
            "p_f": cfg.params.p_f,
            "xi_f": cfg.params.xi_f,
            "T": cfg.params.T,
            "kappa": cfg.params.kappa,
        },
        "integrator": {
            "dt": cfg.integrator.dt,
            "renormalize_each_step": cfg.integrator.renormalize_each_step,
            "precision": cfg.integrator.precision,
            "batch_width": cfg.integrator.batch_width,
        },
        "levels": cfg.cutoff.levels,
        "n_traj": cfg.n_traj,
        "seed": cfg.seed,
    }


def metrics_to_doc(m: RunMetrics) -> dict:
    return {
        "config_probs": {
            "".join("+" if v > 0 else "-" for v in s): p
            for s, p in sorted(m.config_probs.items())
        },
        "failure_probability": m.failure_probability,
        "residual_energy": m.residual_energy,
        "success_probability": m.success_probability,
        "n_traj": m.n_traj,
        "failure_std_error": m.failure_std_error,
    }


def metrics_from_doc(doc: dict) -> RunMetrics:
    probs = {
        tuple(1 if ch == "+" else -1 for ch in key): float(v)
        for key, v in doc["config_probs"].items()
    }
    return RunMetrics(
        config_probs=probs,
        failure_probability=float(doc["failure_probability"]),
        residual_energy=float(doc["residual_energy"]),
        n_traj=int(doc.get("n_traj", 1)),
        failure_std_error=float(doc.get("failure_std_error", 0.0)),
    )


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def run_protocol(cfg: RunConfig) -> dict:
    """Evolve one protocol and read out; returns the result document."""
    t0 = time.perf_counter()
    params = cfg.effective_params()
    initial = cfg.protocol.initial_state(cfg.instance.N, cfg.cutoff)
    if params.kappa == 0.0:
        rec = evolve_schrodinger(cfg.instance, params, initial, cfg.integrator)
        metrics = compute_metrics(rec.final_state, cfg.instance)
        extra = {
            "max_norm_drift": rec.max_norm_drift,
            "max_top_level_population": rec.max_top_level_population,
            "mean_jumps": 0.0,
        }
    else:
        ens = run_trajectory_ensemble(
            cfg.instance, params, initial, cfg.integrator,
            n_traj=cfg.n_traj, seed=cfg.seed,
        )
        metrics = ens.metrics
        extra = {
            "max_norm_drift": max(r.max_norm_drift for r in ens.records),
            "max_top_level_population": max(
                r.max_top_level_population for r in ens.records
            ),
            "mean_jumps": ens.stats.mean_jumps,
            "success_std_error": ens.stats.success_std_error,
            "residual_std_error": ens.stats.residual_std_error,
        }
    return {
        "schema": "kponet-run-v1",
        "config": run_config_to_doc(cfg),
        "metrics": metrics_to_doc(metrics),
        "diagnostics": extra,
        "provenance": {
            "package_version": __version__,
            "wall_time": time.perf_counter() - t0,
        },
    }


def best_of_strategy(
    inst: IsingInstance,
    params: KpoParameters,
    integrator: IntegratorConfig = IntegratorConfig(),
    cutoff: FockCutoff = FockCutoff(),
    special_detuning: float = -0.25,
) -> tuple[RunMetrics, ProtocolSpec, list[dict]]:
    """Ground plus one vacuum-start excited run per mode; keep the best.

    All N+1 deterministic runs share one batched evolution.  Only the
    kappa = 0 setting is supported (the strategy as defined selects among
    deterministic runs).
    """
    if params.kappa != 0.0:
        raise ConfigError("best_of_strategy is defined for kappa = 0")
    N = inst.N
    protos = [ProtocolSpec(kind="ground", base_detuning=params.K)]
    protos += [
        ProtocolSpec(
            kind="excited_vacuum",
            special_mode=m + 1,
            special_detuning=special_detuning * params.K,
            base_detuning=params.K,
        )
        for m in range(N)
    ]
    cols = [
        ColumnSpec(
            inst=inst,
            delta0=p.detunings(N) * params.K,
            initial=p.initial_state(N, cutoff).amplitudes,
            kappa=0.0,
        )
        for p in protos
    ]
    ev = BatchEvolver(
        cols, K=params.K, p_f=params.p_f, xi_f=params.xi_f, T=params.T,
        dt=integrator.dt, cutoff=cutoff, dtype=integrator.dtype,
        renormalize_each_step=integrator.renormalize_each_step,
    )
    res = ev.run()
    arms = []
    for proto, col in zip(protos, res.columns):
        m = compute_metrics(QuantumState(col.final_state, N, cutoff), inst)
        arms.append({"protocol": proto, "metrics": m})
    best = min(
        range(len(arms)),
        key=lambda k: (
            arms[k]["metrics"].failure_probability,
            arms[k]["metrics"].residual_energy,
            arms[k]["protocol"].special_mode or 0,
        ),
    )
    arm_docs = [
        {"protocol": a["protocol"].to_doc(), "metrics": metrics_to_doc(a["metrics"])}
        for a in arms
    ]
    return arms[best]["metrics"], arms[best]["protocol"], arm_docs


def batch_random(
    count: int,
    n_spins: int,
    params: KpoParameters | None = None,
    seed: int = 1,
    integrator: IntegratorConfig | None = None,
    cutoff: FockCutoff = FockCutoff(),
    checkpoint_path: str | Path | None = None,
    progress=None,
) -> list[dict]:
    """Ground and best-of metrics for ``count`` random instances.

    Instance k uses seed derived from (seed, k); each instance contributes
    ground plus N vacuum-start excited arms, batched across instances.  A
    checkpoint file (JSON) makes the long full-scale batch resumable.
    """
    if count < 1:
        raise ConfigError("count must be at least 1")
    params = params or KpoParameters()
    integrator = integrator or IntegratorConfig(precision="single")
    inst_seeds = derive_trajectory_seeds(seed, count)

    rows: list[dict] = []
    done = set()
    if checkpoint_path and Path(checkpoint_path).exists():
        rows = json.loads(Path(checkpoint_path).read_text())["rows"]
        done = {r["index"] for r in rows}

    N = n_spins
    arms_per = N + 1
    pending = [k for k in range(count) if k not in done]
    width = max(integrator.batch_width // arms_per, 1) * arms_per
    for start in range(0, len(pending), width // arms_per):
        chunk = pending[start:start + width // arms_per]
        if not chunk:
            break
        cols, owners = [], []
        for k in chunk:
            inst = random_instance(N, inst_seeds[k])
            protos = [ProtocolSpec(kind="ground", base_detuning=params.K)] + [
                ProtocolSpec(kind="excited_vacuum", special_mode=m + 1,
                             special_detuning=-0.25 * params.K,
                             base_detuning=params.K)
                for m in range(N)
            ]
            for p in protos:
                cols.append(ColumnSpec(
                    inst=inst,
                    delta0=p.detunings(N) * params.K,
                    initial=p.initial_state(N, cutoff).amplitudes,
                    kappa=0.0,
                ))
                owners.append((k, inst, p))
        ev = BatchEvolver(
            cols, K=params.K, p_f=params.p_f, xi_f=params.xi_f, T=params.T,
            dt=integrator.dt, cutoff=cutoff, dtype=integrator.dtype,
            renormalize_each_step=integrator.renormalize_each_step,
        )
        res = ev.run()
        per_inst: dict[int, list] = {}
        for (k, inst, proto), col in zip(owners, res.columns):
            m = compute_metrics(QuantumState(col.final_state, N, cutoff), inst)
            per_inst.setdefault(k, []).append((proto, m))
        for k in chunk:
            arms = per_inst[k]
            ground = next(m for p, m in arms if p.kind == "ground")
            best_p, best_m = min(
                arms, key=lambda pm: (pm[1].failure_probability,
                                      pm[1].residual_energy,
                                      pm[0].special_mode or 0)
            )
            rows.append({
                "index": k,
                "instance_seed": inst_seeds[k],
                "ground_failure": ground.failure_probability,
                "ground_residual": ground.residual_energy,
                "strategy_failure": best_m.failure_probability,
                "strategy_residual": best_m.residual_energy,
                "strategy_kind": best_p.kind,
                "strategy_mode": best_p.special_mode or 0,
            })
        rows.sort(key=lambda r: r["index"])
        if checkpoint_path:
            Path(checkpoint_path).write_text(json.dumps(
                {"schema": "kponet-batch-v1", "count": count, "seed": seed,
                 "n_spins": N, "rows": rows}, indent=1))
        if progress:
            progress(len(rows), count)
    return rows


def kappa_sweep(
    inst: IsingInstance,
    params: KpoParameters | None = None,
    kappas=(0.0, 0.0025, 0.005, 0.0075, 0.01),
    n_traj: int = 200,
    seed: int = 7,
    special_mode_vacuum: int = 1,
    special_mode_photon: int = 1,
    integrator: IntegratorConfig | None = None,
    cutoff: FockCutoff = FockCutoff(),
    checkpoint_path: str | Path | None = None,
    traj_chunk: int = 16,
    progress=None,
    max_new_traj: int | None = None,
) -> dict:
    """Success probability vs decay rate for the three protocols.

    Work accumulates per (kappa, protocol) cell in a resumable checkpoint:
    every chunk evolves ``traj_chunk`` trajectories of the least-complete
    cell.  Deterministic cells (kappa = 0) collapse to one run.  The
    returned document carries per-cell means, standard errors, and counts.
    """
    params = params or KpoParameters()
    integrator = integrator or IntegratorConfig(precision="single")
    protos = {
        "ground": ProtocolSpec(kind="ground", base_detuning=params.K),
        "excited_vacuum": ProtocolSpec(
            kind="excited_vacuum", special_mode=special_mode_vacuum,
            special_detuning=-0.25 * params.K, base_detuning=params.K),
        "excited_photon": ProtocolSpec(
            kind="excited_photon", special_mode=special_mode_photon,
            special_detuning=0.25 * params.K, base_detuning=params.K),
    }
    doc = {
        "schema": "kponet-sweep-v1",
        "seed": seed,
        "n_traj_target": n_traj,
        "kappas": list(kappas),
        "special_mode_vacuum": special_mode_vacuum,
        "special_mode_photon": special_mode_photon,
        "cells": {},
    }
    if checkpoint_path and Path(checkpoint_path).exists():
        prev = json.loads(Path(checkpoint_path).read_text())
        prev["kappas"] = sorted(set(prev["kappas"]) | set(kappas))
        prev["n_traj_target"] = max(prev["n_traj_target"], n_traj)
        doc = prev

    def cell_key(kappa, name):
        return f"{name}@{kappa:g}"

    # deterministic rows first, all three protocols in one batched evolution
    det_todo = [
        (name, proto) for name, proto in protos.items()
        if 0.0 in kappas and cell_key(0.0, name) not in doc["cells"]
    ]
    if det_todo:
        cols = [
            ColumnSpec(inst=inst, delta0=proto.detunings(inst.N) * params.K,
                       initial=proto.initial_state(inst.N, cutoff).amplitudes,
                       kappa=0.0)
            for _, proto in det_todo
        ]
        ev = BatchEvolver(
            cols, K=params.K, p_f=params.p_f, xi_f=params.xi_f, T=params.T,
            dt=integrator.dt, cutoff=cutoff, dtype=integrator.dtype,
            renormalize_each_step=integrator.renormalize_each_step,
        )
        res = ev.run()
        for (name, _), col in zip(det_todo, res.columns):
            m = compute_metrics(QuantumState(col.final_state, inst.N, cutoff), inst)
            doc["cells"][cell_key(0.0, name)] = {
                "kappa": 0.0, "protocol": name, "deterministic": True,
                "n_traj": n_traj, "success": [m.success_probability],
                "residual": [m.residual_energy], "jumps": [0],
            }
        _save_checkpoint(doc, checkpoint_path)

    stochastic = [(k, name) for k in kappas if k > 0 for name in protos]
    seeds_by_cell = {
        cell_key(k, name): derive_trajectory_seeds(
            seed + 1000003 * idx, max(n_traj * 4, 4096))
        for idx, (k, name) in enumerate(stochastic)
    }
    new_done = 0
    while True:
        incomplete = [
            (k, name) for (k, name) in stochastic
            if len(doc["cells"].get(cell_key(k, name), {}).get("success", [])) < n_traj
        ]
        if not incomplete:
            break
        if max_new_traj is not None and new_done >= max_new_traj:
            break
        k, name = min(
            incomplete,
            key=lambda cell: len(doc["cells"].get(cell_key(*cell), {}).get("success", [])),
        )
        key = cell_key(k, name)
        cell = doc["cells"].setdefault(key, {
            "kappa": k, "protocol": name, "deterministic": False,
            "n_traj": n_traj, "success": [], "residual": [], "jumps": [],
        })
        start = len(cell["success"])
        todo = min(traj_chunk, n_traj - start)
        proto = protos[name]
        pk = KpoParameters(K=params.K, p_f=params.p_f, xi_f=params.xi_f,
                           delta0=proto.detunings(inst.N) * params.K,
                           T=params.T, kappa=k)
        init = proto.initial_state(inst.N, cutoff)
        cols = [
            ColumnSpec(inst=inst, delta0=pk.detunings(inst.N),
                       initial=init.amplitudes, kappa=k,
                       seed=seeds_by_cell[key][start + j])
            for j in range(todo)
        ]
        ev = BatchEvolver(
            cols, K=params.K, p_f=params.p_f, xi_f=params.xi_f, T=params.T,
            dt=integrator.dt, cutoff=cutoff, dtype=integrator.dtype,
        )
        res = ev.run()
        for col in res.columns:
            m = compute_metrics(QuantumState(col.final_state, inst.N, cutoff), inst)
            cell["success"].append(m.success_probability)
            cell["residual"].append(m.residual_energy)
            cell["jumps"].append(len(col.jumps))
        new_done += todo
        _save_checkpoint(doc, checkpoint_path)
        if progress:
            total = sum(len(doc["cells"][cell_key(k2, n2)]["success"])
                        for k2, n2 in stochastic if cell_key(k2, n2) in doc["cells"])
            progress(total, len(stochastic) * n_traj)
    return doc


def _save_checkpoint(doc, path):
    if path:
        Path(path).write_text(json.dumps(doc, indent=1))


def sweep_table(doc: dict) -> list[dict]:
    """Flatten a sweep document into (kappa, protocol, success, se, n) rows."""
    rows = []
    for cell in doc["cells"].values():
        succ = np.array(cell["success"], dtype=float)
        n = succ.size
        se = float(succ.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        rows.append({
            "kappa": cell["kappa"],
            "protocol": cell["protocol"],
            "success_probability": float(succ.mean()) if n else float("nan"),
            "std_error": se,
            "n_traj": int(cell["n_traj"]) if cell.get("deterministic") else n,
            "n_traj_done": n,
            "deterministic": bool(cell.get("deterministic", False)),
        })
    rows.sort(key=lambda r: (r["kappa"], r["protocol"]))
    return rows


# ---------------------------------------------------------------------------
# CSV writers (headers documented per subcommand)
# ---------------------------------------------------------------------------

def write_batch_csv(rows: list[dict], path: str | Path):
    cols = ["index", "instance_seed", "ground_failure", "ground_residual",
            "strategy_failure", "strategy_residual", "strategy_kind",
            "strategy_mode"]
    _write_csv(path, cols, [[r[c] for c in cols] for r in rows])


def write_sweep_csv(rows: list[dict], path: str | Path):
    cols = ["kappa", "protocol", "success_probability", "std_error",
            "n_traj_done"]
    _write_csv(path, cols, [[r[c] for c in cols] for r in rows])


def write_spectrum_csv(trace, path: str | Path):
    m = trace.gaps.shape[1]
    cols = ["t", "p"] + [f"gap_{k + 1}" for k in range(m)] + ["tracked_level"]
    _write_csv(path, cols, list(trace.rows()))


def write_landscape_csv(inst: IsingInstance, path: str | Path):
    rows = []
    for config, dist, energy in energy_landscape(inst):
        bits = "".join("+" if s > 0 else "-" for s in config)
        rows.append([bits, dist, energy])
    _write_csv(path, ["config_bits", "distance", "energy"], rows)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v
