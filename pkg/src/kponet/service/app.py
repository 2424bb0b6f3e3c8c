"""HTTP service around the simulator.

Every operation is submitted as a job and polled on /api/jobs/{id}; the
compute is CPU-bound so jobs execute on a single worker thread, in order.
Checkpointable jobs (batch, sweep-kappa) persist their state under
KPONET_WORK_DIR (default ~/.kponet) keyed by the requested checkpoint
name, so an interrupted long run resumes instead of restarting.
"""
from __future__ import annotations

import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, driver, spectrum
from ..dynamics import IntegratorConfig
from ..engine import NumericalError
from ..fock import FockCutoff
from ..hamiltonian import KpoParameters
from ..ising import energy_landscape
from .models import (
    BatchRequest,
    HealthResponse,
    InstanceRef,
    JobInfo,
    LandscapeRequest,
    SolveRequest,
    SpectrumRequest,
    StrategyRequest,
    SweepRequest,
)


def work_dir() -> Path:
    d = Path(os.environ.get("KPONET_WORK_DIR", Path.home() / ".kponet"))
    d.mkdir(parents=True, exist_ok=True)
    return d


class JobStore:
    def __init__(self):
        self._jobs: dict[str, JobInfo] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=1)

    def submit(self, kind: str, fn) -> JobInfo:
        job_id = uuid.uuid4().hex[:12]
        info = JobInfo(id=job_id, kind=kind, status="queued")
        with self._lock:
            self._jobs[job_id] = info

        def runner():
            self._update(job_id, status="running")
            try:
                result = fn()
                self._update(job_id, status="done", result=result)
            except (driver.ConfigError, ValueError) as exc:
                self._update(job_id, status="error", error=f"config: {exc}")
            except NumericalError as exc:
                self._update(job_id, status="error", error=f"numerical: {exc}")
            except Exception as exc:  # pragma: no cover - defensive
                self._update(job_id, status="error", error=f"internal: {exc}")

        self._pool.submit(runner)
        return info

    def _update(self, job_id, **kw):
        with self._lock:
            job = self._jobs[job_id]
            self._jobs[job_id] = job.model_copy(update=kw)

    def get(self, job_id: str) -> JobInfo | None:
        with self._lock:
            return self._jobs.get(job_id)

    def all(self) -> list[JobInfo]:
        with self._lock:
            return list(self._jobs.values())


def _params(m) -> KpoParameters:
    return KpoParameters(K=m.K, p_f=m.p_f, xi_f=m.xi_f, T=m.T, kappa=m.kappa)


def _integrator(m) -> IntegratorConfig:
    return IntegratorConfig(dt=m.dt, renormalize_each_step=m.renormalize_each_step,
                            precision=m.precision, batch_width=m.batch_width)


def _checkpoint_path(name: str | None, prefix: str) -> Path | None:
    if name is None:
        return None
    safe = "".join(ch for ch in name if ch.isalnum() or ch in "-_")
    if not safe:
        raise driver.ConfigError("checkpoint name must be alphanumeric")
    return work_dir() / f"{prefix}-{safe}.json"


def create_app() -> FastAPI:
    app = FastAPI(title="kponet", version=__version__)
    jobs = JobStore()

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", version=__version__)

    @app.get("/api/jobs", response_model=list[JobInfo])
    def list_jobs():
        return jobs.all()

    @app.get("/api/jobs/{job_id}", response_model=JobInfo)
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="no such job")
        return job

    @app.post("/api/solve", response_model=JobInfo)
    def solve(req: SolveRequest):
        def work():
            cfg = driver.run_config_from_doc({
                "instance": req.instance.to_doc(),
                "protocol": req.protocol.model_dump(),
                "params": req.params.model_dump(),
                "integrator": req.integrator.model_dump(),
                "levels": req.levels,
                "n_traj": req.n_traj,
                "seed": req.seed,
            })
            return driver.run_protocol(cfg)

        return jobs.submit("solve", work)

    @app.post("/api/strategy", response_model=JobInfo)
    def strategy(req: StrategyRequest):
        def work():
            inst = driver.resolve_instance(req.instance.to_doc())
            metrics, proto, arms = driver.best_of_strategy(
                inst, _params(req.params), _integrator(req.integrator),
                FockCutoff(req.levels), special_detuning=req.special_detuning,
            )
            return {
                "schema": "kponet-strategy-v1",
                "chosen_protocol": proto.to_doc(),
                "metrics": driver.metrics_to_doc(metrics),
                "arms": arms,
            }

        return jobs.submit("strategy", work)

    @app.post("/api/batch", response_model=JobInfo)
    def batch(req: BatchRequest):
        def work():
            rows = driver.batch_random(
                req.count, req.n_spins, _params(req.params), req.seed,
                _integrator(req.integrator), FockCutoff(req.levels),
                checkpoint_path=_checkpoint_path(req.checkpoint, "batch"),
            )
            return {"schema": "kponet-batch-v1", "count": req.count,
                    "seed": req.seed, "n_spins": req.n_spins, "rows": rows}

        return jobs.submit("batch", work)

    @app.post("/api/sweep-kappa", response_model=JobInfo)
    def sweep_kappa(req: SweepRequest):
        def work():
            inst = driver.resolve_instance(req.instance.to_doc())
            doc = driver.kappa_sweep(
                inst, _params(req.params), req.kappas, req.n_traj, req.seed,
                special_mode_vacuum=req.special_mode_vacuum,
                special_mode_photon=req.special_mode_photon,
                integrator=_integrator(req.integrator),
                cutoff=FockCutoff(req.levels),
                checkpoint_path=_checkpoint_path(req.checkpoint, "sweep"),
                traj_chunk=req.traj_chunk,
                max_new_traj=req.max_new_traj,
            )
            doc["table"] = driver.sweep_table(doc)
            return doc

        return jobs.submit("sweep-kappa", work)

    @app.post("/api/spectrum", response_model=JobInfo)
    def spectrum_endpoint(req: SpectrumRequest):
        def work():
            inst = driver.resolve_instance(req.instance.to_doc())
            proto = driver.ProtocolSpec.from_doc(req.protocol.model_dump())
            params = _params(req.params)
            eff = KpoParameters(
                K=params.K, p_f=params.p_f, xi_f=params.xi_f,
                delta0=proto.detunings(inst.N) * params.K, T=params.T,
            )
            occupations = [0] * inst.N
            if proto.kind == "excited_photon":
                occupations[proto.special_mode - 1] = 1
            grid = np.linspace(0.0, params.T, req.grid_points)
            tr = spectrum.trace_spectrum(
                inst, eff, grid, m=req.m, n_e=req.n_e,
                cutoff=FockCutoff(req.levels), initial_occupations=occupations,
            )
            return {
                "schema": "kponet-spectrum-v1",
                "columns": ["t", "p"] + [f"gap_{k + 1}" for k in range(req.m)]
                           + ["tracked_level"],
                "rows": [list(map(float, r[:-1])) + [int(r[-1])] for r in tr.rows()],
                "min_gap": tr.min_gap,
                "min_gap_t": tr.min_gap_t,
                "min_gap_p": tr.min_gap_p,
            }

        return jobs.submit("spectrum", work)

    @app.post("/api/landscape", response_model=JobInfo)
    def landscape(req: LandscapeRequest):
        def work():
            inst = driver.resolve_instance(req.instance.to_doc())
            rows = [
                ["".join("+" if s > 0 else "-" for s in config), dist, energy]
                for config, dist, energy in energy_landscape(inst)
            ]
            return {
                "schema": "kponet-landscape-v1",
                "columns": ["config_bits", "distance", "energy"],
                "rows": rows,
            }

        return jobs.submit("landscape", work)

    return app


app = create_app()
