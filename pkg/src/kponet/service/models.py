"""Request/response schemas for the HTTP service."""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class RandomInstanceRef(BaseModel):
    n: int = Field(ge=2, le=16)
    seed: int


class InstanceRef(BaseModel):
    """Exactly one of: the bundled hard instance, a server-side path, an
    inline instance document, or a seeded random draw."""

    hard: Optional[bool] = None
    path: Optional[str] = None
    inline: Optional[dict] = None
    random: Optional[RandomInstanceRef] = None

    @model_validator(mode="after")
    def _one_source(self):
        given = [v for v in (self.hard, self.path, self.inline, self.random)
                 if v is not None]
        if len(given) != 1:
            raise ValueError("specify exactly one of hard/path/inline/random")
        return self

    def to_doc(self) -> dict:
        if self.hard:
            return {"hard": True}
        if self.path is not None:
            return {"path": self.path}
        if self.inline is not None:
            return {"inline": self.inline}
        return {"random": {"n": self.random.n, "seed": self.random.seed}}


class ParamsModel(BaseModel):
    K: float = 1.0
    p_f: float = 4.0
    xi_f: float = 0.25
    T: float = 400.0
    kappa: float = Field(default=0.0, ge=0.0)


class IntegratorModel(BaseModel):
    dt: float = Field(default=1.0 / 500.0, gt=0.0)
    renormalize_each_step: bool = True
    precision: Literal["double", "single"] = "double"
    batch_width: int = Field(default=16, ge=1, le=256)


class ProtocolModel(BaseModel):
    kind: Literal["ground", "excited_vacuum", "excited_photon"] = "ground"
    special_mode: Optional[int] = Field(default=None, ge=1)
    special_detuning: Optional[float] = None
    base_detuning: float = 1.0


class SolveRequest(BaseModel):
    instance: InstanceRef = InstanceRef(hard=True)
    protocol: ProtocolModel = ProtocolModel()
    params: ParamsModel = ParamsModel()
    integrator: IntegratorModel = IntegratorModel()
    levels: int = Field(default=15, ge=2, le=64)
    n_traj: int = Field(default=1, ge=1)
    seed: Optional[int] = None


class StrategyRequest(BaseModel):
    instance: InstanceRef = InstanceRef(hard=True)
    params: ParamsModel = ParamsModel()
    integrator: IntegratorModel = IntegratorModel()
    levels: int = Field(default=15, ge=2, le=64)
    special_detuning: float = -0.25


class BatchRequest(BaseModel):
    count: int = Field(default=100, ge=1, le=10000)
    n_spins: int = Field(default=4, ge=2, le=8)
    params: ParamsModel = ParamsModel()
    integrator: IntegratorModel = IntegratorModel(precision="single")
    levels: int = Field(default=15, ge=2, le=64)
    seed: int = 1
    checkpoint: Optional[str] = Field(
        default=None, description="server-side checkpoint name for resumable batches"
    )


class SweepRequest(BaseModel):
    instance: InstanceRef = InstanceRef(hard=True)
    params: ParamsModel = ParamsModel()
    integrator: IntegratorModel = IntegratorModel(precision="single")
    levels: int = Field(default=15, ge=2, le=64)
    kappas: list[float] = [0.0, 0.0025, 0.005, 0.0075, 0.01]
    n_traj: int = Field(default=200, ge=1)
    seed: int = 7
    special_mode_vacuum: int = Field(default=1, ge=1)
    special_mode_photon: int = Field(default=1, ge=1)
    traj_chunk: int = Field(default=16, ge=1)
    max_new_traj: Optional[int] = Field(
        default=None, description="cap on newly computed trajectories this call"
    )
    checkpoint: Optional[str] = None


class SpectrumRequest(BaseModel):
    instance: InstanceRef = InstanceRef(hard=True)
    protocol: ProtocolModel = ProtocolModel()
    params: ParamsModel = ParamsModel()
    levels: int = Field(default=15, ge=2, le=64)
    n_e: int = Field(default=6, ge=1)
    m: int = Field(default=3, ge=1, description="number of excitation gaps")
    grid_points: int = Field(default=201, ge=2, le=5001)


class LandscapeRequest(BaseModel):
    instance: InstanceRef = InstanceRef(hard=True)


class JobInfo(BaseModel):
    id: str
    kind: str
    status: Literal["queued", "running", "done", "error"]
    error: Optional[str] = None
    result: Optional[dict[str, Any]] = None


class HealthResponse(BaseModel):
    status: str
    version: str
