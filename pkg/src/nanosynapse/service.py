"""HTTP service wrapping the experiment harness.

Thin transport layer: request models mirror :class:`ExperimentConfig`,
responses are the same records the library returns, so a run submitted over
HTTP is byte-equivalent to one executed in process.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, data
from .crossbar import load_crossbar
from .energy import DEFAULT_TECHNOLOGIES
from .experiments import (
    ConfigError,
    DataError,
    ExperimentConfig,
    run_baseline_onelayer,
    run_experiment,
    run_sweep,
)

app = FastAPI(title="nanosynapse", version=__version__)


class ExperimentRequest(BaseModel):
    """Mirror of ExperimentConfig; defaults match the library's."""

    task: str = "mnist"
    hidden_size: int = 1200
    mask_density: float = 0.25
    readout_sigma: float = 0.0
    projection_sigma: float = 0.0
    input_mode: str = "analog"
    noise_probability: float = 0.0
    noise_on: str = "train"
    epochs: int = 1
    projection_seed: int = 10
    mask_seed: int = 11
    readout_seed: int = 12
    shuffle_seed: int = 13
    noise_seed: int = 14
    frames: str = "columns"
    n_classes: int = 10
    convergence_log_interval: int = 2000
    technologies: tuple[str, ...] = tuple(t.name for t in DEFAULT_TECHNOLOGIES)
    data_path: str = ""
    synthetic_samples: int = 500
    synthetic_train: int = 350
    synthetic_seed: int = 42

    def to_config(self) -> ExperimentConfig:
        try:
            return ExperimentConfig(**self.model_dump())
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc


class SweepRequest(BaseModel):
    base: ExperimentRequest = Field(default_factory=ExperimentRequest)
    axis: str
    values: list[float]
    repetitions: int = 3


class SyntheticRequest(BaseModel):
    output_path: str
    n_samples: int = 500
    n_classes: int = 10
    seed: int = 42


class InspectRequest(BaseModel):
    path: str


def _execute(fn, config):
    try:
        return fn(config)
    except DataError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/experiments/run")
def experiments_run(req: ExperimentRequest):
    return _execute(run_experiment, req.to_config())


@app.post("/experiments/baseline")
def experiments_baseline(req: ExperimentRequest):
    return _execute(run_baseline_onelayer, req.to_config())


@app.post("/experiments/sweep")
def experiments_sweep(req: SweepRequest):
    config = req.base.to_config()
    try:
        rows = run_sweep(config, req.axis, req.values, req.repetitions)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return {"axis": req.axis, "rows": rows}


@app.post("/datasets/synthetic")
def datasets_synthetic(req: SyntheticRequest):
    samples = data.generate_synthetic_cochleagrams(req.n_samples, req.n_classes, req.seed)
    try:
        data.write_cochleagrams(req.output_path, samples)
    except OSError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return {"path": req.output_path, "n_samples": len(samples),
            "n_channels": samples[0].n_channels if samples else 0}


@app.post("/crossbars/inspect")
def crossbars_inspect(req: InspectRequest):
    try:
        xbar = load_crossbar(req.path)
    except FileNotFoundError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return crossbar_summary(xbar)


def crossbar_summary(xbar) -> dict:
    """Human-oriented snapshot statistics for a crossbar."""
    weights = xbar.weights()
    n_states = xbar.pos_params.n_states
    return {
        "rows": xbar.n_rows,
        "cols": xbar.n_cols,
        "n_states": n_states,
        "weight_min": float(weights.min()),
        "weight_max": float(weights.max()),
        "weight_mean": float(weights.mean()),
        "pos_saturated_low": float(np.mean(xbar.pos_steps == 0)),
        "pos_saturated_high": float(np.mean(xbar.pos_steps == n_states)),
        "neg_saturated_low": float(np.mean(xbar.neg_steps == 0)),
        "neg_saturated_high": float(np.mean(xbar.neg_steps == n_states)),
    }
