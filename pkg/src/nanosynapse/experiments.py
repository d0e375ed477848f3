"""Experiment harness: full pipeline runs, axis sweeps, one-layer baseline.

A run is a pure function of its :class:`ExperimentConfig`: every random
choice is governed by one of the independent seeds recorded in the config,
so re-running from an emitted metrics record reproduces it byte-exactly.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import data
from .crossbar import DifferentialCrossbar, ProjectionMode, init_projection, init_readout
from .energy import DEFAULT_TECHNOLOGIES, EnergyLedger, TechnologySpec, energy_report
from .learning import TrainConfig, evaluate, run_training
from .spatiotemporal import WindowMaskSet, generate_masks, integrate_dataset

METRICS_SCHEMA = "nanosynapse-metrics-v1"

TASKS = ("mnist", "synthetic", "cochleagram")
INPUT_MODES = ("analog", "spiking")
NOISE_TARGETS = ("train", "test", "both")
SWEEP_AXES = ("hidden_size", "density", "sigma", "noise")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class DataError(RuntimeError):
    """Dataset missing or malformed."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines one experiment run.

    Seeds are independent: changing one leaves every other random choice
    untouched. ``noise_on`` selects which presentations receive channel
    bit-flip corruption; the default corrupts training presentations only,
    modelling a sensor that is noisy while the system learns but evaluated
    on clean captures.
    """

    task: str = "mnist"
    hidden_size: int = 1200
    mask_density: float = 0.25
    readout_sigma: float = 0.0      # device dispersion in the trainable layer
    projection_sigma: float = 0.0   # device dispersion in the fixed layer
    input_mode: str = "analog"
    noise_probability: float = 0.0
    noise_on: str = "train"
    epochs: int = 1
    projection_seed: int = 10
    mask_seed: int = 11
    readout_seed: int = 12
    shuffle_seed: int = 13
    noise_seed: int = 14
    frames: str = "columns"         # mnist presentation orientation
    n_classes: int = 10
    convergence_log_interval: int = 2000
    technologies: tuple = tuple(t.name for t in DEFAULT_TECHNOLOGIES)
    # dataset location: mnist needs a directory of IDX files; cochleagram a
    # container file; synthetic is generated in memory from these knobs
    data_path: str = ""
    synthetic_samples: int = 500
    synthetic_train: int = 350
    synthetic_seed: int = 42

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.input_mode not in INPUT_MODES:
            raise ConfigError(f"input_mode must be one of {INPUT_MODES}")
        if self.noise_on not in NOISE_TARGETS:
            raise ConfigError(f"noise_on must be one of {NOISE_TARGETS}")
        if self.hidden_size < 1:
            raise ConfigError("hidden_size must be positive")
        if not 0 < self.mask_density <= 1:
            raise ConfigError("mask_density must be in (0, 1]")
        if not 0 <= self.noise_probability <= 1:
            raise ConfigError("noise_probability must be in [0, 1]")
        if self.noise_probability > 0 and self.input_mode != "spiking":
            raise ConfigError("channel noise requires spiking input mode")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not 0 <= self.readout_sigma < 1 or not 0 <= self.projection_sigma < 1:
            raise ConfigError("device sigmas must be in [0, 1)")
        if not 0 < self.synthetic_train < self.synthetic_samples:
            raise ConfigError("synthetic split must leave train and test samples")


def mnist_paths(directory: str):
    names = ("train-images-idx3-ubyte", "train-labels-idx1-ubyte",
             "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")
    paths = [os.path.join(directory, n) for n in names]
    missing = [p for p in paths if not os.path.exists(p)]
    if missing:
        raise DataError(f"MNIST IDX files not found: {missing}")
    return paths


def load_task_data(config: ExperimentConfig):
    """(train_samples, test_samples) for the configured task."""
    if config.task == "mnist":
        tri, trl, tei, tel = mnist_paths(config.data_path)
        try:
            return (data.load_mnist(tri, trl, frames=config.frames),
                    data.load_mnist(tei, tel, frames=config.frames))
        except data.IdxFormatError as exc:
            raise DataError(str(exc)) from exc
    if config.task == "synthetic":
        samples = data.generate_synthetic_cochleagrams(
            config.synthetic_samples, config.n_classes, config.synthetic_seed)
        return samples[:config.synthetic_train], samples[config.synthetic_train:]
    try:
        samples = data.load_cochleagram(config.data_path)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot load cochleagram container: {exc}") from exc
    split = config.synthetic_train
    if not 0 < split < len(samples):
        raise DataError(f"split {split} incompatible with {len(samples)} samples")
    return samples[:split], samples[split:]


def _dataset_kind(task: str) -> str:
    return "mnist" if task == "mnist" else "cochleagram"


def prepare_presentations(config: ExperimentConfig, train, test):
    """Apply spike encoding and (seeded) channel noise per the config."""
    if config.input_mode == "spiking":
        kind = _dataset_kind(config.task)
        train = [data.encode_spiking(s, kind) for s in train]
        test = [data.encode_spiking(s, kind) for s in test]
        if config.noise_probability > 0:
            rng = np.random.default_rng(config.noise_seed)
            if config.noise_on in ("train", "both"):
                train = [data.inject_noise(s, config.noise_probability, rng) for s in train]
            if config.noise_on in ("test", "both"):
                test = [data.inject_noise(s, config.noise_probability, rng) for s in test]
    return train, test


def build_projection(config: ExperimentConfig, n_channels: int) -> DifferentialCrossbar:
    mode = (ProjectionMode.GAUSSIAN_IMPERFECT if config.projection_sigma > 0
            else ProjectionMode.BINARY_PERFECT)
    return init_projection(n_channels, config.hidden_size, mode,
                           np.random.default_rng(config.projection_seed),
                           sigma_fraction=config.projection_sigma)


def build_masks(config: ExperimentConfig, max_frames: int) -> WindowMaskSet:
    return generate_masks(config.hidden_size, max_frames, config.mask_density,
                          np.random.default_rng(config.mask_seed))


def compute_hidden(config: ExperimentConfig, train, test):
    """Hidden activations for train and test under the configured layers."""
    n_channels = train[0].n_channels
    max_frames = max(s.n_frames for s in train + test)
    projection = build_projection(config, n_channels)
    masks = build_masks(config, max_frames)
    return (integrate_dataset(projection, train, masks),
            integrate_dataset(projection, test, masks))


def _train_readout(config: ExperimentConfig, h_train, y_train, h_test, y_test):
    readout = init_readout(h_train.shape[1], config.n_classes,
                           np.random.default_rng(config.readout_seed),
                           sigma_fraction=config.readout_sigma)
    train_cfg = TrainConfig(epochs=config.epochs, shuffle_seed=config.shuffle_seed,
                            convergence_log_interval=config.convergence_log_interval)
    trace, ledger = run_training(readout, h_train, y_train, h_test, y_test, train_cfg)
    return readout, trace, ledger


def _technologies(config: ExperimentConfig):
    by_name = {t.name: t for t in DEFAULT_TECHNOLOGIES}
    techs = []
    for name in config.technologies:
        if name not in by_name:
            raise ConfigError(f"unknown technology {name!r}; have {sorted(by_name)}")
        techs.append(by_name[name])
    return techs


def _metrics(config: ExperimentConfig, trace, ledger, final_accuracy,
             kind: str) -> dict:
    techs = _technologies(config)
    report = energy_report(ledger, trace.checkpoints, techs)
    return {
        "schema": METRICS_SCHEMA,
        "kind": kind,
        "config": asdict(config),
        "results": {
            "final_test_accuracy": final_accuracy,
            "convergence": [[int(s), float(a), int(p)] for s, a, p in trace.checkpoints],
            "set_pulses": ledger.set_pulses,
            "reset_pulses": ledger.reset_pulses,
            "total_pulses": ledger.total_pulses,
            "energy_joules": {t.name: ledger.energy(t) for t in techs},
            "energy_report": [
                {"technology": r.technology, "full": r.full_energy,
                 "within_10pct": r.energy_within_10pct,
                 "within_20pct": r.energy_within_20pct}
                for r in report
            ],
        },
    }


def run_experiment(config: ExperimentConfig, hidden=None) -> dict:
    """Execute the full two-layer pipeline; returns the metrics record.

    ``hidden`` optionally supplies precomputed (h_train, h_test, y_train,
    y_test) so sweeps can reuse activations when only readout-side settings
    change (the hidden layer is a pure function of data, projection and
    masks).
    """
    if hidden is None:
        train, test = load_task_data(config)
        train, test = prepare_presentations(config, train, test)
        y_train = np.array([s.label for s in train])
        y_test = np.array([s.label for s in test])
        h_train, h_test = compute_hidden(config, train, test)
    else:
        h_train, h_test, y_train, y_test = hidden
    _, trace, ledger = _train_readout(config, h_train, y_train, h_test, y_test)
    return _metrics(config, trace, ledger, trace.final_accuracy, "two-layer")


def baseline_features(samples, masks: WindowMaskSet) -> np.ndarray:
    """One-layer features: per-channel sums over the masked frames.

    Each input channel integrates its own window; there is no projection
    crossbar and no sign nonlinearity before the readout.
    """
    out = np.empty((len(samples), samples[0].n_channels))
    for i, s in enumerate(samples):
        k = min(s.n_frames, masks.max_frames)
        out[i] = (s.values[:, :k] * masks.included[:, :k]).sum(axis=1)
    return out


def run_baseline_onelayer(config: ExperimentConfig) -> dict:
    """Train the readout directly on integrated inputs (no hidden layer)."""
    train, test = load_task_data(config)
    train, test = prepare_presentations(config, train, test)
    y_train = np.array([s.label for s in train])
    y_test = np.array([s.label for s in test])
    n_channels = train[0].n_channels
    max_frames = max(s.n_frames for s in train + test)
    masks = generate_masks(n_channels, max_frames, config.mask_density,
                           np.random.default_rng(config.mask_seed))
    u_train = baseline_features(train, masks)
    u_test = baseline_features(test, masks)
    _, trace, ledger = _train_readout(config, u_train, y_train, u_test, y_test)
    return _metrics(config, trace, ledger, trace.final_accuracy, "one-layer")


def metrics_json(record: dict) -> str:
    """Canonical serialization: sorted keys, no timestamps, trailing newline."""
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def write_metrics(record: dict, path: str) -> None:
    with open(path, "w") as f:
        f.write(metrics_json(record))


def config_from_record(record: dict) -> ExperimentConfig:
    """Rebuild the exact config from an emitted metrics record."""
    raw = dict(record["config"])
    raw["technologies"] = tuple(raw["technologies"])
    return ExperimentConfig(**raw)


def _sweep_config(base: ExperimentConfig, axis: str, value, repetition: int
                  ) -> ExperimentConfig:
    """Per-point config: axis value applied, per-repetition derived seeds.

    Projection and mask seeds stay fixed across repetitions (the frozen
    first layer is part of the system under test, and keeping it constant
    lets sweeps reuse hidden activations); readout, shuffle and noise seeds
    move in lockstep with the repetition index so repetitions are
    independent draws of everything trainable.
    """
    updates = {
        "readout_seed": base.readout_seed + 100 * repetition,
        "shuffle_seed": base.shuffle_seed + 100 * repetition,
        "noise_seed": base.noise_seed + 100 * repetition,
    }
    if axis == "hidden_size":
        updates["hidden_size"] = int(value)
    elif axis == "density":
        updates["mask_density"] = float(value)
    elif axis == "sigma":
        updates["readout_sigma"] = float(value)
    elif axis == "noise":
        updates["noise_probability"] = float(value)
        updates["input_mode"] = "spiking"
    else:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    return replace(base, **updates)


def _hidden_key(config: ExperimentConfig):
    """Config subset that determines hidden activations."""
    return (config.task, config.data_path, config.frames, config.hidden_size,
            config.mask_density, config.projection_sigma, config.input_mode,
            config.noise_probability, config.noise_on,
            config.projection_seed, config.mask_seed, config.noise_seed,
            config.synthetic_samples, config.synthetic_train, config.synthetic_seed)


def run_sweep(base: ExperimentConfig, axis: str, values, repetitions: int = 3) -> list[dict]:
    """Independent runs over axis values x repetitions; one row per run.

    Rows are sorted by axis value then repetition. Individual failures do
    not abort the sweep; the failing row records the error instead of
    results. Hidden activations are cached across rows that share the same
    first-layer configuration.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    raw_data = None
    cache: dict = {}
    rows = []
    for value in sorted(values):
        for rep in range(repetitions):
            row = {"axis": axis, "value": value, "repetition": rep}
            try:
                cfg = _sweep_config(base, axis, value, rep)
                key = _hidden_key(cfg)
                if key not in cache:
                    if raw_data is None:
                        raw_data = load_task_data(cfg)
                    train, test = prepare_presentations(cfg, *raw_data)
                    y_tr = np.array([s.label for s in train])
                    y_te = np.array([s.label for s in test])
                    cache = {key: (*compute_hidden(cfg, train, test), y_tr, y_te)}
                record = run_experiment(cfg, hidden=cache[key])
                res = record["results"]
                row.update(accuracy=res["final_test_accuracy"],
                           total_pulses=res["total_pulses"],
                           energy_joules=res["energy_joules"], error="")
            except Exception as exc:  # record and continue with later points
                row.update(accuracy=None, total_pulses=None,
                           energy_joules=None, error=f"{type(exc).__name__}: {exc}")
            rows.append(row)
    return rows


def write_sweep_csv(rows: list[dict], path: str, technologies=None) -> None:
    """Tidy CSV, one row per (value, repetition), sorted, append-friendly."""
    tech_names = technologies or [t.name for t in DEFAULT_TECHNOLOGIES]
    exists = os.path.exists(path)
    with open(path, "a", newline="") as f:
        writer = csv.writer(f)
        if not exists:
            writer.writerow(["axis", "value", "repetition", "accuracy",
                             "total_pulses"]
                            + [f"energy_{n}_joules" for n in tech_names] + ["error"])
        for row in rows:
            energies = row["energy_joules"] or {}
            writer.writerow([row["axis"], row["value"], row["repetition"],
                             "" if row["accuracy"] is None else repr(row["accuracy"]),
                             "" if row["total_pulses"] is None else row["total_pulses"]]
                            + [repr(energies[n]) if n in energies else "" for n in tech_names]
                            + [row["error"]])


def write_energy_csv(record: dict, path: str) -> None:
    """Energy table (full / within 10% / within 20%) for one metrics record."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["technology", "full_joules",
                         "within_10pct_joules", "within_20pct_joules"])
        for row in record["results"]["energy_report"]:
            writer.writerow([row["technology"], repr(row["full"]),
                             "" if row["within_10pct"] is None else repr(row["within_10pct"]),
                             "" if row["within_20pct"] is None else repr(row["within_20pct"])])
