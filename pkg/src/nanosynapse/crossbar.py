"""Differential crossbar of nanosynapse pairs.

Each weight is the conductance difference of a (pos, neg) device pair, so
signed weights come out of pairwise current subtraction. Devices are stored
as integer step indices plus per-device parameter grids, which keeps every
conductance exactly on its quantization grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .device import (
    DeviceParams,
    PulseKind,
    RESET_AMPLITUDE,
    SET_AMPLITUDE,
    pulse_direction,
    sample_imperfect_array,
)
from .energy import EnergyLedger


class ProjectionMode(Enum):
    BINARY_PERFECT = "binary_perfect"
    GAUSSIAN_IMPERFECT = "gaussian_imperfect"


@dataclass
class ParamGrid:
    """Per-device parameter arrays for one polarity of a crossbar."""

    g_min: np.ndarray
    g_max: np.ndarray
    v_th1: np.ndarray
    v_th2: np.ndarray
    n_states: int

    @classmethod
    def uniform(cls, shape, params: DeviceParams) -> "ParamGrid":
        return cls(
            np.full(shape, float(params.g_min)),
            np.full(shape, float(params.g_max)),
            np.full(shape, float(params.v_th1)),
            np.full(shape, float(params.v_th2)),
            params.n_states,
        )

    @classmethod
    def dispersed(cls, shape, means: DeviceParams, sigma_fraction: float,
                  rng: np.random.Generator) -> "ParamGrid":
        g_min, g_max, v_th1, v_th2 = sample_imperfect_array(means, sigma_fraction, shape, rng)
        return cls(g_min, g_max, v_th1, v_th2, means.n_states)

    @property
    def step_size(self) -> np.ndarray:
        return (self.g_max - self.g_min) / self.n_states

    def conductance(self, steps: np.ndarray) -> np.ndarray:
        return self.g_min + steps * self.step_size


@dataclass
class DifferentialCrossbar:
    pos_steps: np.ndarray   # int, (n_rows, n_cols)
    neg_steps: np.ndarray
    pos_params: ParamGrid
    neg_params: ParamGrid

    def __post_init__(self):
        if self.pos_steps.shape != self.neg_steps.shape:
            raise ValueError("pos/neg device grids must have identical dimensions")

    @property
    def n_rows(self) -> int:
        return self.pos_steps.shape[0]

    @property
    def n_cols(self) -> int:
        return self.pos_steps.shape[1]

    def weights(self) -> np.ndarray:
        """Effective signed weights, pos minus neg conductance."""
        return (self.pos_params.conductance(self.pos_steps)
                - self.neg_params.conductance(self.neg_steps))

    def forward(self, voltages: np.ndarray) -> np.ndarray:
        """Signed output currents for one input vector (pure read)."""
        voltages = np.asarray(voltages, dtype=np.float64)
        if voltages.shape != (self.n_rows,):
            raise ValueError(f"input length {voltages.shape} != n_rows {self.n_rows}")
        return voltages @ self.weights()

    def forward_batch(self, voltage_rows: np.ndarray) -> np.ndarray:
        """forward() over a (n_inputs, n_rows) stack of input vectors."""
        voltage_rows = np.asarray(voltage_rows, dtype=np.float64)
        if voltage_rows.shape[-1] != self.n_rows:
            raise ValueError(f"input width {voltage_rows.shape[-1]} != n_rows {self.n_rows}")
        return voltage_rows @ self.weights()

    def program_column(self, col: int, directions: np.ndarray, ledger: EnergyLedger,
                       set_amplitude: float = SET_AMPLITUDE,
                       reset_amplitude: float = RESET_AMPLITUDE) -> None:
        """Apply one conditional programming event to a single column.

        Rows with direction +1 receive a set pulse on the pos device and a
        reset pulse on the neg device (weight moves up); -1 is the mirror;
        0 rows are untouched. Every applied pulse is classified against the
        target device's own thresholds and counted in the ledger, whether
        or not the device was already saturated. Requires exclusive access.
        """
        if not 0 <= col < self.n_cols:
            raise IndexError(f"column {col} out of range")
        directions = np.asarray(directions)
        if directions.shape != (self.n_rows,):
            raise ValueError(f"directions length {directions.shape} != n_rows {self.n_rows}")
        up = directions > 0
        dn = directions < 0
        n_programmed = int(up.sum() + dn.sum())
        if n_programmed == 0:
            return
        for steps, params, set_rows, reset_rows in (
            (self.pos_steps, self.pos_params, up, dn),
            (self.neg_steps, self.neg_params, dn, up),
        ):
            v1 = params.v_th1 if params.v_th1.ndim == 0 else params.v_th1[:, col]
            v2 = params.v_th2 if params.v_th2.ndim == 0 else params.v_th2[:, col]
            delta = np.where(set_rows, pulse_direction(set_amplitude, v1, v2, PulseKind.SET), 0)
            delta = np.where(reset_rows,
                             pulse_direction(reset_amplitude, v1, v2, PulseKind.RESET), delta)
            steps[:, col] = np.clip(steps[:, col] + delta, 0, params.n_states)
        ledger.set_pulses += n_programmed
        ledger.reset_pulses += n_programmed


def init_projection(n_rows: int, n_cols: int, mode: ProjectionMode,
                    rng: np.random.Generator,
                    sigma_fraction: float = 0.0,
                    params: DeviceParams | None = None) -> DifferentialCrossbar:
    """Random, thereafter frozen, projection crossbar.

    BINARY_PERFECT puts every device at exactly g_min or g_max with
    probability 1/2 each. GAUSSIAN_IMPERFECT does the same extremum draw
    but on devices whose extrema are Gaussian-dispersed around the means,
    so each device sits at its own dispersed endpoint.
    """
    if n_rows <= 0 or n_cols <= 0:
        raise ValueError("crossbar dimensions must be positive")
    params = params or DeviceParams()
    shape = (n_rows, n_cols)
    pos_steps = np.where(rng.random(shape) < 0.5, params.n_states, 0).astype(np.int32)
    neg_steps = np.where(rng.random(shape) < 0.5, params.n_states, 0).astype(np.int32)
    if mode is ProjectionMode.BINARY_PERFECT:
        if sigma_fraction != 0.0:
            raise ValueError("binary perfect mode uses zero dispersion")
        pos_params = ParamGrid.uniform(shape, params)
        neg_params = ParamGrid.uniform(shape, params)
    else:
        pos_params = ParamGrid.dispersed(shape, params, sigma_fraction, rng)
        neg_params = ParamGrid.dispersed(shape, params, sigma_fraction, rng)
    return DifferentialCrossbar(pos_steps, neg_steps, pos_params, neg_params)


def init_readout(n_rows: int, n_cols: int, rng: np.random.Generator,
                 sigma_fraction: float = 0.0,
                 params: DeviceParams | None = None,
                 start: str = "midpoint") -> DifferentialCrossbar:
    """Trainable readout crossbar, all pairs starting at equal conductance.

    The default start puts every device at half range (weight 0 via equal
    pair, with full headroom in both directions); "g_min" starts at the
    bottom of the range instead.
    """
    if n_rows <= 0 or n_cols <= 0:
        raise ValueError("crossbar dimensions must be positive")
    params = params or DeviceParams()
    shape = (n_rows, n_cols)
    if start == "g_min":
        index = 0
    elif start == "midpoint":
        index = params.n_states // 2
    else:
        raise ValueError(f"unknown start {start!r}")
    steps = np.full(shape, index, dtype=np.int32)
    if sigma_fraction == 0.0:
        pos_params = ParamGrid.uniform(shape, params)
        neg_params = ParamGrid.uniform(shape, params)
    else:
        pos_params = ParamGrid.dispersed(shape, params, sigma_fraction, rng)
        neg_params = ParamGrid.dispersed(shape, params, sigma_fraction, rng)
    return DifferentialCrossbar(steps.copy(), steps.copy(), pos_params, neg_params)


SNAPSHOT_MAGIC = "nanosynapse-crossbar-v1"
_FIELDS = ("g_min", "g_max", "v_th1", "v_th2")


def save_crossbar(xbar: DifferentialCrossbar, path) -> None:
    """Dump step indices and per-device parameters as CSV (see README)."""
    with open(path, "w") as f:
        f.write(f"# {SNAPSHOT_MAGIC}\n")
        f.write(f"# rows={xbar.n_rows} cols={xbar.n_cols} n_states={xbar.pos_params.n_states}\n")
        cols = ["row", "col", "pos_step", "neg_step"]
        cols += [f"pos_{name}" for name in _FIELDS] + [f"neg_{name}" for name in _FIELDS]
        f.write(",".join(cols) + "\n")
        for i in range(xbar.n_rows):
            for j in range(xbar.n_cols):
                vals = [str(i), str(j), str(int(xbar.pos_steps[i, j])), str(int(xbar.neg_steps[i, j]))]
                for grid in (xbar.pos_params, xbar.neg_params):
                    for name in _FIELDS:
                        vals.append(repr(float(getattr(grid, name)[i, j])))
                f.write(",".join(vals) + "\n")


def load_crossbar(path) -> DifferentialCrossbar:
    with open(path) as f:
        magic = f.readline().strip()
        if magic != f"# {SNAPSHOT_MAGIC}":
            raise ValueError(f"not a crossbar snapshot: {magic!r}")
        meta = dict(kv.split("=") for kv in f.readline().strip("# \n").split())
        n_rows, n_cols = int(meta["rows"]), int(meta["cols"])
        n_states = int(meta["n_states"])
        f.readline()  # column header
        shape = (n_rows, n_cols)
        pos_steps = np.zeros(shape, np.int32)
        neg_steps = np.zeros(shape, np.int32)
        grids = {f"{pol}_{name}": np.zeros(shape) for pol in ("pos", "neg") for name in _FIELDS}
        for line in f:
            parts = line.strip().split(",")
            i, j = int(parts[0]), int(parts[1])
            pos_steps[i, j] = int(parts[2])
            neg_steps[i, j] = int(parts[3])
            for k, key in enumerate(grids):
                grids[key][i, j] = float(parts[4 + k])
    pos_params = ParamGrid(*(grids[f"pos_{n}"] for n in _FIELDS), n_states)
    neg_params = ParamGrid(*(grids[f"neg_{n}"] for n in _FIELDS), n_states)
    return DifferentialCrossbar(pos_steps, neg_steps, pos_params, neg_params)
