"""Hidden neurons with spatio-temporal integration windows.

Each hidden neuron accumulates the projection crossbar's output for its
column over a per-neuron subset of time frames and emits a binary
excitatory (+1) / inhibitory (-1) activation, the sign of the accumulated
sum. Density 1 (the uniform scheme) integrates every frame; lower densities
give each neuron its own contiguous window of frames, fixed once at
generation and reused for every presentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crossbar import DifferentialCrossbar


@dataclass
class FrameSequence:
    """One labeled sample: n_channels x n_frames of activations."""

    label: int
    values: np.ndarray
    binary: bool = False

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] < 1:
            raise ValueError(f"values must be channels x frames, got {self.values.shape}")
        if self.binary:
            if not np.isin(self.values, (0.0, 1.0)).all():
                raise ValueError("binary sample contains non-binary values")
        elif np.abs(self.values).max() > 1.0:
            raise ValueError("analog values must lie in [-1, 1]")

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


@dataclass
class WindowMaskSet:
    """Per-neuron frame-inclusion masks, (n_neurons, max_frames) boolean."""

    included: np.ndarray
    density: float

    @property
    def n_neurons(self) -> int:
        return self.included.shape[0]

    @property
    def max_frames(self) -> int:
        return self.included.shape[1]


@dataclass
class HiddenActivation:
    accumulators: np.ndarray   # pre-sign sums, length M
    outputs: np.ndarray        # +1 / -1, length M


def generate_masks(n_neurons: int, max_frames: int, density: float,
                   rng: np.random.Generator) -> WindowMaskSet:
    """Draw one integration window per hidden neuron.

    Window lengths are spread around density * max_frames (population mean
    equals the target count) and start positions are uniform, so neurons
    specialize on different parts of the presentation. Density 1 yields
    all-inclusive masks for every neuron, which is exactly the uniform
    scheme.
    """
    if not 0 < density <= 1:
        raise ValueError(f"density must be in (0, 1], got {density}")
    if density == 1.0:
        return WindowMaskSet(np.ones((n_neurons, max_frames), dtype=bool), density)
    k = max(1, round(density * max_frames))
    spread = min(max(1, round(0.7 * k)), k - 1, max_frames - k)
    spread = max(spread, 0)
    mask = np.zeros((n_neurons, max_frames), dtype=bool)
    lengths = rng.integers(k - spread, k + spread + 1, n_neurons)
    for m in range(n_neurons):
        length = int(lengths[m])
        start = int(rng.integers(0, max_frames - length + 1))
        mask[m, start:start + length] = True
    return WindowMaskSet(mask, density)


def integrate_sample(projection: DifferentialCrossbar, sample: FrameSequence,
                     masks: WindowMaskSet) -> HiddenActivation:
    """Accumulate masked per-frame projection outputs and take signs.

    Frames beyond the sample's length are simply absent from the sum, so
    masks stay sample-independent for variable-length data. Tie-break:
    sign(0) = +1, making sparse spiking inputs deterministic.
    """
    if sample.n_channels != projection.n_rows:
        raise ValueError(f"sample has {sample.n_channels} channels, "
                         f"projection expects {projection.n_rows}")
    if masks.n_neurons != projection.n_cols:
        raise ValueError("mask count must equal projection columns")
    k = min(sample.n_frames, masks.max_frames)
    per_frame = projection.forward_batch(sample.values[:, :k].T)  # (k, M)
    acc = (per_frame * masks.included[:, :k].T).sum(axis=0)
    return HiddenActivation(acc, np.where(acc >= 0, 1, -1).astype(np.int8))


def integrate_batch(projection: DifferentialCrossbar, values: np.ndarray,
                    masks: WindowMaskSet) -> np.ndarray:
    """Hidden outputs for a stack of equal-length samples.

    ``values`` is (n_samples, n_channels, n_frames); returns int8
    (n_samples, M) of +/-1. Equivalent to integrate_sample per sample but
    orders the work as one matrix product per frame.
    """
    if values.shape[1] != projection.n_rows:
        raise ValueError("channel count mismatch")
    weights = projection.weights()
    n, _, n_frames = values.shape
    k = min(n_frames, masks.max_frames)
    acc = np.zeros((n, projection.n_cols))
    for f in range(k):
        acc += (values[:, :, f] @ weights) * masks.included[:, f]
    return np.where(acc >= 0, 1, -1).astype(np.int8)


def integrate_dataset(projection: DifferentialCrossbar, samples,
                      masks: WindowMaskSet) -> np.ndarray:
    """Hidden outputs (n_samples, M) for a list of FrameSequence."""
    lengths = {s.n_frames for s in samples}
    if len(lengths) == 1:
        return integrate_batch(projection, np.stack([s.values for s in samples]), masks)
    return np.stack([integrate_sample(projection, s, masks).outputs for s in samples])


def save_masks(masks: WindowMaskSet, path) -> None:
    with open(path, "w") as f:
        f.write(f"# nanosynapse-masks-v1 density={masks.density!r}\n")
        for row in masks.included:
            f.write("".join("1" if v else "0" for v in row) + "\n")


def load_masks(path) -> WindowMaskSet:
    with open(path) as f:
        header = f.readline()
        if not header.startswith("# nanosynapse-masks-v1"):
            raise ValueError("not a mask file")
        density = float(header.rsplit("density=", 1)[1])
        rows = [[c == "1" for c in line.strip()] for line in f if line.strip()]
    return WindowMaskSet(np.array(rows, dtype=bool), density)
