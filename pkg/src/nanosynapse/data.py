"""Dataset ingestion and presentation.

MNIST arrives as standard IDX files and is presented as 28 sequential
frames (image columns by default, a left-to-right scan; rows available via
the ``frames`` option). Cochleagrams arrive through a small binary
container format, or from the built-in synthetic generator for desk-scale
runs. Spike encoding and channel bit-flip noise turn analog presentations
into (possibly corrupted) spiking ones.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .spatiotemporal import FrameSequence

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

COCHLEAGRAM_MAGIC = b"NSYNCOCH"
COCHLEAGRAM_VERSION = 1

MNIST_SPIKE_THRESHOLD = 0.5   # strict: luminosity must exceed this to spike


class IdxFormatError(ValueError):
    """Raised for malformed IDX files, with the failing detail."""


def _read_exact(f, n, what):
    buf = f.read(n)
    if len(buf) != n:
        raise IdxFormatError(f"truncated file while reading {what}")
    return buf


def load_idx_images(path) -> np.ndarray:
    """Raw uint8 image tensor (n, rows, cols) from an IDX3 file."""
    with open(path, "rb") as f:
        magic, = struct.unpack(">i", _read_exact(f, 4, "magic"))
        if magic != IDX_IMAGES_MAGIC:
            raise IdxFormatError(f"bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}")
        n, rows, cols = struct.unpack(">3i", _read_exact(f, 12, "dimensions"))
        data = _read_exact(f, n * rows * cols, "pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(n, rows, cols)


def load_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic, = struct.unpack(">i", _read_exact(f, 4, "magic"))
        if magic != IDX_LABELS_MAGIC:
            raise IdxFormatError(f"bad label magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}")
        n, = struct.unpack(">i", _read_exact(f, 4, "count"))
        data = _read_exact(f, n, "label data")
    return np.frombuffer(data, dtype=np.uint8).copy()


def load_mnist(images_path, labels_path, frames: str = "columns") -> list[FrameSequence]:
    """MNIST as frame sequences, pixels scaled to [0, 1] by division by 255.

    ``frames="columns"`` presents image columns as successive time frames
    (channels are pixel rows); ``frames="rows"`` is the transpose.
    """
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if len(images) != len(labels):
        raise IdxFormatError(f"{len(images)} images but {len(labels)} labels")
    if frames == "rows":
        images = images.transpose(0, 2, 1)
    elif frames != "columns":
        raise ValueError(f"frames must be 'columns' or 'rows', got {frames!r}")
    scaled = images.astype(np.float64) / 255.0
    return [FrameSequence(int(labels[i]), scaled[i]) for i in range(len(labels))]


def write_cochleagrams(path, samples) -> None:
    """Write samples in the cochleagram container format (see README)."""
    samples = list(samples)
    n_channels = samples[0].n_channels if samples else 0
    with open(path, "wb") as f:
        f.write(COCHLEAGRAM_MAGIC)
        f.write(struct.pack("<III", COCHLEAGRAM_VERSION, n_channels, len(samples)))
        for s in samples:
            if s.n_channels != n_channels:
                raise ValueError("all samples must share the channel count")
            f.write(struct.pack("<BI", s.label, s.n_frames))
            f.write(s.values.T.astype("<f4").tobytes())  # frame-major


def load_cochleagram(path) -> list[FrameSequence]:
    with open(path, "rb") as f:
        magic = f.read(len(COCHLEAGRAM_MAGIC))
        if magic != COCHLEAGRAM_MAGIC:
            raise ValueError(f"not a cochleagram container: {magic!r}")
        version, n_channels, n_samples = struct.unpack("<III", f.read(12))
        if version != COCHLEAGRAM_VERSION:
            raise ValueError(f"unsupported container version {version}")
        samples = []
        for _ in range(n_samples):
            label, n_frames = struct.unpack("<BI", f.read(5))
            raw = f.read(4 * n_channels * n_frames)
            values = np.frombuffer(raw, dtype="<f4").reshape(n_frames, n_channels).T
            values = values.astype(np.float64)
            if np.abs(values).max(initial=0.0) > 1.0:
                raise ValueError("cochleagram values out of [-1, 1]")
            samples.append(FrameSequence(label, values))
    return samples


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs of the synthetic cochleagram generator."""

    n_channels: int = 77
    min_frames: int = 50
    max_frames: int = 100
    sectors_per_class: int = 2
    signal_amplitude: float = 0.55
    noise_sigma: float = 0.015
    angle_spread_fraction: float = 0.05   # cluster std as fraction of sector width


def generate_synthetic_cochleagrams(n_samples: int, n_classes: int, rng_seed: int,
                                    spec: SyntheticSpec = SyntheticSpec()) -> list[FrameSequence]:
    """Class-conditioned synthetic cochleagrams, separable but not linearly.

    Each sample carries a two-dimensional latent direction embedded into
    the channels through a fixed smooth random mixing. The circle of
    directions is cut into equal angular sectors and every class owns two
    non-adjacent, non-antipodal sectors, so each class is split across two
    separated clusters that a one-vs-rest sign rule on raw channel sums
    cannot satisfy, while random sign projections resolve the angle easily.
    Per-sample random time warps and additive
    channel noise provide nuisance variability; values are clipped to
    [-1, 1]. Classes are balanced; deterministic per seed.
    """
    rng = np.random.default_rng(rng_seed)
    n_sectors = n_classes * spec.sectors_per_class
    # class -> sector assignment: own sector c plus a shifted one in the
    # second half ring, offset so the pair is neither adjacent nor antipodal
    sector_class = np.empty(n_sectors, dtype=int)
    offset = max(1, n_classes // 3)
    for c in range(n_classes):
        sector_class[c] = c
        sector_class[n_classes + (c + offset) % n_classes] = c
    class_sectors = [np.nonzero(sector_class == c)[0] for c in range(n_classes)]

    # smooth random channel embedding of the latent, low-order Fourier.
    # The third (constant-input) component offsets the latent circle away
    # from the origin: without it, opposite angles would produce exactly
    # opposite channel patterns, an artificial symmetry no real signal has.
    ch = np.arange(spec.n_channels)
    mixing = np.zeros((spec.n_channels, 3))
    for d in range(3):
        for harmonic in range(1, 5):
            amp = rng.normal(0, 1.0 / harmonic)
            phase = rng.uniform(0, 2 * np.pi)
            mixing[:, d] += amp * np.cos(2 * np.pi * harmonic * ch / spec.n_channels + phase)
    # orthonormalize so the latent circle embeds isometrically (a near
    # rank-1 mixing would collapse the angular structure)
    mixing, _ = np.linalg.qr(mixing)
    mixing /= np.sqrt(np.mean(mixing**2))

    sector_width = 2 * np.pi / n_sectors
    spread = spec.angle_spread_fraction * sector_width
    labels = np.arange(n_samples) % n_classes
    rng.shuffle(labels)
    samples = []
    for label in labels:
        sector = int(rng.choice(class_sectors[int(label)]))
        # cluster around the sector center, truncated at 2.5 sigma so the
        # angular supports of neighboring sectors never approach each other
        jitter = np.clip(rng.normal(0.0, spread), -2.5 * spread, 2.5 * spread)
        theta = (sector + 0.5) * sector_width + jitter
        z = np.array([np.cos(theta), np.sin(theta), 1.0])
        k = int(rng.integers(spec.min_frames, spec.max_frames + 1))
        t = (np.arange(k) + 0.5) / k
        warp = rng.uniform(0.6, 1.4)
        envelope = np.sin(np.pi * t) ** warp
        profile = spec.signal_amplitude * (mixing @ z)
        values = profile[:, None] * envelope[None, :]
        values = values + rng.normal(0, spec.noise_sigma, values.shape)
        samples.append(FrameSequence(int(label), np.clip(values, -1.0, 1.0)))
    return samples


def encode_spiking(sample: FrameSequence, dataset_kind: str) -> FrameSequence:
    """Analog-to-spiking conversion.

    Cochleagrams spike on strictly positive values; MNIST spikes where
    pixel luminosity strictly exceeds 0.5.
    """
    if dataset_kind == "cochleagram":
        spikes = (sample.values > 0.0).astype(np.float64)
    elif dataset_kind == "mnist":
        spikes = (sample.values > MNIST_SPIKE_THRESHOLD).astype(np.float64)
    else:
        raise ValueError(f"unknown dataset kind {dataset_kind!r}")
    return FrameSequence(sample.label, spikes, binary=True)


def inject_noise(sample: FrameSequence, flip_probability: float,
                 rng: np.random.Generator) -> FrameSequence:
    """Flip each binary element independently with the given probability."""
    if not sample.binary:
        raise ValueError("noise injection applies to spiking-mode samples only")
    if not 0 <= flip_probability <= 1:
        raise ValueError(f"flip probability out of range: {flip_probability}")
    flips = rng.random(sample.values.shape) < flip_probability
    return FrameSequence(sample.label, np.abs(sample.values - flips), binary=True)
