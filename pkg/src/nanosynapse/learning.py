"""Online sign-conditional readout training, inference, and the
pseudo-inverse regression oracle.

The training cell compares, per class column, the sign of the readout
output with the sign of the target (+1 for the labeled class, -1
otherwise). Matching columns are left untouched; mismatched columns
receive one conditional programming event that moves every device pair one
quantization step toward agreement. There is no tunable learning rate: the
step is the hardware's own quantization step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crossbar import DifferentialCrossbar
from .energy import EnergyLedger
from .spatiotemporal import HiddenActivation


@dataclass
class TrainConfig:
    epochs: int = 1
    shuffle_seed: int = 0
    convergence_log_interval: int = 2000   # samples between test evaluations

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class ConvergenceTrace:
    """(samples_seen, test_accuracy, cumulative_pulses) checkpoints."""

    checkpoints: list = field(default_factory=list)

    def record(self, samples_seen: int, test_accuracy: float, cumulative_pulses: int):
        if self.checkpoints and samples_seen <= self.checkpoints[-1][0]:
            raise ValueError("samples_seen must be strictly increasing")
        self.checkpoints.append((samples_seen, test_accuracy, cumulative_pulses))

    @property
    def final_accuracy(self) -> float:
        return self.checkpoints[-1][1]


def targets_for(label: int, n_classes: int) -> np.ndarray:
    """One-hot coding over classes mapped to {+1 correct, -1 otherwise}."""
    t = np.full(n_classes, -1.0)
    t[label] = 1.0
    return t


def train_step(readout: DifferentialCrossbar, hidden: HiddenActivation, label: int,
               ledger: EnergyLedger) -> np.ndarray:
    """One conditional update; returns per-column error flags.

    For each mismatched column the row direction is the product of the
    hidden sign and the column target: potentiate pairs whose hidden sign
    agrees with the target, depress the rest.
    """
    outputs = hidden.outputs
    if outputs.shape[0] != readout.n_rows:
        raise ValueError("hidden size does not match readout rows")
    y = readout.forward(outputs.astype(np.float64))
    t = targets_for(label, readout.n_cols)
    errors = np.where(y >= 0, 1.0, -1.0) != t
    for j in np.nonzero(errors)[0]:
        readout.program_column(int(j), outputs * int(t[j]), ledger)
    return errors


def infer(readout: DifferentialCrossbar, hidden: HiddenActivation) -> int:
    """Argmax over column outputs; ties go to the lowest class index."""
    return int(np.argmax(readout.forward(hidden.outputs.astype(np.float64))))


def evaluate(readout: DifferentialCrossbar, activations: np.ndarray,
             labels: np.ndarray) -> float:
    """Test accuracy over precomputed hidden activations."""
    scores = activations.astype(np.float64) @ readout.weights()
    return float((np.argmax(scores, axis=1) == labels).mean())


def run_training(readout: DifferentialCrossbar,
                 train_activations: np.ndarray, train_labels: np.ndarray,
                 test_activations: np.ndarray, test_labels: np.ndarray,
                 config: TrainConfig,
                 ledger: EnergyLedger | None = None) -> tuple[ConvergenceTrace, EnergyLedger]:
    """Online training over shuffled epochs with periodic test checkpoints.

    Activations are precomputed (the projection is frozen, so hidden
    outputs are a pure function of the input data); the readout is trained
    in place. Deterministic given the shuffle seed.
    """
    ledger = ledger if ledger is not None else EnergyLedger()
    rng = np.random.default_rng(config.shuffle_seed)
    trace = ConvergenceTrace()
    n = len(train_activations)
    seen = 0
    for _ in range(config.epochs):
        for i in rng.permutation(n):
            train_step(readout, HiddenActivation(None, train_activations[i]),
                       int(train_labels[i]), ledger)
            seen += 1
            if seen % config.convergence_log_interval == 0:
                trace.record(seen, evaluate(readout, test_activations, test_labels),
                             ledger.total_pulses)
    if n and seen % config.convergence_log_interval != 0:
        trace.record(seen, evaluate(readout, test_activations, test_labels),
                     ledger.total_pulses)
    return trace, ledger


def pseudo_inverse_readout(activations: np.ndarray, targets: np.ndarray,
                           regularization: float = 0.0) -> np.ndarray:
    """Least-squares readout weights, the software verification oracle.

    Minimizes ||A W - Z||^2 + reg ||W||^2. With reg = 0 this is the
    Moore-Penrose solution; the result is a plain weight matrix, never
    programmed onto devices.
    """
    A = np.asarray(activations, dtype=np.float64)
    Z = np.asarray(targets, dtype=np.float64)
    if A.shape[0] < 1:
        raise ValueError("need at least one sample")
    if regularization < 0:
        raise ValueError("regularization must be nonnegative")
    if regularization == 0.0:
        return np.linalg.pinv(A) @ Z
    gram = A.T @ A + regularization * np.eye(A.shape[1])
    return np.linalg.solve(gram, A.T @ Z)
