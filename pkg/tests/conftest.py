"""Shared fixtures. MNIST-backed fixtures are session-scoped because the
hidden-layer computation over 70k images is the expensive part of the suite;
every test that needs it shares one computation per input encoding."""

import os

import numpy as np
import pytest

from nanosynapse import data
from nanosynapse.experiments import ExperimentConfig, compute_hidden, prepare_presentations

MNIST_DIR = os.environ.get("NANOSYN_MNIST_DIR", "/root/data/mnist")


def mnist_available() -> bool:
    return os.path.exists(os.path.join(MNIST_DIR, "train-images-idx3-ubyte"))


requires_mnist = pytest.mark.skipif(
    not mnist_available(),
    reason=f"MNIST IDX files not found in {MNIST_DIR} (set NANOSYN_MNIST_DIR)",
)


@pytest.fixture(scope="session")
def mnist_config() -> ExperimentConfig:
    return ExperimentConfig(task="mnist", data_path=MNIST_DIR)


@pytest.fixture(scope="session")
def mnist_samples(mnist_config):
    train = data.load_mnist(os.path.join(MNIST_DIR, "train-images-idx3-ubyte"),
                            os.path.join(MNIST_DIR, "train-labels-idx1-ubyte"),
                            frames=mnist_config.frames)
    test = data.load_mnist(os.path.join(MNIST_DIR, "t10k-images-idx3-ubyte"),
                           os.path.join(MNIST_DIR, "t10k-labels-idx1-ubyte"),
                           frames=mnist_config.frames)
    return train, test


@pytest.fixture(scope="session")
def mnist_labels(mnist_samples):
    train, test = mnist_samples
    return (np.array([s.label for s in train]),
            np.array([s.label for s in test]))


@pytest.fixture(scope="session")
def mnist_analog_hidden(mnist_config, mnist_samples):
    return compute_hidden(mnist_config, *mnist_samples)


@pytest.fixture(scope="session")
def mnist_spiking_hidden(mnist_config, mnist_samples):
    from dataclasses import replace
    cfg = replace(mnist_config, input_mode="spiking")
    train, test = prepare_presentations(cfg, *mnist_samples)
    return compute_hidden(cfg, train, test)
