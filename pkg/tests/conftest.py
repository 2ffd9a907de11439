import pytest

from mlpmod.data import make_synthetic_dataset
from mlpmod.harness import ExperimentConfig
from mlpmod.mlp import TrainConfig
from mlpmod.spectral import SpectralConfig

SMOKE_WIDTHS = (784, 16, 16, 16, 16, 10)


@pytest.fixture(scope="session")
def smoke_data_dir(tmp_path_factory):
    """A 20-image synthetic dataset shared by the harness/CLI/acceptance tests."""
    data_dir = tmp_path_factory.mktemp("data")
    make_synthetic_dataset(data_dir, name="smoke", n_train=20, n_test=20, seed=0)
    return data_dir


@pytest.fixture(scope="session")
def full_shape_mnist_dir(tmp_path_factory):
    """Synthetic random data with the real mnist split sizes (60000/10000)."""
    data_dir = tmp_path_factory.mktemp("fulldata")
    make_synthetic_dataset(data_dir, name="mnist", n_train=60000, n_test=10000, seed=0)
    return data_dir


def smoke_config(method="weights", activation="relu", dropout=False, seed=0, k=4):
    return ExperimentConfig(
        dataset="smoke",
        activation=activation,
        dropout=dropout,
        method=method,
        k=k,
        layer_widths=SMOKE_WIDTHS,
        train=TrainConfig(epochs=1, rng_seed=seed),
        spectral=SpectralConfig(k=k, rng_seed=0),
    )
