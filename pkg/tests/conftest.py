import numpy as np
import pytest

from naptron import SynthConfig, generate


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def synth_pair(tmp_path):
    """A small deterministic train/test dataset pair on disk."""
    config = SynthConfig(seed=7, class_count=3, pattern_length=64,
                         train_per_class=10, test_id=30, test_ood=30, fp=10,
                         rho_train=0.0, rho_id=0.0, rho_ood=0.5)
    train_dir, test_dir = generate(config, tmp_path / "data")
    return config, train_dir, test_dir
