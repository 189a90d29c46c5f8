import numpy as np
import pytest

from doa_ae import (
    ArrayConfig,
    ImperfectionWeights,
    build_imperfection_model,
    build_partition,
    steering_function,
)


@pytest.fixture(scope="session")
def ula20():
    """The reference 20-element half-wavelength array with full imperfections."""
    cfg = ArrayConfig(20, 0.5)
    weights = ImperfectionWeights()
    model = build_imperfection_model(cfg)
    return {
        "cfg": cfg,
        "weights": weights,
        "model": model,
        "steer_ideal": steering_function(cfg),
        "steer_true": steering_function(cfg, weights, model),
        "partition": build_partition(-60.0, 60.0, 6),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
