import numpy as np
import pytest

from pairseg.core import MixtureParams, ModelEstimate
from pairseg.modelio import load_model, model_from_dict, model_to_dict, save_model
from pairseg.synth import random_model


def test_round_trip_bit_exact(tmp_path):
    est = ModelEstimate(
        params=MixtureParams.from_w0(0.35, 0.0141),
        theta0=random_model(16, 1),
        theta1=random_model(16, 2),
        residual=3.5e-4,
        method="spectral",
        r=7,
    )
    path = tmp_path / "model.json"
    save_model(est, path)
    loaded = load_model(path)
    assert np.array_equal(loaded.theta0.probs, est.theta0.probs)
    assert np.array_equal(loaded.theta1.probs, est.theta1.probs)
    assert loaded.params == est.params
    assert loaded.residual == est.residual
    assert loaded.method == "spectral"
    assert loaded.r == 7


def test_schema_keys():
    est = ModelEstimate(
        MixtureParams.from_w0(0.5), random_model(4, 0), random_model(4, 1), 0.0, "algebraic"
    )
    data = model_to_dict(est)
    assert set(data) == {"k", "w0", "w1", "eps_r", "r", "theta0", "theta1", "residual", "method"}
    assert data["k"] == 4


def test_k_mismatch_rejected():
    est = ModelEstimate(
        MixtureParams.from_w0(0.5), random_model(4, 0), random_model(4, 1), 0.0
    )
    data = model_to_dict(est)
    data["k"] = 5
    with pytest.raises(ValueError, match="does not match"):
        model_from_dict(data)
