"""Fixed JSON schema for estimated appearance models.

Schema: {k, w0, w1, eps_r, r, theta0[], theta1[], residual, method}.
Floats survive the round trip bit-for-bit (JSON carries full repr).
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import Distribution, MixtureParams, ModelEstimate


def model_to_dict(est: ModelEstimate) -> dict:
    return {
        "k": est.theta0.k,
        "w0": est.params.w0,
        "w1": est.params.w1,
        "eps_r": est.params.eps_r,
        "r": est.r,
        "theta0": est.theta0.probs.tolist(),
        "theta1": est.theta1.probs.tolist(),
        "residual": est.residual,
        "method": est.method,
    }


def model_from_dict(data: dict) -> ModelEstimate:
    theta0 = Distribution(data["theta0"])
    theta1 = Distribution(data["theta1"])
    if theta0.k != data["k"] or theta1.k != data["k"]:
        raise ValueError(f"model file k={data['k']} does not match theta length")
    return ModelEstimate(
        params=MixtureParams(data["w0"], data["w1"], data["eps_r"]),
        theta0=theta0,
        theta1=theta1,
        residual=float(data["residual"]),
        method=str(data.get("method", "")),
        r=int(data.get("r", 0)),
    )


def save_model(est: ModelEstimate, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(est), indent=1) + "\n")


def load_model(path) -> ModelEstimate:
    return model_from_dict(json.loads(Path(path).read_text()))
