"""Validated domain types shared by every other module.

The model world is small: an image over a finite label alphabet, binary
region masks, probability vectors over the alphabet, joint pair-value
distributions at a fixed pixel distance, and the mixture parameters
(region area fractions plus a boundary-mixing probability) that tie them
together.  All types are immutable after construction; constructors
reject every invariant violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PROB_SUM_TOL = 1e-9
PAIR_SYMMETRY_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12


class EstimationError(ValueError):
    """A model-estimation precondition failed; the message names the condition."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LabelImage:
    """2-D grid of discrete label indices over an alphabet of size k."""

    labels: np.ndarray  # (height, width) int32, row-major
    k: int

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        if labels.ndim != 2:
            raise ValueError(f"labels must be 2-D, got shape {labels.shape}")
        if labels.size < 1:
            raise ValueError("image must contain at least one pixel")
        if self.k < 1:
            raise ValueError(f"alphabet size must be >= 1, got {self.k}")
        if labels.min() < 0 or labels.max() >= self.k:
            bad = int(labels.max() if labels.max() >= self.k else labels.min())
            raise ValueError(f"label {bad} out of range [0, {self.k})")
        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def num_pixels(self) -> int:
        return self.labels.size


def new_label_image(width: int, height: int, labels, k: int) -> LabelImage:
    """Build a LabelImage from a row-major flat sequence of label indices."""
    if width < 1 or height < 1:
        raise ValueError(f"dimensions must be positive, got {width}x{height}")
    flat = np.asarray(labels, dtype=np.int32)
    if flat.size != width * height:
        raise ValueError(
            f"expected {width * height} labels for a {width}x{height} image, got {flat.size}"
        )
    return LabelImage(flat.reshape(height, width), k)


@dataclass(frozen=True)
class BinaryMask:
    """2-D grid of {0,1} region assignments."""

    bits: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 2 or bits.size < 1:
            raise ValueError(f"mask must be a nonempty 2-D grid, got shape {bits.shape}")
        if bits.max(initial=0) > 1:
            raise ValueError("mask entries must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(bits))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def region(self, which: int) -> np.ndarray:
        """Boolean indicator of region 0 or 1."""
        if which not in (0, 1):
            raise ValueError("region must be 0 or 1")
        return self.bits == which

    def area_fraction(self, which: int = 0) -> float:
        return float(np.count_nonzero(self.region(which))) / self.bits.size

    def same_shape(self, other) -> bool:
        return (self.height, self.width) == (other.height, other.width)


@dataclass(frozen=True)
class Distribution:
    """Probability vector over the label alphabet (sums to 1, non-negative)."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 1:
            raise ValueError("probs must be a nonempty 1-D vector")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probs must be finite")
        if probs.min() < 0:
            raise ValueError(f"negative probability {probs.min()!r}")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1 within {PROB_SUM_TOL}")
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def k(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class PairDistribution:
    """Joint distribution of value pairs at L1 pixel distance r.

    Stored symmetrized: exchangeable pair sampling never distinguishes the
    two endpoints, and a symmetric matrix guarantees real eigenpairs for
    the spectral estimator.
    """

    probs: np.ndarray  # (k, k)
    r: int

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1] or probs.size < 1:
            raise ValueError(f"pair probs must be square, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise ValueError("pair probs must be finite")
        if probs.min() < 0:
            raise ValueError(f"negative pair probability {probs.min()!r}")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"pair probabilities sum to {total!r}, not 1 within {PROB_SUM_TOL}")
        asym = float(np.abs(probs - probs.T).max())
        if asym > PAIR_SYMMETRY_TOL:
            raise ValueError(f"pair matrix asymmetric by {asym!r} (> {PAIR_SYMMETRY_TOL})")
        if self.r < 0:
            raise ValueError(f"distance r must be >= 0, got {self.r}")
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def k(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class MixtureParams:
    """Region area fractions (w0, w1) and boundary-mixing probability eps_r."""

    w0: float
    w1: float
    eps_r: float

    def __post_init__(self):
        if not (0.0 < self.w0 < 1.0 and 0.0 < self.w1 < 1.0):
            raise ValueError(f"area fractions must lie in (0,1), got w0={self.w0}, w1={self.w1}")
        if abs(self.w0 + self.w1 - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"w0 + w1 = {self.w0 + self.w1!r}, not 1 within {WEIGHT_SUM_TOL}")
        if self.eps_r < 0:
            raise ValueError(f"eps_r must be >= 0, got {self.eps_r}")

    @classmethod
    def from_w0(cls, w0: float, eps_r: float = 0.0) -> "MixtureParams":
        return cls(w0=float(w0), w1=1.0 - float(w0), eps_r=float(eps_r))


@dataclass(frozen=True)
class ModelEstimate:
    """Full output of an appearance-model estimator."""

    params: MixtureParams
    theta0: Distribution
    theta1: Distribution
    residual: float = 0.0  # Frobenius norm of the pair-distribution misfit
    method: str = ""
    r: int = 0

    def __post_init__(self):
        if not (self.residual >= 0.0):
            raise ValueError(f"residual must be >= 0, got {self.residual}")
        if self.theta0.k != self.theta1.k:
            raise ValueError("theta0 and theta1 must share an alphabet")


def normalize_clamped(raw) -> Distribution:
    """Clamp negatives to zero and renormalize to a Distribution.

    Raises ValueError when no entry is positive after clamping.  Bitwise
    idempotent: the correctly-rounded sum of the result is forced to
    exactly 1.0 (nudging the smallest material entry by the sub-ulp
    shortfall), so a second application divides by exactly 1.0, which is
    the identity.
    """
    vec = np.asarray(raw, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 1:
        raise ValueError("input must be a nonempty 1-D vector")
    out = np.maximum(vec, 0.0)
    total = math.fsum(out)
    if not (total > 0.0 and math.isfinite(total)):
        raise ValueError("no positive mass after clamping; cannot normalize")
    out = out / total
    for _ in range(8):
        shortfall = 1.0 - math.fsum(out)
        if shortfall == 0.0:
            break
        eligible = np.flatnonzero(out > 1e-12)
        j = eligible[np.argmin(out[eligible])]
        out[j] += shortfall
    return Distribution(out)
