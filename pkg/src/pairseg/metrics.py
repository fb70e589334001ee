"""Evaluation measures: Bhattacharyya model distance and Jaccard overlap.

Region labels are arbitrary, so both measures are evaluated under the
identity pairing and the swapped pairing and the better one wins (min for
distances, max for overlaps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BinaryMask, Distribution


@dataclass(frozen=True)
class EvalReport:
    d_b: float | None  # permutation-minimized average Bhattacharyya distance
    jac: float | None  # permutation-maximized average Jaccard index
    swapped_models: bool | None = None
    swapped_masks: bool | None = None

    def __post_init__(self):
        if self.d_b is not None and not self.d_b >= 0:
            raise ValueError(f"d_b must be >= 0, got {self.d_b}")
        if self.jac is not None and not (0.0 <= self.jac <= 1.0):
            raise ValueError(f"jac must lie in [0,1], got {self.jac}")


def bhattacharyya(p: Distribution, q: Distribution) -> float:
    """-ln sum_i sqrt(p_i q_i); +inf when the supports are disjoint."""
    coeff = float(np.sqrt(p.probs * q.probs).sum())
    if coeff <= 0.0:
        return math.inf
    return max(0.0, -math.log(coeff))


def model_distance(
    gt0: Distribution,
    gt1: Distribution,
    est0: Distribution,
    est1: Distribution,
) -> tuple[float, bool]:
    """Average Bhattacharyya distance minimized over the label permutation."""
    straight = 0.5 * (bhattacharyya(gt0, est0) + bhattacharyya(gt1, est1))
    crossed = 0.5 * (bhattacharyya(gt0, est1) + bhattacharyya(gt1, est0))
    if crossed < straight:
        return crossed, True
    return straight, False


def jaccard(a: np.ndarray, b: np.ndarray) -> float:
    """|A & B| / |A | B| for boolean region indicators; 1 when both are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"region shape mismatch: {a.shape} vs {b.shape}")
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    return float(np.count_nonzero(a & b)) / union


def segmentation_score(gt: BinaryMask, est: BinaryMask) -> tuple[float, bool]:
    """Average Jaccard index maximized over the label permutation."""
    if not gt.same_shape(est):
        raise ValueError(
            f"mask dimensions differ: {gt.width}x{gt.height} vs {est.width}x{est.height}"
        )
    straight = 0.5 * (jaccard(gt.region(0), est.region(0)) + jaccard(gt.region(1), est.region(1)))
    crossed = 0.5 * (jaccard(gt.region(0), est.region(1)) + jaccard(gt.region(1), est.region(0)))
    if crossed > straight:
        return crossed, True
    return straight, False
