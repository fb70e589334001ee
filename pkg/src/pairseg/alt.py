"""Alternation baseline: iterate histogram re-estimation and graph cuts.

Starting from a fixed initial mask (a centered square covering half the
image by default), each iteration re-estimates both region histograms
with additive smoothing K and then re-segments with a graph cut under the
current models.  The loop stops when the mask repeats exactly or the
iteration cap is hit.  Each cut step is an exact minimizer of the
segmentation energy given the current smoothed histograms, which is
asserted per iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BinaryMask, Distribution, LabelImage, MixtureParams, ModelEstimate
from .mrf import EnergyParams, boundary_length, energy, segment_graphcut


@dataclass(frozen=True)
class AltConfig:
    lam: float = 5.0
    smoothing_K: float = 1.0
    max_iters: int = 50
    init: BinaryMask | None = None  # default: centered half-area square
    likelihood_floor: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.smoothing_K < 0:
            raise ValueError(f"smoothing_K must be >= 0, got {self.smoothing_K}")


@dataclass(frozen=True)
class AltIteration:
    """Trace entry: state at the start of iteration `index` (1-based)."""

    index: int
    energy: float
    theta0: Distribution
    theta1: Distribution
    boundary: int


@dataclass(frozen=True)
class AltResult:
    estimate: ModelEstimate
    mask: BinaryMask
    iterations: int
    trace: tuple[AltIteration, ...]

    @property
    def single_region(self) -> bool:
        bits = self.mask.bits
        return bool(bits.min() == bits.max())


def region_histogram(img: LabelImage, mask: BinaryMask, region: int, K: float) -> Distribution:
    """Smoothed histogram of the labels inside one region: (count + K) / (n + K*k).

    An empty region is fine for K > 0 (pure smoothing gives the uniform
    distribution) and an error for K = 0.
    """
    if not mask.same_shape(img):
        raise ValueError(
            f"mask {mask.width}x{mask.height} does not match image {img.width}x{img.height}"
        )
    values = img.labels[mask.region(region)]
    counts = np.bincount(values, minlength=img.k).astype(np.float64)
    denom = values.size + K * img.k
    if denom <= 0:
        raise ValueError(f"region {region} is empty and K={K}; histogram undefined")
    return Distribution((counts + K) / denom)


def half_area_square(width: int, height: int) -> BinaryMask:
    """Centered axis-aligned square of (approximately) half the image area.

    The square is region 1, the surround region 0.
    """
    side = int(round(math.sqrt(width * height / 2.0)))
    side = max(1, min(side, width, height))
    bits = np.zeros((height, width), dtype=np.uint8)
    y0 = (height - side) // 2
    x0 = (width - side) // 2
    bits[y0 : y0 + side, x0 : x0 + side] = 1
    return BinaryMask(bits)


def alt_run(img: LabelImage, config: AltConfig = AltConfig()) -> AltResult:
    """Alternate histogram estimation and graph-cut segmentation to a fixed point.

    Returns the final models (as a ModelEstimate whose area fractions are
    the final region areas and whose eps_r is 0, since this scheme does
    not model boundary mixing), the final mask, the number of completed
    iterations, and a per-iteration trace of energies and models.
    """
    eparams = EnergyParams(lam=config.lam, likelihood_floor=config.likelihood_floor)
    mask = config.init if config.init is not None else half_area_square(img.width, img.height)
    if not mask.same_shape(img):
        raise ValueError("initial mask does not match image dimensions")

    trace: list[AltIteration] = []
    theta0 = theta1 = None
    iterations = 0
    for step in range(1, config.max_iters + 1):
        theta0 = region_histogram(img, mask, 0, config.smoothing_K)
        theta1 = region_histogram(img, mask, 1, config.smoothing_K)
        current = energy(img, mask, theta0, theta1, eparams)
        trace.append(
            AltIteration(step, current, theta0, theta1, boundary_length(mask))
        )
        new_mask = segment_graphcut(img, theta0, theta1, eparams)
        iterations = step
        after_cut = energy(img, new_mask, theta0, theta1, eparams)
        assert after_cut <= current + 1e-9 * (1.0 + abs(current)), (
            "graph cut increased the energy it minimizes"
        )
        if np.array_equal(new_mask.bits, mask.bits):
            break
        mask = new_mask

    # area fractions clamped to the open interval at half-pixel resolution
    # so a collapsed (single-region) mask still yields valid parameters
    tiny = 0.5 / img.num_pixels
    w0 = min(max(mask.area_fraction(0), tiny), 1.0 - tiny)
    estimate = ModelEstimate(
        params=MixtureParams(w0, 1.0 - w0, 0.0),
        theta0=theta0,
        theta1=theta1,
        residual=0.0,
        method="alt",
    )
    return AltResult(estimate=estimate, mask=mask, iterations=iterations, trace=tuple(trace))
