"""Synthetic two-region benchmark data.

Parametric ground-truth masks spanning different area balances and
boundary lengths, IID region fills from arbitrary appearance models, and
short-range-correlated procedural textures (row-wise Markov chains whose
stationary marginals are the appearance models).  Also measures the true
boundary-mixing probability of a mask at a given pair distance, for
checking the eps_r = kappa * rho model.

All randomness flows through explicit seeds; there is no global RNG.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BinaryMask, Distribution, LabelImage
from .stats import enumerate_offsets

MASK_KINDS = ("half_vertical", "centered_disk", "quarter_square", "diagonal_band")
MIN_MASK_SIZE = 8


@dataclass(frozen=True)
class MaskKind:
    """A named ground-truth mask family at fixed dimensions."""

    kind: str
    width: int
    height: int

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise ValueError(f"unknown mask kind {self.kind!r}; choose from {MASK_KINDS}")
        if self.width < MIN_MASK_SIZE or self.height < MIN_MASK_SIZE:
            raise ValueError(
                f"mask dimensions must be >= {MIN_MASK_SIZE}x{MIN_MASK_SIZE}, "
                f"got {self.width}x{self.height}"
            )


def gen_mask(spec: MaskKind) -> BinaryMask:
    """Deterministic mask of the named family.

    half_vertical: left half is region 0 (w0 = 0.5 up to one column).
    centered_disk: disk is region 0 with w0 ~ 0.3.
    quarter_square: centered square is region 0 with w0 = 0.25.
    diagonal_band: anti-diagonal band is region 0 with w0 ~ 0.5 and a
    boundary roughly 2*sqrt(2) times longer than half_vertical's.
    """
    w, h = spec.width, spec.height
    ys, xs = np.mgrid[0:h, 0:w]
    if spec.kind == "half_vertical":
        bits = (xs >= w // 2).astype(np.uint8)
    elif spec.kind == "centered_disk":
        radius = np.sqrt(0.3 * w * h / np.pi)
        cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
        inside = (ys - cy) ** 2 + (xs - cx) ** 2 <= radius**2
        bits = (~inside).astype(np.uint8)
    elif spec.kind == "quarter_square":
        side = int(round(np.sqrt(w * h / 4.0)))
        side = max(1, min(side, w, h))
        y0 = (h - side) // 2
        x0 = (w - side) // 2
        bits = np.ones((h, w), dtype=np.uint8)
        bits[y0 : y0 + side, x0 : x0 + side] = 0
    else:  # diagonal_band
        center = (w + h - 2) / 2.0
        dist = np.abs(xs + ys - center)
        cutoff = np.quantile(dist, 0.5)
        bits = (dist > cutoff).astype(np.uint8)
    mask = BinaryMask(bits)
    if mask.area_fraction(0) in (0.0, 1.0):
        raise ValueError(f"mask {spec.kind} degenerated to a single region at {w}x{h}")
    return mask


def random_model(k: int, seed: int) -> Distribution:
    """Normalized vector of independent uniform(0,1) draws."""
    if k < 2:
        raise ValueError(f"alphabet size must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(size=k)
    total = raw.sum()
    if total <= 0:  # probability zero, but keep the constructor honest
        raw = np.ones(k)
        total = float(k)
    return Distribution(raw / total)


def gen_iid(mask: BinaryMask, theta0: Distribution, theta1: Distribution, seed: int) -> LabelImage:
    """Image whose pixels are independent draws from their region's model."""
    if theta0.k != theta1.k:
        raise ValueError("theta0 and theta1 must share an alphabet")
    k = theta0.k
    rng = np.random.default_rng(seed)
    labels = np.empty(mask.bits.shape, dtype=np.int32)
    for region, theta in ((0, theta0), (1, theta1)):
        sel = mask.region(region)
        n = int(np.count_nonzero(sel))
        if n:
            labels[sel] = rng.choice(k, size=n, p=theta.probs)
    return LabelImage(labels, k)


@dataclass(frozen=True)
class TextureSpec:
    """Row-wise Markov texture: a row-stochastic transition matrix and a seed."""

    transition: np.ndarray  # (k, k), rows sum to 1
    seed: int = 0

    def __post_init__(self):
        mat = np.ascontiguousarray(self.transition, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValueError(f"transition must be square, got shape {mat.shape}")
        if mat.min() < 0 or not np.all(np.isfinite(mat)):
            raise ValueError("transition entries must be finite and >= 0")
        rows = mat.sum(axis=1)
        if np.abs(rows - 1.0).max() > 1e-9:
            raise ValueError("transition rows must sum to 1 within 1e-9")
        mat.setflags(write=False)
        object.__setattr__(self, "transition", mat)

    @property
    def k(self) -> int:
        return self.transition.shape[0]

    def stationary(self) -> Distribution:
        """Stationary marginal of the chain (the texture's appearance model)."""
        p = self.transition
        k = self.k
        a = np.vstack([(p.T - np.eye(k))[:-1], np.ones(k)])
        b = np.zeros(k)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(a, b, rcond=None)
        pi = np.maximum(pi, 0.0)
        return Distribution(pi / pi.sum())


def sticky_transition(theta: Distribution, stay: float) -> np.ndarray:
    """Transition that keeps the current value with probability `stay`,
    otherwise redraws from theta; its stationary marginal is exactly theta."""
    if not (0.0 <= stay < 1.0):
        raise ValueError(f"stay probability must lie in [0,1), got {stay}")
    k = theta.k
    return stay * np.eye(k) + (1.0 - stay) * np.tile(theta.probs, (k, 1))


def gen_texture(mask: BinaryMask, spec0: TextureSpec, spec1: TextureSpec) -> LabelImage:
    """Fill each region with a row-wise Markov chain.

    Within a row, each region runs its own chain left to right (continuing
    across interruptions by the other region); chains restart from the
    stationary distribution on every row, so every pixel's marginal is
    exactly the stationary model of its region.
    """
    if spec0.k != spec1.k:
        raise ValueError("texture specs must share an alphabet")
    k = spec0.k
    h, w = mask.bits.shape
    rngs = (np.random.default_rng(spec0.seed), np.random.default_rng(spec1.seed))
    cum_init = (
        np.cumsum(spec0.stationary().probs),
        np.cumsum(spec1.stationary().probs),
    )
    cum_trans = (
        np.cumsum(spec0.transition, axis=1),
        np.cumsum(spec1.transition, axis=1),
    )
    counts = (
        int(np.count_nonzero(mask.bits == 0)),
        int(np.count_nonzero(mask.bits == 1)),
    )
    uniforms = [rngs[s].random(counts[s]) for s in (0, 1)]
    used = [0, 0]

    labels = np.empty((h, w), dtype=np.int32)
    bits = mask.bits
    for y in range(h):
        state = [-1, -1]
        for x in range(w):
            s = int(bits[y, x])
            u = uniforms[s][used[s]]
            used[s] += 1
            if state[s] < 0:
                value = int(np.searchsorted(cum_init[s], u, side="right"))
            else:
                value = int(np.searchsorted(cum_trans[s][state[s]], u, side="right"))
            value = min(value, k - 1)
            labels[y, x] = value
            state[s] = value
    return LabelImage(labels, k)


def measure_epsilon(mask: BinaryMask, r: int) -> float:
    """Probability that an ordered pixel pair at L1 distance r straddles the
    regions in one specific order: half the exhaustive different-region
    fraction."""
    offsets = enumerate_offsets(r)
    bits = mask.bits
    h, w = bits.shape
    total = 0
    different = 0
    for dx, dy in offsets:
        y0, y1 = max(0, -dy), min(h, h - dy)
        x0, x1 = max(0, -dx), min(w, w - dx)
        if y0 >= y1 or x0 >= x1:
            continue
        a = bits[y0:y1, x0:x1]
        b = bits[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
        total += a.size
        different += int(np.count_nonzero(a != b))
    if total == 0:
        raise ValueError(f"no in-bounds pixel pairs at distance r={r} for a {w}x{h} mask")
    return different / (2.0 * total)
