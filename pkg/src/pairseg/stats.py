"""First- and second-order pixel statistics and their forward mixture model.

Two empirical distributions drive everything downstream: the marginal
label distribution (the chance a uniformly random pixel carries value i)
and the pair distribution at L1 distance r (the chance a uniformly random
ordered pixel pair at that distance carries values (i, j)).  For an image
split into two internally homogeneous regions whose far-apart pixels are
independent, these satisfy

    alpha = w0 * theta0 + w1 * theta1
    beta  = (w0 - eps) theta0 theta0^T + (w1 - eps) theta1 theta1^T
            + eps (theta0 theta1^T + theta1 theta0^T)

where w0, w1 are region area fractions and eps is the probability that an
ordered pair straddles the regions in one specific order.  Subtracting
the outer product of the marginal collapses this to a rank-one matrix,

    beta - alpha alpha^T = (w0 w1 - eps) (theta0 - theta1)(theta0 - theta1)^T,

which is the identity the estimators exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Distribution, LabelImage, MixtureParams, PairDistribution


@dataclass(frozen=True)
class PairSamplingPolicy:
    """How pair statistics are gathered: exhaustively or by random sampling."""

    mode: str = "exhaustive"  # "exhaustive" | "sampled"
    sample_count: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exhaustive", "sampled"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.mode == "sampled" and self.sample_count < 1:
            raise ValueError("sample_count must be >= 1 in sampled mode")


EXHAUSTIVE = PairSamplingPolicy()


def estimate_alpha(img: LabelImage) -> Distribution:
    """Empirical marginal distribution of label values."""
    counts = np.bincount(img.labels.ravel(), minlength=img.k)
    return Distribution(counts / img.num_pixels)


def enumerate_offsets(r: int) -> list[tuple[int, int]]:
    """All integer offsets (dx, dy) with |dx| + |dy| = r, deduplicated.

    dx is the column delta, dy the row delta; both signs occur, so the set
    is closed under negation and ordered pair counting over it is
    automatically symmetric.
    """
    if r < 1:
        raise ValueError(f"distance r must be >= 1, got {r}")
    offsets = set()
    for dx in range(-r, r + 1):
        rem = r - abs(dx)
        offsets.add((dx, rem))
        offsets.add((dx, -rem))
    return sorted(offsets)


def _offset_slices(labels: np.ndarray, dx: int, dy: int):
    """Aligned views (anchor, partner) for all in-bounds pairs of one offset."""
    h, w = labels.shape
    y0, y1 = max(0, -dy), min(h, h - dy)
    x0, x1 = max(0, -dx), min(w, w - dx)
    if y0 >= y1 or x0 >= x1:
        return None
    a = labels[y0:y1, x0:x1]
    b = labels[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
    return a, b


def estimate_beta(
    img: LabelImage, r: int, policy: PairSamplingPolicy = EXHAUSTIVE
) -> PairDistribution:
    """Empirical pair distribution at L1 distance r.

    Exhaustive mode counts every ordered in-bounds pair (x, x + offset)
    over the full offset set; sampled mode draws anchor and offset
    independently, rejecting out-of-bounds partners, and is bit-for-bit
    reproducible for a fixed seed.  Pairs with an endpoint outside the
    image are skipped (no wraparound, no padding).
    """
    offsets = enumerate_offsets(r)
    k = img.k
    labels = img.labels
    counts = np.zeros(k * k, dtype=np.int64)

    if policy.mode == "exhaustive":
        for dx, dy in offsets:
            views = _offset_slices(labels, dx, dy)
            if views is None:
                continue
            a, b = views
            joint = a.astype(np.int64).ravel() * k + b.ravel()
            counts += np.bincount(joint, minlength=k * k)
        total = int(counts.sum())
        if total == 0:
            raise ValueError(f"no in-bounds pixel pairs at distance r={r} "
                             f"for a {img.width}x{img.height} image")
    else:
        rng = np.random.default_rng(policy.seed)
        offs = np.asarray(offsets, dtype=np.int64)
        h, w = labels.shape
        if r > (w - 1) + (h - 1):
            raise ValueError(f"no in-bounds pixel pairs at distance r={r} "
                             f"for a {w}x{h} image")
        remaining = policy.sample_count
        attempts = 0
        while remaining > 0:
            batch = max(1024, remaining * 2)
            ys = rng.integers(0, h, size=batch)
            xs = rng.integers(0, w, size=batch)
            oi = rng.integers(0, len(offs), size=batch)
            py = ys + offs[oi, 1]
            px = xs + offs[oi, 0]
            ok = (py >= 0) & (py < h) & (px >= 0) & (px < w)
            ys, xs, py, px = ys[ok], xs[ok], py[ok], px[ok]
            take = min(remaining, ys.size)
            if take > 0:
                joint = labels[ys[:take], xs[:take]].astype(np.int64) * k \
                    + labels[py[:take], px[:take]]
                counts += np.bincount(joint, minlength=k * k)
                remaining -= take
            attempts += 1
            if attempts > 10_000 and remaining == policy.sample_count:
                raise ValueError(f"no in-bounds pixel pairs at distance r={r} "
                                 f"for a {img.width}x{img.height} image")
        total = policy.sample_count

    mat = counts.reshape(k, k).astype(np.float64)
    mat = (mat + mat.T) / (2.0 * total)
    mat /= mat.sum()  # kill float drift from the division
    return PairDistribution(mat, r)


def compose_alpha(params: MixtureParams, theta0: Distribution, theta1: Distribution) -> Distribution:
    """Marginal implied by the two-region mixture: w0*theta0 + w1*theta1."""
    return Distribution(params.w0 * theta0.probs + params.w1 * theta1.probs)


def compose_beta(
    params: MixtureParams,
    theta0: Distribution,
    theta1: Distribution,
    r: int = 0,
) -> PairDistribution:
    """Pair distribution implied by the mixture at boundary mixing eps_r.

    Requires eps_r <= min(w0, w1); beyond that the same-region weights go
    negative and the matrix stops being a distribution.
    """
    w0, w1, eps = params.w0, params.w1, params.eps_r
    if eps > min(w0, w1):
        raise ValueError(
            f"eps_r={eps} exceeds min(w0, w1)={min(w0, w1)}; mixture weight would be negative"
        )
    t0 = theta0.probs
    t1 = theta1.probs
    mat = (
        (w0 - eps) * np.outer(t0, t0)
        + (w1 - eps) * np.outer(t1, t1)
        + eps * np.outer(t0, t1)
        + eps * np.outer(t1, t0)
    )
    return PairDistribution(mat, r)


def rank_one_residual(alpha: Distribution, beta: PairDistribution) -> np.ndarray:
    """beta - alpha alpha^T: rank one under the two-region model."""
    return beta.probs - np.outer(alpha.probs, alpha.probs)


def pair_marginal(beta: PairDistribution) -> Distribution:
    """Row-sum marginal of the pair distribution.

    Under the mixture model this equals the pixel marginal exactly, but the
    empirical estimates differ near the image border (pixels there join
    fewer in-bounds pairs).  Feeding the solvers this marginal instead of
    the plain pixel histogram keeps (alpha, beta) internally consistent:
    beta - alpha alpha^T then annihilates the uniform direction exactly,
    which removes a border-effect contamination that otherwise can swamp
    the rank-one signal.
    """
    return Distribution(beta.probs.sum(axis=1))


def independence_gap(img: LabelImage, r: int, policy: PairSamplingPolicy = EXHAUSTIVE) -> float:
    """Frobenius norm of beta_hat - alpha_hat alpha_hat^T.

    Near zero when pixels at distance r are effectively independent; large
    at short range in textured images.
    """
    alpha = estimate_alpha(img)
    beta = estimate_beta(img, r, policy)
    return float(np.linalg.norm(rank_one_residual(alpha, beta)))
