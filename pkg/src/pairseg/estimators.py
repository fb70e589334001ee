"""Recover the two region appearance models from image statistics alone.

Given the marginal distribution alpha, the pair distribution beta at
distance r, an area fraction w0 and a boundary-mixing probability eps,
the unknowns theta0, theta1 satisfy (see ``stats``)

    alpha(i)   = w0 theta0(i) + w1 theta1(i)                        (linear)
    beta(i, j) = (w0-eps) theta0(i)theta0(j) + (w1-eps) theta1(i)theta1(j)
                 + eps [theta0(i)theta1(j) + theta1(i)theta0(j)]    (quadratic)

Two solvers are provided.

* The algebraic solvers pick the pivot index with the largest diagonal
  excess beta(i,i) - alpha(i)^2, solve the pivot entry from the one
  quadratic constraint it appears in alone,

      theta0(i) = alpha(i) + sqrt(beta(i,i) - alpha(i)^2)
                             / sqrt(w0/w1 - eps/w1^2),

  and then treat every remaining beta entry as a linear constraint.
  ``solve_minimal`` uses exactly one beta row; ``solve_least_squares``
  uses all of them, solving each entry by a 2-unknown least squares and
  finishing with one refinement sweep over all entries.

* The spectral solver uses the rank-one identity
  beta - alpha alpha^T = (w0 w1 - eps) d d^T with d = theta0 - theta1:
  the dominant eigenpair (lambda, v) of the residual matrix gives
  d = sqrt(lambda / (w0 w1 - eps)) v, and the linear marginal constraint
  splits d into theta0 = alpha + w1 d, theta1 = alpha - w0 d.

Both need w0 w1 >= eps; data violating it beyond tolerance raises
EstimationError.  The pair (theta0, theta1) is identifiable only up to
the joint relabeling (theta0, theta1, w0) <-> (theta1, theta0, w1); all
solvers break the tie the same way, orienting d so that its largest-
magnitude entry is positive.

``search_w0`` scans a finite grid of w0 candidates, runs the configured
solver at each admissible point, recomposes beta from the result, and
keeps the candidate whose recomposition is closest (Frobenius norm) to
the empirical beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Distribution,
    EstimationError,
    LabelImage,
    MixtureParams,
    ModelEstimate,
    PairDistribution,
    normalize_clamped,
)
from .stats import compose_beta, estimate_beta, pair_marginal

DISCRIMINANT_TOL = 1e-12
DEFAULT_KAPPA = 0.47
DEFAULT_W0_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class EigenPair:
    """Dominant eigenvalue and unit-norm eigenvector of a symmetric matrix."""

    value: float
    vector: np.ndarray

    def __post_init__(self):
        vec = np.ascontiguousarray(self.vector, dtype=np.float64)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"eigenvector norm {norm!r} is not 1 within 1e-12")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class SearchConfig:
    """Grid search configuration for the unknown area fraction w0."""

    w0_grid: tuple = DEFAULT_W0_GRID
    rho: float = 0.03
    kappa: float = DEFAULT_KAPPA
    method: str = "spectral"  # "algebraic" | "spectral"

    def __post_init__(self):
        grid = tuple(float(w) for w in self.w0_grid)
        if len(grid) == 0:
            raise ValueError("w0 grid must be nonempty")
        if any(not (0.0 < w < 1.0) for w in grid):
            raise ValueError("w0 grid values must lie in the open interval (0,1)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("w0 grid must be strictly increasing")
        if self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.method not in ("algebraic", "spectral"):
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "w0_grid", grid)

    @property
    def eps_r(self) -> float:
        return epsilon_from_rho(self.rho, self.kappa)


def epsilon_from_rho(rho: float, kappa: float = DEFAULT_KAPPA) -> float:
    """Boundary-mixing probability model eps_r = kappa * rho."""
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    return kappa * rho


def radius_from_rho(rho: float, img: LabelImage) -> int:
    """Pair distance r = round(rho * sqrt(pixel count)), at least 1.

    Scales the statistics distance with image resolution.  Raises when the
    requested radius rounds to zero or exceeds min(width, height) - 1.
    """
    raw = rho * math.sqrt(img.num_pixels)
    if raw < 0.5:
        raise ValueError(f"rho={rho} gives r={raw:.3f} < 0.5 (would round to 0)")
    r = max(1, int(math.floor(raw + 0.5)))
    limit = min(img.width, img.height) - 1
    if r > limit:
        raise ValueError(f"r={r} exceeds min(width, height) - 1 = {limit}")
    return r


def select_pivot(alpha: Distribution, beta: PairDistribution) -> int:
    """Index maximizing beta(i,i) - alpha(i)^2; ties go to the lowest index."""
    excess = np.diagonal(beta.probs) - alpha.probs**2
    return int(np.argmax(excess))


def _pivot_entries(
    alpha: np.ndarray, beta: np.ndarray, params: MixtureParams, pivot: int
) -> tuple[float, float]:
    """Solve the pivot entry of both models from its diagonal constraint.

    Takes the positive square-root branch (labels are recovered only up to
    relabeling, so a fixed branch just fixes the orientation).  Returns
    (alpha[pivot], alpha[pivot]) when the whole diagonal excess vanishes,
    i.e. both models coincide with the marginal.
    """
    w0, w1, eps = params.w0, params.w1, params.eps_r
    excess = np.diagonal(beta) - alpha**2
    disc = float(excess[pivot])
    if disc < -DISCRIMINANT_TOL:
        raise EstimationError(
            f"beta(i,i) - alpha(i)^2 = {disc!r} < -{DISCRIMINANT_TOL} at pivot {pivot}: "
            "condition w0*w1 >= eps_r violated by the data"
        )
    if disc <= DISCRIMINANT_TOL:
        if float(excess.max()) <= DISCRIMINANT_TOL and float(excess.min()) >= -DISCRIMINANT_TOL:
            # degenerate throughout: theta0 = theta1 = alpha
            a = float(alpha[pivot])
            return a, a
        if float(excess.max()) > DISCRIMINANT_TOL:
            raise EstimationError(
                f"pivot {pivot} has zero diagonal excess while other indices do not; "
                "theta0(pivot) = theta1(pivot) would divide by zero"
            )
        raise EstimationError(
            f"diagonal excess below -{DISCRIMINANT_TOL} off the pivot: "
            "condition w0*w1 >= eps_r violated by the data"
        )
    spread = w0 * w1 - eps
    if spread <= 0:
        raise EstimationError(
            f"w0*w1 - eps_r = {spread!r} <= 0: cannot take the pivot square root"
        )
    t0p = float(alpha[pivot]) + w1 * math.sqrt(disc) / math.sqrt(spread)
    t1p = (float(alpha[pivot]) - w0 * t0p) / w1
    return t0p, t1p


def solve_minimal(
    alpha: Distribution,
    beta: PairDistribution,
    params: MixtureParams,
    pivot: int,
) -> tuple[Distribution, Distribution]:
    """Recover (theta0, theta1) from one beta row plus the marginal.

    The pivot entry comes from its quadratic diagonal constraint; every
    other entry then follows from the now-linear constraint of beta(pivot, j)
    paired with the marginal at j.  Outputs are clamped to be non-negative
    and renormalized.
    """
    a = alpha.probs
    b = beta.probs
    k = alpha.k
    if not (0 <= pivot < k):
        raise ValueError(f"pivot {pivot} out of range [0, {k})")
    w0, w1, eps = params.w0, params.w1, params.eps_r
    t0p, t1p = _pivot_entries(a, b, params, pivot)
    if t0p == t1p:
        # all-degenerate case: both models equal the marginal
        return Distribution(a.copy()), Distribution(a.copy())

    spread = w0 * w1 - eps
    denom = spread * (t0p - t1p)
    t0 = (w1 * b[pivot, :] - a * (w1 * t1p + eps * (t0p - t1p))) / denom
    t1 = (a - w0 * t0) / w1
    t0[pivot] = t0p
    t1[pivot] = t1p
    return normalize_clamped(t0), normalize_clamped(t1)


def solve_least_squares(
    alpha: Distribution,
    beta: PairDistribution,
    params: MixtureParams,
) -> tuple[Distribution, Distribution]:
    """Recover (theta0, theta1) using every pair constraint.

    Indices are processed in decreasing order of the diagonal excess
    beta(i,i) - alpha(i)^2.  The first entry is solved as in
    ``solve_minimal``; entry number l is then solved by least squares over
    the l-1 linear constraints contributed by the already-solved indices,
    with the marginal constraint enforced exactly.  One refinement sweep
    re-solves every entry against all k constraints, updating in place;
    entries stay at their raw (possibly negative) values until the final
    clamp-and-normalize.

    Each entry solve substitutes theta0(j) = alpha(j) + w1 t and
    theta1(j) = alpha(j) - w0 t (the marginal constraint), which reduces
    the pair constraints to a scalar least squares in t:

        beta(m, j) = [w0 theta0(m) + w1 theta1(m)] alpha(j)
                     + (w0 w1 - eps) [theta0(m) - theta1(m)] t.

    This is the same least-squares system the constraints define, solved
    in the coordinates where it stays well conditioned when the two
    models are nearly identical (the soft 2-unknown form squares the
    condition number and loses several digits exactly there).
    """
    a = alpha.probs
    b = beta.probs
    k = alpha.k
    w0, w1, eps = params.w0, params.w1, params.eps_r
    spread = w0 * w1 - eps
    excess = np.diagonal(b) - a**2
    order = np.argsort(-excess, kind="stable")
    pivot = int(order[0])

    t0p, t1p = _pivot_entries(a, b, params, pivot)
    if t0p == t1p:
        return Distribution(a.copy()), Distribution(a.copy())

    t0 = np.zeros(k)
    t1 = np.zeros(k)
    t0[pivot] = t0p
    t1[pivot] = t1p

    def solve_entry(j: int, solved: np.ndarray) -> None:
        coeff = spread * (t0[solved] - t1[solved])
        target = b[solved, j] - (w0 * t0[solved] + w1 * t1[solved]) * a[j]
        weight = float(coeff @ coeff)
        diff = float(coeff @ target) / weight if weight > 0 else 0.0
        t0[j] = a[j] + w1 * diff
        t1[j] = a[j] - w0 * diff

    for step in range(1, k):
        solve_entry(int(order[step]), order[:step])

    # one refinement sweep against all constraints, Gauss-Seidel style
    idx_all = np.arange(k)
    for step in range(k):
        j = int(order[step])
        solve_entry(j, idx_all[idx_all != j])

    return normalize_clamped(t0), normalize_clamped(t1)


def power_iteration(
    mat: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> EigenPair:
    """Dominant eigenpair of a symmetric matrix by power iteration.

    Starts from a seeded pseudo-random unit vector and stops once the
    residual ||M v - lambda v|| falls below tol (lambda is the Rayleigh
    quotient).  A zero matrix therefore returns (0, initial vector)
    immediately.  Raises EstimationError on non-convergence.
    """
    m = np.asarray(mat, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if float(np.abs(m - m.T).max(initial=0.0)) > 1e-9 * max(1.0, float(np.abs(m).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    n = m.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)

    for _ in range(max_iter):
        w = m @ v
        lam = float(v @ w)
        if float(np.linalg.norm(w - lam * v)) <= tol:
            return EigenPair(lam, v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            # v is in the null space but M != 0; restart from a fresh vector
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        v = w / norm
    raise EstimationError(f"power iteration did not converge within {max_iter} iterations")


def solve_spectral(
    alpha: Distribution,
    beta: PairDistribution,
    params: MixtureParams,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> tuple[Distribution, Distribution]:
    """Recover (theta0, theta1) from the dominant eigenpair of beta - alpha alpha^T.

    The model difference is d = sqrt(lambda / (w0 w1 - eps)) v, oriented so
    that its largest-magnitude entry is positive, and the marginal
    constraint splits it into theta0 = alpha + w1 d, theta1 = alpha - w0 d.
    """
    a = alpha.probs
    w0, w1, eps = params.w0, params.w1, params.eps_r
    spread = w0 * w1 - eps
    if spread <= 0:
        raise EstimationError(f"w0*w1 - eps_r = {spread!r} <= 0: spectral scale undefined")

    residual = beta.probs - np.outer(a, a)
    residual = (residual + residual.T) / 2.0  # exact symmetry for the eigen solver
    eig = power_iteration(residual, tol=tol, max_iter=max_iter, seed=seed)
    lam = eig.value
    if lam < -DISCRIMINANT_TOL:
        raise EstimationError(
            f"dominant eigenvalue {lam!r} < -{DISCRIMINANT_TOL}: "
            "condition w0*w1 >= eps_r violated by the data"
        )
    if lam <= DISCRIMINANT_TOL:
        # no rank-one signal beyond numerical dust: both models equal the marginal
        return Distribution(a.copy()), Distribution(a.copy())

    d = math.sqrt(lam / spread) * eig.vector
    # orient like the algebraic solvers: positive difference at the index with
    # the largest diagonal excess (the argmax of |d| up to tie-breaking)
    peak = select_pivot(alpha, beta)
    if d[peak] < 0:
        d = -d
    t0 = a + w1 * d
    t1 = a - w0 * d
    return normalize_clamped(t0), normalize_clamped(t1)


def search_w0(
    alpha: Distribution,
    beta: PairDistribution,
    config: SearchConfig,
) -> ModelEstimate:
    """Grid-search the area fraction w0, scoring by recomposition misfit.

    Each admissible grid point (w0 w1 > eps_r) is solved with the
    configured method; the recomposed pair distribution is compared to the
    empirical one in Frobenius norm and the argmin wins, ties (up to float
    dust) going to the lowest w0.  Raises EstimationError when no grid
    point is admissible or every admissible point fails.
    """
    eps = config.eps_r
    solver = solve_least_squares if config.method == "algebraic" else solve_spectral

    best: ModelEstimate | None = None
    failures: list[str] = []
    admissible = 0
    for w0 in config.w0_grid:
        w1 = 1.0 - w0
        if w0 * w1 <= eps:
            continue
        admissible += 1
        params = MixtureParams(w0, w1, eps)
        try:
            theta0, theta1 = solver(alpha, beta, params)
        except EstimationError as exc:
            failures.append(f"w0={w0}: {exc}")
            continue
        recomposed = compose_beta(params, theta0, theta1, r=beta.r)
        residual = float(np.linalg.norm(recomposed.probs - beta.probs))
        if best is None or residual < best.residual - 1e-12 * (1.0 + best.residual):
            best = ModelEstimate(
                params=params,
                theta0=theta0,
                theta1=theta1,
                residual=residual,
                method=config.method,
                r=beta.r,
            )

    if admissible == 0:
        raise EstimationError(
            f"w0*w1 <= eps_r = {eps} for the entire grid: no admissible w0 candidate"
        )
    if best is None:
        raise EstimationError(
            "every admissible w0 candidate failed: " + "; ".join(failures[:3])
        )
    return best


def estimate_models(img: LabelImage, config: SearchConfig) -> ModelEstimate:
    """Full estimation pipeline for one image.

    Gathers pair statistics at r = round(rho * sqrt(pixels)), pairs them
    with their own row-sum marginal (see ``stats.pair_marginal``), and
    grid-searches the area fraction.
    """
    r = radius_from_rho(config.rho, img)
    beta = estimate_beta(img, r)
    return search_w0(pair_marginal(beta), beta, config)
