"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Criteria 3/4 run the full 10-pairs x 4-masks matrix at 320x320
and take a few minutes in total.
"""

import time

import numpy as np
import pytest

from pairseg.alt import AltConfig, alt_run, region_histogram
from pairseg.core import BinaryMask, Distribution, LabelImage, MixtureParams
from pairseg.estimators import (
    SearchConfig,
    estimate_models,
    select_pivot,
    solve_least_squares,
    solve_spectral,
)
from pairseg.maxflow import FlowNetwork, max_flow
from pairseg.metrics import model_distance, segmentation_score
from pairseg.mrf import EnergyParams, energy, segment_graphcut
from pairseg.stats import compose_alpha, compose_beta, independence_gap
from pairseg.synth import (
    MASK_KINDS,
    MaskKind,
    TextureSpec,
    gen_iid,
    gen_mask,
    gen_texture,
    measure_epsilon,
    random_model,
    sticky_transition,
)

RHO = 0.06
KAPPA = 0.47
SIZE = 320
MODEL_PAIRS = 10
K_BENCH = 64


def _passed(n, text):
    print(f"\ncriterion {n:2d} PASS - {text}")


def make_instance(rng, k):
    """Random mixture instance, canonically labeled (positive model
    difference at the pivot index, a pure renaming of regions)."""
    w0 = rng.uniform(0.1, 0.9)
    eps = rng.uniform(0.0, 0.8) * w0 * (1.0 - w0)
    raw0 = rng.uniform(size=k)
    raw1 = rng.uniform(size=k)
    t0 = Distribution(raw0 / raw0.sum())
    t1 = Distribution(raw1 / raw1.sum())
    params = MixtureParams.from_w0(w0, eps)
    alpha = compose_alpha(params, t0, t1)
    beta = compose_beta(params, t0, t1)
    pivot = select_pivot(alpha, beta)
    if t0.probs[pivot] < t1.probs[pivot]:
        t0, t1 = t1, t0
        params = MixtureParams.from_w0(1.0 - w0, eps)
    return params, t0, t1, alpha, beta


def recovery_error(t0, t1, e0, e1):
    straight = max(np.abs(e0.probs - t0.probs).max(), np.abs(e1.probs - t1.probs).max())
    crossed = max(np.abs(e0.probs - t1.probs).max(), np.abs(e1.probs - t0.probs).max())
    return min(straight, crossed)


def bench_image(mask_index, trial, k=K_BENCH, entropy=42):
    seeds = np.random.SeedSequence(entropy=entropy, spawn_key=(mask_index, trial))
    s = seeds.generate_state(3)
    t0 = random_model(k, int(s[0]))
    t1 = random_model(k, int(s[1]))
    mask = gen_mask(MaskKind(MASK_KINDS[mask_index], SIZE, SIZE))
    return mask, gen_iid(mask, t0, t1, int(s[2]))


def test_criterion_1_exact_recovery_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(20260810)
    worst = 0.0
    for k in (2, 8, 64, 256):
        for _ in range(100):
            params, t0, t1, alpha, beta = make_instance(rng, k)
            for solver in (solve_least_squares, solve_spectral):
                e0, e1 = solver(alpha, beta, params)
                worst = max(worst, recovery_error(t0, t1, e0, e1))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-8, f"worst recovery error {worst}"
    assert elapsed < 10.0, f"took {elapsed:.1f}s (limit 10s)"
    _passed(1, f"400 instances x 2 solvers, worst L-inf {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_rank_one_identity():
    rng = np.random.default_rng(20260810)
    worst = 0.0
    for k in (2, 8, 64, 256):
        for _ in range(100):
            params, t0, t1, alpha, beta = make_instance(rng, k)
            d = t0.probs - t1.probs
            lhs = beta.probs - np.outer(alpha.probs, alpha.probs)
            rhs = (params.w0 * params.w1 - params.eps_r) * np.outer(d, d)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    assert worst <= 1e-12, f"worst identity violation {worst}"
    _passed(2, f"rank-one identity within {worst:.2e} on 400 instances")


@pytest.fixture(scope="module")
def bench_estimates():
    """Estimates for the 10-pairs x 4-masks IID matrix, shared by criteria 3/4."""
    results = {}
    for mask_index in range(len(MASK_KINDS)):
        for trial in range(MODEL_PAIRS):
            mask, img = bench_image(mask_index, trial)
            gt0 = region_histogram(img, mask, 0, 0.0)
            gt1 = region_histogram(img, mask, 1, 0.0)
            per_method = {}
            for method in ("algebraic", "spectral"):
                start = time.perf_counter()
                est = estimate_models(img, SearchConfig(rho=RHO, kappa=KAPPA, method=method))
                seconds = time.perf_counter() - start
                per_method[method] = (est, seconds)
            results[(mask_index, trial)] = (mask, img, gt0, gt1, per_method)
    return results


def test_criterion_3_model_estimation_table(bench_estimates):
    d_b = {"algebraic": [], "spectral": []}
    cells = {}
    slowest = 0.0
    for (mask_index, trial), (mask, img, gt0, gt1, per_method) in bench_estimates.items():
        for method, (est, seconds) in per_method.items():
            slowest = max(slowest, seconds)
            assert seconds < 5.0, f"estimate took {seconds:.2f}s (limit 5s)"
            value, _ = model_distance(gt0, gt1, est.theta0, est.theta1)
            d_b[method].append(value)
            cells.setdefault((MASK_KINDS[mask_index], method), []).append(value)
    means = {m: float(np.mean(v)) for m, v in d_b.items()}
    assert means["algebraic"] <= 0.01, means
    assert means["spectral"] <= 0.01, means
    for cell, values in cells.items():
        assert float(np.mean(values)) <= 0.01, (cell, float(np.mean(values)))
    _passed(3, f"mean D_B algebraic {means['algebraic']:.4f}, "
               f"spectral {means['spectral']:.4f} (limit 0.01, also met per mask); "
               f"slowest estimate {slowest:.2f}s")


def test_criterion_4_segmentation_table(bench_estimates):
    jac = {(kind, m): [] for kind in MASK_KINDS for m in ("algebraic", "spectral")}
    params = EnergyParams(lam=5.0)
    for (mask_index, trial), (mask, img, gt0, gt1, per_method) in bench_estimates.items():
        for method, (est, _) in per_method.items():
            seg = segment_graphcut(img, est.theta0, est.theta1, params)
            value, _ = segmentation_score(mask, seg)
            jac[(MASK_KINDS[mask_index], method)].append(value)
    summary = []
    for (kind, method), values in jac.items():
        mean = float(np.mean(values))
        floor = 0.95 if kind == "half_vertical" else 0.90
        assert mean >= floor, f"{kind}/{method}: mean jac {mean:.4f} < {floor}"
        summary.append(f"{kind[:4]}/{method[:4]}={mean:.3f}")
    _passed(4, "mean jac " + " ".join(summary))


def test_criterion_5_graphcut_optimality_oracle():
    rng = np.random.default_rng(99)
    h, w, k = 3, 4, 3
    n = h * w
    # all 4096 masks, their label-1 indicator and boundary lengths, built once
    all_masks = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(np.float64)
    grids = all_masks.reshape(-1, h, w)
    boundary = (
        np.abs(np.diff(grids, axis=2)).sum(axis=(1, 2))
        + np.abs(np.diff(grids, axis=1)).sum(axis=(1, 2))
    )
    checked = 0
    for trial in range(200):
        img = LabelImage(rng.integers(0, k, (h, w)).astype(np.int32), k)
        t0 = random_model(k, 1000 + trial)
        t1 = random_model(k, 2000 + trial)
        for lam in (0.5, 1.0, 5.0):
            params = EnergyParams(lam=lam)
            seg = segment_graphcut(img, t0, t1, params)
            cut_energy = energy(img, seg, t0, t1, params)
            from pairseg.mrf import floored_probs

            d0 = -np.log(floored_probs(t0, params.likelihood_floor))[img.labels].ravel()
            d1 = -np.log(floored_probs(t1, params.likelihood_floor))[img.labels].ravel()
            scores = all_masks @ d1 + (1.0 - all_masks) @ d0 + lam * boundary
            # the vectorized scores rank the masks; the exact minimum is then
            # evaluated with energy() itself so summation order matches
            near = np.flatnonzero(scores <= scores.min() + 1e-9)
            best = min(
                energy(img, BinaryMask(grids[i].astype(np.uint8)), t0, t1, params)
                for i in near
            )
            assert cut_energy == best, (trial, lam, cut_energy, best)
            checked += 1
    _passed(5, f"{checked} cuts equal the 4096-mask brute-force minimum exactly")


def test_criterion_6_maxflow_oracle():
    rng = np.random.default_rng(7)
    n = 20
    free = n - 2
    sides = ((np.arange(2**free)[:, None] >> np.arange(free)) & 1).astype(bool)
    for trial in range(100):
        net = FlowNetwork(n, 0, n - 1)
        arcs = []
        for _ in range(60):
            u, v = rng.integers(0, n, 2)
            if u == v:
                continue
            c = float(rng.integers(0, 12))
            net.add_edge(int(u), int(v), c)
            arcs.append((int(u), int(v), c))
        flow, _ = max_flow(net)
        cut = np.zeros(len(sides))
        for u, v, c in arcs:
            u_in = np.ones(len(sides), dtype=bool) if u == 0 else (
                np.zeros(len(sides), dtype=bool) if u == n - 1 else sides[:, u - 1]
            )
            v_in = np.ones(len(sides), dtype=bool) if v == 0 else (
                np.zeros(len(sides), dtype=bool) if v == n - 1 else sides[:, v - 1]
            )
            cut += c * (u_in & ~v_in)
        assert flow == float(cut.min()), (trial, flow, float(cut.min()))
    _passed(6, "100 random 20-node networks: flow equals exhaustive min cut exactly")


def test_criterion_7_independence_gap_decay():
    rng = np.random.default_rng(123)
    whole = BinaryMask(np.zeros((SIZE, SIZE), dtype=np.uint8))
    ratios = []
    for trial in range(10):
        theta = random_model(8, int(rng.integers(0, 2**31)))
        stay = float(rng.uniform(0.7, 0.9))
        spec = TextureSpec(sticky_transition(theta, stay), seed=int(rng.integers(0, 2**31)))
        assert np.diagonal(spec.transition).min() >= 0.7
        img = gen_texture(whole, spec, spec)
        near = independence_gap(img, 1)
        far = independence_gap(img, 50)
        ratios.append(far / near)
        assert far < 0.25 * near, (trial, near, far)
    _passed(7, f"gap(50)/gap(1) over 10 textures: max ratio {max(ratios):.3f} (< 0.25)")


def test_criterion_8_boundary_mixing_model():
    checked = []
    for kind in MASK_KINDS:
        mask = gen_mask(MaskKind(kind, SIZE, SIZE))
        w0 = mask.area_fraction(0)
        for rho in (0.02, 0.06, 0.10):
            r = max(1, round(rho * SIZE))
            eps = measure_epsilon(mask, r)
            model = KAPPA * rho
            assert model / 2 <= eps <= 2 * model, (kind, rho, eps, model)
            checked.append(eps / model)
        for rho in np.arange(0.01, 0.101, 0.01):
            r = max(1, round(rho * SIZE))
            eps = measure_epsilon(mask, r)
            assert w0 * (1.0 - w0) >= eps, (kind, rho, eps)
    _passed(8, f"eps within factor 2 of kappa*rho (ratios {min(checked):.2f}..{max(checked):.2f}); "
               "w0*w1 >= eps_r for all rho <= 0.1")


def test_criterion_9_alt_behavior():
    rng = np.random.default_rng(5150)
    for run in range(20):
        kind = MASK_KINDS[run % len(MASK_KINDS)]
        bits = gen_mask(MaskKind(kind, 96, 96))
        t0 = random_model(16, int(rng.integers(0, 2**31)))
        t1 = random_model(16, int(rng.integers(0, 2**31)))
        img = gen_iid(bits, t0, t1, int(rng.integers(0, 2**31)))
        result = alt_run(img, AltConfig(lam=5.0))
        energies = [entry.energy for entry in result.trace]
        for before, after in zip(energies, energies[1:]):
            assert after <= before + 1e-9 * (1.0 + abs(before)), (run, energies)
    flat = LabelImage(np.full((96, 96), 3, dtype=np.int32), 16)
    result = alt_run(flat, AltConfig(lam=5.0))
    assert result.single_region
    _passed(9, "energy non-increasing across 20 runs; constant image collapses to one region")


def test_criterion_10_out_of_scope_documented():
    # Not reproduced at desk scale, by design: benchmark columns that need
    # texture photographs, the natural-image regression behind kappa = 0.47
    # (the constant is consumed, not re-fit), comparisons against
    # third-party segmentation methods, and real-photo galleries.
    # Criteria 1-9 substitute procedural textures, parametric masks, and
    # exact oracles for those assets.
    _passed(10, "out-of-scope items declared (third-party datasets, methods, kappa re-fit)")
