"""Command-line surface: estimate, segment, synth, eval, alt, diagnose, bench.

Every command writes a run manifest (<out>.manifest.json) holding the
resolved parameters, SHA-256 hashes of the inputs, and the produced
output paths; `pairseg rerun <manifest>` replays a run and reproduces the
deterministic outputs bit-for-bit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alt import AltConfig, alt_run, region_histogram
from .core import Distribution, EstimationError, LabelImage, MixtureParams, ModelEstimate
from .estimators import (
    DEFAULT_KAPPA,
    DEFAULT_W0_GRID,
    SearchConfig,
    estimate_models,
    radius_from_rho,
    search_w0,
)
from .ingest import RgbImage, load_image, load_mask, quantize_colors, save_image, save_mask, save_overlay
from .metrics import model_distance, segmentation_score
from .modelio import load_model, save_model
from .mrf import EnergyParams, segment_graphcut
from .stats import estimate_beta, independence_gap, pair_marginal
from .synth import (
    MASK_KINDS,
    MaskKind,
    TextureSpec,
    gen_iid,
    gen_mask,
    gen_texture,
    random_model,
    sticky_transition,
)


@dataclass
class RunManifest:
    command: str
    params: dict
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    tool: str = "pairseg"
    version: str = __version__

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=1, sort_keys=True) + "\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _manifest_path(out: str) -> Path:
    return Path(str(out) + ".manifest.json")


def _finish(command: str, args, input_paths: list, outputs: list) -> None:
    params = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(
        command=command,
        params=params,
        inputs={str(p): _sha256(p) for p in input_paths},
        outputs=[str(p) for p in outputs],
    )
    manifest.write(_manifest_path(args.out))


def _parse_grid(text: str | None):
    if not text:
        return DEFAULT_W0_GRID
    return tuple(float(tok) for tok in text.split(","))


def _load_as_labels(path: str, seed: int, out: str, outputs: list) -> LabelImage:
    """Load an image; RGB inputs are quantized and the palette written alongside."""
    img = load_image(path)
    if isinstance(img, RgbImage):
        labels, palette = quantize_colors(img, seed=seed)
        palette_path = Path(str(out) + ".palette.json")
        palette_path.write_text(palette.to_json() + "\n")
        outputs.append(palette_path)
        return labels
    return img


def _estimate(img: LabelImage, method: str, rho: float, kappa: float, grid) -> ModelEstimate:
    config = SearchConfig(w0_grid=grid, rho=rho, kappa=kappa, method=method)
    return estimate_models(img, config)


def cmd_estimate(args) -> int:
    outputs = [Path(args.out)]
    img = _load_as_labels(args.image, args.seed, args.out, outputs)
    est = _estimate(img, args.method, args.rho, args.kappa, _parse_grid(args.w0_grid))
    save_model(est, args.out)
    _finish("estimate", args, [args.image], outputs)
    print(f"wrote {args.out} (w0={est.params.w0:.2f}, residual={est.residual:.3e})")
    return 0


def cmd_segment(args) -> int:
    outputs = [Path(args.out)]
    img = _load_as_labels(args.image, args.seed, args.out, outputs)
    inputs = [args.image]
    if args.model:
        est = load_model(args.model)
        inputs.append(args.model)
    else:
        est = _estimate(img, args.method, args.rho, args.kappa, _parse_grid(args.w0_grid))
    if est.theta0.k != img.k:
        raise ValueError(f"model alphabet k={est.theta0.k} does not match image k={img.k}")
    mask = segment_graphcut(img, est.theta0, est.theta1, EnergyParams(lam=args.lam))
    save_mask(mask, args.out)
    if args.overlay:
        save_overlay(img, mask, args.overlay)
        outputs.append(Path(args.overlay))
    _finish("segment", args, inputs, outputs)
    print(f"wrote {args.out} (region 0 area fraction {mask.area_fraction(0):.3f})")
    return 0


def cmd_synth(args) -> int:
    prefix = args.out
    mask = gen_mask(MaskKind(args.mask, args.size, args.size))
    rng = np.random.default_rng(args.seed)
    seeds = rng.integers(0, 2**31, size=4)
    if args.mode == "iid":
        theta0 = random_model(args.k, int(seeds[0]))
        theta1 = random_model(args.k, int(seeds[1]))
        img = gen_iid(mask, theta0, theta1, int(seeds[2]))
    else:
        theta0 = random_model(args.k, int(seeds[0]))
        theta1 = random_model(args.k, int(seeds[1]))
        spec0 = TextureSpec(sticky_transition(theta0, args.stay), int(seeds[2]))
        spec1 = TextureSpec(sticky_transition(theta1, args.stay), int(seeds[3]))
        img = gen_texture(mask, spec0, spec1)
    image_path = Path(f"{prefix}.pgm")
    mask_path = Path(f"{prefix}.gt.pgm")
    models_path = Path(f"{prefix}.models.json")
    save_image(img, image_path)
    save_mask(mask, mask_path)
    w0 = mask.area_fraction(0)
    save_model(
        ModelEstimate(MixtureParams(w0, 1.0 - w0, 0.0), theta0, theta1, 0.0, "generator"),
        models_path,
    )
    _finish("synth", args, [], [image_path, mask_path, models_path])
    print(f"wrote {image_path}, {mask_path}, {models_path}")
    return 0


def _padded(p: Distribution, k: int) -> Distribution:
    if p.k == k:
        return p
    return Distribution(np.concatenate([p.probs, np.zeros(k - p.k)]))


def cmd_eval(args) -> int:
    gt = load_mask(args.gt)
    est = load_mask(args.est)
    jac, swapped_masks = segmentation_score(gt, est)
    report: dict = {"jac": jac, "swapped_masks": swapped_masks}
    inputs = [args.gt, args.est]
    if args.gt_models and args.est_models:
        gt_model = load_model(args.gt_models)
        est_model = load_model(args.est_models)
        k = max(gt_model.theta0.k, est_model.theta0.k)
        d_b, swapped_models = model_distance(
            _padded(gt_model.theta0, k),
            _padded(gt_model.theta1, k),
            _padded(est_model.theta0, k),
            _padded(est_model.theta1, k),
        )
        report["d_b"] = d_b
        report["swapped_models"] = swapped_models
        inputs += [args.gt_models, args.est_models]
    Path(args.out).write_text(json.dumps(report, indent=1) + "\n")
    _finish("eval", args, inputs, [Path(args.out)])
    print(json.dumps(report))
    return 0


def cmd_alt(args) -> int:
    prefix = args.out
    outputs: list = []
    img = _load_as_labels(args.image, args.seed, prefix, outputs)
    config = AltConfig(lam=args.lam, smoothing_K=args.K, max_iters=args.max_iters)
    result = alt_run(img, config)

    gt_thetas = None
    inputs = [args.image]
    if args.gt_models:
        gt_model = load_model(args.gt_models)
        gt_thetas = (gt_model.theta0, gt_model.theta1)
        inputs.append(args.gt_models)

    mask_path = Path(f"{prefix}.mask.pgm")
    model_path = Path(f"{prefix}.model.json")
    trace_path = Path(f"{prefix}.trace.csv")
    save_mask(result.mask, mask_path)
    save_model(result.estimate, model_path)
    with open(trace_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "energy", "boundary", "d_b"])
        for entry in result.trace:
            if gt_thetas is not None:
                k = max(gt_thetas[0].k, entry.theta0.k)
                d_b, _ = model_distance(
                    _padded(gt_thetas[0], k),
                    _padded(gt_thetas[1], k),
                    _padded(entry.theta0, k),
                    _padded(entry.theta1, k),
                )
                d_b_text = repr(d_b)
            else:
                d_b_text = ""
            writer.writerow([entry.index, repr(entry.energy), entry.boundary, d_b_text])
    outputs += [mask_path, model_path, trace_path]
    _finish("alt", args, inputs, outputs)
    note = " (single region)" if result.single_region else ""
    print(f"converged after {result.iterations} iterations{note}; wrote {mask_path}")
    return 0


def cmd_diagnose(args) -> int:
    outputs: list = [Path(args.out)]
    img = _load_as_labels(args.image, args.seed, args.out, outputs)
    if args.r_max < 1:
        raise ValueError(f"--r-max must be >= 1, got {args.r_max}")
    if args.r_max >= min(img.width, img.height):
        raise ValueError(
            f"--r-max {args.r_max} too large for a {img.width}x{img.height} image "
            f"(must stay below min dimension {min(img.width, img.height)})"
        )
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "independence_gap"])
        for r in range(1, args.r_max + 1):
            writer.writerow([r, repr(independence_gap(img, r))])
    _finish("diagnose", args, [args.image], outputs)
    print(f"wrote {args.out}")
    return 0


def cmd_bench(args) -> int:
    trials_path = Path(str(args.out) + ".trials.csv")
    summary_path = Path(args.out)
    grid = _parse_grid(args.w0_grid)
    eparams = EnergyParams(lam=args.lam)
    rows: list[dict] = []

    for mask_index, kind in enumerate(MASK_KINDS):
        mask = gen_mask(MaskKind(kind, args.size, args.size))
        for trial in range(args.trials):
            child = np.random.SeedSequence(
                entropy=args.seed, spawn_key=(mask_index, trial)
            ).generate_state(4)
            if args.suite == "iid":
                theta0 = random_model(args.k, int(child[0]))
                theta1 = random_model(args.k, int(child[1]))
                img = gen_iid(mask, theta0, theta1, int(child[2]))
            else:
                stay = 0.7 + 0.2 * (int(child[3]) % 1000) / 1000.0
                spec0 = TextureSpec(
                    sticky_transition(random_model(args.k, int(child[0])), stay), int(child[2])
                )
                spec1 = TextureSpec(
                    sticky_transition(random_model(args.k, int(child[1])), stay), int(child[2]) + 1
                )
                img = gen_texture(mask, spec0, spec1)
            gt0 = region_histogram(img, mask, 0, 0.0)
            gt1 = region_histogram(img, mask, 1, 0.0)

            r = radius_from_rho(args.rho, img)
            beta = estimate_beta(img, r)
            alpha = pair_marginal(beta)

            for method in ("algebraic", "spectral"):
                t0 = time.perf_counter()
                est = search_w0(
                    alpha, beta, SearchConfig(w0_grid=grid, rho=args.rho, kappa=args.kappa, method=method)
                )
                est_seconds = time.perf_counter() - t0
                t0 = time.perf_counter()
                seg = segment_graphcut(img, est.theta0, est.theta1, eparams)
                seg_seconds = time.perf_counter() - t0
                d_b, _ = model_distance(gt0, gt1, est.theta0, est.theta1)
                jac, _ = segmentation_score(mask, seg)
                rows.append(
                    dict(mask=kind, trial=trial, method=method, d_b=d_b, jac=jac,
                         est_seconds=est_seconds, seg_seconds=seg_seconds)
                )

            t0 = time.perf_counter()
            result = alt_run(img, AltConfig(lam=args.lam))
            alt_seconds = time.perf_counter() - t0
            d_b, _ = model_distance(gt0, gt1, result.estimate.theta0, result.estimate.theta1)
            jac, _ = segmentation_score(mask, result.mask)
            rows.append(
                dict(mask=kind, trial=trial, method="alt", d_b=d_b, jac=jac,
                     est_seconds=alt_seconds, seg_seconds=0.0)
            )

    # per-trial metrics: deterministic for a fixed seed (no timing columns)
    with open(trials_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mask", "trial", "method", "d_b", "jac"])
        for row in rows:
            writer.writerow([row["mask"], row["trial"], row["method"],
                             repr(row["d_b"]), repr(row["jac"])])

    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mask", "method", "trials", "mean_d_b", "mean_jac",
                         "mean_est_seconds", "mean_seg_seconds"])
        for kind in MASK_KINDS:
            for method in ("algebraic", "spectral", "alt"):
                cell = [r for r in rows if r["mask"] == kind and r["method"] == method]
                writer.writerow([
                    kind, method, len(cell),
                    repr(float(np.mean([r["d_b"] for r in cell]))),
                    repr(float(np.mean([r["jac"] for r in cell]))),
                    f"{float(np.mean([r['est_seconds'] for r in cell])):.4f}",
                    f"{float(np.mean([r['seg_seconds'] for r in cell])):.4f}",
                ])
    _finish("bench", args, [], [summary_path, trials_path])
    print(f"wrote {summary_path} and {trials_path}")
    return 0


def cmd_rerun(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    params = dict(manifest["params"])
    for path, digest in manifest.get("inputs", {}).items():
        if _sha256(path) != digest:
            raise ValueError(f"input {path} changed since the manifest was written")
    if args.out:
        params["out"] = args.out
    command = manifest["command"]
    handler = _HANDLERS[command]
    return handler(argparse.Namespace(**params))


_HANDLERS = {
    "estimate": cmd_estimate,
    "segment": cmd_segment,
    "synth": cmd_synth,
    "eval": cmd_eval,
    "alt": cmd_alt,
    "diagnose": cmd_diagnose,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairseg",
        description="Appearance-model estimation from pair statistics and graph-cut segmentation",
    )
    parser.add_argument("--version", action="version", version=f"pairseg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_estimation_flags(p):
        p.add_argument("--method", choices=("algebraic", "spectral"), default="spectral")
        p.add_argument("--rho", type=float, default=0.03)
        p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
        p.add_argument("--w0-grid", dest="w0_grid", default=None,
                       help="comma-separated w0 candidates in (0,1)")

    p = sub.add_parser("estimate", help="estimate appearance models from an image")
    p.add_argument("image")
    add_estimation_flags(p)
    p.add_argument("--seed", type=int, default=0, help="seed for RGB quantization")
    p.add_argument("--out", required=True, help="output model JSON")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("segment", help="segment an image (estimating models unless --model)")
    p.add_argument("image")
    p.add_argument("--model", default=None, help="model JSON from `estimate`")
    add_estimation_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--overlay", default=None, help="also write a contour overlay PPM")
    p.add_argument("--out", required=True, help="output mask PGM")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("synth", help="generate a synthetic two-region image")
    p.add_argument("--mask", choices=MASK_KINDS, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--mode", choices=("iid", "texture"), default="iid")
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--stay", type=float, default=0.8,
                   help="texture mode: probability of repeating the previous value")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score an estimated mask (and optionally models)")
    p.add_argument("--gt", required=True)
    p.add_argument("--est", required=True)
    p.add_argument("--gt-models", dest="gt_models", default=None)
    p.add_argument("--est-models", dest="est_models", default=None)
    p.add_argument("--out", required=True, help="output report JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("alt", help="alternation baseline (histograms <-> graph cuts)")
    p.add_argument("image")
    p.add_argument("--lambda", dest="lam", type=float, default=5.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=50)
    p.add_argument("--gt-models", dest="gt_models", default=None,
                   help="model JSON for the d_b trace column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_alt)

    p = sub.add_parser("diagnose", help="independence gap as a function of distance")
    p.add_argument("image")
    p.add_argument("--r-max", dest="r_max", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("bench", help="synthetic benchmark over masks x trials x methods")
    p.add_argument("--suite", choices=("iid", "texture"), default="iid")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=320)
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--rho", type=float, default=0.06)
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--lambda", dest="lam", type=float, default=5.0)
    p.add_argument("--w0-grid", dest="w0_grid", default=None)
    p.add_argument("--out", required=True, help="output summary CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("rerun", help="replay a run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="override the output path")
    p.set_defaults(func=cmd_rerun)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
