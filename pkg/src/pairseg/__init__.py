"""Two-region appearance-model estimation from pixel pair statistics,
graph-cut segmentation, and a synthetic benchmark harness."""

__version__ = "0.1.0"

from .core import (
    BinaryMask,
    Distribution,
    EstimationError,
    LabelImage,
    MixtureParams,
    ModelEstimate,
    PairDistribution,
    new_label_image,
    normalize_clamped,
)
from .stats import (
    PairSamplingPolicy,
    compose_alpha,
    compose_beta,
    enumerate_offsets,
    estimate_alpha,
    estimate_beta,
    independence_gap,
    pair_marginal,
    rank_one_residual,
)
from .estimators import (
    EigenPair,
    SearchConfig,
    epsilon_from_rho,
    estimate_models,
    power_iteration,
    radius_from_rho,
    search_w0,
    select_pivot,
    solve_least_squares,
    solve_minimal,
    solve_spectral,
)
from .maxflow import FlowNetwork, max_flow
from .mrf import EnergyParams, boundary_length, energy, segment_graphcut
from .alt import AltConfig, AltResult, alt_run, half_area_square, region_histogram
from .metrics import EvalReport, bhattacharyya, jaccard, model_distance, segmentation_score
from .synth import (
    MaskKind,
    TextureSpec,
    gen_iid,
    gen_mask,
    gen_texture,
    measure_epsilon,
    random_model,
    sticky_transition,
)
from .ingest import (
    Palette,
    RgbImage,
    load_image,
    load_mask,
    quantize_colors,
    save_image,
    save_mask,
    save_overlay,
)
from .modelio import load_model, model_from_dict, model_to_dict, save_model
