"""Step graphon-signals: cut metrics, weak regularity, sampling and MPNNs."""

from .bounds import (
    BoundQuery,
    GeneralizationBound,
    covering_number_log2,
    generalization_bound,
    xi,
    xi_inverse,
    xi_log2,
)
from .core import (
    GraphonSignal,
    GraphSignal,
    IntervalPermutation,
    Partition,
    StepGraphon,
    StepSignal,
    apply_permutation,
    induce,
    resample,
    signal_parts,
)
from .cutmetric import (
    CutDistanceResult,
    CutNormResult,
    cut_distance_exact,
    cut_distance_upper,
    graphon_signal_cut_norm,
    kernel_cut_norm_exact,
    kernel_cut_norm_heuristic,
    kernel_l1_norm,
    signal_cut_norm,
)
from .regularity import (
    RegularityDecomposition,
    WeakRegularity,
    combine,
    equitize,
    irregularity,
    project,
    quantize_signal,
    weak_regularity_decompose,
)
from .sampling import (
    SampleDraw,
    bernoulli_simple,
    draw_points,
    estimate_sampling_distance,
    evaluate_weighted,
    first_sampling_check,
    sorted_alignment,
)

__version__ = "0.1.0"

__all__ = [
    "BoundQuery", "GeneralizationBound", "covering_number_log2", "generalization_bound",
    "xi", "xi_inverse", "xi_log2",
    "GraphonSignal", "GraphSignal", "IntervalPermutation", "Partition", "StepGraphon",
    "StepSignal", "apply_permutation", "induce", "resample", "signal_parts",
    "CutDistanceResult", "CutNormResult", "cut_distance_exact", "cut_distance_upper",
    "graphon_signal_cut_norm", "kernel_cut_norm_exact", "kernel_cut_norm_heuristic",
    "kernel_l1_norm", "signal_cut_norm",
    "RegularityDecomposition", "WeakRegularity", "combine", "equitize", "irregularity",
    "project", "quantize_signal", "weak_regularity_decompose",
    "SampleDraw", "bernoulli_simple", "draw_points", "estimate_sampling_distance",
    "evaluate_weighted", "first_sampling_check", "sorted_alignment",
]
