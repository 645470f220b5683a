"""Monte Carlo experiments: sampling convergence, subsampling stability, generalization gap."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ..bounds import BoundQuery, generalization_bound
from ..core import GraphonSignal, apply_permutation, induce, project_to_resolution, lcm
from ..cutmetric import kernel_l1_norm, signal_l1_norm
from ..mpnn import MpnnSpec, forward, lipschitz_bound, random_spec, readout
from ..rng import make_rng
from ..sampling import (
    COMMON_RESOLUTION_CAP,
    bernoulli_simple,
    draw_points,
    estimate_sampling_distance,
    map_trials,
    mean_stderr,
    sample_graph,
    sampling_bound,
    sorted_alignment,
)
from .report import Report

__all__ = [
    "count_inversions",
    "default_sbm",
    "default_class_models",
    "default_stability_spec",
    "tightest_lipschitz",
    "sampling_experiment",
    "stability_experiment",
    "generalization_gap_experiment",
]


def count_inversions(values: Sequence[float]) -> int:
    """Number of consecutive increases in a sequence that should not increase."""
    return sum(1 for a, b in zip(values, values[1:]) if b > a)


def default_sbm(r: float = 1.0) -> GraphonSignal:
    """Four-block SBM with a block-constant scalar signal."""
    B = np.array([
        [0.9, 0.1, 0.3, 0.2],
        [0.1, 0.8, 0.2, 0.4],
        [0.3, 0.2, 0.7, 0.1],
        [0.2, 0.4, 0.1, 0.6],
    ])
    f = np.array([[0.5], [-0.5], [1.0], [0.0]]) * r
    return GraphonSignal.from_arrays(B, f, r)


def default_class_models(r: float = 1.0) -> tuple:
    """Two-class SBM pair: assortative vs. disassortative, with different signals."""
    a = GraphonSignal.from_arrays([[0.7, 0.2], [0.2, 0.7]], [[0.6], [-0.2]], r)
    b = GraphonSignal.from_arrays([[0.2, 0.6], [0.6, 0.3]], [[0.1], [-0.6]], r)
    return a, b


def default_stability_spec(seed: int = 0, in_dim: int = 1) -> MpnnSpec:
    """Two-layer spec with bounded (tanh) message functions."""
    return random_spec(make_rng(seed, "stability-spec"), in_dim=in_dim, layers=2, K=2,
                       hidden=2, kinds=("tanh_affine",), update_prob=0.5)


def tightest_lipschitz(spec: MpnnSpec, r: float):
    """Smallest ``L_theta`` over the settings whose hypotheses the spec meets."""
    best = None
    for setting in (1, 2, 3):
        try:
            b = lipschitz_bound(spec, setting, r)
        except ValueError:
            continue
        if best is None or b.L_theta < best.L_theta:
            best = b
    return best


def sampling_experiment(x: GraphonSignal, k_grid, trials: int, mode: str = "weighted",
                        seed: int = 0, threads: int = 1) -> Report:
    rows, summary, notes = [], [], []
    for k in k_grid:
        rep = estimate_sampling_distance(x, int(k), trials, mode, seed, threads)
        rows += rep.rows
        s = rep.summary[0]
        summary.append({"x": s["k"], "mean": s["mean_l1_upper"], "stderr": s["stderr_l1_upper"],
                        "bound": s["paper_bound"], "mean_heuristic": s["mean_heuristic"],
                        "stderr_heuristic": s["stderr_heuristic"]})
        notes += rep.notes
    means = [s["mean"] for s in summary]
    report = Report("verify-sampling", ("k", "trial", "l1_upper", "heuristic_estimate", "paper_bound"),
                    rows, summary, {"mode": mode, "trials": trials, "seed": seed,
                                    "inversions": count_inversions(means), "notes": "; ".join(notes)})
    report.passed = count_inversions(means) <= 1
    return report


def _common(a: GraphonSignal, b: GraphonSignal):
    M = lcm(a.resolution, b.resolution)
    if M > COMMON_RESOLUTION_CAP:
        M = b.resolution * math.ceil(COMMON_RESOLUTION_CAP / b.resolution)
    return project_to_resolution(a, M), project_to_resolution(b, M), M


def stability_experiment(x: GraphonSignal, spec: MpnnSpec, k_grid, trials: int, seed: int = 0,
                         threads: int = 1, rtol: float = 1e-9) -> Report:
    """Distance between ``(W, Theta(W, f))`` and a sampled simple graph with its MPNN output.

    Distances are L1 at the sorted alignment. ``lipschitz_ok`` checks that the
    output-signal distance is at most ``L_theta`` times the input distance.
    """
    bound = tightest_lipschitz(spec, x.r)
    L = bound.L_theta
    src_out = forward(spec, x)

    def one(k, t):
        g, s = sample_graph(x, k, seed, t, "simple")
        perm = sorted_alignment(s)
        gi = apply_permutation(induce(g), perm)
        go = apply_permutation(induce(forward(spec, g)), perm)
        a_in, b_in, M = _common(x, gi)
        a_out, b_out, _ = _common(src_out, go)
        w1 = kernel_l1_norm(a_in.W - b_in.W)
        in_l1 = w1 + signal_l1_norm(a_in.f - b_in.f)
        out_sig = signal_l1_norm(a_out.f - b_out.f)
        exact = M == lcm(x.resolution, k)
        ok = out_sig <= L * in_l1 * (1 + rtol) + 1e-12 if exact else None
        return {"k": k, "trial": t, "input_l1": in_l1, "output_signal_l1": out_sig,
                "output_l1": w1 + out_sig, "paper_bound": sampling_bound(k, L), "lipschitz_ok": ok}

    rows, summary = [], []
    for k in k_grid:
        k = int(k)
        rs = map_trials(lambda t: one(k, t), range(trials), threads)
        rows += rs
        mu, se = mean_stderr(r["output_signal_l1"] for r in rs)
        imu, ise = mean_stderr(r["input_l1"] for r in rs)
        summary.append({"x": k, "mean": mu, "stderr": se, "bound": sampling_bound(k, L),
                        "mean_input": imu, "stderr_input": ise})
    means = [s["mean"] for s in summary]
    failures = sum(1 for r in rows if r["lipschitz_ok"] is False)
    report = Report(
        "verify-stability",
        ("k", "trial", "input_l1", "output_signal_l1", "output_l1", "paper_bound", "lipschitz_ok"),
        rows, summary,
        {"L_f": bound.L_f, "L_W": bound.L_W, "L_theta": L, "setting": bound.setting,
         "inversions": count_inversions(means), "lipschitz_failures": failures, "seed": seed},
    )
    report.passed = failures == 0 and count_inversions(means) <= 1
    return report


def _clipped_sq(o, y):
    return min(abs(o - y), 1.0) ** 2


def generalization_gap_experiment(
    class_models: Sequence[GraphonSignal],
    spec: MpnnSpec,
    N_grid: Sequence[int] = (50, 200, 800),
    trials: int = 20,
    seed: int = 0,
    k: int = 32,
    head: Optional[np.ndarray] = None,
    p: float = 0.01,
    threads: int = 1,
) -> Report:
    """Gap between empirical risk on ``N`` training graphs and risk on ``N`` fresh graphs.

    The model is fixed (untrained): MPNN, mean readout, linear head ``w``.
    The loss is ``min(|w . z - y|, 1)**2`` with label ``y`` the class index,
    which is ``2 |w|_1``-Lipschitz in the pooled output ``z``. Both samples are
    stratified: class ``c`` gets ``N // C`` graphs, plus one for the first
    ``N % C`` classes.
    """
    C = len(class_models)
    out_dim = spec.out_dim or class_models[0].signal.channels
    if head is None:
        head = make_rng(seed, "gen-gap-head").normal(size=out_dim)
        head = head / np.abs(head).sum()
    head = np.asarray(head, dtype=float)

    def loss_of(g, y):
        return _clipped_sq(float(head @ readout(forward(spec, g))), y)

    def risk(N, rep, split):
        counts = [N // C + (1 if c < N % C else 0) for c in range(C)]
        uids = make_rng(seed, "gen-gap", N, rep, split).integers(0, 2**62, size=N)
        losses, i = [], 0
        for c, n_c in enumerate(counts):
            for _ in range(n_c):
                s = draw_points(k, seed, int(uids[i]))
                losses.append(loss_of(bernoulli_simple(class_models[c], s, seed), c))
                i += 1
        return math.fsum(losses) / N

    r = max(x.r for x in class_models)
    lip = tightest_lipschitz(spec, r)
    L_total = 2.0 * float(np.abs(head).sum()) * lip.L_theta
    zero = GraphonSignal.from_arrays([[0.0]], np.zeros((1, class_models[0].signal.channels)), r)
    o0 = float(head @ readout(forward(spec, zero)))
    loss0 = max(_clipped_sq(o0, c) for c in range(C))

    rows, summary = [], []
    for N in N_grid:
        N = int(N)
        gaps = map_trials(lambda rep: abs(risk(N, rep, "train") - risk(N, rep, "test")), range(trials), threads)
        try:
            bnd = generalization_bound(BoundQuery(N, C, L_total, loss0, p)).value
        except ValueError:
            bnd = math.nan
        for rep, gap in enumerate(gaps):
            rows.append({"N": N, "trial": rep, "gap": gap, "paper_bound": bnd})
        mu, se = mean_stderr(gaps)
        summary.append({"x": N, "mean": mu, "stderr": se, "bound": bnd})
    means = [s["mean"] for s in summary]
    report = Report("gen-gap", ("N", "trial", "gap", "paper_bound"), rows, summary,
                    {"k": k, "classes": C, "lipschitz": L_total, "loss_at_zero": loss0,
                     "inversions": count_inversions(means), "seed": seed})
    report.passed = count_inversions(means) <= 1
    return report
