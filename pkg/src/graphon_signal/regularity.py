"""Weak regularity: greedy box decomposition, partition algebra and projections."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, floor
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_graphon_signal
from .core import GraphonSignal, GraphSignal, Partition, StepGraphon, StepSignal
from .cutmetric import EXHAUSTIVE_LIMIT, kernel_cut_norm, signal_l1_norm

__all__ = [
    "RegularityDecomposition",
    "irregularity",
    "weak_regularity_decompose",
    "quantize_signal",
    "project",
    "project_kernel",
    "equitize",
    "combine",
    "WeakRegularity",
]

GREEDY_EXACT_LIMIT = 20


@dataclass(frozen=True)
class RegularityDecomposition:
    """Result of the greedy box decomposition.

    ``approximant`` is the symmetrized sum of boxes and may leave [0, 1];
    ``projected`` is ``W`` averaged over ``partition`` and is a valid graphon.
    ``residual_exact`` is False when the cut norms were estimated heuristically,
    in which case ``residual_cut_norm`` is a lower estimate.
    """

    steps: list
    residual_cut_norm: float
    residual_exact: bool
    approximant: np.ndarray
    partition: Partition
    projected: StepGraphon
    stopped_by: str = "tolerance"
    history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "steps": [
                {"S": np.flatnonzero(S).tolist(), "T": np.flatnonzero(T).tolist(), "gamma": g}
                for S, T, g in self.steps
            ],
            "residual_cut_norm": self.residual_cut_norm,
            "residual_exact": self.residual_exact,
            "stopped_by": self.stopped_by,
            "partition": self.partition.assignment.tolist(),
            "classes": self.partition.k,
        }


def _class_densities(A: np.ndarray, p: Partition) -> np.ndarray:
    M = p.indicator()
    sizes = p.sizes().astype(float)
    counts = np.outer(sizes, sizes)
    sums = M.T @ A @ M
    with np.errstate(invalid="ignore", divide="ignore"):
        dens = np.where(counts > 0, sums / np.where(counts > 0, counts, 1.0), 0.0)
    return dens


def irregularity(g: GraphSignal, p: Partition, limit: int = EXHAUSTIVE_LIMIT, restarts: int = 20, seed: int = 0) -> float:
    """``max_{U,S} |e_G(U,S) - e_P(U,S)| / n**2`` over node subsets.

    Edge counts are taken over ordered pairs ``(u, s)`` with ``u`` in U and
    ``s`` in S, so self-loops count once and other edges once per orientation.
    Exact for ``n <= limit``; a local-search lower estimate above.
    """
    A = np.asarray(g.adjacency if isinstance(g, GraphSignal) else g, dtype=float)
    if p.resolution != A.shape[0]:
        raise ValueError(f"partition over {p.resolution} nodes for a graph with {A.shape[0]}")
    dens = _class_densities(A, p)
    expected = dens[np.ix_(p.assignment, p.assignment)]
    return kernel_cut_norm(A - expected, limit=limit, restarts=restarts, seed=seed).value


def project_kernel(W, p: Partition) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    dens = _class_densities(W, p)
    return dens[np.ix_(p.assignment, p.assignment)]


def _project_signal(f: np.ndarray, p: Partition) -> np.ndarray:
    M = p.indicator()
    sizes = p.sizes().astype(float)
    means = np.where(sizes[:, None] > 0, (M.T @ f) / np.maximum(sizes, 1.0)[:, None], 0.0)
    return means[p.assignment]


def project(x: GraphonSignal, p: Partition) -> GraphonSignal:
    """Average the graphon over each ``P_i x P_j`` and the signal over each ``P_i``."""
    x = check_graphon_signal(x)
    if p.resolution != x.resolution:
        raise ValueError(f"partition resolution {p.resolution} != {x.resolution}")
    W = np.clip(project_kernel(x.W, p), 0.0, 1.0)
    W = 0.5 * (W + W.T)
    f = np.clip(_project_signal(x.f, p), -x.r, x.r)
    return GraphonSignal(StepGraphon(W), StepSignal(f, x.r))


def combine(p: Partition, q: Partition) -> Partition:
    """Common refinement: one class per nonempty intersection of a p-class and a q-class."""
    if p.resolution != q.resolution:
        raise ValueError(f"partitions over different grids ({p.resolution}, {q.resolution})")
    return Partition.from_labels(zip(p.assignment.tolist(), q.assignment.tolist()))


def equitize(p: Partition, n: int) -> Partition:
    """Equipartition into ``n`` classes that mostly refines ``p``.

    Each class of ``p`` is cut into as many whole chunks of measure ``1/n`` as
    fit (blocks taken in increasing order). The leftover blocks of all classes
    are pooled and sliced into the remaining chunks. Only the pooled chunks
    break the refinement, and they cover measure less than ``k/n``.
    """
    m = p.resolution
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if m % n:
        raise ValueError(
            f"grid resolution {m} cannot carry {n} equal classes; refine to a multiple of {n} first"
        )
    q = m // n
    out = np.empty(m, dtype=np.int64)
    label = 0
    pool = []
    for c in range(p.k):
        blocks = np.flatnonzero(p.assignment == c)
        full = len(blocks) // q
        for j in range(full):
            out[blocks[j * q:(j + 1) * q]] = label
            label += 1
        pool.extend(blocks[full * q:].tolist())
    for j in range(0, len(pool), q):
        out[pool[j:j + q]] = label
        label += 1
    return Partition(out, n)


def quantize_signal(f: StepSignal, rho: float) -> tuple[StepSignal, Partition]:
    """Snap each channel to the midpoints of ``ceil(r / rho)`` equal bins of [-r, r].

    Bins have width ``2r / j <= 2 rho``, so every value moves by at most
    ``rho``. The partition groups blocks whose values share a bin in every
    channel.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    r = f.bound
    j = max(int(ceil(r / rho)), 1)
    w = 2.0 * r / j
    idx = np.clip(np.floor((f.values + r) / w).astype(np.int64), 0, j - 1)
    mid = -r + (idx + 0.5) * w
    part = Partition.from_labels(map(tuple, idx.tolist()))
    return StepSignal(np.clip(mid, -r, r), r), part


def _atoms(steps, m: int) -> Partition:
    if not steps:
        return Partition.trivial(m)
    cols = []
    for S, T, _ in steps:
        cols.append(S)
        cols.append(T)
    labels = np.stack(cols, axis=1).astype(np.int8)
    return Partition.from_labels(map(tuple, labels.tolist()))


def weak_regularity_decompose(
    W,
    epsilon: float,
    max_steps: Optional[int] = None,
    exact_limit: int = GREEDY_EXACT_LIMIT,
    restarts: int = 20,
    seed: int = 0,
) -> RegularityDecomposition:
    """Greedy box decomposition of a step graphon down to cut-norm residual ``epsilon``.

    Each step takes a maximizing box ``S x T`` of the current (nonsymmetric)
    residual, subtracts its mean over the box, and records it. With exact
    maximization the residual energy drops by at least ``epsilon**2`` per
    step, so at most ``ceil(1 / epsilon**2)`` steps are needed.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if isinstance(W, (GraphonSignal, GraphSignal)):
        values = check_graphon_signal(W).W
    elif isinstance(W, StepGraphon):
        values = W.values
    else:
        values = StepGraphon(W).values
    m = values.shape[0]
    exact = m <= exact_limit
    lim = exact_limit if exact else 0
    cap = int(ceil(1.0 / epsilon**2 - 1e-12))
    if max_steps is not None:
        cap = min(cap, int(max_steps))

    def cut(D):
        return kernel_cut_norm(D, limit=lim, restarts=restarts, seed=seed)

    R = values.copy()
    steps, history = [], []
    stopped = "step-cap"
    while True:
        res = cut(R)
        history.append(res.value)
        if res.value <= epsilon:
            stopped = "tolerance"
            break
        if len(steps) >= cap:
            break
        S, T = res.witness_S, res.witness_T
        if not S.any() or not T.any():
            stopped = "degenerate"
            break
        box = np.ix_(S, T)
        gamma = float(R[box].sum() / (S.sum() * T.sum()))
        R[box] -= gamma
        steps.append((S.copy(), T.copy(), gamma))

    approx = np.zeros((m, m))
    for S, T, g in steps:
        box = np.outer(S, T).astype(float)
        approx += 0.5 * g * (box + box.T)
    residual = cut(values - approx).value
    part = _atoms(steps, m)
    Wp = project_kernel(values, part)
    Wp = np.clip(0.5 * (Wp + Wp.T), 0.0, 1.0)
    return RegularityDecomposition(
        steps=steps,
        residual_cut_norm=float(residual),
        residual_exact=exact,
        approximant=approx,
        partition=part,
        projected=StepGraphon(Wp),
        stopped_by=stopped,
        history=history,
    )


class WeakRegularity(TransformerMixin, BaseEstimator):
    """Approximate a graphon-signal by a stochastic block model.

    ``fit`` runs the greedy decomposition on the graphon and, when ``rho`` is
    given, quantizes the signal; the fitted partition is the common refinement
    of both. ``transform`` projects a graphon-signal on the same grid onto it.

    >>> est = WeakRegularity(epsilon=0.5).fit(x)          # doctest: +SKIP
    >>> sbm = est.transform(x)                            # doctest: +SKIP
    """

    def __init__(self, epsilon=0.3, rho=None, max_steps=None, exact_limit=GREEDY_EXACT_LIMIT,
                 restarts=20, seed=0):
        self.epsilon = epsilon
        self.rho = rho
        self.max_steps = max_steps
        self.exact_limit = exact_limit
        self.restarts = restarts
        self.seed = seed

    def fit(self, X, y=None):
        x = check_graphon_signal(X)
        dec = weak_regularity_decompose(
            x.graphon, self.epsilon, self.max_steps, self.exact_limit, self.restarts, self.seed
        )
        part = dec.partition
        if self.rho is not None:
            _, sig_part = quantize_signal(x.signal, self.rho)
            part = combine(part, sig_part)
        self.decomposition_ = dec
        self.partition_ = part
        self.residual_cut_norm_ = dec.residual_cut_norm
        self.n_steps_ = len(dec.steps)
        self.resolution_ = x.resolution
        return self

    def transform(self, X):
        if not hasattr(self, "partition_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("WeakRegularity is not fitted yet; call fit first")
        x = check_graphon_signal(X)
        if x.resolution != self.resolution_:
            raise ValueError(f"fitted on resolution {self.resolution_}, got {x.resolution}")
        out = project(x, self.partition_)
        if self.rho is not None:
            sig, _ = quantize_signal(x.signal, self.rho)
            out = out.with_signal(_project_signal(sig.values, self.partition_))
        return out

    def signal_error(self, X) -> float:
        """L1 distance between the signal of ``X`` and its transformed signal."""
        x = check_graphon_signal(X)
        return signal_l1_norm(x.f - self.transform(x).f)
