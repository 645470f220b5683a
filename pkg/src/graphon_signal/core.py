"""Step graphon-signals, graph-signals, partitions and the conversions between them.

Everything here lives on the equipartition of [0, 1] into ``m`` intervals: a
graphon is an ``m x m`` block matrix, a signal an ``m x d`` block matrix.
All value types are frozen and hold read-only arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

import numpy as np

from ._validation import (
    check_square_symmetric,
    check_range,
    as_float_matrix,
)

__all__ = [
    "StepGraphon",
    "StepSignal",
    "GraphonSignal",
    "GraphSignal",
    "Partition",
    "IntervalPermutation",
    "induce",
    "resample",
    "project_to_resolution",
    "apply_permutation",
    "signal_parts",
    "lcm",
]

_SYM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Symmetric block matrix with entries in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = as_float_matrix(self.values, "graphon")
        check_square_symmetric(v, "graphon", tol=_SYM_TOL)
        check_range(v, 0.0, 1.0, "graphon")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_function(cls, func, m: int) -> "StepGraphon":
        """Discretize a callable ``W(x, y)`` at the midpoints of the m-grid."""
        mid = (np.arange(m) + 0.5) / m
        vals = np.array([[func(x, y) for y in mid] for x in mid], dtype=float)
        vals = 0.5 * (vals + vals.T)
        return cls(vals)

    def __eq__(self, other):
        return isinstance(other, StepGraphon) and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class StepSignal:
    """Block-constant signal ``[0,1] -> R^d`` bounded by ``r`` in every channel."""

    values: np.ndarray
    bound: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        v = as_float_matrix(v, "signal", square=False)
        if not self.bound > 0:
            raise ValueError(f"signal bound must be positive, got {self.bound}")
        check_range(v, -self.bound, self.bound, "signal")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, StepSignal)
            and self.bound == other.bound
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GraphonSignal:
    graphon: StepGraphon
    signal: StepSignal

    def __post_init__(self):
        if self.graphon.resolution != self.signal.resolution:
            raise ValueError(
                f"graphon resolution {self.graphon.resolution} != "
                f"signal resolution {self.signal.resolution}"
            )

    @classmethod
    def from_arrays(cls, graphon, signal, r: float = 1.0) -> "GraphonSignal":
        return cls(StepGraphon(graphon), StepSignal(signal, r))

    @property
    def resolution(self) -> int:
        return self.graphon.resolution

    @property
    def W(self) -> np.ndarray:
        return self.graphon.values

    @property
    def f(self) -> np.ndarray:
        return self.signal.values

    @property
    def r(self) -> float:
        return self.signal.bound

    def with_signal(self, values, bound: Optional[float] = None) -> "GraphonSignal":
        return GraphonSignal(self.graphon, StepSignal(values, self.r if bound is None else bound))

    def __eq__(self, other):
        return (
            isinstance(other, GraphonSignal)
            and self.graphon == other.graphon
            and self.signal == other.signal
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GraphSignal:
    """Finite weighted (or simple) graph with node features."""

    adjacency: np.ndarray
    features: np.ndarray
    bound: float = 1.0

    def __post_init__(self):
        a = as_float_matrix(self.adjacency, "adjacency")
        check_square_symmetric(a, "adjacency", tol=_SYM_TOL)
        check_range(a, 0.0, 1.0, "adjacency")
        x = np.asarray(self.features, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        x = as_float_matrix(x, "features", square=False)
        if x.shape[0] != a.shape[0]:
            raise ValueError(f"{x.shape[0]} feature rows for {a.shape[0]} nodes")
        if not self.bound > 0:
            raise ValueError(f"feature bound must be positive, got {self.bound}")
        check_range(x, -self.bound, self.bound, "features")
        object.__setattr__(self, "adjacency", _frozen(a))
        object.__setattr__(self, "features", _frozen(x))
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def channels(self) -> int:
        return self.features.shape[1]

    @property
    def is_simple(self) -> bool:
        a = self.adjacency
        return bool(np.all((a == 0) | (a == 1)) and np.all(np.diag(a) == 0))

    def with_features(self, values, bound: Optional[float] = None) -> "GraphSignal":
        return GraphSignal(self.adjacency, values, self.bound if bound is None else bound)

    def __eq__(self, other):
        return (
            isinstance(other, GraphSignal)
            and self.bound == other.bound
            and np.array_equal(self.adjacency, other.adjacency)
            and np.array_equal(self.features, other.features)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of the ``m`` grid blocks to ``k`` classes (classes may be empty)."""

    assignment: np.ndarray
    k: int

    def __post_init__(self):
        a = np.asarray(self.assignment)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("assignment must be a nonempty 1-d array")
        if not np.issubdtype(a.dtype, np.integer):
            if not np.all(a == np.round(a)):
                raise ValueError("assignment must hold integer class indices")
        a = a.astype(np.int64)
        if self.k < 1 or a.min() < 0 or a.max() >= self.k:
            raise ValueError(f"class indices must lie in [0, {self.k})")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Relabel arbitrary hashable labels to 0..k-1 by first appearance."""
        mapping: dict = {}
        out = []
        for lab in labels:
            key = tuple(lab) if isinstance(lab, (list, np.ndarray)) else lab
            out.append(mapping.setdefault(key, len(mapping)))
        return cls(np.array(out, dtype=np.int64), max(len(mapping), 1))

    @classmethod
    def discrete(cls, m: int) -> "Partition":
        return cls(np.arange(m), m)

    @classmethod
    def trivial(cls, m: int) -> "Partition":
        return cls(np.zeros(m, dtype=np.int64), 1)

    @property
    def resolution(self) -> int:
        return self.assignment.size

    def sizes(self) -> np.ndarray:
        """Number of grid blocks in each class."""
        return np.bincount(self.assignment, minlength=self.k)

    def measures(self) -> np.ndarray:
        return self.sizes() / self.resolution

    def indicator(self) -> np.ndarray:
        """``m x k`` 0/1 membership matrix."""
        out = np.zeros((self.resolution, self.k))
        out[np.arange(self.resolution), self.assignment] = 1.0
        return out

    def nonempty(self) -> int:
        return int(np.count_nonzero(self.sizes()))

    def same_classes(self, other: "Partition") -> bool:
        """Equality up to relabeling of classes (empty classes ignored)."""
        if self.resolution != other.resolution:
            return False
        pairs = set(zip(self.assignment.tolist(), other.assignment.tolist()))
        return len(pairs) == self.nonempty() == other.nonempty()

    def __eq__(self, other):
        return (
            isinstance(other, Partition)
            and self.k == other.k
            and np.array_equal(self.assignment, other.assignment)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class IntervalPermutation:
    """Block permutation of the m-grid; acts by ``x'[i] = x[perm[i]]``."""

    perm: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.perm, dtype=np.int64)
        if p.ndim != 1 or not np.array_equal(np.sort(p), np.arange(p.size)):
            raise ValueError("perm must be a permutation of 0..m-1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "perm", p)

    @classmethod
    def identity(cls, m: int) -> "IntervalPermutation":
        return cls(np.arange(m))

    @property
    def resolution(self) -> int:
        return self.perm.size

    def inverse(self) -> "IntervalPermutation":
        return IntervalPermutation(np.argsort(self.perm))

    def then(self, other: "IntervalPermutation") -> "IntervalPermutation":
        """Permutation equal to applying ``self`` and then ``other``."""
        return IntervalPermutation(self.perm[other.perm])

    def __eq__(self, other):
        return isinstance(other, IntervalPermutation) and np.array_equal(self.perm, other.perm)

    __hash__ = None


def induce(g: GraphSignal) -> GraphonSignal:
    """Graphon-signal induced by a graph-signal: node i becomes the interval I_i."""
    return GraphonSignal(StepGraphon(g.adjacency), StepSignal(g.features, g.bound))


def _refine_matrix(m: int, m_new: int) -> np.ndarray:
    # P[a, i] = m_new * |I_a^{m_new} ∩ I_i^{m}| : rows of P sum to 1
    edges_new = np.arange(m_new + 1) / m_new
    edges_old = np.arange(m + 1) / m
    lo = np.maximum(edges_new[:-1, None], edges_old[None, :-1])
    hi = np.minimum(edges_new[1:, None], edges_old[None, 1:])
    return np.clip(hi - lo, 0.0, None) * m_new


def project_to_resolution(x: GraphonSignal, m_new: int) -> GraphonSignal:
    """Average ``x`` onto the equipartition into ``m_new`` intervals (any m_new)."""
    m = x.resolution
    if m_new == m:
        return x
    if m_new % m == 0:
        rep = m_new // m
        W = np.repeat(np.repeat(x.W, rep, axis=0), rep, axis=1)
        f = np.repeat(x.f, rep, axis=0)
    elif m % m_new == 0:
        c = m // m_new
        W = x.W.reshape(m_new, c, m_new, c).mean(axis=(1, 3))
        f = x.f.reshape(m_new, c, -1).mean(axis=1)
    else:
        P = _refine_matrix(m, m_new)
        W = P @ x.W @ P.T
        f = P @ x.f
    W = np.clip(0.5 * (W + W.T), 0.0, 1.0)
    f = np.clip(f, -x.r, x.r)
    return GraphonSignal(StepGraphon(W), StepSignal(f, x.r))


def resample(x: GraphonSignal, m_new: int) -> GraphonSignal:
    """Change resolution by exact refinement or by block averaging.

    Refinement (``m_new`` a multiple of the resolution) replicates blocks;
    coarsening (``m_new`` divides the resolution) averages them, which is the
    projection onto the coarser equipartition.
    """
    m = x.resolution
    if m_new < 1:
        raise ValueError(f"resolution must be positive, got {m_new}")
    if m_new % m and m % m_new:
        raise ValueError(f"incompatible resolutions {m} -> {m_new}: neither divides the other")
    return project_to_resolution(x, m_new)


def apply_permutation(x: GraphonSignal, p: IntervalPermutation) -> GraphonSignal:
    if p.resolution != x.resolution:
        raise ValueError(f"permutation of size {p.resolution} on resolution {x.resolution}")
    idx = p.perm
    return GraphonSignal(
        StepGraphon(x.W[np.ix_(idx, idx)]),
        StepSignal(x.f[idx], x.r),
    )


def signal_parts(f: StepSignal) -> tuple[StepSignal, StepSignal]:
    """Positive and negative parts, ``f = f_plus - f_minus``, channelwise."""
    v = f.values
    return StepSignal(np.maximum(v, 0.0), f.bound), StepSignal(np.maximum(-v, 0.0), f.bound)
