"""Message passing with normalized sum aggregation on graphs and step graphons.

Graphs and graphons share one arithmetic path: the induced graphon of a graph
has the adjacency as its block values and the features as its signal, and
aggregation is ``(A * Q).sum(axis=1) / n`` in both cases. Forward passes on
``g`` and on ``induce(g)`` therefore agree bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..core import GraphonSignal, GraphSignal, StepGraphon, StepSignal, induce
from .catalog import CatalogFunction

__all__ = [
    "MessageFunctionSpec",
    "MpnnLayer",
    "MpnnSpec",
    "message_kernel",
    "aggregate",
    "aggregate_graphon",
    "aggregate_graph",
    "forward",
    "forward_signal",
    "readout",
    "verify_commutation",
    "random_spec",
    "MessagePassingNetwork",
]


@dataclass(frozen=True, eq=False)
class MessageFunctionSpec:
    """``Phi(a, b) = sum_k receivers[k](a) * transmitters[k](b)`` (elementwise)."""

    receivers: tuple
    transmitters: tuple

    def __post_init__(self):
        rs, ts = tuple(self.receivers), tuple(self.transmitters)
        if not rs or len(rs) != len(ts):
            raise ValueError("need K >= 1 receiver/transmitter pairs of equal count")
        fns = rs + ts
        if len({f.in_dim for f in fns}) != 1 or len({f.out_dim for f in fns}) != 1:
            raise ValueError("all receivers and transmitters must share in_dim and out_dim")
        object.__setattr__(self, "receivers", rs)
        object.__setattr__(self, "transmitters", ts)

    @property
    def K(self) -> int:
        return len(self.receivers)

    @property
    def in_dim(self) -> int:
        return self.receivers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.receivers[0].out_dim

    @property
    def nonneg(self) -> bool:
        return all(f.nonneg for f in self.receivers + self.transmitters)

    @property
    def lip(self) -> float:
        return max(f.lip for f in self.receivers + self.transmitters)

    @property
    def bias(self) -> float:
        return max(f.bias_at_zero for f in self.receivers + self.transmitters)

    def __call__(self, a, b) -> np.ndarray:
        return sum(r(a) * t(b) for r, t in zip(self.receivers, self.transmitters))

    def to_dict(self) -> dict:
        return {
            "receivers": [f.to_dict() for f in self.receivers],
            "transmitters": [f.to_dict() for f in self.transmitters],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MessageFunctionSpec":
        return cls(
            tuple(CatalogFunction.from_dict(f) for f in d["receivers"]),
            tuple(CatalogFunction.from_dict(f) for f in d["transmitters"]),
        )


@dataclass(frozen=True, eq=False)
class MpnnLayer:
    message: MessageFunctionSpec
    update: Optional[CatalogFunction] = None

    def __post_init__(self):
        u = self.update
        if u is not None and u.in_dim != self.message.in_dim + self.message.out_dim:
            raise ValueError(
                f"update expects input dim {u.in_dim}, layer provides "
                f"{self.message.in_dim} + {self.message.out_dim}"
            )

    @property
    def in_dim(self) -> int:
        return self.message.in_dim

    @property
    def out_dim(self) -> int:
        return self.message.out_dim if self.update is None else self.update.out_dim


@dataclass(frozen=True, eq=False)
class MpnnSpec:
    layers: tuple = ()
    readout: bool = False
    input_dim: Optional[int] = None

    def __post_init__(self):
        layers = tuple(self.layers)
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise ValueError(
                    f"layer {i} expects input dim {layers[i].in_dim}, "
                    f"previous layer outputs {layers[i - 1].out_dim}"
                )
        if layers and self.input_dim is not None and layers[0].in_dim != self.input_dim:
            raise ValueError(f"first layer expects dim {layers[0].in_dim}, spec input is {self.input_dim}")
        object.__setattr__(self, "layers", layers)

    @property
    def T(self) -> int:
        return len(self.layers)

    @property
    def in_dim(self) -> Optional[int]:
        return self.layers[0].in_dim if self.layers else self.input_dim

    @property
    def out_dim(self) -> Optional[int]:
        return self.layers[-1].out_dim if self.layers else self.input_dim

    def to_dict(self) -> dict:
        return {
            "readout": self.readout,
            "layers": [
                {
                    "message": layer.message.to_dict(),
                    "update": None if layer.update is None else layer.update.to_dict(),
                }
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MpnnSpec":
        layers = []
        for item in d.get("layers", []):
            upd = item.get("update")
            layers.append(
                MpnnLayer(
                    MessageFunctionSpec.from_dict(item["message"]),
                    None if upd is None else CatalogFunction.from_dict(upd),
                )
            )
        return cls(tuple(layers), bool(d.get("readout", False)), d.get("input_dim"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def message_kernel(phi: MessageFunctionSpec, f) -> np.ndarray:
    """``Q[i, j] = sum_k xi_r^k(f_i) * xi_t^k(f_j)``, shape ``(m, m, p)``."""
    f = np.asarray(getattr(f, "values", f), dtype=float)
    f = f[:, None] if f.ndim == 1 else f
    if f.shape[1] != phi.in_dim:
        raise ValueError(f"signal has {f.shape[1]} channels, message expects {phi.in_dim}")
    Q = np.zeros((f.shape[0], f.shape[0], phi.out_dim))
    for r, t in zip(phi.receivers, phi.transmitters):
        Q += r(f)[:, None, :] * t(f)[None, :, :]
    return Q


def aggregate(A: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``out[i] = (sum_j A[i, j] Q[i, j]) / n``: the shared graph/graphon path."""
    n = A.shape[0]
    if Q.shape[:2] != A.shape:
        raise ValueError(f"kernel shape {Q.shape[:2]} does not match {A.shape}")
    return (A[:, :, None] * Q).sum(axis=1) / n


def aggregate_graphon(W, Q) -> np.ndarray:
    W = W.values if isinstance(W, StepGraphon) else np.asarray(W, dtype=float)
    return aggregate(W, np.asarray(Q, dtype=float))


def aggregate_graph(g: GraphSignal, phi: MessageFunctionSpec) -> np.ndarray:
    return aggregate(g.adjacency, message_kernel(phi, g.features))


def forward_signal(spec: MpnnSpec, A: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Run all layers on adjacency/graphon values ``A`` and signal ``F``."""
    F = np.asarray(F, dtype=float)
    if spec.in_dim is not None and F.shape[1] != spec.in_dim:
        raise ValueError(f"signal has {F.shape[1]} channels, spec expects {spec.in_dim}")
    for layer in spec.layers:
        agg = aggregate(A, message_kernel(layer.message, F))
        F = agg if layer.update is None else layer.update(np.concatenate([F, agg], axis=1))
    return F


def _output_bound(spec: MpnnSpec, r: float, F: np.ndarray) -> float:
    from .lipschitz import signal_bounds

    analytic = signal_bounds(spec, r)[-1]
    observed = float(np.abs(F).max(initial=0.0))
    b = max(analytic, observed)
    return b if b > 0 else 1.0


def forward(spec: MpnnSpec, x):
    """Apply the network; the graph or graphon is returned unchanged.

    The output signal bound is the analytic bound propagated from the input
    bound through the catalog data.
    """
    if not spec.layers:
        return x
    if isinstance(x, GraphSignal):
        F = forward_signal(spec, x.adjacency, x.features)
        return GraphSignal(x.adjacency, F, _output_bound(spec, x.bound, F))
    if isinstance(x, GraphonSignal):
        F = forward_signal(spec, x.W, x.f)
        return GraphonSignal(x.graphon, StepSignal(F, _output_bound(spec, x.r, F)))
    raise TypeError(f"expected GraphonSignal or GraphSignal, got {type(x).__name__}")


def readout(x) -> np.ndarray:
    """Global mean pooling over nodes or blocks."""
    if isinstance(x, GraphSignal):
        return x.features.mean(axis=0)
    if isinstance(x, GraphonSignal):
        return x.f.mean(axis=0)
    v = np.asarray(x, dtype=float)
    return v.mean(axis=0)


def verify_commutation(spec: MpnnSpec, g: GraphSignal) -> float:
    """Max entrywise gap between ``forward(induce(g))`` and ``induce(forward(g))``."""
    a = forward(spec, induce(g)).f
    b = induce(forward(spec, g)).f
    return float(np.abs(a - b).max(initial=0.0))


def _random_fn(rng, kind, d, p, scale=1.0):
    if kind == "constant":
        return CatalogFunction.constant(rng.uniform(-1, 1, p), d)
    if kind == "identity":
        return CatalogFunction.identity(d)
    A = rng.normal(scale=scale / max(d, 1), size=(p, d))
    b = rng.normal(scale=0.2, size=p)
    if kind == "affine":
        return CatalogFunction.affine(A, b)
    if kind == "relu_affine":
        return CatalogFunction.relu_affine(A, b)
    if kind == "tanh_affine":
        return CatalogFunction.tanh_affine(A, b, scale=float(rng.uniform(0.5, 1.5)))
    h = max(p, 2)
    return CatalogFunction.two_layer_mlp(
        rng.normal(scale=scale / max(d, 1), size=(h, d)), rng.normal(scale=0.2, size=h),
        rng.normal(scale=1.0 / h, size=(p, h)), rng.normal(scale=0.2, size=p),
    )


def random_spec(
    rng: np.random.Generator,
    in_dim: int = 1,
    layers: int = 2,
    K: int = 2,
    hidden: int = 2,
    kinds: Sequence[str] = ("affine", "relu_affine", "tanh_affine", "two_layer_mlp"),
    update_prob: float = 0.5,
    update_kinds: Sequence[str] = ("affine", "relu_affine", "tanh_affine"),
    readout: bool = False,
) -> MpnnSpec:
    """Random spec with catalog functions drawn from ``kinds``.

    ``kinds=("tanh_affine",)`` gives a spec with bounded message functions.
    ``"identity"`` is only drawn when input and output dims agree.
    """
    out, d = [], in_dim
    for _ in range(layers):
        p = hidden

        def pick():
            choices = [k for k in kinds if k != "identity" or d == p]
            return _random_fn(rng, choices[rng.integers(len(choices))], d, p)

        msg = MessageFunctionSpec(tuple(pick() for _ in range(K)), tuple(pick() for _ in range(K)))
        upd = None
        if rng.random() < update_prob:
            kind = update_kinds[rng.integers(len(update_kinds))]
            upd = _random_fn(rng, kind, d + p, hidden)
        layer = MpnnLayer(msg, upd)
        out.append(layer)
        d = layer.out_dim
    return MpnnSpec(tuple(out), readout, in_dim)


class MessagePassingNetwork(TransformerMixin, BaseEstimator):
    """Estimator wrapper around a fixed :class:`MpnnSpec`.

    ``transform`` maps one graph(on)-signal to its output, or a list of them
    to a list of outputs. With ``readout=True`` it returns an array of pooled
    vectors, one row per input.
    """

    def __init__(self, spec=None, readout=None):
        self.spec = spec
        self.readout = readout

    def _spec(self) -> MpnnSpec:
        s = self.spec
        if s is None:
            return MpnnSpec()
        return MpnnSpec.from_dict(s) if isinstance(s, dict) else s

    def fit(self, X=None, y=None):
        self.spec_ = self._spec()
        self.readout_ = self.spec_.readout if self.readout is None else bool(self.readout)
        self.n_layers_ = self.spec_.T
        return self

    def _one(self, x):
        out = forward(self.spec_, x)
        return readout(out) if self.readout_ else out

    def transform(self, X):
        if not hasattr(self, "spec_"):
            self.fit()
        if isinstance(X, (GraphSignal, GraphonSignal)):
            return self._one(X)
        outs = [self._one(x) for x in X]
        return np.vstack(outs) if self.readout_ else outs
