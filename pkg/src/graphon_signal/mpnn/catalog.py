"""Closed catalog of vector functions with analytic Lipschitz data (infinity norms).

Matrices act on row vectors: ``affine(A, b)(x) = x @ A.T + b`` with ``A`` of
shape ``(out_dim, in_dim)``, so the Lipschitz constant is ``max_i sum_j |A_ij|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = ["CatalogFunction", "KINDS", "inf_norm"]

KINDS = ("constant", "identity", "affine", "relu_affine", "tanh_affine", "two_layer_mlp")


def inf_norm(A) -> float:
    """Operator norm induced by the infinity norm: max absolute row sum."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return float(np.abs(A).sum(axis=1).max()) if A.size else 0.0


def _vec(v, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be a finite vector")
    return v


def _mat(A, name):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or not np.all(np.isfinite(A)):
        raise ValueError(f"{name} must be a finite matrix")
    return A


def _ro(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CatalogFunction:
    """A function ``R^in_dim -> R^out_dim`` from the catalog.

    Build instances with the class methods; ``params`` holds read-only arrays.
    """

    kind: str
    in_dim: int
    out_dim: int
    params: dict

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, in_dim: int) -> "CatalogFunction":
        v = _vec(value, "value")
        return cls("constant", int(in_dim), v.size, {"value": _ro(v)})

    @classmethod
    def identity(cls, dim: int) -> "CatalogFunction":
        return cls("identity", int(dim), int(dim), {})

    @classmethod
    def _affine_like(cls, kind, A, b, **extra):
        A = _mat(A, "A")
        b = _vec(b, "b") if b is not None else np.zeros(A.shape[0])
        if b.size != A.shape[0]:
            raise ValueError(f"bias length {b.size} != output dim {A.shape[0]}")
        return cls(kind, A.shape[1], A.shape[0], {"A": _ro(A), "b": _ro(b), **extra})

    @classmethod
    def affine(cls, A, b=None) -> "CatalogFunction":
        return cls._affine_like("affine", A, b)

    @classmethod
    def relu_affine(cls, A, b=None) -> "CatalogFunction":
        return cls._affine_like("relu_affine", A, b)

    @classmethod
    def tanh_affine(cls, A, b=None, scale: float = 1.0) -> "CatalogFunction":
        return cls._affine_like("tanh_affine", A, b, scale=float(scale))

    @classmethod
    def two_layer_mlp(cls, W1, b1, W2, b2) -> "CatalogFunction":
        W1, W2 = _mat(W1, "W1"), _mat(W2, "W2")
        b1, b2 = _vec(b1, "b1"), _vec(b2, "b2")
        if W2.shape[1] != W1.shape[0] or b1.size != W1.shape[0] or b2.size != W2.shape[0]:
            raise ValueError("inconsistent two_layer_mlp shapes")
        return cls("two_layer_mlp", W1.shape[1], W2.shape[0],
                   {"W1": _ro(W1), "b1": _ro(b1), "W2": _ro(W2), "b2": _ro(b2)})

    # evaluation ---------------------------------------------------------

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = X[None, :] if single else X
        if X2.shape[-1] != self.in_dim:
            raise ValueError(f"{self.kind} expects input dim {self.in_dim}, got {X2.shape[-1]}")
        p = self.params
        if self.kind == "constant":
            out = np.broadcast_to(p["value"], X2.shape[:-1] + (self.out_dim,)).copy()
        elif self.kind == "identity":
            out = X2.copy()
        elif self.kind == "affine":
            out = X2 @ p["A"].T + p["b"]
        elif self.kind == "relu_affine":
            out = np.maximum(X2 @ p["A"].T + p["b"], 0.0)
        elif self.kind == "tanh_affine":
            out = p["scale"] * np.tanh(X2 @ p["A"].T + p["b"])
        elif self.kind == "two_layer_mlp":
            out = np.maximum(X2 @ p["W1"].T + p["b1"], 0.0) @ p["W2"].T + p["b2"]
        else:  # pragma: no cover - guarded by from_dict
            raise ValueError(f"unknown kind {self.kind!r}")
        return out[0] if single else out

    # analytic data --------------------------------------------------------

    @property
    def lip(self) -> float:
        p = self.params
        if self.kind == "constant":
            return 0.0
        if self.kind == "identity":
            return 1.0
        if self.kind in ("affine", "relu_affine"):
            return inf_norm(p["A"])
        if self.kind == "tanh_affine":
            return abs(p["scale"]) * inf_norm(p["A"])
        return inf_norm(p["W2"]) * inf_norm(p["W1"])

    @property
    def bias_at_zero(self) -> float:
        return float(np.abs(self(np.zeros(self.in_dim))).max(initial=0.0))

    @property
    def inf_bound(self) -> Optional[float]:
        """Uniform bound on ``|f(x)|_inf`` when the function is bounded."""
        if self.kind == "constant":
            return float(np.abs(self.params["value"]).max(initial=0.0))
        if self.kind == "tanh_affine":
            return abs(self.params["scale"])
        return None

    @property
    def nonneg(self) -> bool:
        if self.kind == "constant":
            return bool(np.all(self.params["value"] >= 0))
        return self.kind == "relu_affine"

    def output_bound(self, input_bound: float) -> float:
        """Bound on ``|f(x)|_inf`` for ``|x|_inf <= input_bound``."""
        b = self.lip * input_bound + self.bias_at_zero
        ib = self.inf_bound
        return b if ib is None else min(b, ib)

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "constant":
            d.update(value=self.params["value"].tolist(), in_dim=self.in_dim)
        elif self.kind == "identity":
            d["dim"] = self.in_dim
        else:
            for key, v in self.params.items():
                d[key] = v.tolist() if isinstance(v, np.ndarray) else v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CatalogFunction":
        kind = d.get("kind")
        if kind == "constant":
            return cls.constant(d["value"], d["in_dim"])
        if kind == "identity":
            return cls.identity(d["dim"])
        if kind == "affine":
            return cls.affine(d["A"], d.get("b"))
        if kind == "relu_affine":
            return cls.relu_affine(d["A"], d.get("b"))
        if kind == "tanh_affine":
            return cls.tanh_affine(d["A"], d.get("b"), d.get("scale", 1.0))
        if kind == "two_layer_mlp":
            return cls.two_layer_mlp(d["W1"], d["b1"], d["W2"], d["b2"])
        raise ValueError(f"unknown catalog kind {kind!r}; expected one of {KINDS}")

    def __repr__(self):
        return f"CatalogFunction({self.kind}, {self.in_dim}->{self.out_dim})"
