"""Lipschitz coefficients of MPNNs in the cut norm and their Monte Carlo verification.

Each layer contributes ``e' <= a e + b w`` where ``e`` is the cut norm of the
signal difference, ``w`` the cut norm of the graphon difference and ``e'`` the
cut norm of the output difference. Unrolling gives ``(L_f, L_W)``.

With receiver/transmitter output bounds ``rho_r, rho_t`` and Lipschitz
constants ``l_r, l_t`` for term ``k``, and ``d`` input channels, the
aggregation step has

    a = 2d * sum_k (l_r rho_t + l_t rho_r)
    b = 4 * sum_k rho_r rho_t        (1 * ... when every function is nonnegative)

The ``2d`` converts a cut norm into an L1 bound (``||h||_1 <= 2d ||h||_cut``
under the per-channel-max convention). For uniform data this is ``4dKL rho``
and ``4K rho**2``. An update ``eta`` with Lipschitz constant ``L_eta`` acting
on ``[f, agg]`` (``p`` aggregation channels) turns these into
``L_eta (2d + 2p a)`` and ``L_eta 2p b``.

The three settings differ only in how ``rho`` is obtained: from the uniform
bounds of bounded functions (1), from the propagated signal bound (2), or from
the propagated bound with nonnegative messages (3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..cutmetric import kernel_cut_norm_exact, signal_cut_norm
from ..rng import make_rng
from .model import MpnnSpec, forward_signal

__all__ = [
    "LipschitzBound",
    "lipschitz_bound",
    "lipschitz_bound_l1",
    "signal_bounds",
    "setting2_growth_closed_form",
    "verify_lipschitz",
    "LipschitzReport",
]


@dataclass(frozen=True)
class LipschitzBound:
    L_f: float
    L_W: float
    setting: int
    coefficients: tuple = ()
    signal_bounds: tuple = ()

    @property
    def L_theta(self) -> float:
        return max(self.L_f, self.L_W)

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "L_f": self.L_f,
            "L_W": self.L_W,
            "L_theta": self.L_theta,
            "layers": [{"a": a, "b": b} for a, b in self.coefficients],
        }


def _rhos(layer, C, setting):
    msg = layer.message
    out = []
    for r, t in zip(msg.receivers, msg.transmitters):
        if setting == 1:
            rr, rt = r.inf_bound, t.inf_bound
        else:
            rr, rt = r.output_bound(C), t.output_bound(C)
        out.append((r.lip, t.lip, rr, rt))
    return out


def _check_setting(spec: MpnnSpec, setting: int):
    if setting not in (1, 2, 3):
        raise ValueError(f"setting must be 1, 2 or 3, got {setting}")
    for i, layer in enumerate(spec.layers):
        fns = layer.message.receivers + layer.message.transmitters
        if setting == 1 and any(f.inf_bound is None for f in fns):
            raise ValueError(
                f"setting 1 needs bounded message functions; layer {i} has an unbounded one"
            )
        if setting == 3 and not layer.message.nonneg:
            raise ValueError(f"setting 3 needs nonnegative message functions; layer {i} violates it")


def signal_bounds(spec: MpnnSpec, r: float) -> list:
    """Uniform bounds ``C_0 = r, C_1, ..., C_T`` on the layer signals."""
    C = [float(r)]
    for layer in spec.layers:
        agg = sum(rr * rt for _, _, rr, rt in _rhos(layer, C[-1], 2))
        if layer.update is None:
            C.append(agg)
        else:
            C.append(layer.update.output_bound(max(C[-1], agg)))
    return C


def _unroll(coeffs):
    L_f, L_W = 1.0, 0.0
    for a, b in coeffs:
        L_f, L_W = a * L_f, a * L_W + b
    return L_f, L_W


def lipschitz_bound(spec: MpnnSpec, setting: int = 1, r: float = 1.0) -> LipschitzBound:
    """Cut-norm coefficients with ``||Theta(W,f) - Theta(V,g)|| <= L_f ||f-g|| + L_W ||W-V||``."""
    _check_setting(spec, setting)
    C = signal_bounds(spec, r)
    coeffs = []
    for t, layer in enumerate(spec.layers):
        d, p = layer.message.in_dim, layer.message.out_dim
        terms = _rhos(layer, C[t], setting)
        a = 2 * d * math.fsum(lr * rt + lt * rr for lr, lt, rr, rt in terms)
        b = (1.0 if setting == 3 else 4.0) * math.fsum(rr * rt for _, _, rr, rt in terms)
        if layer.update is not None:
            Le = layer.update.lip
            a, b = Le * (2 * d + 2 * p * a), Le * 2 * p * b
        coeffs.append((a, b))
    L_f, L_W = _unroll(coeffs)
    return LipschitzBound(L_f, L_W, setting, tuple(coeffs), tuple(C))


def lipschitz_bound_l1(spec: MpnnSpec, setting: int = 2, r: float = 1.0) -> LipschitzBound:
    """Same recurrence with L1 norms on inputs and outputs.

    The graphon term uses ``||W - V||_1``. Every coefficient is at most its
    cut-norm counterpart, so the cut-norm ``L_theta`` also bounds the L1 map.
    """
    _check_setting(spec, setting)
    C = signal_bounds(spec, r)
    coeffs = []
    for t, layer in enumerate(spec.layers):
        terms = _rhos(layer, C[t], setting)
        a = math.fsum(lr * rt + lt * rr for lr, lt, rr, rt in terms)
        b = math.fsum(rr * rt for _, _, rr, rt in terms)
        if layer.update is not None:
            Le = layer.update.lip
            a, b = Le * (1 + a), Le * b
        coeffs.append((a, b))
    L_f, L_W = _unroll(coeffs)
    return LipschitzBound(L_f, L_W, setting, tuple(coeffs), tuple(C))


def setting2_growth_closed_form(K: int, L: float, B: float, f_inf: float, t: int) -> float:
    """``(2 K L**2 B**2) ** (2**t) * f_inf ** (2**t)``; not a valid bound in general."""
    e = 2**t
    return (2 * K * L**2 * B**2) ** e * f_inf**e


@dataclass
class LipschitzReport:
    setting: int
    bound: LipschitzBound
    trials: int
    violations: int
    max_ratio: float
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "L_f": self.bound.L_f,
            "L_W": self.bound.L_W,
            "trials": self.trials,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
        }


def _random_graphon(rng, m):
    W = rng.random((m, m))
    return np.triu(W) + np.triu(W, 1).T


def random_pair(rng, m: int, d: int, r: float):
    """Random ``(W, f), (V, g)`` pair; closeness varies from near-identical to independent."""
    W = _random_graphon(rng, m)
    f = rng.uniform(-r, r, (m, d))
    kind = rng.integers(4)
    if kind == 0:
        return W, f, _random_graphon(rng, m), rng.uniform(-r, r, (m, d))
    if kind == 1:
        # one block perturbed by 1e-3
        V, g = W.copy(), f.copy()
        i, j = rng.integers(m, size=2)
        V[i, j] = V[j, i] = np.clip(V[i, j] + rng.choice([-1e-3, 1e-3]), 0, 1)
        i = rng.integers(m)
        g[i] = np.clip(g[i] + rng.choice([-1e-3, 1e-3], size=d), -r, r)
        return W, f, V, g
    delta = 10.0 ** rng.uniform(-3, 0)
    V = np.clip(W + delta * rng.uniform(-1, 1, (m, m)), 0, 1)
    V = np.triu(V) + np.triu(V, 1).T
    g = np.clip(f + delta * rng.uniform(-r, r, (m, d)), -r, r)
    # kind 3 keeps the signal and moves only the graphon
    return W, f, V, (g if kind == 2 else f.copy())


def verify_lipschitz(spec: MpnnSpec, setting: int, trials: int, seed: int = 0, r: float = 1.0,
                     m_max: int = 10, rtol: float = 1e-9) -> LipschitzReport:
    """Check the cut-norm Lipschitz inequality on random pairs with exact norms."""
    bound = lipschitz_bound(spec, setting, r)
    d = spec.in_dim or 1
    violations, max_ratio, rows = 0, 0.0, []
    for t in range(trials):
        rng = make_rng(seed, "lipschitz", t)
        m = int(rng.integers(2, m_max + 1))
        W, f, V, g = random_pair(rng, m, d, r)
        out = forward_signal(spec, W, f) - forward_signal(spec, V, g)
        lhs = signal_cut_norm(out)
        ef = signal_cut_norm(f - g)
        ew = kernel_cut_norm_exact(W - V).value
        rhs = bound.L_f * ef + bound.L_W * ew
        bad = lhs > rhs * (1 + rtol) + 1e-14
        violations += int(bad)
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
        max_ratio = max(max_ratio, ratio)
        rows.append({"trial": t, "m": m, "lhs": lhs, "rhs": rhs, "ratio": ratio, "violation": bool(bad)})
    return LipschitzReport(setting, bound, trials, violations, max_ratio, rows)
