"""JSON readers and writers for graphon-signals, graph-signals and MPNN specs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import GraphonSignal, GraphSignal

__all__ = [
    "graphon_signal_to_dict",
    "graphon_signal_from_dict",
    "graph_signal_to_dict",
    "graph_signal_from_dict",
    "load_json",
    "dump_json",
    "load_signal_object",
    "load_spec",
    "save_spec",
]


def graphon_signal_to_dict(x: GraphonSignal) -> dict:
    return {"m": x.resolution, "r": x.r, "graphon": x.W.tolist(), "signal": x.f.tolist()}


def graphon_signal_from_dict(d: dict) -> GraphonSignal:
    x = GraphonSignal.from_arrays(np.asarray(d["graphon"], float), np.asarray(d["signal"], float), d.get("r", 1.0))
    if "m" in d and int(d["m"]) != x.resolution:
        raise ValueError(f"declared m={d['m']} but graphon has resolution {x.resolution}")
    return x


def graph_signal_to_dict(g: GraphSignal) -> dict:
    return {"n": g.n, "r": g.bound, "adjacency": g.adjacency.tolist(), "features": g.features.tolist()}


def graph_signal_from_dict(d: dict) -> GraphSignal:
    g = GraphSignal(np.asarray(d["adjacency"], float), np.asarray(d["features"], float), d.get("r", 1.0))
    if "n" in d and int(d["n"]) != g.n:
        raise ValueError(f"declared n={d['n']} but adjacency has {g.n} nodes")
    return g


def load_json(path) -> dict:
    p = Path(path)
    try:
        with p.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {p}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{p}: invalid JSON ({exc})") from exc


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False, default=_default) + "\n"
    if path is not None:
        p = Path(path)
        try:
            p.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {p}: {exc.strerror or exc}") from exc
    return text


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    try:
        return float(o)
    except (TypeError, ValueError):
        raise TypeError(f"cannot serialize {type(o).__name__}") from None


def load_signal_object(path):
    """Load a GraphonSignal or GraphSignal, recognized by its field names."""
    d = load_json(path)
    if "graphon" in d:
        return graphon_signal_from_dict(d)
    if "adjacency" in d:
        return graph_signal_from_dict(d)
    raise ValueError(f"{path}: expected 'graphon'/'signal' or 'adjacency'/'features' fields")


def load_spec(path):
    from .mpnn import MpnnSpec

    return MpnnSpec.from_dict(load_json(path))


def save_spec(spec, path) -> None:
    dump_json(spec.to_dict(), path)
