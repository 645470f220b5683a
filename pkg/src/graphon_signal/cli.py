"""Command line interface: ``graphon-signal <command> ...``.

Exit status: 0 on success, 2 when a checked bound or property fails,
1 on usage, input or IO errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import mpmath
import numpy as np

from . import bounds as bnd
from .core import GraphSignal, induce
from .cutmetric import (
    cut_distance_exact,
    cut_distance_upper,
    kernel_cut_norm_exact,
    kernel_cut_norm_heuristic,
    signal_cut_norm,
)
from .harness import (
    default_class_models,
    default_sbm,
    default_stability_spec,
    generalization_gap_experiment,
    report_emit,
    sampling_experiment,
    stability_experiment,
)
from .io import (
    dump_json,
    graph_signal_to_dict,
    graphon_signal_to_dict,
    load_json,
    load_signal_object,
    load_spec,
)
from .mpnn import forward, random_spec, readout, verify_commutation, verify_lipschitz
from .regularity import WeakRegularity
from .rng import make_rng
from .sampling import sample_graph

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("grid must be nonempty")
    return vals


def _num(v):
    """mpmath values become floats when representable, else decimal strings."""
    if isinstance(v, mpmath.mpf):
        if mpmath.isint(v) and abs(v) < mpmath.mpf(2) ** 64:
            return int(v)
        f = float(v)
        return f if math.isfinite(f) else mpmath.nstr(v, 17)
    return v


def _emit(obj, args):
    text = dump_json(obj)
    out = getattr(args, "out", None)
    if out:
        dump_json(obj, out)
    else:
        sys.stdout.write(text)


def _as_graphon(x):
    return induce(x) if isinstance(x, GraphSignal) else x


# --- commands ---------------------------------------------------------------

def cmd_cutnorm(args):
    d = load_json(args.input)
    if "kernel" in d:
        D = np.asarray(d["kernel"], dtype=float)
        sig = 0.0
    else:
        x = _as_graphon(load_signal_object(args.input))
        D, sig = x.W, signal_cut_norm(x.f)
    if args.heuristic:
        res = kernel_cut_norm_heuristic(D, args.restarts, args.seed)
    else:
        res = kernel_cut_norm_exact(D)
    out = {"value": res.value + sig, "kernel": res.to_dict(), "signal": sig, "exact": res.exact}
    _emit(out, args)
    return EXIT_OK


def cmd_cutdist(args):
    a = _as_graphon(load_signal_object(args.a))
    b = _as_graphon(load_signal_object(args.b))
    if args.search:
        res = cut_distance_upper(a, b, restarts=args.budget, seed=args.seed)
    else:
        res = cut_distance_exact(a, b)
    _emit(res.to_dict(), args)
    return EXIT_OK


def cmd_regularize(args):
    x = _as_graphon(load_signal_object(args.input))
    est = WeakRegularity(epsilon=args.epsilon, rho=args.rho, max_steps=args.max_steps, seed=args.seed).fit(x)
    sbm = est.transform(x)
    dec = est.decomposition_
    out = {
        "sbm": graphon_signal_to_dict(sbm),
        "partition": est.partition_.assignment.tolist(),
        "classes": est.partition_.nonempty(),
        "residual": dec.to_dict(),
    }
    if args.rho is not None:
        out["signal_l1_error"] = est.signal_error(x)
    _emit(out, args)
    ok = dec.residual_cut_norm <= args.epsilon or not dec.residual_exact
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bounds(args):
    k = bnd.covering_k(args.epsilon, args.c, args.exponent)
    out = {
        "epsilon": args.epsilon,
        "c": args.c,
        "exponent": args.exponent,
        "k": _num(k),
        "log2_kappa": _num(bnd.covering_number_log2(args.epsilon, args.c, args.exponent)),
        "log2_xi": _num(bnd.xi_log2(args.epsilon, args.c, args.exponent)),
    }
    _emit(out, args)
    return EXIT_OK


def cmd_genbound(args):
    q = bnd.BoundQuery(N=mpmath.mpf(args.N), C=args.C, L=args.L, loss_at_zero=args.loss0,
                       p=args.p, c=args.c, exponent=args.exponent)
    res = bnd.generalization_bound(q)
    _emit({"N": args.N, "C": args.C, "L": args.L, "p": args.p, "loss0": args.loss0, **res.to_dict()}, args)
    return EXIT_OK


def cmd_sample(args):
    x = _as_graphon(load_signal_object(args.input))
    g, s = sample_graph(x, args.k, args.seed, 0, args.mode)
    _emit(graph_signal_to_dict(g), args)
    return EXIT_OK


def _report_cmd(report, args):
    report_emit(report, args.out, args.format)
    sys.stdout.write(json.dumps({"name": report.name, "summary": report.to_dict()["summary"],
                                 "meta": report.to_dict()["meta"], "passed": report.passed}, indent=2) + "\n")
    return EXIT_OK if report.passed in (True, None) else EXIT_FAIL


def cmd_verify_sampling(args):
    x = _as_graphon(load_signal_object(args.input)) if args.input else default_sbm()
    rep = sampling_experiment(x, args.k_grid, args.trials, args.mode, args.seed, args.threads)
    return _report_cmd(rep, args)


def cmd_mpnn_run(args):
    spec = load_spec(args.spec)
    x = load_signal_object(args.input)
    y = forward(spec, x)
    if spec.readout or args.readout:
        out = {"readout": readout(y).tolist()}
    elif isinstance(y, GraphSignal):
        out = graph_signal_to_dict(y)
    else:
        out = graphon_signal_to_dict(y)
    _emit(out, args)
    return EXIT_OK


def _spec_or_random(args, rng, in_dim=1):
    return load_spec(args.spec) if args.spec else random_spec(rng, in_dim=in_dim)


def cmd_verify_commutation(args):
    worst, rows = 0.0, []
    base = load_spec(args.spec) if args.spec else None
    for t in range(args.trials):
        rng = make_rng(args.seed, "commutation", t)
        spec = base if base is not None else random_spec(rng, in_dim=1)
        n = int(rng.integers(1, args.n + 1))
        A = np.triu((rng.random((n, n)) < rng.random()).astype(float), 1)
        g = GraphSignal(A + A.T, rng.uniform(-1, 1, (n, spec.in_dim or 1)))
        dev = verify_commutation(spec, g)
        worst = max(worst, dev)
        rows.append({"trial": t, "n": n, "deviation": dev})
    out = {"trials": args.trials, "max_deviation": worst, "tolerance": 1e-10, "passed": worst <= 1e-10}
    _emit(out, args)
    return EXIT_OK if worst <= 1e-10 else EXIT_FAIL


def cmd_verify_lipschitz(args):
    if args.spec:
        spec = load_spec(args.spec)
    else:
        kinds = {1: ("tanh_affine",), 2: ("affine", "tanh_affine", "two_layer_mlp"), 3: ("relu_affine",)}
        spec = random_spec(make_rng(args.seed, "lipschitz-spec"), kinds=kinds[args.setting],
                           update_kinds=("relu_affine",) if args.setting == 3 else ("affine", "tanh_affine"))
    rep = verify_lipschitz(spec, args.setting, args.trials, args.seed, args.r)
    _emit({**rep.to_dict(), "passed": rep.passed}, args)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify_stability(args):
    x = _as_graphon(load_signal_object(args.input)) if args.input else default_sbm()
    spec = load_spec(args.spec) if args.spec else default_stability_spec(args.seed, x.signal.channels)
    rep = stability_experiment(x, spec, args.k_grid, args.trials, args.seed, args.threads)
    return _report_cmd(rep, args)


def cmd_gen_gap(args):
    models = default_class_models()
    spec = load_spec(args.spec) if args.spec else default_stability_spec(args.seed)
    rep = generalization_gap_experiment(models, spec, args.N_grid, args.trials, args.seed,
                                        k=args.k, threads=args.threads)
    return _report_cmd(rep, args)


# --- parser -----------------------------------------------------------------

def _common(p, top=False):
    d = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=d, help="random seed (default 0)")
    p.add_argument("--threads", type=int, default=d, help="worker threads for trials (default 1)")
    p.add_argument("--format", choices=("csv", "json"), default=d, help="report format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="graphon-signal", description="Graphon-signal analysis and verification tools.")
    _common(ap, top=True)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(func=fn)
        return p

    p = add("cutnorm", cmd_cutnorm, "cut norm of a graphon-signal or raw kernel")
    p.add_argument("--input", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--heuristic", action="store_true")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--out")

    p = add("cutdist", cmd_cutdist, "block-aligned cut distance between two graphon-signals")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--search", action="store_true")
    p.add_argument("--budget", type=int, default=4, help="random restarts of the local search")
    p.add_argument("--out")

    p = add("regularize", cmd_regularize, "approximate by an SBM via greedy weak regularity")
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--rho", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--out")

    p = add("bounds", cmd_bounds, "covering number and xi")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--exponent", type=float, default=bnd.DEFAULT_EXPONENT)
    p.add_argument("--out")

    p = add("genbound", cmd_genbound, "generalization bound right-hand side")
    p.add_argument("--N", type=str, required=True, help="sample count (may be huge, e.g. 1e40)")
    p.add_argument("--C", type=int, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--p", type=float, default=2 / math.e)
    p.add_argument("--loss0", type=float, default=0.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--exponent", type=float, default=bnd.DEFAULT_EXPONENT)
    p.add_argument("--out")

    p = add("sample", cmd_sample, "sample a graph-signal from a graphon-signal")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=("weighted", "simple"), default="weighted")
    p.add_argument("--out")

    p = add("verify-sampling", cmd_verify_sampling, "sampling distance versus k")
    p.add_argument("--input")
    p.add_argument("--k-grid", type=_int_list, default=[16, 32, 64, 128])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--mode", choices=("weighted", "simple"), default="weighted")
    p.add_argument("--out")

    p = add("mpnn-run", cmd_mpnn_run, "run an MPNN spec on a graph(on)-signal")
    p.add_argument("--spec", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--readout", action="store_true")
    p.add_argument("--out")

    p = add("verify-commutation", cmd_verify_commutation, "graph vs induced-graphon forward passes")
    p.add_argument("--spec")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out")

    p = add("verify-lipschitz", cmd_verify_lipschitz, "Monte Carlo check of the Lipschitz bound")
    p.add_argument("--spec")
    p.add_argument("--setting", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--out")

    p = add("verify-stability", cmd_verify_stability, "MPNN output distance under subsampling")
    p.add_argument("--input")
    p.add_argument("--spec")
    p.add_argument("--k-grid", type=_int_list, default=[16, 64, 256])
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--out")

    p = add("gen-gap", cmd_gen_gap, "synthetic generalization-gap experiment")
    p.add_argument("--spec")
    p.add_argument("--N-grid", dest="N_grid", type=_int_list, default=[50, 200, 800])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--k", type=int, default=32)
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for name, default in (("seed", 0), ("threads", 1), ("format", "csv")):
            if not hasattr(args, name):
                setattr(args, name, default)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (ValueError, TypeError, KeyError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
