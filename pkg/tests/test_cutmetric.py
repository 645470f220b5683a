import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_gs
from graphon_signal import (
    GraphonSignal,
    IntervalPermutation,
    StepSignal,
    apply_permutation,
    cut_distance_exact,
    cut_distance_upper,
    graphon_signal_cut_norm,
    kernel_cut_norm_exact,
    kernel_cut_norm_heuristic,
    kernel_l1_norm,
    signal_cut_norm,
)
from graphon_signal.cutmetric import graphon_signal_l1_distance, signal_l1_norm


def brute_kernel(D):
    """max over all 4**m pairs of block subsets."""
    m = D.shape[0]
    subsets = np.array(list(itertools.product([0.0, 1.0], repeat=m)))
    return float(np.abs(subsets @ D @ subsets.T).max()) / m**2


def brute_signal(f):
    m = f.shape[0]
    subsets = np.array(list(itertools.product([0.0, 1.0], repeat=m)))
    return float(np.abs(subsets @ f).max(axis=0).max()) / m


def brute_distance(x, y):
    best = np.inf
    for p in itertools.permutations(range(x.resolution)):
        p = list(p)
        D = x.W - y.W[np.ix_(p, p)]
        best = min(best, brute_kernel(D) + brute_signal(x.f - y.f[p]))
    return best


kernels = arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)).map(lambda t: (t[0], t[0])),
                 elements=st.floats(-1, 1, allow_nan=False))


def test_signal_examples():
    assert signal_cut_norm(StepSignal([1.0, -1.0])) == 0.5
    assert signal_cut_norm(StepSignal([0.3, 0.3])) == pytest.approx(0.3)


def test_signal_against_subsets(rng):
    f = rng.uniform(-1, 1, (10, 1))
    assert signal_cut_norm(f) == pytest.approx(brute_signal(f), abs=1e-14)


def test_signal_multichannel_is_channel_max(rng):
    f = rng.uniform(-1, 1, (8, 3))
    assert signal_cut_norm(f) == max(signal_cut_norm(f[:, c]) for c in range(3))


def test_kernel_examples():
    r = kernel_cut_norm_exact(np.full((3, 3), -0.4))
    assert r.value == pytest.approx(0.4) and r.witness_S.all() and r.witness_T.all()
    r = kernel_cut_norm_exact(np.array([[0.5, -0.5], [-0.5, 0.5]]))
    assert r.value == 0.125
    assert r.witness_S.tolist() == [True, False] and r.witness_T.tolist() == [True, False]
    assert r.S_bitmask == 1 and r.T_bitmask == 1
    assert kernel_cut_norm_exact(np.zeros((4, 4))).value == 0


def test_kernel_limit():
    with pytest.raises(ValueError, match="heuristic"):
        kernel_cut_norm_exact(np.zeros((5, 5)), limit=4)


@settings(max_examples=60, deadline=None)
@given(kernels)
def test_kernel_matches_brute_force(D):
    r = kernel_cut_norm_exact(D)
    assert abs(r.value - brute_kernel(D)) <= 1e-12
    assert abs(r.recheck(D) - r.value) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(kernels)
def test_kernel_symmetries_and_ordering(D):
    v = kernel_cut_norm_exact(D).value
    assert kernel_cut_norm_exact(-D).value == pytest.approx(v, abs=1e-12)
    assert kernel_cut_norm_exact(D.T).value == pytest.approx(v, abs=1e-12)
    assert 0 <= v <= kernel_l1_norm(D) + 1e-12 <= np.abs(D).max() + 2e-12


def test_l1_examples():
    assert kernel_l1_norm(np.zeros((3, 3))) == 0
    assert kernel_l1_norm(np.full((2, 2), -0.3)) == pytest.approx(0.3)


def test_heuristic_is_lower_and_usually_exact(rng):
    hits = 0
    for t in range(50):
        m = int(rng.integers(2, 13))
        D = rng.uniform(-1, 1, (m, m))
        h = kernel_cut_norm_heuristic(D, restarts=20, seed=t)
        e = kernel_cut_norm_exact(D)
        assert h.value <= e.value + 1e-12 and not h.exact
        hits += abs(h.value - e.value) <= 1e-12
    assert hits >= 45


def test_heuristic_large_block_pattern():
    m = 100
    blocks = np.kron(np.eye(4), np.ones((25, 25)))
    D = 0.5 * (2 * blocks - 1)
    h = kernel_cut_norm_heuristic(D, restarts=5, seed=0)
    assert h.value > 0
    assert h.recheck(D) == pytest.approx(h.value, abs=1e-12)
    assert kernel_cut_norm_heuristic(np.full((30, 30), 0.7)).value == pytest.approx(0.7)


def test_graphon_signal_norm_parts(rng):
    x, y = random_gs(rng, 8), random_gs(rng, 8)
    assert graphon_signal_cut_norm(x, x) == 0
    z = x.with_signal(y.f)
    assert graphon_signal_cut_norm(x, z) == signal_cut_norm(x.f - y.f)
    expect = brute_kernel(x.W - y.W) + brute_signal(x.f - y.f)
    assert graphon_signal_cut_norm(x, y) == pytest.approx(expect, abs=1e-12)
    with pytest.raises(ValueError):
        graphon_signal_cut_norm(x, random_gs(rng, 4))


def test_triangle_inequality(rng):
    for _ in range(30):
        a, b, c = (random_gs(rng, 6) for _ in range(3))
        ab, bc, ac = (graphon_signal_cut_norm(*p) for p in ((a, b), (b, c), (a, c)))
        assert ac <= ab + bc + 1e-12


def test_cut_distance_exact_examples(rng):
    x = random_gs(rng, 5)
    p = IntervalPermutation(rng.permutation(5))
    assert cut_distance_exact(x, apply_permutation(x, p)).value == 0
    r = cut_distance_exact(x, x)
    assert r.value == 0 and r.permutation == IntervalPermutation.identity(5)
    with pytest.raises(ValueError):
        cut_distance_exact(random_gs(rng, 9), random_gs(rng, 9))


@pytest.mark.parametrize("m", [3, 4])
def test_cut_distance_exact_against_reimplementation(rng, m):
    x, y = random_gs(rng, m, d=2), random_gs(rng, m, d=2)
    r = cut_distance_exact(x, y)
    assert r.value == pytest.approx(brute_distance(x, y), abs=1e-12)
    at = graphon_signal_cut_norm(x, apply_permutation(y, r.permutation))
    assert r.certified_upper and r.value == pytest.approx(at, abs=1e-12)


def test_cut_distance_upper_permuted_copy(rng):
    x = random_gs(rng, 50)
    y = apply_permutation(x, IntervalPermutation(rng.permutation(50)))
    r = cut_distance_upper(x, y, seed=1)
    assert r.value <= 0.01
    assert cut_distance_upper(x, x).value == 0


def test_cut_distance_upper_dominates_exact(rng):
    for _ in range(5):
        x, y = random_gs(rng, 6), random_gs(rng, 6)
        up = cut_distance_upper(x, y, seed=2)
        assert up.value >= cut_distance_exact(x, y).value - 1e-12
        yp = apply_permutation(y, up.permutation)
        assert up.norm == "l1"
        assert up.value == pytest.approx(graphon_signal_l1_distance(x, yp), abs=1e-12)
        assert up.heuristic_estimate <= up.value + 1e-12


def test_signal_sandwich_multichannel_factor(rng):
    # per-channel-max convention: ||f||_1 <= 2 d ||f||_cut
    for _ in range(200):
        d = int(rng.integers(1, 4))
        f = rng.uniform(-1, 1, (int(rng.integers(1, 10)), d))
        assert signal_l1_norm(f) <= 2 * d * signal_cut_norm(f) + 1e-12
