import itertools
import math

import numpy as np
import pytest
from sklearn.base import clone

from conftest import random_graphon, random_gs
from graphon_signal import (
    GraphonSignal,
    GraphSignal,
    Partition,
    StepSignal,
    WeakRegularity,
    combine,
    equitize,
    irregularity,
    kernel_cut_norm_exact,
    project,
    quantize_signal,
    weak_regularity_decompose,
)
from graphon_signal.cutmetric import signal_l1_norm
from graphon_signal.regularity import project_kernel


def brute_irregularity(A, labels):
    n = A.shape[0]
    best = 0.0
    classes = sorted(set(labels))
    members = {c: [i for i in range(n) if labels[i] == c] for c in classes}
    dens = {(a, b): A[np.ix_(members[a], members[b])].sum() / (len(members[a]) * len(members[b]))
            for a in classes for b in classes}
    for U in itertools.product([0, 1], repeat=n):
        for S in itertools.product([0, 1], repeat=n):
            e_g = sum(A[u, s] for u in range(n) if U[u] for s in range(n) if S[s])
            e_p = sum(dens[a, b] * sum(U[i] for i in members[a]) * sum(S[j] for j in members[b])
                      for a in classes for b in classes)
            best = max(best, abs(e_g - e_p))
    return best / n**2


def test_irregularity_empty_and_complete():
    n = 6
    assert irregularity(GraphSignal(np.zeros((n, n)), np.zeros(n)), Partition.trivial(n)) == 0
    loops = GraphSignal(np.ones((n, n)), np.zeros(n))
    assert irregularity(loops, Partition([0, 0, 1, 1, 2, 2], 3)) == pytest.approx(0, abs=1e-15)
    simple = GraphSignal(np.ones((n, n)) - np.eye(n), np.zeros(n))
    v = irregularity(simple, Partition.trivial(n))
    assert 0 < v == pytest.approx(brute_irregularity(simple.adjacency, [0] * n), abs=1e-12)


@pytest.mark.parametrize("n", [4, 5])
def test_irregularity_against_brute_force(rng, n):
    A = np.triu((rng.random((n, n)) < 0.5).astype(float), 1)
    A = A + A.T
    g = GraphSignal(A, np.zeros(n))
    assert irregularity(g, Partition.trivial(n)) == pytest.approx(brute_irregularity(A, [0] * n), abs=1e-12)
    labels = rng.integers(0, 2, n).tolist()
    p = Partition.from_labels(labels)
    assert irregularity(g, p) == pytest.approx(brute_irregularity(A, labels), abs=1e-12)


def test_irregularity_ignores_empty_classes(rng):
    A = random_graphon(rng, 5)
    g = GraphSignal(A, np.zeros(5))
    assert irregularity(g, Partition([0, 0, 2, 2, 2], 4)) == irregularity(g, Partition([0, 0, 1, 1, 1], 2))


def test_decompose_constant_graphon():
    d = weak_regularity_decompose(np.full((4, 4), 0.3), 0.2)
    # the initial residual 0.3 exceeds epsilon: one full box removes it
    assert len(d.steps) == 1 and d.residual_cut_norm == pytest.approx(0, abs=1e-15)


def test_decompose_two_block_sbm():
    W = np.array([[0.8, 0.2], [0.2, 0.8]])
    d = weak_regularity_decompose(W, 0.1)
    assert d.residual_cut_norm <= 0.1 and len(d.steps) <= 2
    assert d.residual_cut_norm == pytest.approx(kernel_cut_norm_exact(W - d.approximant).value, abs=1e-15)
    # one full box already leaves residual 0.075, so no split of the blocks is needed
    assert len(d.steps) == 1
    fine = weak_regularity_decompose(W, 0.05)
    assert fine.residual_cut_norm <= 0.05
    assert fine.partition.same_classes(Partition([0, 1], 2))


def test_decompose_invariants(rng):
    for _ in range(10):
        m = int(rng.integers(3, 13))
        W = random_graphon(rng, m)
        d = weak_regularity_decompose(W, 0.5)
        assert len(d.steps) <= 4 and d.residual_cut_norm <= 0.5
        approx = np.zeros((m, m))
        for S, T, g in d.steps:
            box = np.outer(S, T).astype(float)
            approx += g * (box + box.T) / 2
        np.testing.assert_allclose(d.approximant, approx, atol=1e-15)
        assert d.partition.k <= 2 ** (2 * len(d.steps))
        a = kernel_cut_norm_exact(W - d.projected.values).value
        assert a <= 2 * kernel_cut_norm_exact(W - d.approximant).value + 1e-12


def test_decompose_heuristic_above_limit(rng):
    d = weak_regularity_decompose(random_graphon(rng, 24), 0.5, exact_limit=20)
    assert not d.residual_exact


def test_decompose_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        weak_regularity_decompose(np.zeros((2, 2)), 1.0)


def test_quantize_examples():
    q, p = quantize_signal(StepSignal([0.3, 0.3, 0.3]), 0.25)
    assert p.nonempty() == 1 and np.all(q.values == q.values[0])
    f = StepSignal([-0.9, -0.1, 0.2, 1.0])
    q, p = quantize_signal(f, 0.5)
    assert set(q.values.ravel().tolist()) <= {-0.5, 0.5}
    assert signal_l1_norm(f.values - q.values) <= 0.5


def test_quantize_error_random(rng):
    for _ in range(100):
        r = float(rng.uniform(0.5, 3))
        f = StepSignal(rng.uniform(-r, r, (int(rng.integers(1, 30)), 2)), r)
        rho = float(rng.uniform(0.01, 1))
        q, p = quantize_signal(f, rho)
        assert signal_l1_norm(f.values - q.values) <= rho + 1e-12
        # the signal is constant on classes of the returned partition
        for c in range(p.k):
            rows = q.values[p.assignment == c]
            assert (rows == rows[0]).all()


def test_project_examples(rng):
    x = random_gs(rng, 4)
    assert project(x, Partition.discrete(4)) == x
    one = project(x, Partition.trivial(4))
    np.testing.assert_allclose(one.W, x.W.mean(), atol=1e-15)
    np.testing.assert_allclose(one.f, x.f.mean(), atol=1e-15)
    two = project(x, Partition([0, 0, 1, 1], 2))
    expect = x.W.reshape(2, 2, 2, 2).mean(axis=(1, 3))
    np.testing.assert_allclose(two.W[::2, ::2], expect, atol=1e-15)


def test_project_idempotent_and_mean(rng):
    x = random_gs(rng, 9)
    p = Partition(rng.integers(0, 4, 9), 4)
    y = project(x, p)
    z = project(y, p)
    np.testing.assert_allclose(z.W, y.W, atol=1e-12)
    np.testing.assert_allclose(z.f, y.f, atol=1e-12)
    assert y.W.mean() == pytest.approx(x.W.mean(), abs=1e-12)
    assert y.f.mean() == pytest.approx(x.f.mean(), abs=1e-12)


def test_combine(rng):
    p = Partition([0, 1, 0, 1], 2)
    assert combine(p, p).same_classes(p)
    halves = Partition([0, 0, 0, 0, 1, 1, 1, 1], 2)
    quarters = Partition([0, 0, 1, 1, 2, 2, 3, 3], 4)
    assert combine(halves, quarters).same_classes(quarters)
    a, b = Partition(rng.integers(0, 3, 12), 3), Partition(rng.integers(0, 4, 12), 4)
    c = combine(a, b)
    pairs = {(int(i), int(j)) for i, j in zip(a.assignment, b.assignment)}
    assert c.nonempty() == len(pairs)
    for cls in range(c.k):
        members = np.flatnonzero(c.assignment == cls)
        assert len({(int(a.assignment[i]), int(b.assignment[i])) for i in members}) == 1
    # exact representation: projecting a step function over a onto c changes nothing
    F = rng.random(3)[a.assignment][:, None] * rng.random(3)[a.assignment][None, :]
    np.testing.assert_allclose(project_kernel(F, c), F, atol=1e-15)


def test_equitize_refines_equipartition():
    p = Partition([0, 0, 0, 0, 1, 1, 1, 1], 2)
    e = equitize(p, 4)
    assert e.k == 4 and (e.sizes() == 2).all()
    assert combine(e, p).same_classes(e)


def test_equitize_measure_bookkeeping():
    p = Partition([0, 0, 0, 1], 2)  # measures 0.75 / 0.25
    e = equitize(p, 4)
    assert (e.measures() == 0.25).all()
    e2 = equitize(Partition([0] * 6 + [1] * 2, 2), 4)  # chunks of 2 blocks
    assert e2.assignment.tolist() == [0, 0, 1, 1, 2, 2, 3, 3]


def test_equitize_unrepresentable():
    with pytest.raises(ValueError, match="refine"):
        equitize(Partition.trivial(6), 4)


def test_equitize_error_bound(rng):
    for _ in range(20):
        n = int(rng.integers(2, 7))
        m = n * int(rng.integers(2, 6))
        k = int(rng.integers(1, 5))
        p = Partition(rng.integers(0, k, m), k)
        vals = rng.random((k, k))
        F = np.triu(vals) + np.triu(vals, 1).T
        W = F[np.ix_(p.assignment, p.assignment)]
        e = equitize(p, n)
        assert np.abs(W - project_kernel(W, e)).mean() <= 2 * k / n + 1e-12


def test_estimator_api(rng):
    x = random_gs(rng, 8)
    est = WeakRegularity(epsilon=0.4, rho=0.25)
    assert est.get_params()["epsilon"] == 0.4
    y = est.fit(x).transform(x)
    assert isinstance(y, GraphonSignal) and y.resolution == 8
    assert est.residual_cut_norm_ <= 0.4
    assert est.n_steps_ <= math.ceil(1 / 0.4**2)
    assert est.signal_error(x) <= 0.25 + 1e-12
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(Exception):
        WeakRegularity().transform(x)
    y2 = WeakRegularity(epsilon=0.4, rho=0.25).fit_transform(x)
    assert y2 == y
