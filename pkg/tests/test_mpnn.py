import numpy as np
import pytest
from sklearn.base import clone

from conftest import random_graphon, random_gs
from graphon_signal import GraphonSignal, GraphSignal, StepGraphon, induce
from graphon_signal.cutmetric import kernel_cut_norm_exact, signal_cut_norm, signal_l1_norm, kernel_l1_norm
from graphon_signal.mpnn import (
    CatalogFunction as CF,
    MessageFunctionSpec,
    MessagePassingNetwork,
    MpnnLayer,
    MpnnSpec,
    aggregate_graph,
    aggregate_graphon,
    forward,
    forward_signal,
    lipschitz_bound,
    lipschitz_bound_l1,
    message_kernel,
    random_spec,
    readout,
    setting2_growth_closed_form,
    signal_bounds,
    verify_commutation,
    verify_lipschitz,
)
from graphon_signal.mpnn.lipschitz import random_pair

K3 = GraphSignal(np.ones((3, 3)) - np.eye(3), [1.0, 2.0, 3.0], 3.0)
PASS_B = MessageFunctionSpec((CF.constant([1.0], 1),), (CF.identity(1),))


def catalog_samples(rng):
    return [
        CF.constant([0.3, -0.7], 2),
        CF.identity(2),
        CF.affine(rng.normal(size=(3, 2)), rng.normal(size=3)),
        CF.relu_affine(rng.normal(size=(2, 2)), rng.normal(size=2)),
        CF.tanh_affine(rng.normal(size=(2, 3)), rng.normal(size=2), scale=-1.7),
        CF.two_layer_mlp(rng.normal(size=(4, 2)), rng.normal(size=4), rng.normal(size=(2, 4)), rng.normal(size=2)),
    ]


def test_catalog_lipschitz_dominates_finite_differences(rng):
    for f in catalog_samples(rng):
        X = rng.normal(scale=2, size=(1000, f.in_dim))
        Y = X + rng.normal(scale=10.0 ** rng.uniform(-4, 0, (1000, 1)), size=X.shape)
        num = np.abs(f(X) - f(Y)).max(axis=1)
        den = np.abs(X - Y).max(axis=1)
        assert (num <= f.lip * den * (1 + 1e-6) + 1e-15).all(), f


def test_catalog_analytic_data(rng):
    A = np.array([[1.0, -2.0], [0.5, 0.5]])
    f = CF.affine(A, [0.1, -0.4])
    assert f.lip == 3.0 and f.bias_at_zero == 0.4 and f.inf_bound is None
    t = CF.tanh_affine(A, [0.0, 0.0], scale=2.0)
    assert t.lip == 6.0 and t.inf_bound == 2.0 and t.bias_at_zero == 0.0
    assert CF.relu_affine(A, [-1.0, 2.0]).bias_at_zero == 2.0
    assert CF.relu_affine(A).nonneg and CF.constant([0.2], 1).nonneg and not CF.constant([-1.0], 1).nonneg
    c = CF.constant([0.5, -2.0], 3)
    assert c.lip == 0 and c.inf_bound == 2.0 and c(np.zeros((4, 3))).shape == (4, 2)
    for g in catalog_samples(rng):
        X = rng.normal(size=(200, g.in_dim)) * 3
        assert (np.abs(g(X)).max(axis=1) <= g.output_bound(3 * np.abs(X).max()) + 1e-12).all()


def test_catalog_round_trip(rng):
    for f in catalog_samples(rng):
        g = CF.from_dict(f.to_dict())
        X = rng.normal(size=(5, f.in_dim))
        np.testing.assert_array_equal(f(X), g(X))
    with pytest.raises(ValueError):
        CF.from_dict({"kind": "softmax"})


def test_message_spec_validation():
    with pytest.raises(ValueError):
        MessageFunctionSpec((CF.identity(1),), (CF.identity(2),))
    with pytest.raises(ValueError):
        MpnnLayer(PASS_B, CF.affine(np.ones((1, 3))))
    with pytest.raises(ValueError):
        MpnnSpec((MpnnLayer(PASS_B), MpnnLayer(MessageFunctionSpec((CF.identity(2),), (CF.identity(2),)))))


def test_message_kernel_examples(rng):
    f = rng.uniform(-1, 1, (4, 1))
    Q = message_kernel(PASS_B, f)
    for i in range(4):
        np.testing.assert_array_equal(Q[i, :, 0], f[:, 0])
    ones = MessageFunctionSpec((CF.constant([1.0], 1),), (CF.constant([1.0], 1),))
    assert (message_kernel(ones, f) == 1).all()
    fs = [CF.affine(rng.normal(size=(2, 2)), rng.normal(size=2)) for _ in range(4)]
    phi = MessageFunctionSpec((fs[0], fs[1]), (fs[2], fs[3]))
    g = rng.normal(size=(4, 2))
    Q = message_kernel(phi, g)
    for i in range(4):
        for j in range(4):
            direct = fs[0](g[i]) * fs[2](g[j]) + fs[1](g[i]) * fs[3](g[j])
            np.testing.assert_allclose(Q[i, j], direct, atol=1e-14)


def test_aggregate_graphon_examples(rng):
    Q = np.full((3, 3, 2), 0.7)
    np.testing.assert_allclose(aggregate_graphon(np.ones((3, 3)), Q), 0.7, atol=1e-15)
    assert not aggregate_graphon(np.zeros((3, 3)), Q).any()
    W = random_graphon(rng, 3)
    Q = rng.normal(size=(3, 3, 1))
    hand = [(W[i, 0] * Q[i, 0, 0] + W[i, 1] * Q[i, 1, 0] + W[i, 2] * Q[i, 2, 0]) / 3 for i in range(3)]
    np.testing.assert_allclose(aggregate_graphon(StepGraphon(W), Q)[:, 0], hand, atol=1e-15)


def test_aggregation_linearity(rng):
    W = random_graphon(rng, 5)
    Q1, Q2 = rng.normal(size=(5, 5, 2)), rng.normal(size=(5, 5, 2))
    lhs = aggregate_graphon(W, 0.5 * Q1 + Q2)
    np.testing.assert_allclose(lhs, 0.5 * aggregate_graphon(W, Q1) + aggregate_graphon(W, Q2), atol=1e-14)


def test_aggregate_graph_examples():
    np.testing.assert_allclose(aggregate_graph(K3, PASS_B)[:, 0], [5 / 3, 4 / 3, 1.0], atol=1e-15)
    iso = GraphSignal(np.zeros((3, 3)), [1.0, 2.0, 3.0], 3.0)
    assert not aggregate_graph(iso, PASS_B).any()
    assert aggregate_graph(GraphSignal([[0.0]], [0.4]), PASS_B)[0, 0] == 0


def test_gin_layer():
    eps = 0.0
    gin = MpnnSpec((MpnnLayer(PASS_B, CF.affine([[1 + eps, 1.0]])),))
    np.testing.assert_allclose(forward(gin, K3).features[:, 0], [8 / 3, 10 / 3, 4.0], atol=1e-15)
    assert verify_commutation(gin, K3) == 0.0


def test_spectral_step():
    rng = np.random.default_rng(3)
    A = np.triu((rng.random((6, 6)) < 0.5).astype(float), 1)
    A = A + A.T
    f = rng.uniform(-1, 1, 6)
    g = GraphSignal(A, f)
    spec = MpnnSpec((MpnnLayer(PASS_B),))
    np.testing.assert_array_equal(forward(spec, g).features[:, 0], (A[:, :, None] * f[None, :, None]).sum(axis=1)[:, 0] / 6)
    np.testing.assert_allclose(forward(spec, g).features[:, 0], A @ f / 6, atol=1e-15)


def test_forward_zero_layers_and_graph_unchanged(rng):
    x = random_gs(rng, 4)
    assert forward(MpnnSpec(), x) is x
    spec = random_spec(rng, in_dim=1)
    y = forward(spec, x)
    assert y.graphon == x.graphon
    assert np.abs(y.f).max() <= y.r


def test_readout():
    x = GraphonSignal.from_arrays(np.ones((3, 3)), np.full((3, 2), 0.25))
    np.testing.assert_array_equal(readout(x), [0.25, 0.25])
    assert readout(GraphonSignal.from_arrays(np.ones((2, 2)), [1.0, -1.0]))[0] == 0
    g = GraphSignal(np.ones((4, 4)), np.arange(4.0) / 4)
    assert readout(induce(g)) == readout(g)


def test_commutation_random(rng):
    worst = 0.0
    for _ in range(3):
        spec = random_spec(rng, in_dim=2)
        for n in (1, 2, 8, 32):
            A = np.triu(rng.random((n, n)), 1)
            worst = max(worst, verify_commutation(spec, GraphSignal(A + A.T, rng.uniform(-1, 1, (n, 2)))))
    assert worst <= 1e-10


def test_commutation_two_nodes_by_hand():
    f = np.array([0.5, -0.25])
    g = GraphSignal([[0.0, 0.6], [0.6, 0.0]], f)
    spec = MpnnSpec((MpnnLayer(PASS_B),))
    np.testing.assert_allclose(forward(spec, induce(g)).f[:, 0], [0.6 * -0.25 / 2, 0.6 * 0.5 / 2], atol=1e-16)


def bounded_spec(K=1, L=1.0, rho=1.0, T=1):
    fn = CF.tanh_affine([[L / rho]], [0.0], scale=rho)
    layer = MpnnLayer(MessageFunctionSpec((fn,) * K, (fn,) * K))
    return MpnnSpec((layer,) * T)


def test_lipschitz_spot_values():
    b = lipschitz_bound(bounded_spec(), 1)
    assert (b.L_f, b.L_W) == (4.0, 4.0)
    b = lipschitz_bound(bounded_spec(T=2), 1)
    assert (b.L_f, b.L_W) == (16.0, 20.0)
    b = lipschitz_bound(MpnnSpec(), 1)
    assert (b.L_f, b.L_W) == (1.0, 0.0)
    b = lipschitz_bound(bounded_spec(K=2, L=0.5, rho=3.0), 1)
    assert (b.L_f, b.L_W) == (4 * 2 * 0.5 * 3.0, 4 * 2 * 9.0)


def test_lipschitz_setting_requirements():
    with pytest.raises(ValueError):
        lipschitz_bound(MpnnSpec((MpnnLayer(PASS_B),)), 1)
    with pytest.raises(ValueError):
        lipschitz_bound(bounded_spec(), 3)
    with pytest.raises(ValueError):
        lipschitz_bound(bounded_spec(), 4)


def test_l1_coefficients_dominated(rng):
    for _ in range(20):
        spec = random_spec(rng, in_dim=int(rng.integers(1, 3)), kinds=("tanh_affine", "affine"))
        cut, l1 = lipschitz_bound(spec, 2), lipschitz_bound_l1(spec, 2)
        for (a, b), (a1, b1) in zip(cut.coefficients, l1.coefficients):
            assert a1 <= a and b1 <= b


def test_l1_lipschitz_holds(rng):
    for t in range(100):
        spec = random_spec(np.random.default_rng(t), in_dim=1)
        W, f, V, g = random_pair(rng, int(rng.integers(2, 9)), 1, 1.0)
        b = lipschitz_bound_l1(spec, 2)
        lhs = signal_l1_norm(forward_signal(spec, W, f) - forward_signal(spec, V, g))
        rhs = b.L_f * signal_l1_norm(f - g) + b.L_W * kernel_l1_norm(W - V)
        assert lhs <= rhs * (1 + 1e-9) + 1e-14


@pytest.mark.parametrize("setting,kinds,update_kinds", [
    (1, ("tanh_affine",), ("affine", "tanh_affine")),
    (2, ("affine", "relu_affine", "tanh_affine", "two_layer_mlp"), ("affine", "relu_affine")),
    (3, ("relu_affine",), ("relu_affine",)),
])
def test_verify_lipschitz_settings(setting, kinds, update_kinds):
    for s in range(3):
        spec = random_spec(np.random.default_rng(s), kinds=kinds, update_kinds=update_kinds)
        rep = verify_lipschitz(spec, setting, 60, seed=s)
        assert rep.passed and np.isfinite(rep.max_ratio)


def test_verify_lipschitz_identical_pair():
    spec = bounded_spec()
    W = np.full((3, 3), 0.5)
    f = np.array([[0.1], [0.2], [0.3]])
    out = forward_signal(spec, W, f)
    assert signal_cut_norm(out - forward_signal(spec, W, f)) == 0


def test_signal_bounds_hold(rng):
    spec = random_spec(rng, in_dim=1, kinds=("affine", "two_layer_mlp"))
    C = signal_bounds(spec, 1.0)
    for _ in range(20):
        W = random_graphon(rng, 6)
        F = rng.uniform(-1, 1, (6, 1))
        for t, layer in enumerate(spec.layers):
            F = forward_signal(MpnnSpec((layer,)), W, F)
            assert np.abs(F).max() <= C[t + 1] * (1 + 1e-12)


def test_setting2_closed_form_growth_empirical(rng):
    for _ in range(30):
        K = int(rng.integers(1, 3))
        fns = [CF.affine([[float(rng.uniform(1, 2))]], [float(rng.choice([-1, 1]) * rng.uniform(1, 2))])
               for _ in range(2 * K)]
        L = max(f.lip for f in fns)
        B = max(f.bias_at_zero for f in fns)
        layer = MpnnLayer(MessageFunctionSpec(tuple(fns[:K]), tuple(fns[K:])))
        W = random_graphon(rng, 5)
        r = float(rng.uniform(1, 2))
        F = rng.uniform(-r, r, (5, 1))
        F[0, 0] = r
        for t in range(1, 3):
            F = forward_signal(MpnnSpec((layer,)), W, F)
            assert np.abs(F).max() <= setting2_growth_closed_form(K, L, B, r, t)


def test_setting2_closed_form_not_a_bound_on_worst_case():
    # K = L = B = r = 1: worst-case recursion gives 25 at t = 2, closed form 16
    fn = CF.affine([[1.0]], [1.0])
    spec = MpnnSpec((MpnnLayer(MessageFunctionSpec((fn,), (fn,))),) * 2)
    assert signal_bounds(spec, 1.0)[2] == 25.0
    assert setting2_growth_closed_form(1, 1, 1, 1, 2) == 16.0
    out = forward_signal(spec, np.ones((1, 1)), np.ones((1, 1)))
    assert out[0, 0] == 25.0


def test_spec_json_round_trip(rng):
    spec = random_spec(rng, in_dim=2, readout=True)
    again = MpnnSpec.from_dict(__import__("json").loads(spec.to_json()))
    W = random_graphon(rng, 4)
    F = rng.uniform(-1, 1, (4, 2))
    np.testing.assert_array_equal(forward_signal(spec, W, F), forward_signal(again, W, F))
    assert again.readout


def test_estimator(rng):
    spec = random_spec(rng, in_dim=1)
    net = MessagePassingNetwork(spec=spec, readout=True)
    xs = [random_gs(rng, 5) for _ in range(3)]
    Z = net.fit(xs).transform(xs)
    assert Z.shape == (3, spec.out_dim)
    np.testing.assert_array_equal(Z[1], readout(forward(spec, xs[1])))
    assert clone(net).get_params()["readout"] is True
    y = MessagePassingNetwork(spec=spec.to_dict()).fit_transform(xs[0])
    assert isinstance(y, GraphonSignal)
