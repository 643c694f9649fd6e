"""Property tests for the model, pruning and training invariants."""
import numpy as np
from hypothesis import given, settings, strategies as st

from autosize.corpus import NGramDataset, Vocabulary
from autosize.network import dumps_model, forward, hidden_activations, init_params, loads_model
from autosize.prox import RegularizerSpec, group_norm_l21, group_norm_linf1, prox_group_matrix
from autosize.pruning import compact, zero_units
from autosize.trainer import TrainConfig, train

dims = st.fixed_dictionaries({
    "n": st.integers(2, 5),
    "V": st.integers(1, 12),
    "d": st.integers(1, 4),
    "h1": st.integers(0, 8),
    "h2": st.integers(0, 6),
    "seed": st.integers(0, 2**32),
})


def build(dm, bias_seed=None):
    p = init_params(dm["n"], dm["V"], dm["d"], dm["h1"], dm["h2"], dm["seed"])
    rng = np.random.default_rng(dm["seed"] if bias_seed is None else bias_seed)
    p.b[:] = rng.normal(size=p.h1)
    p.c[:] = rng.normal(size=p.h2)
    p.d_out[:] = rng.normal(size=p.vocab_size)
    return p, rng


@given(dims)
@settings(max_examples=100, deadline=None)
def test_normalized_and_pure(dm):
    p, rng = build(dm)
    ctx = rng.integers(0, dm["V"], size=dm["n"] - 1)
    out = forward(p, ctx)
    assert abs(np.exp(out).sum() - 1) <= 1e-12
    assert np.array_equal(out, forward(p.copy(), ctx.copy()))


@given(dims, st.data())
@settings(max_examples=100, deadline=None)
def test_zero_group_gives_zero_activation(dm, data):
    p, rng = build(dm)
    if p.h1 == 0:
        return
    i = data.draw(st.integers(0, p.h1 - 1))
    p.B[:, i] = 0.0
    p.b[i] = 0.0
    y, _ = hidden_activations(p, rng.integers(0, dm["V"], size=(20, dm["n"] - 1)))
    assert np.all(y[:, i] == 0.0)


@given(dims, st.data())
@settings(max_examples=100, deadline=None)
def test_compaction(dm, data):
    p, rng = build(dm)
    dead1 = data.draw(st.sets(st.integers(0, max(p.h1 - 1, 0)), max_size=p.h1))
    dead2 = data.draw(st.sets(st.integers(0, max(p.h2 - 1, 0)), max_size=p.h2))
    for i in dead1:
        p.B[:, i] = 0.0
        p.b[i] = 0.0
    for i in dead2:
        p.C[i] = 0.0
        p.c[i] = 0.0
    q, report = compact(p)
    assert report.layer1_removed == sorted(dead1) == zero_units(p, 1).tolist()
    assert q.h1 == p.h1 - len(report.layer1_removed)
    assert q.h2 == p.h2 - len(report.layer2_removed)
    assert set(dead2) <= set(report.layer2_removed)
    assert compact(q)[1].empty
    for ctx in rng.integers(0, dm["V"], size=(10, dm["n"] - 1)):
        assert np.abs(forward(q, ctx) - forward(p, ctx)).max() <= 1e-12


@given(dims)
@settings(max_examples=50, deadline=None)
def test_model_text_round_trip(dm):
    p, _ = build(dm)
    text = dumps_model(p)
    q = loads_model(text)
    assert dumps_model(q) == text
    for a, b in zip(p.arrays(), q.arrays()):
        assert np.array_equal(a, b)


@given(st.lists(st.text("abcxyz", min_size=1, max_size=4), unique=True, max_size=10))
@settings(max_examples=50)
def test_vocabulary_round_trip(tmp_path_factory, words):
    words = [w for w in words if w not in ("<unk>", "<s>", "</s>")]
    v = Vocabulary(("<unk>", "<s>", "</s>", *words))
    path = tmp_path_factory.mktemp("vocab") / "v.txt"
    v.save(path)
    assert Vocabulary.load(path) == v


@given(st.sampled_from(["l1", "l21", "linf1"]), st.integers(0, 1000), st.integers(1, 3))
@settings(max_examples=15, deadline=None)
def test_zero_lambda_is_plain_sgd(kind, seed, epochs):
    rng = np.random.default_rng(seed)
    data = NGramDataset(3, rng.integers(0, 8, size=(40, 2)), rng.integers(0, 8, size=40))
    p0 = init_params(3, 8, 3, 5, 4, seed)
    cfg = TrainConfig(epochs=epochs, eta=0.1, batch_size=7, seed=seed)
    a, ha = train(p0, data, cfg, RegularizerSpec(kind, 0.0))
    b, hb = train(p0, data, cfg, RegularizerSpec())
    assert dumps_model(a) == dumps_model(b)
    assert [r.active_h1 for r in ha] == [r.active_h1 for r in hb]


@given(st.sampled_from(["l21", "linf1"]), st.integers(0, 2**32), st.floats(0.001, 1.0))
@settings(max_examples=30, deadline=None)
def test_full_batch_prox_descent_monotone(kind, seed, lam):
    # least squares with groups as rows of W; last column of X plays the bias
    rng = np.random.default_rng(seed)
    N, p, h = 40, 5, 4
    X = np.hstack([rng.normal(size=(N, p)), np.ones((N, 1))])
    Y = rng.normal(size=(N, h))
    eta = 0.9 / np.linalg.eigvalsh(X.T @ X / N).max()
    norm = group_norm_l21 if kind == "l21" else group_norm_linf1

    def objective(W):
        return ((X @ W.T - Y) ** 2).sum() / (2 * N) + lam * norm(W)

    W = rng.normal(size=(h, p + 1))
    prev = objective(W)
    for it in range(100):
        W = prox_group_matrix(W - eta * (X @ W.T - Y).T @ X / N, kind, eta * lam, seed=it)
        cur = objective(W)
        assert cur <= prev + 1e-12 * abs(prev)
        prev = cur
