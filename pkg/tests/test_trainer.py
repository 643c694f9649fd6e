import numpy as np
import pytest

from autosize.corpus import NGramDataset
from autosize.errors import InvalidConfigurationError, TrainingDivergedError
from autosize.network import dumps_model, init_params, nll, zero_params
from autosize.prox import RegularizerSpec, prox_l2_row, prox_linf_row
from autosize.trainer import (
    HISTORY_HEADER, TrainConfig, TrainingHistory, proximal_step, sgd_minibatch_step, train,
)

from oracles import prox_linf_sorted


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(0)
    V = 12
    ctx = rng.integers(0, V, size=(300, 2))
    # learnable structure: target depends on the previous word
    tgt = (ctx[:, 1] * 5 + 3) % V
    noisy = rng.random(300) < 0.2
    tgt[noisy] = rng.integers(0, V, size=noisy.sum())
    return NGramDataset(3, ctx, tgt)


def fresh():
    return init_params(3, 12, 4, 10, 6, seed=5)


class TestSgdStep:
    def test_zero_eta(self, data):
        p = fresh()
        q = sgd_minibatch_step(p, data.subset(slice(0, 8)), 0.0)
        for a, b in zip(p.arrays(), q.arrays()):
            assert np.array_equal(a, b)

    def test_zero_gradient(self):
        # uniform model, every word predicted exactly once; V = 16 keeps the
        # softmax probabilities exactly representable
        V = 16
        p = zero_params(3, V, 3, 4, 2)
        batch = NGramDataset(3, np.ones((V, 2), dtype=int), np.arange(V))
        q = sgd_minibatch_step(p, batch, 0.5)
        for a, b in zip(p.arrays(), q.arrays()):
            assert np.array_equal(a, b)

    def test_descends(self, data):
        p = fresh()
        batch = data.subset(slice(0, 64))
        q = sgd_minibatch_step(p, batch, 0.1)
        assert nll(q, batch) < nll(p, batch)

    def test_uses_average_gradient(self, data):
        p = fresh()
        batch = data.subset(slice(0, 4))
        doubled = NGramDataset(3, np.vstack([batch.contexts] * 2), np.concatenate([batch.targets] * 2))
        a, b = sgd_minibatch_step(p, batch, 0.1), sgd_minibatch_step(p, doubled, 0.1)
        for x, y in zip(a.arrays(), b.arrays()):
            np.testing.assert_allclose(x, y, rtol=0, atol=1e-15)

    def test_quadratic_toy(self):
        # L(w) = (w - 3)^2 / 2 at w = 0: one unit step lands on the minimum
        w, eta = 0.0, 1.0
        assert w - eta * (w - 3.0) == 3.0


class TestProximalStep:
    def test_none_is_identity(self):
        p = fresh()
        q = proximal_step(p, RegularizerSpec("none", 5.0), 0.1)
        for a, b in zip(p.arrays(), q.arrays()):
            assert np.array_equal(a, b)

    @pytest.mark.parametrize("eta", [1.0, 0.5, 0.2])
    def test_l21_fixed_point(self, eta):
        # L(w) = ||w - t||^2 / 2, lambda = 2; the fixed point of
        # w <- prox(w - eta * (w - t)) is prox_{lambda}(t) = [1.8, 2.4]
        t, lam = np.array([3.0, 4.0]), 2.0
        w = np.zeros(2)
        for _ in range(200):
            w = prox_l2_row(w - eta * (w - t), eta * lam)
        np.testing.assert_allclose(w, [1.8, 2.4], atol=1e-12)

    @pytest.mark.parametrize("eta", [1.0, 0.5, 0.2])
    def test_linf1_fixed_point(self, eta):
        t, lam = np.array([3.0, 1.0]), 1.0
        w = np.zeros(2)
        for _ in range(200):
            w = prox_linf_row(w - eta * (w - t), eta * lam)
        np.testing.assert_allclose(w, prox_linf_sorted(t, lam), atol=1e-12)
        np.testing.assert_allclose(w, [2.0, 1.0], atol=1e-12)


class TestTrain:
    def test_zero_epochs(self, data):
        p = fresh()
        q, h = train(p, data, TrainConfig(epochs=0), RegularizerSpec("linf1", 0.1))
        assert len(h) == 0
        for a, b in zip(p.arrays(), q.arrays()):
            assert np.array_equal(a, b)

    def test_zero_lambda_matches_plain_sgd(self, data):
        cfg = TrainConfig(epochs=3, eta=0.1, batch_size=16, seed=9)
        base, _ = train(fresh(), data, cfg, RegularizerSpec("none", 0.0))
        for kind in ("l1", "l21", "linf1"):
            q, _ = train(fresh(), data, cfg, RegularizerSpec(kind, 0.0))
            assert dumps_model(q) == dumps_model(base)

    def test_deterministic(self, data):
        cfg = TrainConfig(epochs=3, eta=0.1, batch_size=10, seed=3, validation=data.subset(slice(0, 50)))
        spec = RegularizerSpec("linf1", 0.05)
        a, ha = train(fresh(), data, cfg, spec)
        b, hb = train(fresh(), data, cfg, spec)
        assert dumps_model(a) == dumps_model(b)
        assert ha.to_csv() == hb.to_csv()

    def test_seed_changes_order(self, data):
        a, _ = train(fresh(), data, TrainConfig(epochs=1, batch_size=10, seed=1), RegularizerSpec())
        b, _ = train(fresh(), data, TrainConfig(epochs=1, batch_size=10, seed=2), RegularizerSpec())
        assert dumps_model(a) != dumps_model(b)

    def test_input_untouched(self, data):
        p = fresh()
        before = dumps_model(p)
        train(p, data, TrainConfig(epochs=1), RegularizerSpec("l21", 0.1))
        assert dumps_model(p) == before

    @pytest.mark.parametrize("kind", ["l1", "l21", "linf1"])
    def test_history(self, data, kind):
        cfg = TrainConfig(epochs=4, eta=0.2, batch_size=32, seed=0, validation=data.subset(slice(0, 40)))
        p, h = train(fresh(), data, cfg, RegularizerSpec(kind, 0.05))
        assert [r.epoch for r in h] == [1, 2, 3, 4]
        for r in h:
            assert 0 <= r.active_h1 <= 10 and 0 <= r.active_h2 <= 6
            assert r.val_perplexity > 1 and r.reg_value >= 0
        assert h[-1].train_nll_per_token == pytest.approx(nll(p, data) / len(data))

    def test_strong_regularizer_prunes(self, data):
        cfg = TrainConfig(epochs=3, eta=0.2, batch_size=32, seed=0)
        _, h = train(fresh(), data, cfg, RegularizerSpec("linf1", 0.3))
        assert h[-1].active_h1 < 10

    def test_learns(self, data):
        p0 = fresh()
        p, h = train(p0, data, TrainConfig(epochs=8, eta=0.3, batch_size=16), RegularizerSpec())
        assert nll(p, data) < 0.8 * nll(p0, data)

    def test_on_epoch_callback(self, data):
        seen = []
        train(fresh(), data, TrainConfig(epochs=2), RegularizerSpec(),
              on_epoch=lambda e, p, r: seen.append((e, r.epoch)))
        assert seen == [(1, 1), (2, 2)]

    def test_divergence(self, data):
        p = fresh()
        p.A[:] = np.inf
        with pytest.raises(TrainingDivergedError) as err:
            train(p, data, TrainConfig(epochs=1), RegularizerSpec())
        assert err.value.epoch == 1 and err.value.batch == 0
        assert "epoch 1" in str(err.value) and "minibatch 0" in str(err.value)

    def test_bad_config(self):
        with pytest.raises(InvalidConfigurationError):
            TrainConfig(eta=0)
        with pytest.raises(InvalidConfigurationError):
            TrainConfig(batch_size=0)
        with pytest.raises(InvalidConfigurationError):
            TrainConfig(epochs=-1)


def test_history_csv_roundtrip(data):
    cfg = TrainConfig(epochs=2, seed=0)
    _, h = train(fresh(), data, cfg, RegularizerSpec("linf1", 0.01))
    text = h.to_csv()
    lines = text.splitlines()
    assert lines[0] == ",".join(HISTORY_HEADER)
    # no validation set: empty perplexity column
    assert lines[1].split(",")[4] == ""
    assert TrainingHistory.from_csv(text).to_csv() == text
    nll_field = lines[1].split(",")[3]
    assert float(nll_field) == h[0].train_nll_per_token
