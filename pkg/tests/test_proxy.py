import numpy as np
import pytest

from seqopt.oracle import (ConstantScorer, PottsLandscape, PottsScorer,
                           Scorer, ScorerError)
from seqopt.proxy import (FinetuneSchedule, ProxyModel, finetune_tick,
                          make_pretrain_corpus, pearson, pretrain)


def hand_pearson(xs, ys):
    """Independent closed-form oracle (no shared code with pearson())."""
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = (sum((x - mx) ** 2 for x in xs) * sum((y - my) ** 2 for y in ys)) ** 0.5
    return num / den


class TestPearson:
    def test_identical_series(self):
        assert pearson([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(1.0)

    def test_negated_series(self):
        assert pearson([1.0, 2.0, 3.0], [-1.0, -2.0, -3.0]) == pytest.approx(-1.0)

    def test_hand_computed_value(self):
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(0.9819805060619659)
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(
            hand_pearson([1, 2, 3], [1, 2, 4]))

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            pearson([1.0], [2.0])


class TestProxyModel:
    def test_parameter_budget_near_15k(self):
        model = ProxyModel(50, 20, np.random.default_rng(0))
        assert abs(model.n_params - 15_000) < 1_000

    def test_output_in_unit_interval(self):
        model = ProxyModel(10, 4, np.random.default_rng(1), param_budget=2000)
        seqs = np.random.default_rng(2).integers(0, 4, size=(50, 10))
        scores = model.predict(seqs)
        assert ((scores > 0) & (scores < 1)).all()

    def test_inference_deterministic(self):
        model = ProxyModel(8, 4, np.random.default_rng(3), param_budget=2000)
        seqs = np.random.default_rng(4).integers(0, 4, size=(20, 8))
        assert (model.predict(seqs) == model.predict(seqs)).all()

    def test_checkpoint_preserves_scores(self, tmp_path):
        model = ProxyModel(8, 4, np.random.default_rng(5), param_budget=2000)
        path = tmp_path / "proxy.json"
        model.net.save(path)
        clone = ProxyModel(8, 4, np.random.default_rng(99), param_budget=2000)
        clone.net = clone.net.load(path)
        seqs = np.random.default_rng(6).integers(0, 4, size=(10, 8))
        assert (model.predict(seqs) == clone.predict(seqs)).all()


class TestPretrain:
    def test_constant_labels_converge_to_constant(self):
        rng = np.random.default_rng(7)
        model = ProxyModel(10, 4, rng, param_budget=2000)
        seqs = rng.integers(0, 4, size=(1500, 10))
        pretrain(model, seqs, np.full(1500, 0.5), epochs=60, rng=rng)
        held = rng.integers(0, 4, size=(100, 10))
        np.testing.assert_allclose(model.predict(held), 0.5, atol=0.02)

    def test_single_example_memorized(self):
        rng = np.random.default_rng(8)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        seq = rng.integers(0, 4, size=(1, 6))
        pretrain(model, seq, np.array([0.8]), epochs=300, rng=rng)
        assert model.predict(seq)[0] == pytest.approx(0.8, abs=1e-3)

    def test_training_loss_decreases(self):
        rng = np.random.default_rng(9)
        oracle = PottsScorer(PottsLandscape(12, 4, seed=2))
        model = ProxyModel(12, 4, rng, param_budget=3000)
        seqs = rng.integers(0, 4, size=(600, 12))
        losses = pretrain(model, seqs, oracle.score_batch(seqs), epochs=25, rng=rng)
        assert losses[-1] < losses[0]

    def test_empty_corpus_rejected(self):
        rng = np.random.default_rng(10)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        with pytest.raises(ValueError):
            pretrain(model, np.empty((0, 6), dtype=np.int64), np.empty(0), 5, rng)

    def test_heldout_correlation_after_pretraining(self):
        # pilot run (seed 0, 60 epochs, default landscape): held-out r = 0.60;
        # threshold recorded at 0.5
        rng = np.random.default_rng(0)
        oracle = PottsScorer(PottsLandscape(50, 20, seed=1))
        train = rng.integers(0, 20, size=(5000, 50))
        held = rng.integers(0, 20, size=(1000, 50))
        model = ProxyModel(50, 20, rng)
        pretrain(model, train, oracle.score_batch(train), epochs=60, rng=rng)
        r = pearson(model.predict(held), oracle.score_batch(held))
        assert r >= 0.5


class _SelfLabelingOracle(Scorer):
    """Test double: labels every sequence with the proxy's own prediction."""

    name = "self"

    def __init__(self, model):
        super().__init__()
        self.model = model

    def _score_batch(self, seqs):
        return self.model.predict(seqs)


class _FailingOracle(Scorer):
    name = "failing"

    def _score_batch(self, seqs):
        raise ScorerError("synthetic outage")


class TestFinetuneTick:
    def test_pool_smaller_than_k_uses_whole_pool(self):
        rng = np.random.default_rng(11)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        pool = rng.integers(0, 4, size=(7, 6))
        oracle = PottsScorer(PottsLandscape(6, 4, seed=3))
        result = finetune_tick(model, pool, oracle,
                               FinetuneSchedule(interval=100, top_k=50, epochs=2), rng)
        assert result.n_selected == 7
        assert result.oracle_queries == 7
        assert oracle.queries == 7

    def test_exactly_min_k_pool_queries(self):
        rng = np.random.default_rng(12)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        pool = rng.integers(0, 4, size=(300, 6))
        oracle = PottsScorer(PottsLandscape(6, 4, seed=3))
        result = finetune_tick(model, pool, oracle,
                               FinetuneSchedule(interval=100, top_k=40, epochs=2), rng)
        assert result.oracle_queries == 40
        assert oracle.queries == 40

    def test_self_labeling_gives_perfect_correlation(self):
        rng = np.random.default_rng(13)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        pool = rng.integers(0, 4, size=(60, 6))
        oracle = _SelfLabelingOracle(model)
        result = finetune_tick(model, pool, oracle,
                               FinetuneSchedule(interval=100, top_k=30, epochs=1), rng)
        assert result.pearson_r == pytest.approx(1.0)

    def test_duplicates_in_pool_deduplicated(self):
        rng = np.random.default_rng(14)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        base = rng.integers(0, 4, size=(10, 6))
        pool = np.concatenate([base, base, base])
        oracle = PottsScorer(PottsLandscape(6, 4, seed=3))
        result = finetune_tick(model, pool, oracle,
                               FinetuneSchedule(interval=100, top_k=100, epochs=1), rng)
        assert result.n_selected == 10

    def test_oracle_failure_leaves_model_unchanged(self):
        rng = np.random.default_rng(15)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        snapshot = [p.copy() for p in model.net.parameters()]
        pool = rng.integers(0, 4, size=(20, 6))
        with pytest.raises(ScorerError):
            finetune_tick(model, pool, _FailingOracle(),
                          FinetuneSchedule(interval=100, top_k=10, epochs=5), rng)
        for p, s in zip(model.net.parameters(), snapshot):
            assert (p == s).all()

    def test_empty_pool_rejected(self):
        rng = np.random.default_rng(16)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        with pytest.raises(ValueError):
            finetune_tick(model, np.empty((0, 6), dtype=np.int64),
                          ConstantScorer(0.5), FinetuneSchedule(), rng)

    def test_degenerate_labels_record_nan_not_crash(self):
        rng = np.random.default_rng(20)
        model = ProxyModel(6, 4, rng, param_budget=1000)
        pool = rng.integers(0, 4, size=(30, 6))
        result = finetune_tick(model, pool, ConstantScorer(0.5),
                               FinetuneSchedule(interval=100, top_k=10,
                                                epochs=2), rng)
        assert np.isnan(result.pearson_r)

    def test_finetune_mse_trend_nonincreasing_most_epochs(self):
        rng = np.random.default_rng(17)
        oracle = PottsScorer(PottsLandscape(10, 4, seed=4))
        model = ProxyModel(10, 4, rng, param_budget=2000)
        seqs = rng.integers(0, 4, size=(500, 10))
        pretrain(model, seqs, oracle.score_batch(seqs), epochs=5, rng=rng)
        drops = 0
        total = 0
        for _ in range(10):
            pool = rng.integers(0, 4, size=(150, 10))
            result = finetune_tick(model, pool, oracle,
                                   FinetuneSchedule(interval=100, top_k=50,
                                                    epochs=50), rng)
            mses = result.mse_per_epoch
            total += 1
            if mses[-1] <= mses[0]:
                drops += 1
        assert drops >= 9  # non-increasing over the burst in >= 90% of ticks


class TestCorpus:
    def test_corpus_contains_uniform_plus_hill_climbs(self):
        rng = np.random.default_rng(18)
        oracle = PottsScorer(PottsLandscape(8, 4, seed=5))
        seqs, labels = make_pretrain_corpus(oracle, 8, 4, 200, rng,
                                            hill_frac=0.1, hill_steps=5)
        assert seqs.shape[0] == 200 + 20 * 5
        assert labels.shape[0] == seqs.shape[0]
        assert oracle.queries == seqs.shape[0]

    def test_labels_match_oracle(self):
        rng = np.random.default_rng(19)
        oracle = PottsScorer(PottsLandscape(8, 4, seed=5))
        seqs, labels = make_pretrain_corpus(oracle, 8, 4, 100, rng)
        np.testing.assert_array_equal(labels, oracle.landscape.score_batch(seqs))


def test_schedule_validates():
    with pytest.raises(ValueError):
        FinetuneSchedule(interval=0)
    with pytest.raises(ValueError):
        FinetuneSchedule(lr=-1.0)
