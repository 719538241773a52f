import numpy as np
import pytest

from moviesent import DataError, SentimentLabel, SentimentModel, accuracy, predict
from moviesent.evaluate import load_predictions, save_predictions
from moviesent.training import check_config, _synthetic_examples


@pytest.fixture(scope="module")
def model():
    return SentimentModel.build(check_config(), seed=0, dtype=np.float32)


@pytest.fixture(scope="module")
def examples(model):
    return _synthetic_examples(model.config, np.random.default_rng(1), 7)


class TestPredict:
    def test_argmax_selects_larger_logit(self, model, examples):
        logits = model.logits(examples)
        labels = predict(examples, model)
        for row, label in zip(logits, labels):
            expected = SentimentLabel.POSITIVE if row[1] > row[0] else SentimentLabel.NEGATIVE
            assert label == expected

    def test_tie_breaks_to_negative(self):
        assert int(np.argmax(np.array([0.0, 0.0]))) == SentimentLabel.NEGATIVE

    def test_order_and_purity(self, model, examples):
        first = predict(examples, model)
        second = predict(examples, model)
        assert first == second
        assert len(first) == len(examples)
        # predicting a sub-batch gives the same aligned answers
        assert predict(examples[2:5], model) == first[2:5]


class TestAccuracy:
    def test_all_correct(self):
        assert accuracy([1, 0, 1], [1, 0, 1]) == 100.0

    def test_half_correct(self):
        predictions = [1] * 50 + [0] * 50
        gold = [1] * 100
        assert accuracy(predictions, gold) == 50.0

    def test_complement_is_zero(self):
        gold = [0, 1, 0, 1]
        assert accuracy([1 - g for g in gold], gold) == 0.0

    def test_self_agreement(self):
        rng = np.random.default_rng(2)
        p = [int(v) for v in rng.integers(0, 2, size=31)]
        assert accuracy(p, p) == 100.0

    def test_bounds_and_permutation_invariance(self):
        rng = np.random.default_rng(3)
        predictions = [int(v) for v in rng.integers(0, 2, size=40)]
        gold = [int(v) for v in rng.integers(0, 2, size=40)]
        base = accuracy(predictions, gold)
        assert 0.0 <= base <= 100.0
        order = rng.permutation(40)
        shuffled = accuracy([predictions[i] for i in order], [gold[i] for i in order])
        assert shuffled == base

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            accuracy([1], [1, 0])

    def test_empty(self):
        with pytest.raises(DataError):
            accuracy([], [])


class TestPredictionFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "pred.tsv"
        save_predictions(path, [SentimentLabel.POSITIVE, SentimentLabel.NEGATIVE])
        assert path.read_text() == "0\tpositive\n1\tnegative\n"
        assert load_predictions(path) == ["positive", "negative"]

    def test_neutral_allowed_on_load(self, tmp_path):
        path = tmp_path / "pred.tsv"
        path.write_text("0\tneutral\n1\tpositive\n")
        assert load_predictions(path) == ["neutral", "positive"]

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "pred.tsv"
        path.write_text("0 positive\n")
        with pytest.raises(DataError, match="line 0"):
            load_predictions(path)

    def test_unknown_label(self, tmp_path):
        path = tmp_path / "pred.tsv"
        path.write_text("0\tmeh\n")
        with pytest.raises(DataError, match="unknown label"):
            load_predictions(path)
