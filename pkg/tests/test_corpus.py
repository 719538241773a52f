import numpy as np
import pytest

from moviesent import (
    DataError,
    DatasetSplit,
    ReviewRecord,
    SentimentLabel,
    TsvSchema,
    load_tsv,
    remap_amazon_scores,
    save_tsv,
    split_stats,
)
from moviesent.corpus import (
    escape_text,
    load_amazon_tsv,
    load_encoded,
    save_encoded,
    unescape_text,
)
from moviesent.encoding import encode


class TestLoadTsv:
    def test_basic_rows(self, tmp_path):
        path = tmp_path / "reviews.tsv"
        path.write_text("1\tgreat film\n0\tdull plot\n")
        records = load_tsv(path)
        assert [(r.label, r.text) for r in records] == [
            (SentimentLabel.POSITIVE, "great film"),
            (SentimentLabel.NEGATIVE, "dull plot"),
        ]

    def test_label_names_accepted(self, tmp_path):
        path = tmp_path / "reviews.tsv"
        path.write_text("negative\tbad\nPOSITIVE\tgood\n")
        labels = [r.label for r in load_tsv(path)]
        assert labels == [SentimentLabel.NEGATIVE, SentimentLabel.POSITIVE]

    def test_out_of_domain_label(self, tmp_path):
        path = tmp_path / "reviews.tsv"
        path.write_text("2\tmeh\n")
        with pytest.raises(DataError, match="unknown label.*line 0"):
            load_tsv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "reviews.tsv"
        path.write_text("")
        assert load_tsv(path) == []

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "reviews.tsv"
        path.write_text("1\tfine\njust-text-no-tab\n")
        with pytest.raises(DataError, match="line 1"):
            load_tsv(path)

    def test_custom_schema(self, tmp_path):
        path = tmp_path / "reviews.tsv"
        path.write_text("some-id\tgreat film\t1\n")
        records = load_tsv(path, TsvSchema(label_column=2, text_column=1))
        assert records[0].label == SentimentLabel.POSITIVE
        assert records[0].text == "great film"

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="missing file"):
            load_tsv(tmp_path / "absent.tsv")


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        records = [
            ReviewRecord("plain text", SentimentLabel.POSITIVE),
            ReviewRecord("tab\there", SentimentLabel.NEGATIVE),
            ReviewRecord("line\nbreak and \\ backslash", SentimentLabel.POSITIVE),
            ReviewRecord("carriage\rreturn", SentimentLabel.NEGATIVE),
        ]
        path = tmp_path / "round.tsv"
        save_tsv(path, records)
        loaded = load_tsv(path)
        assert [(r.label, r.text) for r in loaded] == [
            (r.label, r.text) for r in records
        ]

    def test_escape_unescape_inverse(self):
        for text in ("a\tb", "a\\tb", "x\\\\n", "\n\r\t\\", "plain"):
            assert unescape_text(escape_text(text)) == text


class TestAmazonRemap:
    def test_score_five_positive(self):
        records = remap_amazon_scores([(5, "loved it")])
        assert records[0].label == SentimentLabel.POSITIVE

    def test_score_three_dropped(self):
        assert remap_amazon_scores([(3, "mid")]) == []

    def test_mixed_scores(self):
        records = remap_amazon_scores([(1, "a"), (3, "b"), (4, "c")])
        assert [r.label for r in records] == [
            SentimentLabel.NEGATIVE,
            SentimentLabel.POSITIVE,
        ]
        assert len(records) == 2

    def test_out_of_range_score(self):
        with pytest.raises(DataError):
            remap_amazon_scores([(6, "loud")])

    def test_length_accounting(self):
        rng = np.random.default_rng(0)
        scores = [int(s) for s in rng.integers(1, 6, size=200)]
        rows = [(s, f"review {i}") for i, s in enumerate(scores)]
        records = remap_amazon_scores(rows)
        assert len(records) == len(rows) - scores.count(3)

    def test_adapter_file_format(self, tmp_path):
        path = tmp_path / "amazon.tsv"
        path.write_text("5\tgreat\n3\tneutral-ish\n1\tbad\n")
        rows = load_amazon_tsv(path)
        assert rows == [(5, "great"), (3, "neutral-ish"), (1, "bad")]
        records = remap_amazon_scores(rows)
        assert [int(r.label) for r in records] == [1, 0]


class TestSplitStats:
    def test_counts_match_lists(self):
        split = DatasetSplit(
            train=[
                ReviewRecord("a", SentimentLabel.POSITIVE),
                ReviewRecord("b", SentimentLabel.POSITIVE),
                ReviewRecord("c", SentimentLabel.NEGATIVE),
            ],
            test=[ReviewRecord("d", SentimentLabel.NEGATIVE)],
        )
        stats = split_stats(split)
        assert (stats.train_positive, stats.train_negative) == (2, 1)
        assert (stats.test_positive, stats.test_negative) == (0, 1)
        assert stats.train_total == 3 and stats.test_total == 1

    def test_empty_split(self):
        stats = split_stats(DatasetSplit())
        assert (
            stats.train_positive,
            stats.train_negative,
            stats.test_positive,
            stats.test_negative,
        ) == (0, 0, 0, 0)

    @pytest.mark.parametrize(
        "counts",
        [
            (12500, 12500, 12500, 12500),
            (4264, 4265, 1067, 1066),
            (4300, 4244, 886, 1116),
        ],
    )
    def test_counts_faithful_at_corpus_scale(self, counts):
        train_pos, train_neg, test_pos, test_neg = counts

        def records(n_pos, n_neg):
            return [ReviewRecord("p", SentimentLabel.POSITIVE)] * n_pos + [
                ReviewRecord("n", SentimentLabel.NEGATIVE)
            ] * n_neg

        stats = split_stats(
            DatasetSplit(
                train=records(train_pos, train_neg), test=records(test_pos, test_neg)
            )
        )
        assert (
            stats.train_positive,
            stats.train_negative,
            stats.test_positive,
            stats.test_negative,
        ) == counts
        assert stats.train_total == train_pos + train_neg
        assert stats.test_total == test_pos + test_neg


class TestEncodedSerialization:
    def test_round_trip(self, tmp_path, toy_vocab):
        examples = [
            encode(["great", "movie"], toy_vocab, 8, label=1),
            encode([], toy_vocab, 8),
        ]
        path = tmp_path / "data.jsonl"
        save_encoded(path, examples)
        loaded = load_encoded(path)
        assert len(loaded) == 2
        for original, restored in zip(examples, loaded):
            np.testing.assert_array_equal(original.input_ids, restored.input_ids)
            np.testing.assert_array_equal(original.attention_mask, restored.attention_mask)
            np.testing.assert_array_equal(original.segment_ids, restored.segment_ids)
            assert original.label == restored.label

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text('{"input_ids": [1, 2]}\n')
        with pytest.raises(DataError, match="line 0"):
            load_encoded(path)

    def test_inconsistent_lengths(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text(
            '{"input_ids": [1, 2], "attention_mask": [1], "segment_ids": [0, 0], "label": 0}\n'
        )
        with pytest.raises(DataError, match="inconsistent"):
            load_encoded(path)
