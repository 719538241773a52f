"""Synthetic keyword corpus for end-to-end sanity checks.

Sixty-token vocabulary: the four special tokens, eight positive keywords,
eight negative keywords, and forty neutral fillers. Each generated review is
filler text with a few keywords from exactly one polarity, so the label is
fully determined by the keyword set and a working model must reach high
accuracy quickly.
"""

from __future__ import annotations

import numpy as np

from .corpus import DatasetSplit, ReviewRecord
from .labels import SentimentLabel
from .tokenizer import SPECIAL_TOKENS, Vocabulary, build_vocab

POSITIVE_WORDS = (
    "wonderful", "superb", "delightful", "uplifting",
    "brilliant", "charming", "masterful", "gripping",
)

NEGATIVE_WORDS = (
    "dreadful", "boring", "awful", "clumsy",
    "tedious", "lifeless", "grating", "hollow",
)

FILLER_WORDS = (
    "the", "a", "an", "movie", "film", "plot", "acting", "scene",
    "director", "story", "it", "was", "and", "with", "very", "quite",
    "rather", "really", "this", "that", "felt", "seemed", "script",
    "cast", "pacing", "ending", "dialogue", "characters", "overall",
    "somewhat", "is", "of", "in", "but", "to", "we", "saw", "night",
    "again", "honestly",
)


def toy_vocab_tokens() -> list[str]:
    return list(SPECIAL_TOKENS) + list(POSITIVE_WORDS) + list(NEGATIVE_WORDS) + list(FILLER_WORDS)


def toy_vocab() -> Vocabulary:
    return build_vocab(toy_vocab_tokens())


def _make_review(rng: np.random.Generator, label: SentimentLabel) -> ReviewRecord:
    keywords = POSITIVE_WORDS if label == SentimentLabel.POSITIVE else NEGATIVE_WORDS
    n_keywords = int(rng.integers(3, 6))
    n_fillers = int(rng.integers(5, 10))
    words = [keywords[i] for i in rng.integers(0, len(keywords), size=n_keywords)]
    words += [FILLER_WORDS[i] for i in rng.integers(0, len(FILLER_WORDS), size=n_fillers)]
    order = rng.permutation(len(words))
    return ReviewRecord(
        text=" ".join(words[i] for i in order), label=label, source="toy"
    )


def generate_toy_corpus(
    n_train: int = 500, n_test: int = 100, seed: int = 0
) -> DatasetSplit:
    """Balanced train/test reviews whose sentiment is decided by keyword polarity."""
    rng = np.random.default_rng(seed)

    def batch(count):
        records = []
        for i in range(count):
            label = SentimentLabel.POSITIVE if i % 2 == 0 else SentimentLabel.NEGATIVE
            records.append(_make_review(rng, label))
        order = rng.permutation(count)
        return [records[i] for i in order]

    return DatasetSplit(train=batch(n_train), test=batch(n_test))


def write_toy_vocab(path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for token in toy_vocab_tokens():
            handle.write(token + "\n")
