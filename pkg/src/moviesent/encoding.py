"""Fixed-length model inputs: input ids, attention mask, segment ids.

Layout is ``[CLS] t1..tn [SEP] [PAD]*`` of total length ``max_len``. The
attention mask is 1 on [CLS], real tokens, and [SEP], and 0 exactly on the
padding suffix. Token sequences longer than ``max_len - 2`` keep their first
``max_len - 2`` pieces; [SEP] is always appended. Segment ids are all zero
for this single-sentence task.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .tokenizer import Vocabulary, tokenize_review


@dataclass(eq=False)
class EncodedExample:
    input_ids: np.ndarray  # (max_len,) int64
    attention_mask: np.ndarray  # (max_len,) int64, prefix of 1s then 0s
    segment_ids: np.ndarray  # (max_len,) int64
    label: int | None = None

    @property
    def max_len(self) -> int:
        return len(self.input_ids)

    @property
    def num_real(self) -> int:
        """Count of attended positions, including [CLS] and [SEP]."""
        return int(self.attention_mask.sum())


def encode(
    tokens: list[str],
    vocab: Vocabulary,
    max_len: int,
    label: int | None = None,
) -> EncodedExample:
    """Encode a WordPiece token sequence into a fixed-length example."""
    if max_len < 2:
        raise ConfigError(f"max_len must be at least 2, got {max_len}")
    kept = tokens[: max_len - 2]
    ids = [vocab.cls_id] + [vocab.id_of(t) for t in kept] + [vocab.sep_id]
    n_real = len(ids)
    ids.extend([vocab.pad_id] * (max_len - n_real))
    mask = np.zeros(max_len, dtype=np.int64)
    mask[:n_real] = 1
    return EncodedExample(
        input_ids=np.asarray(ids, dtype=np.int64),
        attention_mask=mask,
        segment_ids=np.zeros(max_len, dtype=np.int64),
        label=None if label is None else int(label),
    )


def batch_encode(
    reviews: list[tuple[str, int | None]],
    vocab: Vocabulary,
    max_len: int,
) -> list[EncodedExample]:
    """Tokenize and encode ``(text, label)`` pairs, preserving order."""
    encoded = []
    for index, (text, label) in enumerate(reviews):
        try:
            encoded.append(encode(tokenize_review(text, vocab), vocab, max_len, label=label))
        except ConfigError as exc:
            raise ConfigError(f"review {index}: {exc}") from exc
    return encoded


def decode_words(example: EncodedExample, vocab: Vocabulary) -> list[str]:
    """Reverse an encoding back to whole words.

    Reads the masked positions, drops [CLS]/[SEP], and merges ``##``
    continuation pieces onto their preceding piece. Faithful only when the
    original text produced no [UNK].
    """
    words: list[str] = []
    for position in range(example.num_real):
        token = vocab.token_of(int(example.input_ids[position]))
        if token in (vocab.token_of(vocab.cls_id), vocab.token_of(vocab.sep_id)):
            continue
        if token.startswith("##") and words:
            words[-1] += token[2:]
        else:
            words.append(token)
    return words
