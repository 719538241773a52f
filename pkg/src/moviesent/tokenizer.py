"""Vocabulary loading and WordPiece tokenization of raw review text.

The vocabulary is a plain text file, one token per line, where the 0-based
line number is the token id. Tokenization lowercases, strips accents, splits
punctuation into standalone tokens, and then segments each word greedily
against the vocabulary, longest match first. Continuation pieces carry the
``##`` prefix; words with no valid segmentation become ``[UNK]``.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import DataError

CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"

SPECIAL_TOKENS = (CLS_TOKEN, SEP_TOKEN, PAD_TOKEN, UNK_TOKEN)

# Words longer than this are mapped to [UNK] without attempting segmentation.
MAX_CHARS_PER_WORD = 100


@dataclass(frozen=True)
class Vocabulary:
    """Token-string <-> integer-id bijection with the four special tokens.

    ``tokens[i]`` is the token with id ``i``; ids are dense ``0..len-1``.
    """

    tokens: tuple[str, ...]
    _ids: dict[str, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def id_of(self, token: str) -> int:
        """Id of ``token``, falling back to the [UNK] id for unknown strings."""
        return self._ids.get(token, self._ids[UNK_TOKEN])

    def token_of(self, token_id: int) -> str:
        return self.tokens[token_id]

    @property
    def cls_id(self) -> int:
        return self._ids[CLS_TOKEN]

    @property
    def sep_id(self) -> int:
        return self._ids[SEP_TOKEN]

    @property
    def pad_id(self) -> int:
        return self._ids[PAD_TOKEN]

    @property
    def unk_id(self) -> int:
        return self._ids[UNK_TOKEN]


def load_vocab(path) -> Vocabulary:
    """Load a one-token-per-line vocabulary file.

    Raises DataError for a missing file, a duplicate or empty token (reported
    with its line number), or an absent special token.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().split("\n")
    except OSError as exc:
        raise DataError(f"missing file: cannot read vocabulary {path!r}: {exc}") from exc
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline

    ids: dict[str, int] = {}
    for line_no, raw in enumerate(lines):
        token = raw.rstrip("\r")
        if token == "":
            raise DataError(f"empty token at line {line_no} in {path!r}")
        if token in ids:
            raise DataError(f"duplicate token at line {line_no} in {path!r}: {token!r}")
        ids[token] = line_no
    for special in SPECIAL_TOKENS:
        if special not in ids:
            raise DataError(f"missing special token {special!r} in {path!r}")
    return Vocabulary(tokens=tuple(ids), _ids=ids)


def build_vocab(tokens) -> Vocabulary:
    """Build a Vocabulary from an ordered token iterable (same rules as load_vocab)."""
    ids: dict[str, int] = {}
    for index, token in enumerate(tokens):
        if token in ids:
            raise DataError(f"duplicate token at line {index}: {token!r}")
        ids[token] = index
    for special in SPECIAL_TOKENS:
        if special not in ids:
            raise DataError(f"missing special token {special!r}")
    return Vocabulary(tokens=tuple(ids), _ids=ids)


def _is_whitespace(char: str) -> bool:
    if char in (" ", "\t", "\n", "\r"):
        return True
    return unicodedata.category(char) == "Zs"


def _is_control(char: str) -> bool:
    if char in ("\t", "\n", "\r"):
        return False
    return unicodedata.category(char).startswith("C")


def _is_punctuation(char: str) -> bool:
    # ASCII symbol ranges count as punctuation even where Unicode disagrees
    # ("$", "^", "`"), matching the uncased convention.
    cp = ord(char)
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(char).startswith("P")


def _strip_accents(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if unicodedata.category(ch) != "Mn")


def basic_tokenize(text: str) -> list[str]:
    """Lowercase, strip accents, and split ``text`` into words and standalone punctuation."""
    cleaned = []
    for char in text:
        if ord(char) == 0 or ord(char) == 0xFFFD or _is_control(char):
            continue
        cleaned.append(" " if _is_whitespace(char) else char)
    words = "".join(cleaned).split()

    output: list[str] = []
    for word in words:
        word = _strip_accents(word.lower())
        current = ""
        for char in word:
            if _is_punctuation(char):
                if current:
                    output.append(current)
                    current = ""
                output.append(char)
            else:
                current += char
        if current:
            output.append(current)
    return output


def wordpiece_tokenize(word: str, vocab: Vocabulary) -> list[str]:
    """Segment a single word greedily against ``vocab``, longest match first.

    The first piece is unprefixed; later pieces carry ``##``. Returns
    ``[UNK]`` when no full segmentation exists or the word is too long.
    """
    if len(word) > MAX_CHARS_PER_WORD:
        return [UNK_TOKEN]
    pieces: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        piece = None
        while start < end:
            candidate = word[start:end]
            if start > 0:
                candidate = "##" + candidate
            if candidate in vocab:
                piece = candidate
                break
            end -= 1
        if piece is None:
            return [UNK_TOKEN]
        pieces.append(piece)
        start = end
    return pieces


def tokenize_review(text: str, vocab: Vocabulary) -> list[str]:
    """Full text -> WordPiece pipeline: basic_tokenize then per-word segmentation."""
    tokens: list[str] = []
    for word in basic_tokenize(text):
        tokens.extend(wordpiece_tokenize(word, vocab))
    return tokens
