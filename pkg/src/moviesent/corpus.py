"""Dataset ingestion and serialization.

Canonical on-disk review format: UTF-8 tab-separated ``label<TAB>text``, one
record per line, with backslash, tab, newline, and carriage return inside the
text escaped as ``\\\\``, ``\\t``, ``\\n``, ``\\r``. An adapter handles the
1-5 star score format (``score<TAB>text``), remapping 1-2 to negative, 4-5 to
positive, and discarding score 3. Encoded datasets serialize as JSON lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .encoding import EncodedExample
from .errors import DataError
from .labels import SentimentLabel


@dataclass
class ReviewRecord:
    text: str
    label: SentimentLabel
    source: str = ""


@dataclass(frozen=True)
class TsvSchema:
    label_column: int = 0
    text_column: int = 1


@dataclass
class DatasetSplit:
    train: list[ReviewRecord] = field(default_factory=list)
    test: list[ReviewRecord] = field(default_factory=list)


@dataclass(frozen=True)
class SplitStats:
    train_positive: int
    train_negative: int
    test_positive: int
    test_negative: int

    @property
    def train_total(self) -> int:
        return self.train_positive + self.train_negative

    @property
    def test_total(self) -> int:
        return self.test_positive + self.test_negative


def escape_text(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_text(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def parse_label(raw: str, where: str) -> SentimentLabel:
    value = raw.strip().lower()
    if value in ("0", "negative"):
        return SentimentLabel.NEGATIVE
    if value in ("1", "positive"):
        return SentimentLabel.POSITIVE
    raise DataError(f"unknown label value {raw!r} {where}")


def load_tsv(path, schema: TsvSchema = TsvSchema(), source: str = "") -> list[ReviewRecord]:
    """Parse a canonical review file, preserving record order."""
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"missing file: cannot read reviews {path!r}: {exc}") from exc
    needed = max(schema.label_column, schema.text_column) + 1
    records: list[ReviewRecord] = []
    for line_no, line in enumerate(lines):
        if not line.strip():
            continue
        columns = line.split("\t")
        if len(columns) < needed:
            raise DataError(
                f"malformed row at line {line_no} in {path!r}:"
                f" expected at least {needed} columns, got {len(columns)}"
            )
        where = f"at line {line_no} in {path!r}"
        label = parse_label(columns[schema.label_column], where)
        text = unescape_text(columns[schema.text_column])
        if not text.strip():
            raise DataError(f"empty review text {where}")
        records.append(ReviewRecord(text=text, label=label, source=source))
    return records


def save_tsv(path, records: list[ReviewRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(f"{int(record.label)}\t{escape_text(record.text)}\n")


def load_amazon_tsv(path) -> list[tuple[int, str]]:
    """Read the star-score adapter format ``score<TAB>text`` with scores 1..5."""
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"missing file: cannot read reviews {path!r}: {exc}") from exc
    rows: list[tuple[int, str]] = []
    for line_no, line in enumerate(lines):
        if not line.strip():
            continue
        columns = line.split("\t")
        if len(columns) < 2:
            raise DataError(f"malformed row at line {line_no} in {path!r}")
        try:
            score = int(columns[0].strip())
        except ValueError as exc:
            raise DataError(
                f"malformed score {columns[0]!r} at line {line_no} in {path!r}"
            ) from exc
        rows.append((score, unescape_text(columns[1])))
    return rows


def remap_amazon_scores(rows, source: str = "amazon") -> list[ReviewRecord]:
    """1-2 stars -> negative, 4-5 -> positive, 3 dropped; order preserved."""
    records: list[ReviewRecord] = []
    for index, (score, text) in enumerate(rows):
        if score not in (1, 2, 3, 4, 5):
            raise DataError(f"score {score!r} out of range 1..5 at row {index}")
        if score == 3:
            continue
        label = SentimentLabel.NEGATIVE if score <= 2 else SentimentLabel.POSITIVE
        records.append(ReviewRecord(text=text, label=label, source=source))
    return records


def split_stats(split: DatasetSplit) -> SplitStats:
    def tally(records):
        positive = sum(1 for r in records if r.label == SentimentLabel.POSITIVE)
        return positive, len(records) - positive

    train_pos, train_neg = tally(split.train)
    test_pos, test_neg = tally(split.test)
    return SplitStats(
        train_positive=train_pos,
        train_negative=train_neg,
        test_positive=test_pos,
        test_negative=test_neg,
    )


# --- encoded-dataset serialization (JSON lines) ----------------------------


def save_encoded(path, examples: list[EncodedExample]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            record = {
                "input_ids": example.input_ids.tolist(),
                "attention_mask": example.attention_mask.tolist(),
                "segment_ids": example.segment_ids.tolist(),
                "label": example.label,
            }
            handle.write(json.dumps(record) + "\n")


def load_encoded(path) -> list[EncodedExample]:
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"missing file: cannot read encoded data {path!r}: {exc}") from exc
    examples: list[EncodedExample] = []
    for line_no, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            example = EncodedExample(
                input_ids=np.asarray(record["input_ids"], dtype=np.int64),
                attention_mask=np.asarray(record["attention_mask"], dtype=np.int64),
                segment_ids=np.asarray(record["segment_ids"], dtype=np.int64),
                label=record.get("label"),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(
                f"malformed encoded example at line {line_no} in {path!r}: {exc}"
            ) from exc
        if not (
            len(example.input_ids)
            == len(example.attention_mask)
            == len(example.segment_ids)
        ):
            raise DataError(f"inconsistent vector lengths at line {line_no} in {path!r}")
        examples.append(example)
    return examples
