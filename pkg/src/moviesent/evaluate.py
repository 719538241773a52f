"""Batch prediction and the accuracy metric."""

from __future__ import annotations


from .encoding import EncodedExample
from .errors import DataError
from .labels import SentimentLabel
from .model import SentimentModel


def predict(examples: list[EncodedExample], model: SentimentModel) -> list[SentimentLabel]:
    """Argmax class per example, in input order. Ties resolve to NEGATIVE."""
    logits = model.logits(examples)
    return [SentimentLabel(int(k)) for k in logits.argmax(axis=1)]


def accuracy(predictions, gold) -> float:
    """Percentage of matching positions: 100 * correct / total."""
    if len(predictions) != len(gold):
        raise DataError(
            f"prediction/gold length mismatch: {len(predictions)} != {len(gold)}"
        )
    if not predictions:
        raise DataError("cannot compute accuracy of an empty prediction vector")
    correct = sum(int(p) == int(g) for p, g in zip(predictions, gold))
    return 100.0 * correct / len(predictions)


def save_predictions(path, labels) -> None:
    """One line per review: ``index<TAB>label`` with label negative|positive."""
    with open(path, "w", encoding="utf-8") as handle:
        for index, label in enumerate(labels):
            name = "positive" if int(label) == SentimentLabel.POSITIVE else "negative"
            handle.write(f"{index}\t{name}\n")


def load_predictions(path) -> list[str]:
    """Read a prediction file back as label names (neutral allowed for ternary use)."""
    labels: list[str] = []
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"missing file: cannot read predictions {path!r}: {exc}") from exc
    for line_no, line in enumerate(lines):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"malformed prediction at line {line_no} in {path!r}")
        name = parts[1].strip().lower()
        if name not in ("negative", "positive", "neutral"):
            raise DataError(f"unknown label {parts[1]!r} at line {line_no} in {path!r}")
        labels.append(name)
    return labels
