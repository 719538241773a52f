"""Overall-polarity computation: the dominating sentiment of a prediction vector.

A naive majority vote is too eager: 52 negatives against 50 positives should
not brand a movie as disliked. Instead, a class wins only when it exceeds the
other by a ratio threshold (1.2x for binary input, 1.5x for ternary input);
ternary input is additionally neutral outright when neutrals exceed 85% of
the total. Anything else is a tie, reported as neutral.

Thresholds are compared with exact integer cross-multiplication, so verdicts
are stable at the boundaries regardless of floating-point representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError, DataError
from .labels import SentimentLabel, Verdict


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # exact decimal reading, not the binary expansion of the float
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class PolarityCounts:
    positives: int
    negatives: int
    neutrals: int = 0

    def __post_init__(self) -> None:
        for name in ("positives", "negatives", "neutrals"):
            if getattr(self, name) < 0:
                raise DataError(f"{name} count must be non-negative")

    @property
    def total(self) -> int:
        return self.positives + self.negatives + self.neutrals


@dataclass(frozen=True)
class AggregatorConfig:
    binary_coefficient: Fraction = Fraction(6, 5)  # 1.2
    ternary_coefficient: Fraction = Fraction(3, 2)  # 1.5
    neutral_fraction: Fraction = Fraction(17, 20)  # 0.85

    def __post_init__(self) -> None:
        for name in ("binary_coefficient", "ternary_coefficient", "neutral_fraction"):
            object.__setattr__(self, name, _as_fraction(getattr(self, name)))
        if self.binary_coefficient <= 1 or self.ternary_coefficient <= 1:
            raise ConfigError("dominance coefficients must exceed 1")
        if not 0 < self.neutral_fraction < 1:
            raise ConfigError("neutral_fraction must lie strictly between 0 and 1")


DEFAULT_AGGREGATOR = AggregatorConfig()

_LABEL_NAMES = {
    "negative": "negatives",
    "positive": "positives",
    "neutral": "neutrals",
}


def count_labels(labels) -> PolarityCounts:
    """Tally a vector of labels: SentimentLabel / 0 / 1, Verdict, or label names."""
    counts = {"positives": 0, "negatives": 0, "neutrals": 0}
    for label in labels:
        if isinstance(label, Verdict):
            key = _LABEL_NAMES[label.value]
        elif isinstance(label, str):
            name = label.strip().lower()
            if name not in _LABEL_NAMES:
                raise DataError(f"unknown label {label!r}")
            key = _LABEL_NAMES[name]
        else:
            value = int(label)
            if value not in (0, 1):
                raise DataError(f"unknown label value {label!r}")
            key = "positives" if value == SentimentLabel.POSITIVE else "negatives"
        counts[key] += 1
    return PolarityCounts(**counts)


def _exceeds(left: int, right: int, coefficient: Fraction) -> bool:
    """left > coefficient * right, exactly."""
    return left * coefficient.denominator > coefficient.numerator * right


def overall_polarity_binary(
    counts: PolarityCounts, config: AggregatorConfig = DEFAULT_AGGREGATOR
) -> Verdict:
    """Dominating sentiment of a binary prediction vector.

    Positive when positives > 1.2x negatives, negative when negatives >
    1.2x positives, neutral otherwise.
    """
    if counts.neutrals:
        raise DataError(
            f"binary aggregation expects zero neutral counts, got {counts.neutrals}"
        )
    if _exceeds(counts.positives, counts.negatives, config.binary_coefficient):
        return Verdict.POSITIVE
    if _exceeds(counts.negatives, counts.positives, config.binary_coefficient):
        return Verdict.NEGATIVE
    return Verdict.NEUTRAL


def overall_polarity_ternary(
    counts: PolarityCounts, config: AggregatorConfig = DEFAULT_AGGREGATOR
) -> Verdict:
    """Dominating sentiment of a three-class prediction vector.

    Neutral outright when neutrals exceed 85% of the total; otherwise a class
    wins only when it exceeds 1.5x the other, and ties are neutral.
    """
    if counts.total < 1:
        raise DataError("ternary aggregation requires at least one prediction")
    fraction = config.neutral_fraction
    if counts.neutrals * fraction.denominator > fraction.numerator * counts.total:
        return Verdict.NEUTRAL
    if _exceeds(counts.positives, counts.negatives, config.ternary_coefficient):
        return Verdict.POSITIVE
    if _exceeds(counts.negatives, counts.positives, config.ternary_coefficient):
        return Verdict.NEGATIVE
    return Verdict.NEUTRAL
