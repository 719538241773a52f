"""Label domains: the binary sentiment classes and the three-way polarity verdict."""

from enum import Enum, IntEnum


class SentimentLabel(IntEnum):
    """Binary sentiment class of a single review. Integer values double as class indices."""

    NEGATIVE = 0
    POSITIVE = 1


class Verdict(Enum):
    """Dominating sentiment of a collection of predictions."""

    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    def __str__(self) -> str:
        return self.value
