"""Comparison outcomes, expert judgments, and their training-record form."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InputError


class Outcome(Enum):
    A_PREFERRED = "A"
    B_PREFERRED = "B"
    TIE = "TIE"


class Confidence(Enum):
    WEAK = "WEAK"
    MODERATE = "MODERATE"
    STRONG = "STRONG"


class Source(Enum):
    ORACLE = "ORACLE"
    HUMAN = "HUMAN"


# Numerical training weight for each confidence level.  Configurable at the
# session level; these defaults give a roughly geometric spread.
DEFAULT_CONFIDENCE_WEIGHTS = {
    Confidence.WEAK: 0.25,
    Confidence.MODERATE: 0.5,
    Confidence.STRONG: 1.0,
}


@dataclass(frozen=True)
class Judgment:
    """One answer to a comparison request, from the oracle or a human."""

    a: int
    b: int
    outcome: Outcome
    confidence: Confidence
    source: Source = Source.ORACLE

    def __post_init__(self):
        if self.a == self.b:
            raise InputError("judgment pair must reference two distinct candidates")

    def to_dict(self) -> dict:
        return {
            "a": int(self.a),
            "b": int(self.b),
            "outcome": self.outcome.value,
            "confidence": self.confidence.value,
            "source": self.source.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Judgment":
        return cls(int(d["a"]), int(d["b"]), Outcome(d["outcome"]),
                   Confidence(d["confidence"]), Source(d.get("source", "ORACLE")))


@dataclass(frozen=True)
class ComparisonRecord:
    """A judgment reduced to what the likelihood consumes: ids, outcome, weight."""

    a: int
    b: int
    outcome: Outcome
    weight: float = 1.0

    def __post_init__(self):
        if self.a == self.b:
            raise InputError("comparison must reference two distinct candidates")
        if not (0.0 < self.weight <= 1.0):
            raise InputError(f"comparison weight must lie in (0, 1], got {self.weight}")

    def to_dict(self) -> dict:
        return {"a": int(self.a), "b": int(self.b),
                "outcome": self.outcome.value, "weight": float(self.weight)}

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonRecord":
        return cls(int(d["a"]), int(d["b"]), Outcome(d["outcome"]), float(d["weight"]))


def record_from_judgment(j: Judgment, weights=None) -> ComparisonRecord:
    """Map a judgment's confidence to its numerical training weight."""
    table = DEFAULT_CONFIDENCE_WEIGHTS if weights is None else weights
    return ComparisonRecord(j.a, j.b, j.outcome, table[j.confidence])
