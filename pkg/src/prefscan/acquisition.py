"""Pair selection for the next measurements: UCB scores plus request building.

Each iteration selects two new grid locations and issues up to three
comparison requests: the pair against each other, and each member against
the current highest-utility measured point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CandidatesExhausted, ConfigurationError, InputError, StateError


class Strategy(Enum):
    UCB_PAIR = "UCB_PAIR"
    UCB_PLUS_MAX_VARIANCE = "UCB_PLUS_MAX_VARIANCE"


@dataclass(frozen=True)
class BetaSegment:
    first_step: int
    last_step: int
    beta: float


@dataclass
class AcquisitionConfig:
    """Exploration schedule and pairing strategy.

    The beta schedule is a list of inclusive 1-based step ranges; ranges must
    not overlap and must leave no gaps over the steps they span.
    """

    beta_schedule: list = field(default_factory=lambda: [BetaSegment(1, 10 ** 9, 5.0)])
    strategy: Strategy = Strategy.UCB_PAIR
    exclude_measured: bool = True

    def __post_init__(self):
        segs = sorted(self.beta_schedule, key=lambda s: s.first_step)
        if not segs:
            raise ConfigurationError("beta schedule must not be empty")
        for s in segs:
            if s.beta < 0:
                raise ConfigurationError(f"beta must be >= 0, got {s.beta}")
            if s.first_step > s.last_step or s.first_step < 1:
                raise ConfigurationError(
                    f"bad schedule range [{s.first_step}, {s.last_step}]")
        for prev, cur in zip(segs, segs[1:]):
            if cur.first_step <= prev.last_step:
                raise ConfigurationError("beta schedule ranges overlap")
            if cur.first_step != prev.last_step + 1:
                raise ConfigurationError(
                    f"beta schedule has a gap between step {prev.last_step} "
                    f"and {cur.first_step}")
        self.beta_schedule = segs

    def beta_for_step(self, step: int) -> float:
        for s in self.beta_schedule:
            if s.first_step <= step <= s.last_step:
                return s.beta
        raise ConfigurationError(f"beta schedule does not cover step {step}")

    def covers(self, n_steps: int) -> bool:
        return (self.beta_schedule[0].first_step == 1
                and self.beta_schedule[-1].last_step >= n_steps)

    def to_dict(self) -> dict:
        return {
            "beta_schedule": [{"steps": [s.first_step, s.last_step],
                               "beta": s.beta} for s in self.beta_schedule],
            "strategy": self.strategy.value,
            "exclude_measured": self.exclude_measured,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AcquisitionConfig":
        segs = [BetaSegment(int(e["steps"][0]), int(e["steps"][1]),
                            float(e["beta"]))
                for e in d.get("beta_schedule", [])]
        if not segs:
            segs = [BetaSegment(1, 10 ** 9, 5.0)]
        return cls(beta_schedule=segs,
                   strategy=Strategy(d.get("strategy", "UCB_PAIR")),
                   exclude_measured=bool(d.get("exclude_measured", True)))


@dataclass(frozen=True)
class SelectionResult:
    first: int
    second: int
    requests: tuple   # distinct unordered id pairs
    beta: float


def ucb_scores(mean: np.ndarray, variance: np.ndarray, beta: float) -> np.ndarray:
    """score_i = mean_i + sqrt(beta) * sqrt(variance_i)."""
    mean = np.asarray(mean, dtype=np.float64)
    variance = np.asarray(variance, dtype=np.float64)
    if mean.shape != variance.shape:
        raise InputError("mean and variance must have the same shape")
    if np.any(variance < 0):
        raise InputError("variance must be non-negative")
    if beta < 0:
        raise InputError("beta must be >= 0")
    return mean + np.sqrt(beta) * np.sqrt(variance)


def _best_excluding(score: np.ndarray, allowed: np.ndarray) -> int:
    """Argmax over allowed ids, ties broken toward the lowest id."""
    idx = np.flatnonzero(allowed)
    sub = score[idx]
    return int(idx[np.argmax(sub)])   # argmax returns the first maximum


def current_best(mean: np.ndarray, measured) -> int:
    """Highest-posterior-mean measured candidate (lowest id on ties)."""
    ids = sorted(int(i) for i in measured)
    if not ids:
        raise StateError("no measured candidates yet")
    sub = np.asarray(mean, dtype=np.float64)[ids]
    return ids[int(np.argmax(sub))]


def build_comparison_requests(first: int, second: int, best: int):
    """The step's comparison set: (first,second), (first,best), (second,best).

    Pairs that would compare a candidate with itself are dropped, so the
    result has three entries when best is a third point and one otherwise.
    """
    if first == second:
        raise InputError("selected pair must contain two distinct candidates")
    seen = set()
    out = []
    for a, b in ((first, second), (first, best), (second, best)):
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        out.append((a, b))
    return tuple(out)


def select_pair(mean: np.ndarray, variance: np.ndarray, cfg: AcquisitionConfig,
                measured, step: int) -> SelectionResult:
    """Pick the two candidates to measure at this step.

    UCB_PAIR takes the two highest UCB scores among unmeasured candidates;
    UCB_PLUS_MAX_VARIANCE takes the UCB argmax plus the variance argmax.
    Raises CandidatesExhausted when fewer than two unmeasured remain.
    """
    mean = np.asarray(mean, dtype=np.float64)
    variance = np.asarray(variance, dtype=np.float64)
    beta = cfg.beta_for_step(step)
    allowed = np.ones(mean.size, dtype=bool)
    if cfg.exclude_measured:
        midx = [int(i) for i in measured if 0 <= int(i) < mean.size]
        allowed[midx] = False
    if int(np.count_nonzero(allowed)) < 2:
        raise CandidatesExhausted(
            f"{int(np.count_nonzero(allowed))} unmeasured candidates remain")

    scores = ucb_scores(mean, variance, beta)
    first = _best_excluding(scores, allowed)
    remaining = allowed.copy()
    remaining[first] = False
    if cfg.strategy is Strategy.UCB_PAIR:
        second = _best_excluding(scores, remaining)
    else:
        second = _best_excluding(variance, remaining)

    requests = ()
    if measured:
        best = current_best(mean, measured)
        requests = build_comparison_requests(first, second, best)
    else:
        requests = build_comparison_requests(first, second, first)
    return SelectionResult(first=first, second=second, requests=requests,
                           beta=beta)
