"""Synthetic judge answering comparison requests from a ground-truth map.

Stands in for the human expert during headless runs: compares two
candidates by their (optionally noise-perturbed) scalar values, declares a
tie inside a configurable band, and grades its own confidence from the
margin.  One oracle instance owns one seeded random stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .judgments import Confidence, Judgment, Outcome, Source


@dataclass
class OracleConfig:
    tie_band: float = 0.05          # in normalized scalar units
    noise_std: float = 0.0
    margin_weak: float = 0.1
    margin_strong: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.tie_band < 0:
            raise ConfigurationError("tie band must be >= 0")
        if self.noise_std < 0:
            raise ConfigurationError("noise std must be >= 0")
        if not self.margin_weak < self.margin_strong:
            raise ConfigurationError(
                f"need margin_weak < margin_strong, got "
                f"{self.margin_weak} >= {self.margin_strong}")

    def to_dict(self) -> dict:
        return {"tie_band": self.tie_band, "noise_std": self.noise_std,
                "margin_weak": self.margin_weak,
                "margin_strong": self.margin_strong, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "OracleConfig":
        return cls(**d)


def _margin_confidence(margin: float, cfg: OracleConfig) -> Confidence:
    if margin >= cfg.margin_strong:
        return Confidence.STRONG
    if margin < cfg.margin_weak:
        return Confidence.WEAK
    return Confidence.MODERATE


def compare_noisy_scalars(a_id: int, b_id: int, a_noisy: float, b_noisy: float,
                          cfg: OracleConfig) -> Judgment:
    """Pure comparison of two (already noise-perturbed) scalars.

    Inside the tie band the outcome is TIE with STRONG confidence when the
    gap is within half the band, MODERATE otherwise; outside it, the larger
    scalar wins with confidence graded by the raw margin.  Exactly
    antisymmetric: swapping the two (id, scalar) pairs mirrors the outcome
    and keeps the confidence.
    """
    gap = abs(a_noisy - b_noisy)
    if gap <= cfg.tie_band:
        conf = (Confidence.STRONG if gap <= cfg.tie_band / 2.0
                else Confidence.MODERATE)
        return Judgment(a_id, b_id, Outcome.TIE, conf, Source.ORACLE)
    outcome = Outcome.A_PREFERRED if a_noisy > b_noisy else Outcome.B_PREFERRED
    return Judgment(a_id, b_id, outcome, _margin_confidence(gap, cfg),
                    Source.ORACLE)


class Oracle:
    """Ground-truth-map judge with an owned seeded noise stream."""

    def __init__(self, scalar_map: np.ndarray, cfg: OracleConfig):
        self.scalars = np.asarray(scalar_map, dtype=np.float64).ravel()
        if not np.all(np.isfinite(self.scalars)):
            raise ConfigurationError("oracle scalar map must be finite")
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.last_noisy: tuple | None = None
        self.last_audit: list | None = None     # noisy scalars of the last batch

    def compare_ids(self, a_id: int, b_id: int) -> Judgment:
        a = float(self.scalars[a_id])
        b = float(self.scalars[b_id])
        if self.cfg.noise_std > 0:
            a += self.cfg.noise_std * float(self.rng.standard_normal())
            b += self.cfg.noise_std * float(self.rng.standard_normal())
        self.last_noisy = (a, b)
        return compare_noisy_scalars(a_id, b_id, a, b, self.cfg)

    def judge(self, requests) -> list:
        """Answer a batch of (a, b) comparison requests in order."""
        out = []
        audit = []
        for a, b in requests:
            out.append(self.compare_ids(a, b))
            audit.append(self.last_noisy)
        self.last_audit = audit
        return out

    def state_dict(self) -> dict:
        return {"rng": self.rng.bit_generator.state}

    def load_state_dict(self, d: dict) -> None:
        self.rng.bit_generator.state = d["rng"]


def oracle_compare(a_scalar: float, b_scalar: float, cfg: OracleConfig,
                   rng: np.random.Generator) -> Judgment:
    """One-shot comparison drawing noise from the provided stream."""
    a, b = float(a_scalar), float(b_scalar)
    if cfg.noise_std > 0:
        a += cfg.noise_std * float(rng.standard_normal())
        b += cfg.noise_std * float(rng.standard_normal())
    return compare_noisy_scalars(0, 1, a, b, cfg)
