"""Joint internal-echo / posterior-acoustic classification.

The two descriptors are classified jointly over the three clinically
admissible combinations. A cystic (anechoic) interior is what produces
posterior enhancement, so "enhancement + homogeneous" is not a valid class
and cannot be constructed or emitted anywhere in this module.

Code layout: first bit = posterior acoustic (1 = no posterior features,
0 = enhancement); second bit = internal echo (1 = anechoic, 0 = homogeneous).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .lexicon import InternalEcho, PosteriorAcoustic
from .svm import OvrModel


class ForbiddenCombinationError(ValueError):
    """Enhancement together with a homogeneous echo is outside the label set."""


class FusedClass(enum.Enum):
    ENHANCEMENT_ANECHOIC = "01"
    NO_POSTERIOR_HOMOGENEOUS = "10"
    NO_POSTERIOR_ANECHOIC = "11"

    @classmethod
    def from_code(cls, code: str) -> "FusedClass":
        if code == "00":
            raise ForbiddenCombinationError(
                "code 00 (enhancement + homogeneous) is not an admissible class"
            )
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"unknown fused code {code!r}") from None

    @property
    def code(self) -> str:
        return self.value


FUSED_CODES = tuple(member.code for member in FusedClass)  # ("01", "10", "11")


def fuse_labels(echo: InternalEcho, posterior: PosteriorAcoustic) -> FusedClass:
    """Map a descriptor pair to its joint class; the 00 pair is rejected."""
    posterior_bit = "1" if posterior is PosteriorAcoustic.NO_POSTERIOR_FEATURES else "0"
    echo_bit = "1" if echo is InternalEcho.ANECHOIC else "0"
    return FusedClass.from_code(posterior_bit + echo_bit)


def unfuse(fused: FusedClass) -> tuple[InternalEcho, PosteriorAcoustic]:
    """Marginal descriptor pair of a joint class (inverse of fuse_labels)."""
    posterior = (
        PosteriorAcoustic.NO_POSTERIOR_FEATURES
        if fused.code[0] == "1"
        else PosteriorAcoustic.ENHANCEMENT
    )
    echo = InternalEcho.ANECHOIC if fused.code[1] == "1" else InternalEcho.HOMOGENEOUS
    return echo, posterior


@dataclass(frozen=True)
class FusedPrediction:
    """Joint class plus its marginals and normalized per-class scores."""

    fused: FusedClass
    internal_echo: InternalEcho
    posterior: PosteriorAcoustic
    scores: Mapping[FusedClass, float]

    def __post_init__(self):
        if set(self.scores) != set(FusedClass):
            raise ValueError("scores must cover exactly the three admissible classes")
        total = sum(self.scores.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"scores must sum to 1 (got {total!r})")
        echo, posterior = unfuse(self.fused)
        if echo is not self.internal_echo or posterior is not self.posterior:
            raise ValueError("marginals do not match the fused class")


def predict_fused(
    model: OvrModel, points: Sequence[Sequence[float]] | np.ndarray
) -> list[FusedPrediction]:
    """Classify points over the joint label space and derive the marginals.

    The model must be a 3-class one-vs-rest stack trained on the fused codes.
    Scores are the calibrated per-class scores normalized to sum to one; the
    argmax breaks ties toward the lowest code.
    """
    if tuple(model.classes) != FUSED_CODES:
        raise ValueError(f"model classes {model.classes!r} != fused codes {FUSED_CODES!r}")
    raw = model.score_matrix(points)
    out = []
    for row in raw:
        weights = row / row.sum()
        best = 0
        for j in range(1, len(FUSED_CODES)):
            if weights[j] > weights[best]:
                best = j
        fused = FusedClass.from_code(FUSED_CODES[best])
        echo, posterior = unfuse(fused)
        scores = {
            FusedClass.from_code(code): float(w) for code, w in zip(FUSED_CODES, weights)
        }
        out.append(
            FusedPrediction(fused=fused, internal_echo=echo, posterior=posterior, scores=scores)
        )
    return out


def predict_fused_one(model: OvrModel, x: Sequence[float]) -> FusedPrediction:
    return predict_fused(model, [x])[0]
