"""Case records and their validation / state machine rules.

A case advances review state only forward (unreviewed -> preliminary_issued
-> finalized) and its version increases by exactly one on every mutation.
Records are immutable values; mutation helpers return a bumped copy and the
store is the only place that persists them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Any, Mapping


class ValidationError(ValueError):
    """An ingestion payload or record state violates a domain invariant."""


class VersionConflictError(RuntimeError):
    """Optimistic-concurrency check failed: the stored version moved on."""

    def __init__(self, case_id: str, expected: int, current: int):
        super().__init__(
            f"version conflict on case {case_id!r}: expected {expected}, current {current}"
        )
        self.case_id = case_id
        self.expected = expected
        self.current = current


class Laterality(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    UNSPECIFIED = "unspecified"


class Triage(enum.Enum):
    PENDING = "pending"
    NORMAL = "normal"
    LESION = "lesion"


class ReviewState(enum.Enum):
    UNREVIEWED = "unreviewed"
    PRELIMINARY_ISSUED = "preliminary_issued"
    FINALIZED = "finalized"


_REVIEW_ORDER = (ReviewState.UNREVIEWED, ReviewState.PRELIMINARY_ISSUED, ReviewState.FINALIZED)

FEATURE_PROVENANCES = ("external_embedding", "synthetic")

#: external score keys a provider may attach to a case
SCORE_KEYS = ("malignancy", "shape", "internal_echo", "posterior_acoustic")


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-length embedding of one lesion image plus its provenance tag."""

    values: tuple[float, ...]
    provenance: str = "external_embedding"

    def __post_init__(self):
        if not self.values:
            raise ValidationError("feature vector must be non-empty")
        if any(not math.isfinite(v) for v in self.values):
            raise ValidationError("feature vector contains a non-finite entry")
        if self.provenance not in FEATURE_PROVENANCES:
            raise ValidationError(f"unknown feature provenance {self.provenance!r}")

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    feature_vector: FeatureVector
    laterality: Laterality = Laterality.UNSPECIFIED
    external_scores: Mapping[str, float] | None = None
    triage: Triage = Triage.PENDING
    review: ReviewState = ReviewState.UNREVIEWED
    version: int = 1

    def __post_init__(self):
        if not self.case_id:
            raise ValidationError("case_id must be non-empty")
        if self.version < 1:
            raise ValidationError("version starts at 1")
        if self.external_scores is not None:
            for key, score in self.external_scores.items():
                if key not in SCORE_KEYS:
                    raise ValidationError(f"unknown external score key {key!r}")
                if not (isinstance(score, (int, float)) and 0.0 <= score <= 1.0):
                    raise ValidationError(f"external score {key}={score!r} outside [0, 1]")

    def with_triage(self, triage: Triage) -> "CaseRecord":
        return replace(self, triage=triage, version=self.version + 1)

    def with_laterality(self, laterality: Laterality) -> "CaseRecord":
        return replace(self, laterality=laterality, version=self.version + 1)

    def with_review(self, review: ReviewState) -> "CaseRecord":
        """Advance the review state by exactly one step; anything else is an error."""
        current = _REVIEW_ORDER.index(self.review)
        target = _REVIEW_ORDER.index(review)
        if target != current + 1:
            raise ValidationError(
                f"review state cannot move {self.review.value} -> {review.value}"
            )
        return replace(self, review=review, version=self.version + 1)

    def to_dict(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "laterality": self.laterality.value,
            "features": list(self.feature_vector.values),
            "feature_provenance": self.feature_vector.provenance,
            "external_scores": dict(self.external_scores) if self.external_scores else None,
            "triage": self.triage.value,
            "review": self.review.value,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "CaseRecord":
        return cls(
            case_id=doc["case_id"],
            feature_vector=FeatureVector(
                tuple(float(v) for v in doc["features"]),
                doc.get("feature_provenance", "external_embedding"),
            ),
            laterality=Laterality(doc.get("laterality", "unspecified")),
            external_scores=doc.get("external_scores") or None,
            triage=Triage(doc.get("triage", "pending")),
            review=ReviewState(doc.get("review", "unreviewed")),
            version=int(doc.get("version", 1)),
        )


def validate_case(raw: Mapping[str, Any], dim: int) -> CaseRecord:
    """Validate a raw ingestion payload into a fresh CaseRecord.

    The result is always version 1, triage pending, review unreviewed.
    Raises ValidationError for a wrong feature dimension, non-finite feature
    entries, or external scores outside [0, 1].
    """
    if "case_id" not in raw or "features" not in raw:
        raise ValidationError("payload must carry case_id and features")
    features = raw["features"]
    try:
        values = tuple(float(v) for v in features)
    except (TypeError, ValueError):
        raise ValidationError("features must be a numeric sequence") from None
    if len(values) != dim:
        raise ValidationError(f"feature dimension {len(values)} != declared {dim}")
    vector = FeatureVector(values, raw.get("feature_provenance", "external_embedding"))
    laterality = Laterality(raw.get("laterality", "unspecified"))
    return CaseRecord(
        case_id=str(raw["case_id"]),
        feature_vector=vector,
        laterality=laterality,
        external_scores=raw.get("external_scores") or None,
        triage=Triage.PENDING,
        review=ReviewState.UNREVIEWED,
        version=1,
    )
