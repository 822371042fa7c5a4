"""Routing, rule-based preliminary drafts, rendering, and review application.

A case routes one of three ways: a normal conclusion (doctor/provider
supplied, never inferred here), an auto-drafted benign report, or a manual
malignant report. Benign drafts carry three predicted descriptors plus the
three fixed benign defaults (abrupt boundary, parallel orientation,
circumscribed margin). Review application is a pure function guarded by
optimistic versioning; the store owns persistence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Mapping

from .fusion import FusedPrediction
from .lexicon import (
    Boundary,
    Margin,
    Orientation,
    Shape,
    descriptor_term,
)
from .records import CaseRecord, Laterality, ReviewState, Triage, VersionConflictError


class Route(enum.Enum):
    NORMAL_CONCLUSION = "normal_conclusion"
    BENIGN_AUTO = "benign_auto"
    MALIGNANT_MANUAL = "malignant_manual"


class Provenance(enum.Enum):
    PREDICTED = "predicted"
    DEFAULT = "default"
    MANUAL_PLACEHOLDER = "manual_placeholder"


class Verdict(enum.Enum):
    NORMAL = "normal"
    BENIGN = "benign"
    MALIGNANT = "malignant"


FIELD_ORDER = (
    "shape",
    "internal_echo",
    "posterior_acoustic",
    "boundary",
    "orientation",
    "margin",
)

FIELD_LABELS = {
    "shape": "Shape",
    "internal_echo": "Internal echo",
    "posterior_acoustic": "Posterior acoustic",
    "boundary": "Boundary",
    "orientation": "Orientation",
    "margin": "Margin",
}

#: the fixed benign defaults, in field order
BENIGN_DEFAULTS = {
    "boundary": descriptor_term(Boundary.ABRUPT),
    "orientation": descriptor_term(Orientation.PARALLEL),
    "margin": descriptor_term(Margin.CIRCUMSCRIBED),
}

PLACEHOLDER_PROMPT = "[doctor to complete]"

_CONCLUSIONS = {
    Route.NORMAL_CONCLUSION: "normal findings, no lesion description required",
    Route.BENIGN_AUTO: "benign-appearing lesion, draft pending doctor review",
    Route.MALIGNANT_MANUAL: "suspected malignant lesion, descriptors require manual entry",
}


@dataclass(frozen=True)
class ReportField:
    name: str
    value: str
    provenance: Provenance

    def __post_init__(self):
        if self.name not in FIELD_ORDER:
            raise ValueError(f"unknown report field {self.name!r}")


@dataclass(frozen=True)
class PreliminaryReport:
    case_id: str
    route: Route
    verdict_score: float
    fields: tuple[ReportField, ...]
    laterality: Laterality
    created_at: int
    base_version: int

    def __post_init__(self):
        if not (0.0 <= self.verdict_score <= 1.0):
            raise ValueError("verdict_score outside [0, 1]")
        names = [f.name for f in self.fields]
        if self.route is Route.NORMAL_CONCLUSION:
            if self.fields:
                raise ValueError("a normal-conclusion report carries no descriptor fields")
            return
        if names != list(FIELD_ORDER):
            raise ValueError("report must carry the six descriptor fields in order")
        if self.route is Route.BENIGN_AUTO:
            for fld in self.fields[:3]:
                if fld.provenance is not Provenance.PREDICTED:
                    raise ValueError(f"{fld.name} must be predicted on the benign route")
            for fld in self.fields[3:]:
                if fld.provenance is not Provenance.DEFAULT:
                    raise ValueError(f"{fld.name} must be a fixed default on the benign route")
                if fld.value != BENIGN_DEFAULTS[fld.name]:
                    raise ValueError(f"{fld.name} default must be {BENIGN_DEFAULTS[fld.name]!r}")
        else:  # MALIGNANT_MANUAL
            for fld in self.fields:
                if fld.provenance is not Provenance.MANUAL_PLACEHOLDER:
                    raise ValueError("manual reports carry placeholder fields only")

    def field_value(self, name: str) -> str:
        for fld in self.fields:
            if fld.name == name:
                return fld.value
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "route": self.route.value,
            "verdict_score": self.verdict_score,
            "fields": [
                {"name": f.name, "value": f.value, "provenance": f.provenance.value}
                for f in self.fields
            ],
            "laterality": self.laterality.value,
            "created_at": self.created_at,
            "base_version": self.base_version,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "PreliminaryReport":
        return cls(
            case_id=doc["case_id"],
            route=Route(doc["route"]),
            verdict_score=float(doc["verdict_score"]),
            fields=tuple(
                ReportField(f["name"], f["value"], Provenance(f["provenance"]))
                for f in doc["fields"]
            ),
            laterality=Laterality(doc.get("laterality", "unspecified")),
            created_at=int(doc["created_at"]),
            base_version=int(doc["base_version"]),
        )


@dataclass(frozen=True)
class EditEntry:
    field: str
    old: str
    new: str
    at: int  # milliseconds since epoch


@dataclass(frozen=True)
class FinalReport:
    case_id: str
    route: Route
    verdict_score: float
    fields: tuple[ReportField, ...]  # preliminary values with provenance
    laterality: Laterality
    created_at: int
    base_version: int
    final_verdict: Verdict
    final_fields: tuple[tuple[str, str], ...]
    edit_log: tuple[EditEntry, ...]
    reviewer: str

    def __post_init__(self):
        prelim = {f.name: f.value for f in self.fields}
        finals = dict(self.final_fields)
        if set(prelim) != set(finals):
            raise ValueError("final values must cover exactly the preliminary fields")
        changed = {name for name in prelim if prelim[name] != finals[name]}
        logged = {entry.field for entry in self.edit_log}
        if changed != logged:
            raise ValueError("edit log must list exactly the fields that changed")
        if len(logged) != len(self.edit_log):
            raise ValueError("edit log must carry one entry per edited field")
        if self.final_verdict in (Verdict.BENIGN, Verdict.MALIGNANT):
            empty = [name for name, value in self.final_fields if not value]
            if self.route is not Route.NORMAL_CONCLUSION and empty:
                raise ValueError(f"fields left unfilled for a {self.final_verdict.value} report: {empty}")

    def final_value(self, name: str) -> str:
        for field_name, value in self.final_fields:
            if field_name == name:
                return value
        raise KeyError(name)

    def unchanged_fraction(self) -> tuple[int, int]:
        """(unchanged auto-filled fields, total auto-filled fields)."""
        return len(self.fields) - len(self.edit_log), len(self.fields)

    def to_dict(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "route": self.route.value,
            "verdict_score": self.verdict_score,
            "fields": [
                {"name": f.name, "value": f.value, "provenance": f.provenance.value}
                for f in self.fields
            ],
            "laterality": self.laterality.value,
            "created_at": self.created_at,
            "base_version": self.base_version,
            "final_verdict": self.final_verdict.value,
            "final_fields": [{"name": n, "value": v} for n, v in self.final_fields],
            "edit_log": [
                {"field": e.field, "old": e.old, "new": e.new, "at": e.at}
                for e in self.edit_log
            ],
            "reviewer": self.reviewer,
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "FinalReport":
        return cls(
            case_id=doc["case_id"],
            route=Route(doc["route"]),
            verdict_score=float(doc["verdict_score"]),
            fields=tuple(
                ReportField(f["name"], f["value"], Provenance(f["provenance"]))
                for f in doc["fields"]
            ),
            laterality=Laterality(doc.get("laterality", "unspecified")),
            created_at=int(doc["created_at"]),
            base_version=int(doc["base_version"]),
            final_verdict=Verdict(doc["final_verdict"]),
            final_fields=tuple((f["name"], f["value"]) for f in doc["final_fields"]),
            edit_log=tuple(
                EditEntry(e["field"], e["old"], e["new"], int(e["at"]))
                for e in doc["edit_log"]
            ),
            reviewer=doc["reviewer"],
        )


def triage_route(
    verdict_score: float,
    threshold: float = 0.5,
    doctor_override: Verdict | None = None,
) -> Route:
    """Route by score against the threshold; an explicit verdict always wins.

    The tie (score == threshold) goes to manual review: escalating a benign
    case costs doctor time, the reverse costs a missed finding.
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie strictly inside (0, 1)")
    if not (0.0 <= verdict_score <= 1.0):
        raise ValueError("verdict_score outside [0, 1]")
    if doctor_override is Verdict.NORMAL:
        return Route.NORMAL_CONCLUSION
    if doctor_override is Verdict.BENIGN:
        return Route.BENIGN_AUTO
    if doctor_override is Verdict.MALIGNANT:
        return Route.MALIGNANT_MANUAL
    return Route.MALIGNANT_MANUAL if verdict_score >= threshold else Route.BENIGN_AUTO


def generate_preliminary(
    case: CaseRecord,
    shape_pred: Shape | None,
    fused_pred: FusedPrediction | None,
    verdict_score: float,
    threshold: float = 0.5,
    doctor_override: Verdict | None = None,
    now_ms: int = 0,
) -> PreliminaryReport:
    """Assemble the preliminary report for a triaged case.

    A case triaged normal routes to the conclusion-only report; otherwise the
    score decides (or the explicit override). The benign route requires both
    predictions.
    """
    if case.triage is Triage.PENDING:
        raise ValueError("case has not been triaged")
    if case.review is ReviewState.FINALIZED:
        raise ValueError("case is already finalized")
    if doctor_override is None and case.triage is Triage.NORMAL:
        doctor_override = Verdict.NORMAL
    route = triage_route(verdict_score, threshold, doctor_override)

    if route is Route.NORMAL_CONCLUSION:
        fields: tuple[ReportField, ...] = ()
    elif route is Route.BENIGN_AUTO:
        if shape_pred is None or fused_pred is None:
            raise ValueError("benign route requires shape and fused predictions")
        fields = (
            ReportField("shape", descriptor_term(shape_pred), Provenance.PREDICTED),
            ReportField(
                "internal_echo", descriptor_term(fused_pred.internal_echo), Provenance.PREDICTED
            ),
            ReportField(
                "posterior_acoustic", descriptor_term(fused_pred.posterior), Provenance.PREDICTED
            ),
            ReportField("boundary", BENIGN_DEFAULTS["boundary"], Provenance.DEFAULT),
            ReportField("orientation", BENIGN_DEFAULTS["orientation"], Provenance.DEFAULT),
            ReportField("margin", BENIGN_DEFAULTS["margin"], Provenance.DEFAULT),
        )
    else:
        fields = tuple(
            ReportField(name, "", Provenance.MANUAL_PLACEHOLDER) for name in FIELD_ORDER
        )
    return PreliminaryReport(
        case_id=case.case_id,
        route=route,
        verdict_score=float(verdict_score),
        fields=fields,
        laterality=case.laterality,
        created_at=now_ms,
        base_version=case.version,
    )


def render_report(report: PreliminaryReport | FinalReport) -> str:
    """Deterministic plain-text rendering, one field per line, conclusion last."""
    final = isinstance(report, FinalReport)
    lines = ["Breast ultrasound screening report" + (" (final)" if final else "")]
    lines.append(f"Case: {report.case_id}")
    if report.laterality is not Laterality.UNSPECIFIED:
        lines.append(f"Laterality: {report.laterality.value}")
    if final:
        lines.append(f"Reviewed by: {report.reviewer}")
        values = {name: value for name, value in report.final_fields}
    else:
        values = {f.name: f.value for f in report.fields}
    for fld in report.fields:
        value = values[fld.name]
        lines.append(f"{FIELD_LABELS[fld.name]}: {value if value else PLACEHOLDER_PROMPT}")
    if final:
        lines.append(f"Conclusion: {report.final_verdict.value}")
    else:
        lines.append(f"Conclusion: {_CONCLUSIONS[report.route]}")
    return "\n".join(lines) + "\n"


def apply_review(
    prelim: PreliminaryReport,
    edits: Mapping[str, str],
    final_verdict: Verdict,
    base_version: int,
    current_version: int,
    reviewer: str,
    now_ms: int = 0,
) -> FinalReport:
    """Fold doctor edits into the preliminary report and produce the final one.

    base_version must match the case's current version (optimistic locking).
    Edits may only reference existing fields; a benign or malignant verdict
    requires every field to end up non-empty (placeholders must be typed in).
    Edits that restate the preliminary value are not logged as changes.
    """
    if base_version != current_version:
        raise VersionConflictError(prelim.case_id, base_version, current_version)
    known = {f.name for f in prelim.fields}
    unknown = sorted(set(edits) - known)
    if unknown:
        raise ValueError(f"edits reference unknown fields: {unknown}")

    final_fields = []
    edit_log = []
    for fld in prelim.fields:
        new_value = edits.get(fld.name, fld.value)
        final_fields.append((fld.name, new_value))
        if new_value != fld.value:
            edit_log.append(EditEntry(fld.name, fld.value, new_value, now_ms))
    if final_verdict in (Verdict.BENIGN, Verdict.MALIGNANT):
        missing = [name for name, value in final_fields if not value]
        if prelim.fields and missing:
            raise ValueError(f"missing mandatory field values: {missing}")

    return FinalReport(
        case_id=prelim.case_id,
        route=prelim.route,
        verdict_score=prelim.verdict_score,
        fields=prelim.fields,
        laterality=prelim.laterality,
        created_at=prelim.created_at,
        base_version=base_version,
        final_verdict=final_verdict,
        final_fields=tuple(final_fields),
        edit_log=tuple(edit_log),
        reviewer=reviewer,
    )
