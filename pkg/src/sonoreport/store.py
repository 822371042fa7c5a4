"""Durable case/report store: append-only JSON log with optimistic versioning.

One event per line in a single log file; an in-memory index is rebuilt by
replaying the log on open, and every commit is flushed and fsynced before the
call returns. Writes are serialized under one lock; readers only ever see
committed state. A version check guards every mutation, so two racing
reviews of the same case resolve to exactly one winner.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any

from .records import CaseRecord, ReviewState, VersionConflictError
from .reports import FinalReport, PreliminaryReport


class UnknownCaseError(KeyError):
    def __init__(self, case_id: str):
        super().__init__(case_id)
        self.case_id = case_id

    def __str__(self) -> str:
        return f"unknown case {self.case_id!r}"


class CaseStore:
    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._lock = threading.Lock()
        self._cases: dict[str, CaseRecord] = {}
        self._preliminaries: dict[str, PreliminaryReport] = {}
        self._finals: dict[str, FinalReport] = {}
        self._path.parent.mkdir(parents=True, exist_ok=True)
        if self._path.exists():
            self._replay()
        self._handle = open(self._path, "a", encoding="utf-8")

    # -- log plumbing -------------------------------------------------------

    def _replay(self) -> None:
        with open(self._path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                self._apply(json.loads(line))

    def _apply(self, event: dict[str, Any]) -> None:
        op = event["op"]
        if op == "put_case":
            case = CaseRecord.from_dict(event["case"])
            self._cases[case.case_id] = case
        elif op == "review":
            case_id = event["case_id"]
            case = self._cases[case_id]
            self._cases[case_id] = case.with_review(ReviewState(event["state"]))
            if event.get("preliminary_report"):
                self._preliminaries[case_id] = PreliminaryReport.from_dict(
                    event["preliminary_report"]
                )
            if event.get("final_report"):
                self._finals[case_id] = FinalReport.from_dict(event["final_report"])
        else:
            raise ValueError(f"unknown log event {op!r}")

    def _commit(self, event: dict[str, Any]) -> None:
        self._handle.write(json.dumps(event, sort_keys=True) + "\n")
        self._handle.flush()
        os.fsync(self._handle.fileno())

    def close(self) -> None:
        self._handle.close()

    # -- operations ---------------------------------------------------------

    def put_case(self, case: CaseRecord, expected_version: int | None = None) -> CaseRecord:
        """Create (expected_version None) or update a case.

        Creation requires an unseen case_id at version 1; an update must carry
        the stored version in expected_version and the successor version on
        the record itself.
        """
        with self._lock:
            current = self._cases.get(case.case_id)
            if expected_version is None:
                if current is not None:
                    raise VersionConflictError(case.case_id, 0, current.version)
                if case.version != 1:
                    raise ValueError("new cases must start at version 1")
            else:
                if current is None:
                    raise UnknownCaseError(case.case_id)
                if current.version != expected_version:
                    raise VersionConflictError(case.case_id, expected_version, current.version)
                if case.version != expected_version + 1:
                    raise ValueError("updated record must carry the successor version")
            self._commit({"op": "put_case", "case": case.to_dict()})
            self._cases[case.case_id] = case
            return case

    def get_case(self, case_id: str) -> CaseRecord:
        with self._lock:
            try:
                return self._cases[case_id]
            except KeyError:
                raise UnknownCaseError(case_id) from None

    def list_cases(self, review: ReviewState | None = None) -> list[CaseRecord]:
        """Committed cases in stable case_id order, optionally filtered."""
        with self._lock:
            cases = [
                case
                for case in self._cases.values()
                if review is None or case.review is review
            ]
        return sorted(cases, key=lambda c: c.case_id)

    def record_review(
        self,
        case_id: str,
        base_version: int,
        new_state: ReviewState,
        preliminary_report: PreliminaryReport | None = None,
        final_report: FinalReport | None = None,
    ) -> CaseRecord:
        """Advance the review state and bump the version atomically."""
        with self._lock:
            case = self._cases.get(case_id)
            if case is None:
                raise UnknownCaseError(case_id)
            if case.version != base_version:
                raise VersionConflictError(case_id, base_version, case.version)
            updated = case.with_review(new_state)  # validates the transition
            event: dict[str, Any] = {
                "op": "review",
                "case_id": case_id,
                "base_version": base_version,
                "state": new_state.value,
            }
            if preliminary_report is not None:
                event["preliminary_report"] = preliminary_report.to_dict()
            if final_report is not None:
                event["final_report"] = final_report.to_dict()
            self._commit(event)
            self._cases[case_id] = updated
            if preliminary_report is not None:
                self._preliminaries[case_id] = preliminary_report
            if final_report is not None:
                self._finals[case_id] = final_report
            return updated

    def get_preliminary(self, case_id: str) -> PreliminaryReport | None:
        with self._lock:
            return self._preliminaries.get(case_id)

    def get_final(self, case_id: str) -> FinalReport | None:
        with self._lock:
            return self._finals.get(case_id)

    def final_reports(self) -> list[FinalReport]:
        with self._lock:
            finals = list(self._finals.values())
        return sorted(finals, key=lambda r: r.case_id)
