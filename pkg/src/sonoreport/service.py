"""Request/response layer for the review loop.

handle() is a plain function from (method, path, query, body) to a status
code and a JSON-able payload, so every endpoint is testable without sockets;
a thin stdlib HTTP adapter sits on top for real clients. Handlers keep no
per-request state: all mutation goes through the store under its version
checks, and the model bundle is swapped atomically behind a lock.

Endpoints:
    GET  worklist?state=unreviewed|preliminary_issued|finalized
    GET  case/{id}/preliminary
    POST case/{id}/review        {edits, final_verdict, base_version, reviewer}
    GET  metrics/summary
    GET  metrics/roc
    POST admin/models            {malignancy?, shape?, fused?} (server paths)
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable, Mapping
from urllib.parse import parse_qsl, urlsplit

from .data import DatasetRecord
from .fusion import (
    FUSED_CODES,
    ForbiddenCombinationError,
    FusedClass,
    FusedPrediction,
    predict_fused_one,
    unfuse,
)
from .lexicon import Shape
from .metrics import efficiency_index, roc_auc
from .records import ReviewState, Triage, VersionConflictError
from .reports import Verdict, apply_review, generate_preliminary, render_report
from .store import CaseStore, UnknownCaseError
from .svm import OvrModel, SvmModel, load_model, predict_score

_STATUS = {"not_found": 404, "conflict": 409, "validation": 400, "internal": 500}


class ApiError(Exception):
    def __init__(self, code: str, message: str, details: Mapping[str, Any] | None = None):
        super().__init__(message)
        if code not in _STATUS:
            raise ValueError(f"unknown error code {code!r}")
        self.code = code
        self.message = message
        self.details = dict(details or {})

    def payload(self) -> dict[str, Any]:
        return {"error": {"code": self.code, "message": self.message, "details": self.details}}


@dataclass
class ModelBundle:
    malignancy: SvmModel | None = None
    shape: SvmModel | None = None
    fused: OvrModel | None = None


def _now_ms() -> int:
    return int(time.time() * 1000)


class ReportService:
    def __init__(
        self,
        store: CaseStore,
        models: ModelBundle | None = None,
        threshold: float = 0.5,
        eval_records: list[DatasetRecord] | None = None,
        clock: Callable[[], int] = _now_ms,
    ):
        self.store = store
        self.threshold = threshold
        self.eval_records = eval_records or []
        self.clock = clock
        self._models = models or ModelBundle()
        self._model_lock = threading.Lock()

    # -- request entry point --------------------------------------------

    def handle(
        self,
        method: str,
        path: str,
        query: Mapping[str, str] | None = None,
        body: Mapping[str, Any] | None = None,
        reviewer: str | None = None,
    ) -> tuple[int, dict[str, Any]]:
        query = query or {}
        body = body or {}
        try:
            if method == "GET" and path == "worklist":
                return 200, self._worklist(query)
            case_prelim = re.fullmatch(r"case/([^/]+)/preliminary", path)
            if method == "GET" and case_prelim:
                return 200, self._preliminary(case_prelim.group(1))
            case_review = re.fullmatch(r"case/([^/]+)/review", path)
            if method == "POST" and case_review:
                return 200, self._review(case_review.group(1), body, reviewer)
            if method == "GET" and path == "metrics/summary":
                return 200, self._summary()
            if method == "GET" and path == "metrics/roc":
                return 200, self._roc()
            if method == "POST" and path == "admin/models":
                return 200, self._swap_models(body)
            raise ApiError("not_found", f"no endpoint {method} /{path}")
        except ApiError as exc:
            return _STATUS[exc.code], exc.payload()
        except UnknownCaseError as exc:
            return 404, ApiError("not_found", str(exc)).payload()
        except VersionConflictError as exc:
            err = ApiError("conflict", str(exc), {"current_version": exc.current})
            return 409, err.payload()
        except Exception as exc:  # keep the process alive; surface the cause
            return 500, ApiError("internal", f"{type(exc).__name__}: {exc}").payload()

    # -- endpoints --------------------------------------------------------

    def _worklist(self, query: Mapping[str, str]) -> dict[str, Any]:
        token = query.get("state", "unreviewed")
        try:
            state = ReviewState(token)
        except ValueError:
            raise ApiError("validation", f"unknown review state {token!r}") from None
        cases = self.store.list_cases(review=state)
        return {
            "cases": [
                {
                    "case_id": case.case_id,
                    "triage": case.triage.value,
                    "review": case.review.value,
                    "laterality": case.laterality.value,
                    "version": case.version,
                }
                for case in cases
            ]
        }

    def _preliminary(self, case_id: str) -> dict[str, Any]:
        case = self.store.get_case(case_id)
        if case.review is ReviewState.FINALIZED:
            raise ApiError(
                "conflict",
                f"case {case_id!r} is already finalized",
                {"current_version": case.version},
            )
        stored = self.store.get_preliminary(case_id)
        if stored is not None:
            return {"report": stored.to_dict(), "rendered": render_report(stored)}

        with self._model_lock:
            models = self._models
        verdict_score = self._verdict_score(case, models)
        route_is_benign = verdict_score < self.threshold and case.triage is not Triage.NORMAL
        shape_pred = fused_pred = None
        if route_is_benign:
            shape_pred = self._shape_prediction(case, models)
            fused_pred = self._fused_prediction(case, models)
        report = generate_preliminary(
            case,
            shape_pred,
            fused_pred,
            verdict_score,
            self.threshold,
            now_ms=self.clock(),
        )
        # the client must echo back the post-issue version
        report = replace(report, base_version=case.version + 1)
        try:
            self.store.record_review(
                case_id, case.version, ReviewState.PRELIMINARY_ISSUED, preliminary_report=report
            )
        except VersionConflictError:
            # a concurrent fetch issued it first; serve the stored copy
            stored = self.store.get_preliminary(case_id)
            if stored is None:
                raise
            report = stored
        return {"report": report.to_dict(), "rendered": render_report(report)}

    def _review(
        self, case_id: str, body: Mapping[str, Any], reviewer: str | None
    ) -> dict[str, Any]:
        reviewer = body.get("reviewer") or reviewer
        if not reviewer:
            raise ApiError("validation", "reviewer id required (X-Reviewer-Id header or body)")
        if "base_version" not in body:
            raise ApiError("validation", "base_version required")
        try:
            verdict = Verdict(body.get("final_verdict"))
        except ValueError:
            raise ApiError(
                "validation", f"final_verdict must be one of {[v.value for v in Verdict]}"
            ) from None
        edits = body.get("edits") or {}
        if not isinstance(edits, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in edits.items()
        ):
            raise ApiError("validation", "edits must map field names to string values")

        case = self.store.get_case(case_id)
        if case.review is ReviewState.FINALIZED:
            raise ApiError(
                "conflict",
                f"case {case_id!r} is already finalized",
                {"current_version": case.version},
            )
        prelim = self.store.get_preliminary(case_id)
        if case.review is ReviewState.UNREVIEWED or prelim is None:
            raise ApiError("validation", f"no preliminary report issued for case {case_id!r}")
        try:
            final = apply_review(
                prelim,
                edits,
                verdict,
                int(body["base_version"]),
                current_version=case.version,
                reviewer=str(reviewer),
                now_ms=self.clock(),
            )
        except ValueError as exc:
            raise ApiError("validation", str(exc)) from None
        self.store.record_review(
            case_id, int(body["base_version"]), ReviewState.FINALIZED, final_report=final
        )
        return {"report": final.to_dict(), "rendered": render_report(final)}

    def _summary(self) -> dict[str, Any]:
        from .reports import Route

        finals = [r for r in self.store.final_reports() if r.route is Route.BENIGN_AUTO]
        per_case = {}
        for report in finals:
            unchanged, total = report.unchanged_fraction()
            per_case[report.case_id] = {"unchanged": unchanged, "total": total}
        return {
            "efficiency_index": efficiency_index(finals) if finals else None,
            "finalized_benign_reports": len(finals),
            "per_case": per_case,
        }

    def _roc(self) -> dict[str, Any]:
        with self._model_lock:
            model = self._models.malignancy
        if model is None:
            raise ApiError("validation", "no malignancy model loaded")
        scores, labels = [], []
        for record in self.eval_records:
            if record.labels is None or record.labels.malignancy is None:
                continue
            scores.append(predict_score(model, record.features))
            labels.append(1 if record.labels.malignancy == "malignant" else 0)
        if not scores:
            raise ApiError("validation", "no labelled evaluation rows configured")
        try:
            curve = roc_auc(scores, labels)
        except ValueError as exc:
            raise ApiError("validation", str(exc)) from None
        return {"auc": curve.auc, "points": [[f, t] for f, t in curve.points]}

    def _swap_models(self, body: Mapping[str, Any]) -> dict[str, Any]:
        loaded: dict[str, str] = {}
        new_models = {}
        for slot in ("malignancy", "shape", "fused"):
            path = body.get(slot)
            if path is None:
                continue
            try:
                model = load_model(path)
            except (OSError, ValueError) as exc:
                raise ApiError("validation", f"cannot load {slot} model: {exc}") from None
            if slot == "fused" and not isinstance(model, OvrModel):
                raise ApiError("validation", "fused slot requires a one-vs-rest model")
            if slot != "fused" and isinstance(model, OvrModel):
                raise ApiError("validation", f"{slot} slot requires a binary model")
            new_models[slot] = model
            loaded[slot] = str(path)
        if not new_models:
            raise ApiError("validation", "no model paths given")
        with self._model_lock:
            for slot, model in new_models.items():
                setattr(self._models, slot, model)
        return {"loaded": loaded}

    # -- prediction plumbing ----------------------------------------------

    def _verdict_score(self, case, models: ModelBundle) -> float:
        external = (case.external_scores or {}).get("malignancy")
        if external is not None:
            return float(external)
        if models.malignancy is None:
            raise ApiError("validation", "no malignancy model or external score available")
        return predict_score(models.malignancy, case.feature_vector.values)

    def _shape_prediction(self, case, models: ModelBundle) -> Shape:
        external = (case.external_scores or {}).get("shape")
        if external is not None:
            return Shape.OVAL_ROUND if external >= 0.5 else Shape.IRREGULAR
        if models.shape is None:
            raise ApiError("validation", "no shape model or external score available")
        score = predict_score(models.shape, case.feature_vector.values)
        return Shape.OVAL_ROUND if score >= 0.5 else Shape.IRREGULAR

    def _fused_prediction(self, case, models: ModelBundle) -> FusedPrediction:
        scores = case.external_scores or {}
        p_echo = scores.get("internal_echo")
        p_post = scores.get("posterior_acoustic")
        if p_echo is not None and p_post is not None:
            # joint mass over the admissible codes from two independent scores
            # (p_post is the probability of "no posterior features")
            mass = {
                "01": (1.0 - p_post) * p_echo,
                "10": p_post * (1.0 - p_echo),
                "11": p_post * p_echo,
            }
            total = sum(mass.values())
            if total <= 0.0:
                raise ApiError(
                    "validation",
                    "external scores put all mass on the forbidden echo/posterior pair",
                )
            weights = {FusedClass.from_code(c): mass[c] / total for c in FUSED_CODES}
            best = FUSED_CODES[0]  # ties resolve to the lowest code
            for code in FUSED_CODES[1:]:
                if mass[code] > mass[best]:
                    best = code
            fused = FusedClass.from_code(best)
            echo, posterior = unfuse(fused)
            return FusedPrediction(fused=fused, internal_echo=echo, posterior=posterior, scores=weights)
        if models.fused is None:
            raise ApiError("validation", "no fused model or external scores available")
        return predict_fused_one(models.fused, case.feature_vector.values)


# ---------------------------------------------------------------------------
# stdlib HTTP adapter


class _Handler(BaseHTTPRequestHandler):
    server_version = "sonoreport"

    def _dispatch(self, method: str) -> None:
        parsed = urlsplit(self.path)
        query = dict(parse_qsl(parsed.query))
        body: dict[str, Any] = {}
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw)
            except json.JSONDecodeError:
                self._respond(400, ApiError("validation", "request body is not JSON").payload())
                return
        service: ReportService = self.server.service  # type: ignore[attr-defined]
        status, payload = service.handle(
            method,
            parsed.path.strip("/"),
            query,
            body,
            reviewer=self.headers.get("X-Reviewer-Id"),
        )
        self._respond(status, payload)

    def _respond(self, status: int, payload: dict[str, Any]) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self) -> None:  # noqa: N802 (stdlib naming)
        self._dispatch("GET")

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch("POST")

    def do_OPTIONS(self) -> None:  # noqa: N802 (CORS preflight for the browser client)
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, X-Reviewer-Id")
        self.end_headers()

    def log_message(self, fmt: str, *args) -> None:  # silence per-request noise
        pass


class ServiceServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, service: ReportService, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.service = service


def run_server(service: ReportService, host: str = "127.0.0.1", port: int = 0) -> ServiceServer:
    """Bind and return the server (port 0 picks a free port); caller runs it."""
    return ServiceServer(service, host, port)
