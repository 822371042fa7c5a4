#!/usr/bin/env python3
"""The doctor-in-the-loop review cycle against the service layer.

Usage:
    python demos/04_review_workflow.py

Runs the whole loop in-process (no sockets needed; the same handlers sit
behind the HTTP server):
1. ingest cases into a durable store,
2. pull the worklist and fetch a preliminary report (this issues it),
3. submit a review with one correction,
4. show the version-conflict answer a stale second submission gets,
5. read the work-efficiency dashboard.
"""

import json
import tempfile
from pathlib import Path

from sonoreport.data import SyntheticConfig, binary_arrays, case_from_record, fused_arrays, synthesize_dataset
from sonoreport.records import Triage
from sonoreport.service import ModelBundle, ReportService
from sonoreport.store import CaseStore
from sonoreport.svm import KernelSpec, TrainConfig, train_ovr, train_svm


def main():
    records = synthesize_dataset(SyntheticConfig(n=300, noise=0.05), seed=4)
    config, kernel = TrainConfig(), KernelSpec("linear")
    xm, ym = binary_arrays(records, "malignancy", split="train")
    xs, ys = binary_arrays(records, "shape", split="train")
    xf, codes = fused_arrays(records, split="train")
    bundle = ModelBundle(
        malignancy=train_svm(xm, ym, config, kernel),
        shape=train_svm(xs, ys, config, kernel),
        fused=train_ovr(xf, codes, config, kernel),
    )

    with tempfile.TemporaryDirectory() as tmp:
        store = CaseStore(Path(tmp) / "cases.log")
        for record in [r for r in records if r.split == "validation"][:6]:
            store.put_case(case_from_record(record, triage=Triage.LESION))
        service = ReportService(store, bundle, threshold=0.5)

        # 1. worklist
        _, worklist = service.handle("GET", "worklist", {"state": "unreviewed"})
        print("pending cases:", [c["case_id"] for c in worklist["cases"]])

        # 2. fetch (and thereby issue) preliminary reports; review a benign one
        case_id = prelim = None
        for entry in worklist["cases"]:
            _, candidate = service.handle("GET", f"case/{entry['case_id']}/preliminary")
            if candidate["report"]["route"] == "benign_auto":
                case_id, prelim = entry["case_id"], candidate
                break
        print(f"\npreliminary for {case_id} (route {prelim['report']['route']}):")
        print(prelim["rendered"])

        # 3. review with one correction (flip the echo field)
        base_version = prelim["report"]["base_version"]
        fields = {f["name"]: f["value"] for f in prelim["report"]["fields"]}
        flipped = "homogeneous" if fields.get("internal_echo") != "homogeneous" else "anechoic"
        status, final = service.handle(
            "POST",
            f"case/{case_id}/review",
            body={
                "edits": {"internal_echo": flipped},
                "final_verdict": "benign",
                "base_version": base_version,
            },
            reviewer="doc-demo",
        )
        print(f"review -> HTTP {status}, edits logged: {len(final['report']['edit_log'])}")

        # 4. a stale second submission conflicts instead of double-finalizing
        status, conflict = service.handle(
            "POST",
            f"case/{case_id}/review",
            body={"edits": {}, "final_verdict": "benign", "base_version": base_version},
            reviewer="doc-demo",
        )
        print(f"stale resubmission -> HTTP {status}: {json.dumps(conflict['error'])}")

        # 5. dashboard
        _, summary = service.handle("GET", "metrics/summary")
        print(
            f"\nefficiency index {summary['efficiency_index']:.4f} "
            f"over {summary['finalized_benign_reports']} finalized benign report(s); "
            f"per case: {summary['per_case']}"
        )
        store.close()


if __name__ == "__main__":
    main()
