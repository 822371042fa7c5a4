#!/usr/bin/env python3
"""Assemble and render preliminary reports for each routing outcome.

Usage:
    python demos/03_draft_reports.py

A case routes one of three ways: benign (auto-drafted: three predicted
descriptors plus the three fixed benign defaults), malignant (manual entry
prompts), or normal (conclusion only). All three renderings are shown.
"""

from sonoreport.fusion import FusedClass, FusedPrediction
from sonoreport.lexicon import InternalEcho, PosteriorAcoustic, Shape
from sonoreport.records import CaseRecord, FeatureVector, Laterality, Triage
from sonoreport.reports import Verdict, generate_preliminary, render_report


def _case(case_id, triage=Triage.LESION, laterality=Laterality.UNSPECIFIED):
    return CaseRecord(
        case_id=case_id,
        feature_vector=FeatureVector((0.0, 0.0), "synthetic"),
        laterality=laterality,
        triage=triage,
    )


def main():
    fused = FusedPrediction(
        fused=FusedClass.ENHANCEMENT_ANECHOIC,
        internal_echo=InternalEcho.ANECHOIC,
        posterior=PosteriorAcoustic.ENHANCEMENT,
        scores={
            FusedClass.ENHANCEMENT_ANECHOIC: 0.82,
            FusedClass.NO_POSTERIOR_HOMOGENEOUS: 0.1,
            FusedClass.NO_POSTERIOR_ANECHOIC: 0.08,
        },
    )

    benign = generate_preliminary(
        _case("demo-benign", laterality=Laterality.LEFT),
        Shape.OVAL_ROUND,
        fused,
        verdict_score=0.08,
        threshold=0.5,
    )
    malignant = generate_preliminary(
        _case("demo-malignant"), None, None, verdict_score=0.93, threshold=0.5
    )
    normal = generate_preliminary(
        _case("demo-normal", triage=Triage.NORMAL), None, None, 0.0, 0.5,
        doctor_override=Verdict.NORMAL,
    )

    for report in (benign, malignant, normal):
        print("=" * 52)
        print(f"route: {report.route.value}   verdict score: {report.verdict_score}")
        for field in report.fields:
            print(f"  {field.name:20s} [{field.provenance.value}]")
        print("-" * 52)
        print(render_report(report))


if __name__ == "__main__":
    main()
