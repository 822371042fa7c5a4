import pytest
from hypothesis import given, strategies as st

from sonoreport.fusion import FusedClass, FusedPrediction
from sonoreport.lexicon import (
    InternalEcho,
    PHRASES,
    PosteriorAcoustic,
    Shape,
    descriptor_value,
)
from sonoreport.records import (
    CaseRecord,
    FeatureVector,
    Laterality,
    ReviewState,
    Triage,
    VersionConflictError,
)
from sonoreport.reports import (
    BENIGN_DEFAULTS,
    FIELD_LABELS,
    FIELD_ORDER,
    PLACEHOLDER_PROMPT,
    Provenance,
    Route,
    Verdict,
    apply_review,
    generate_preliminary,
    render_report,
    triage_route,
)


def _case(triage=Triage.LESION, laterality=Laterality.UNSPECIFIED, version=1):
    return CaseRecord(
        case_id="c-7",
        feature_vector=FeatureVector((0.0, 1.0), "synthetic"),
        laterality=laterality,
        triage=triage,
        review=ReviewState.UNREVIEWED,
        version=version,
    )


def _fused_01():
    return FusedPrediction(
        fused=FusedClass.ENHANCEMENT_ANECHOIC,
        internal_echo=InternalEcho.ANECHOIC,
        posterior=PosteriorAcoustic.ENHANCEMENT,
        scores={
            FusedClass.ENHANCEMENT_ANECHOIC: 0.7,
            FusedClass.NO_POSTERIOR_HOMOGENEOUS: 0.2,
            FusedClass.NO_POSTERIOR_ANECHOIC: 0.1,
        },
    )


def _benign_prelim(laterality=Laterality.UNSPECIFIED):
    return generate_preliminary(
        _case(laterality=laterality), Shape.OVAL_ROUND, _fused_01(), 0.1, 0.5, now_ms=1000
    )


class TestRouting:
    def test_below_threshold_is_benign(self):
        assert triage_route(0.1, 0.5) is Route.BENIGN_AUTO

    def test_override_wins(self):
        assert triage_route(0.9, 0.5, Verdict.BENIGN) is Route.BENIGN_AUTO
        assert triage_route(0.1, 0.5, Verdict.MALIGNANT) is Route.MALIGNANT_MANUAL
        assert triage_route(0.1, 0.5, Verdict.NORMAL) is Route.NORMAL_CONCLUSION

    def test_tie_escalates_to_manual(self):
        assert triage_route(0.5, 0.5) is Route.MALIGNANT_MANUAL

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            triage_route(0.5, 0.0)
        with pytest.raises(ValueError):
            triage_route(1.5, 0.5)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_monotone_in_score(self, a, b):
        low, high = min(a, b), max(a, b)
        if triage_route(low, 0.5) is Route.MALIGNANT_MANUAL:
            assert triage_route(high, 0.5) is Route.MALIGNANT_MANUAL


class TestGeneratePreliminary:
    def test_benign_fields_and_provenance(self):
        report = _benign_prelim()
        assert report.route is Route.BENIGN_AUTO
        values = [(f.name, f.value, f.provenance) for f in report.fields]
        assert values == [
            ("shape", "oval/round", Provenance.PREDICTED),
            ("internal_echo", "anechoic", Provenance.PREDICTED),
            ("posterior_acoustic", "enhancement", Provenance.PREDICTED),
            ("boundary", "abrupt", Provenance.DEFAULT),
            ("orientation", "parallel", Provenance.DEFAULT),
            ("margin", "circumscribed", Provenance.DEFAULT),
        ]

    def test_defaults_fixed_regardless_of_predictions(self):
        fused = FusedPrediction(
            fused=FusedClass.NO_POSTERIOR_HOMOGENEOUS,
            internal_echo=InternalEcho.HOMOGENEOUS,
            posterior=PosteriorAcoustic.NO_POSTERIOR_FEATURES,
            scores={
                FusedClass.ENHANCEMENT_ANECHOIC: 0.1,
                FusedClass.NO_POSTERIOR_HOMOGENEOUS: 0.8,
                FusedClass.NO_POSTERIOR_ANECHOIC: 0.1,
            },
        )
        report = generate_preliminary(_case(), Shape.IRREGULAR, fused, 0.2, 0.5)
        tail = {f.name: (f.value, f.provenance) for f in report.fields[3:]}
        assert tail == {
            "boundary": ("abrupt", Provenance.DEFAULT),
            "orientation": ("parallel", Provenance.DEFAULT),
            "margin": ("circumscribed", Provenance.DEFAULT),
        }

    def test_malignant_route_is_all_placeholders(self):
        report = generate_preliminary(_case(), None, None, 0.9, 0.5)
        assert report.route is Route.MALIGNANT_MANUAL
        assert [f.name for f in report.fields] == list(FIELD_ORDER)
        assert all(f.provenance is Provenance.MANUAL_PLACEHOLDER for f in report.fields)

    def test_normal_triage_is_conclusion_only(self):
        report = generate_preliminary(_case(triage=Triage.NORMAL), None, None, 0.1, 0.5)
        assert report.route is Route.NORMAL_CONCLUSION
        assert report.fields == ()

    def test_missing_predictions_on_benign_route(self):
        with pytest.raises(ValueError, match="requires shape and fused"):
            generate_preliminary(_case(), None, None, 0.1, 0.5)

    def test_pending_case_rejected(self):
        with pytest.raises(ValueError, match="triaged"):
            generate_preliminary(_case(triage=Triage.PENDING), Shape.OVAL_ROUND, _fused_01(), 0.1)

    def test_finalized_case_rejected(self):
        case = (
            _case()
            .with_review(ReviewState.PRELIMINARY_ISSUED)
            .with_review(ReviewState.FINALIZED)
        )
        with pytest.raises(ValueError, match="finalized"):
            generate_preliminary(case, Shape.OVAL_ROUND, _fused_01(), 0.1)


class TestRender:
    def test_each_phrase_appears_exactly_once(self):
        text = render_report(_benign_prelim())
        for phrase in ("oval/round", "anechoic", "enhancement", "abrupt", "parallel", "circumscribed"):
            assert text.count(phrase) == 1, phrase

    def test_rendering_is_deterministic(self):
        report = _benign_prelim()
        assert render_report(report) == render_report(report)

    def test_normal_report_has_conclusion_and_no_phrases(self):
        report = generate_preliminary(_case(triage=Triage.NORMAL), None, None, 0.1, 0.5)
        text = render_report(report)
        assert "Conclusion:" in text
        for phrase in PHRASES.values():
            assert phrase not in text

    def test_placeholders_render_prompts(self):
        report = generate_preliminary(_case(), None, None, 0.9, 0.5)
        text = render_report(report)
        assert text.count(PLACEHOLDER_PROMPT) == len(FIELD_ORDER)
        for phrase in PHRASES.values():
            assert phrase not in text

    def test_laterality_rendered_when_set(self):
        assert "Laterality: left" in render_report(_benign_prelim(Laterality.LEFT))
        assert "Laterality" not in render_report(_benign_prelim())

    def test_enumerated_values_recoverable_via_lexicon(self):
        report = _benign_prelim()
        text = render_report(report)
        labels_to_names = {label: name for name, label in FIELD_LABELS.items()}
        recovered = {}
        for line in text.splitlines():
            if ": " not in line:
                continue
            label, value = line.split(": ", 1)
            if label in labels_to_names:
                recovered[labels_to_names[label]] = descriptor_value(value)
        assert recovered == {
            "shape": Shape.OVAL_ROUND,
            "internal_echo": InternalEcho.ANECHOIC,
            "posterior_acoustic": PosteriorAcoustic.ENHANCEMENT,
            "boundary": descriptor_value(BENIGN_DEFAULTS["boundary"]),
            "orientation": descriptor_value(BENIGN_DEFAULTS["orientation"]),
            "margin": descriptor_value(BENIGN_DEFAULTS["margin"]),
        }


class TestApplyReview:
    def test_noop_review_matches_preliminary(self):
        prelim = _benign_prelim()
        final = apply_review(prelim, {}, Verdict.BENIGN, 1, 1, "doc-1", now_ms=2000)
        assert final.edit_log == ()
        assert dict(final.final_fields) == {f.name: f.value for f in prelim.fields}
        assert final.unchanged_fraction() == (6, 6)

    def test_single_edit_logged(self):
        prelim = _benign_prelim()
        final = apply_review(
            prelim, {"internal_echo": "homogeneous"}, Verdict.BENIGN, 1, 1, "doc-1", now_ms=2000
        )
        assert len(final.edit_log) == 1
        entry = final.edit_log[0]
        assert (entry.field, entry.old, entry.new) == ("internal_echo", "anechoic", "homogeneous")
        assert final.unchanged_fraction() == (5, 6)

    def test_restating_the_same_value_is_not_an_edit(self):
        prelim = _benign_prelim()
        final = apply_review(prelim, {"shape": "oval/round"}, Verdict.BENIGN, 1, 1, "doc-1")
        assert final.edit_log == ()

    def test_stale_version_conflict(self):
        prelim = _benign_prelim()
        with pytest.raises(VersionConflictError) as excinfo:
            apply_review(prelim, {}, Verdict.BENIGN, 1, 3, "doc-1")
        assert excinfo.value.current == 3

    def test_unknown_field_rejected(self):
        prelim = _benign_prelim()
        with pytest.raises(ValueError, match="unknown fields"):
            apply_review(prelim, {"texture": "soft"}, Verdict.BENIGN, 1, 1, "doc-1")

    def test_malignant_requires_all_placeholders_supplied(self):
        prelim = generate_preliminary(_case(), None, None, 0.9, 0.5)
        with pytest.raises(ValueError, match="missing mandatory"):
            apply_review(prelim, {"shape": "irregular"}, Verdict.MALIGNANT, 1, 1, "doc-1")
        full_edits = {name: f"typed {name}" for name in FIELD_ORDER}
        final = apply_review(prelim, full_edits, Verdict.MALIGNANT, 1, 1, "doc-1")
        assert len(final.edit_log) == 6
        assert all(value for _, value in final.final_fields)

    def test_benign_verdict_on_manual_route_requires_values_too(self):
        prelim = generate_preliminary(_case(), None, None, 0.9, 0.5)
        with pytest.raises(ValueError, match="missing mandatory"):
            apply_review(prelim, {}, Verdict.BENIGN, 1, 1, "doc-1")

    def test_final_render_uses_edited_values(self):
        prelim = _benign_prelim()
        final = apply_review(
            prelim, {"internal_echo": "homogeneous"}, Verdict.BENIGN, 1, 1, "doc-1"
        )
        text = render_report(final)
        assert "homogeneous" in text
        assert "anechoic" not in text
        assert "Conclusion: benign" in text
