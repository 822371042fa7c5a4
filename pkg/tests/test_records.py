import math

import pytest
from hypothesis import given, strategies as st

from sonoreport.records import (
    CaseRecord,
    FeatureVector,
    Laterality,
    ReviewState,
    Triage,
    ValidationError,
    validate_case,
)


def _payload(**overrides):
    payload = {"case_id": "c-1", "features": [0.1, 0.2, 0.3]}
    payload.update(overrides)
    return payload


def test_validate_case_happy_path():
    case = validate_case(_payload(), dim=3)
    assert case.version == 1
    assert case.triage is Triage.PENDING
    assert case.review is ReviewState.UNREVIEWED
    assert case.feature_vector.values == (0.1, 0.2, 0.3)


def test_validate_case_wrong_dimension():
    with pytest.raises(ValidationError):
        validate_case(_payload(), dim=4)


def test_validate_case_non_finite_entry():
    with pytest.raises(ValidationError):
        validate_case(_payload(features=[0.1, math.nan, 0.3]), dim=3)


def test_validate_case_score_out_of_range():
    with pytest.raises(ValidationError):
        validate_case(_payload(external_scores={"shape": 1.3}), dim=3)


def test_validate_case_unknown_score_key():
    with pytest.raises(ValidationError):
        validate_case(_payload(external_scores={"margin": 0.5}), dim=3)


def test_round_trip_dict():
    case = validate_case(_payload(external_scores={"malignancy": 0.25}), dim=3)
    assert CaseRecord.from_dict(case.to_dict()) == case


def test_review_cannot_skip_states():
    case = validate_case(_payload(), dim=3)
    with pytest.raises(ValidationError):
        case.with_review(ReviewState.FINALIZED)
    issued = case.with_review(ReviewState.PRELIMINARY_ISSUED)
    assert issued.version == case.version + 1
    final = issued.with_review(ReviewState.FINALIZED)
    with pytest.raises(ValidationError):
        final.with_review(ReviewState.FINALIZED)


@given(st.lists(st.sampled_from(["triage", "laterality", "review"]), max_size=8))
def test_mutations_strictly_increase_version(ops):
    case = validate_case(_payload(), dim=3)
    seen = [case.version]
    review_steps = iter([ReviewState.PRELIMINARY_ISSUED, ReviewState.FINALIZED])
    for op in ops:
        if op == "triage":
            case = case.with_triage(Triage.LESION)
        elif op == "laterality":
            case = case.with_laterality(Laterality.LEFT)
        else:
            step = next(review_steps, None)
            if step is None:
                continue
            case = case.with_review(step)
        seen.append(case.version)
    assert seen == sorted(set(seen))
    assert seen[-1] == seen[0] + len(seen) - 1
