from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adtriage.labeling import (
    POLICY_INTERSECTION,
    POLICY_UNION,
    RULE_ANY_NEGATIVE,
    RULE_BOTH_NEGATIVE,
    ExpertLabel,
    agreement,
    append_label,
    build_label_matrix,
    journal_view,
    read_journal,
    sample_for_review,
    stage_verdicts,
    verification_status,
)

T0 = datetime(2017, 6, 1, tzinfo=timezone.utc)


def _label(listing, expert, verdict, stage="initial", minute=0):
    return ExpertLabel(
        listing_id=listing,
        expert_id=expert,
        verdict=verdict,
        stage=stage,
        at=T0 + timedelta(minutes=minute),
    )


def _dual_review_journal():
    """Two experts over a 150-item sample, constructed so every agreement
    count is known by arithmetic: expert one marks items 0..37 positive and
    the rest negative; expert two marks 7..145 positive and the rest negative."""
    labels = []
    for i in range(150):
        listing = f"s{i:03d}"
        labels.append(_label(listing, "e1", "positive" if i < 38 else "negative"))
        labels.append(_label(listing, "e2", "positive" if 7 <= i <= 145 else "negative"))
    return labels


# --- dual review agreement ---------------------------------------------------


def test_dual_review_counts():
    summary = agreement(_dual_review_journal())
    assert summary.per_expert_pos == {"e1": 38, "e2": 139}
    assert summary.per_expert_neg == {"e1": 112, "e2": 11}
    assert summary.intersection_pos == 31
    assert summary.union_pos == 146
    assert summary.intersection_neg == 4
    assert summary.union_neg == 119


def test_unlabeled_count_against_universe():
    universe = [f"s{i:03d}" for i in range(150)] + [f"u{i}" for i in range(849)]
    summary = agreement(_dual_review_journal(), universe=universe)
    assert summary.unlabeled_count == 849


def test_agreement_ignores_verification_stage():
    journal = _dual_review_journal()
    journal.append(_label("s000", "e1", "positive", stage="verification", minute=99))
    summary = agreement(journal)
    assert summary.per_expert_pos == {"e1": 38, "e2": 139}


def test_agreement_skip_leaves_listing_unlabeled():
    journal = [
        _label("a", "e1", "skip"),
        _label("b", "e1", "positive"),
    ]
    summary = agreement(journal, universe=["a", "b", "c"])
    assert summary.per_expert_pos == {"e1": 1}
    assert summary.union_pos == 1
    assert summary.unlabeled_count == 2  # skip is not a label


@st.composite
def _journals(draw):
    listings = [f"x{i}" for i in range(draw(st.integers(1, 12)))]
    experts = ["e1", "e2", "e3"][: draw(st.integers(1, 3))]
    labels = []
    minute = 0
    for listing in listings:
        for expert in experts:
            if draw(st.booleans()):
                verdict = draw(st.sampled_from(["positive", "negative", "skip"]))
                labels.append(_label(listing, expert, verdict, minute=minute))
                minute += 1
    return labels


@given(_journals(), st.randoms(use_true_random=False))
def test_agreement_is_order_invariant(journal, rng):
    baseline = agreement(journal)
    shuffled = list(journal)
    rng.shuffle(shuffled)
    assert agreement(shuffled) == baseline


@given(_journals())
def test_agreement_set_inequalities(journal):
    s = agreement(journal)
    assert 0 <= s.intersection_pos <= s.union_pos
    assert 0 <= s.intersection_neg <= s.union_neg
    assert s.union_pos <= sum(s.per_expert_pos.values())
    assert s.union_neg <= sum(s.per_expert_neg.values())


# --- last-write-wins journal view ---------------------------------------------


def test_later_entry_supersedes_earlier():
    journal = [
        _label("a", "e1", "positive", minute=0),
        _label("a", "e1", "negative", minute=5),
    ]
    view = journal_view(journal)
    assert view[("a", "e1", "initial")].verdict == "negative"
    assert stage_verdicts(journal, "initial") == {"a": {"e1": "negative"}}


def test_skip_retracts_a_previous_verdict():
    journal = [
        _label("a", "e1", "positive", minute=0),
        _label("a", "e1", "skip", minute=1),
    ]
    assert stage_verdicts(journal, "initial") == {}


def test_stages_are_tracked_independently():
    journal = [
        _label("a", "e1", "negative", stage="initial", minute=0),
        _label("a", "e1", "positive", stage="verification", minute=1),
    ]
    assert stage_verdicts(journal, "initial") == {"a": {"e1": "negative"}}
    assert stage_verdicts(journal, "verification") == {"a": {"e1": "positive"}}


def test_equal_timestamps_resolve_deterministically():
    a = _label("a", "e1", "negative", minute=0)
    b = _label("a", "e1", "positive", minute=0)
    assert journal_view([a, b]) == journal_view([b, a])


def test_rejects_unknown_verdict_and_stage():
    with pytest.raises(ValueError):
        _label("a", "e1", "maybe")
    with pytest.raises(ValueError):
        _label("a", "e1", "positive", stage="final")


# --- journal persistence ------------------------------------------------------


def test_journal_roundtrip(tmp_path):
    path = tmp_path / "journal.jsonl"
    labels = [
        _label("a", "e1", "positive", minute=0),
        _label("b", "e2", "skip", stage="verification", minute=1),
    ]
    for label in labels:
        append_label(path, label)
    assert read_journal(path) == labels


def test_read_journal_missing_file_is_empty(tmp_path):
    assert read_journal(tmp_path / "absent.jsonl") == []


def test_append_is_incremental(tmp_path):
    path = tmp_path / "journal.jsonl"
    append_label(path, _label("a", "e1", "positive"))
    assert len(read_journal(path)) == 1
    append_label(path, _label("b", "e1", "negative"))
    assert len(read_journal(path)) == 2


# --- review sampling ----------------------------------------------------------


def test_sample_for_review_is_deterministic_subset():
    ids = [f"f{i}" for i in range(400)]
    sample = sample_for_review(ids, 150, seed=3)
    assert len(sample) == 150
    assert len(set(sample)) == 150
    assert set(sample) <= set(ids)
    assert sample == sample_for_review(ids, 150, seed=3)
    assert sample != sample_for_review(ids, 150, seed=4)


def test_sample_for_review_rejects_oversized_request():
    with pytest.raises(ValueError):
        sample_for_review(["a", "b"], 3)


def test_sample_for_review_whole_population():
    ids = ["a", "b", "c"]
    assert sorted(sample_for_review(ids, 3, seed=0)) == ids


# --- seed matrix --------------------------------------------------------------


def _verdicts(journal):
    return stage_verdicts(journal, "initial")


def test_union_policy_seeds_any_positive():
    journal = [
        _label("a", "e1", "positive"),
        _label("b", "e1", "positive"),
        _label("b", "e2", "positive"),
        _label("c", "e1", "negative"),
    ]
    m = build_label_matrix(_verdicts(journal), ["a", "b", "c", "d"], policy=POLICY_UNION)
    assert m.y.tolist() == [[1, 0], [1, 0], [0, 1], [0, 0]]
    assert m.positive_seeds == 2
    assert m.negative_seeds == 1
    assert m.conflicts == 0


def test_intersection_policy_needs_two_positives():
    journal = [
        _label("a", "e1", "positive"),
        _label("b", "e1", "positive"),
        _label("b", "e2", "positive"),
    ]
    m = build_label_matrix(_verdicts(journal), ["a", "b"], policy=POLICY_INTERSECTION)
    assert m.y.tolist() == [[0, 0], [1, 0]]


def test_conflicting_listing_resolves_to_negative():
    journal = [
        _label("a", "e1", "positive"),
        _label("a", "e2", "negative"),
    ]
    m = build_label_matrix(
        _verdicts(journal), ["a"], policy=POLICY_UNION, negative_rule=RULE_ANY_NEGATIVE
    )
    assert m.y.tolist() == [[0, 1]]
    assert m.conflicts == 1
    # under both_negative a single dissent is not enough to mark negative
    m2 = build_label_matrix(
        _verdicts(journal), ["a"], policy=POLICY_UNION, negative_rule=RULE_BOTH_NEGATIVE
    )
    assert m2.y.tolist() == [[1, 0]]
    assert m2.conflicts == 0


def test_matrix_validates_policy_names():
    with pytest.raises(ValueError):
        build_label_matrix({}, [], policy="all")
    with pytest.raises(ValueError):
        build_label_matrix({}, [], negative_rule="majority")


@given(_journals())
def test_matrix_rows_are_one_hot_or_zero(journal):
    ids = sorted({label.listing_id for label in journal} | {"pad1", "pad2"})
    for policy in (POLICY_UNION, POLICY_INTERSECTION):
        for rule in (RULE_ANY_NEGATIVE, RULE_BOTH_NEGATIVE):
            m = build_label_matrix(_verdicts(journal), ids, policy=policy, negative_rule=rule)
            sums = m.y.sum(axis=1)
            assert np.all((sums == 0) | (sums == 1))
            assert np.all((m.y == 0) | (m.y == 1))
            assert m.positive_seeds + m.negative_seeds == int(sums.sum())


def test_matrix_row_order_follows_ids():
    journal = [_label("z", "e1", "positive"), _label("a", "e1", "negative")]
    m = build_label_matrix(_verdicts(journal), ["z", "a"])
    assert m.y.tolist() == [[1, 0], [0, 1]]
    assert m.ids == ("z", "a")


# --- verification -------------------------------------------------------------


def test_verification_status_reflects_latest_verdict():
    journal = [
        _label("a", "e1", "positive", stage="verification", minute=0),
        _label("b", "e1", "negative", stage="verification", minute=1),
        _label("b", "e1", "positive", stage="verification", minute=2),
        _label("c", "e1", "positive", stage="initial", minute=3),
    ]
    status = verification_status(journal)
    assert status == {"a": {"e1": True}, "b": {"e1": True}}
