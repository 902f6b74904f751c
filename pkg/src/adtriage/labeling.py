"""Expert labeling workflow: review sampling, verdict journal, seed matrix.

Every expert decision is appended to a JSONL journal; all reads go through
a last-write-wins view keyed on (listing, expert, stage), so replaying a
shuffled journal reconstructs the identical state. A ``skip`` verdict keeps
the listing unlabeled (and, as the latest write, retracts earlier verdicts).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import parse_timestamp

VERDICTS = ("positive", "negative", "skip")
STAGES = ("initial", "verification")

POLICY_INTERSECTION = "intersection"
POLICY_UNION = "union"
RULE_ANY_NEGATIVE = "any_negative"
RULE_BOTH_NEGATIVE = "both_negative"


@dataclass(frozen=True)
class ExpertLabel:
    listing_id: str
    expert_id: str
    verdict: str
    stage: str
    at: datetime

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict: {self.verdict!r}")
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage: {self.stage!r}")


@dataclass
class AgreementSummary:
    per_expert_pos: dict[str, int] = field(default_factory=dict)
    per_expert_neg: dict[str, int] = field(default_factory=dict)
    intersection_pos: int = 0
    union_pos: int = 0
    intersection_neg: int = 0
    union_neg: int = 0
    unlabeled_count: int = 0


@dataclass(frozen=True)
class LabelMatrix:
    ids: tuple[str, ...]
    y: np.ndarray  # N x 2 (column 0 positive, column 1 negative)
    conflicts: int

    @property
    def positive_seeds(self) -> int:
        return int(self.y[:, 0].sum())

    @property
    def negative_seeds(self) -> int:
        return int(self.y[:, 1].sum())


def sample_for_review(filtered_ids: Sequence[str], n: int, seed: int = 0) -> list[str]:
    """Uniform sample without replacement, deterministic per seed."""
    if n > len(filtered_ids):
        raise ValueError(f"cannot sample {n} from {len(filtered_ids)} listings")
    gen = np.random.default_rng(seed)
    picks = gen.choice(len(filtered_ids), size=n, replace=False)
    return [filtered_ids[i] for i in picks]


# --- journal ---------------------------------------------------------------


def append_label(path: str | Path, label: ExpertLabel) -> None:
    record = {
        "listing_id": label.listing_id,
        "expert_id": label.expert_id,
        "verdict": label.verdict,
        "stage": label.stage,
        "at": label.at.astimezone(timezone.utc).isoformat(),
    }
    with Path(path).open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(record) + "\n")


def read_journal(path: str | Path) -> list[ExpertLabel]:
    path = Path(path)
    if not path.exists():
        return []
    labels = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        labels.append(
            ExpertLabel(
                listing_id=record["listing_id"],
                expert_id=record["expert_id"],
                verdict=record["verdict"],
                stage=record["stage"],
                at=parse_timestamp(record["at"]),
            )
        )
    return labels


def journal_view(journal: Iterable[ExpertLabel]) -> dict[tuple[str, str, str], ExpertLabel]:
    """Last-write-wins view keyed by (listing, expert, stage).

    Ties on the timestamp resolve by verdict string so the view is
    insensitive to journal line order.
    """
    view: dict[tuple[str, str, str], ExpertLabel] = {}
    for label in journal:
        key = (label.listing_id, label.expert_id, label.stage)
        current = view.get(key)
        if current is None or (label.at, label.verdict) > (current.at, current.verdict):
            view[key] = label
    return view


def stage_verdicts(
    journal: Iterable[ExpertLabel], stage: str = "initial"
) -> dict[str, dict[str, str]]:
    """listing -> expert -> verdict for one stage; skips drop out."""
    verdicts: dict[str, dict[str, str]] = {}
    for (listing_id, expert_id, label_stage), label in journal_view(journal).items():
        if label_stage != stage or label.verdict == "skip":
            continue
        verdicts.setdefault(listing_id, {})[expert_id] = label.verdict
    return verdicts


def agreement(
    journal: Iterable[ExpertLabel], universe: Optional[Sequence[str]] = None
) -> AgreementSummary:
    """Per-expert counts plus set intersection/union over initial verdicts.

    A listing is intersection-positive when at least two experts called it
    positive; union-positive when at least one did. Same for negatives.
    """
    verdicts = stage_verdicts(journal, "initial")
    summary = AgreementSummary()
    for per_expert in verdicts.values():
        pos_experts = [e for e, v in per_expert.items() if v == "positive"]
        neg_experts = [e for e, v in per_expert.items() if v == "negative"]
        for expert in pos_experts:
            summary.per_expert_pos[expert] = summary.per_expert_pos.get(expert, 0) + 1
        for expert in neg_experts:
            summary.per_expert_neg[expert] = summary.per_expert_neg.get(expert, 0) + 1
        if len(pos_experts) >= 2:
            summary.intersection_pos += 1
        if len(pos_experts) >= 1:
            summary.union_pos += 1
        if len(neg_experts) >= 2:
            summary.intersection_neg += 1
        if len(neg_experts) >= 1:
            summary.union_neg += 1
    if universe is not None:
        summary.unlabeled_count = sum(1 for i in universe if i not in verdicts)
    return summary


def build_label_matrix(
    verdicts: dict[str, dict[str, str]],
    ids: Sequence[str],
    policy: str = POLICY_UNION,
    negative_rule: str = RULE_ANY_NEGATIVE,
) -> LabelMatrix:
    """Seed matrix over ``ids``: one-hot rows for seeds, zero rows otherwise.

    A listing qualifying as both positive (per policy) and negative (per
    rule) resolves to negative; such conflicts are counted.
    """
    if policy not in (POLICY_INTERSECTION, POLICY_UNION):
        raise ValueError(f"unknown policy: {policy!r}")
    if negative_rule not in (RULE_ANY_NEGATIVE, RULE_BOTH_NEGATIVE):
        raise ValueError(f"unknown negative rule: {negative_rule!r}")

    need_pos = 2 if policy == POLICY_INTERSECTION else 1
    need_neg = 2 if negative_rule == RULE_BOTH_NEGATIVE else 1

    y = np.zeros((len(ids), 2), dtype=np.float64)
    conflicts = 0
    for row, listing_id in enumerate(ids):
        per_expert = verdicts.get(listing_id)
        if not per_expert:
            continue
        values = list(per_expert.values())
        is_pos = values.count("positive") >= need_pos
        is_neg = values.count("negative") >= need_neg
        if is_pos and is_neg:
            conflicts += 1
            is_pos = False
        if is_pos:
            y[row, 0] = 1.0
        elif is_neg:
            y[row, 1] = 1.0
    return LabelMatrix(ids=tuple(ids), y=y, conflicts=conflicts)


def verification_status(journal: Iterable[ExpertLabel]) -> dict[str, dict[str, bool]]:
    """listing -> expert -> confirmed flag, from verification-stage verdicts."""
    verdicts = stage_verdicts(journal, "verification")
    return {
        listing_id: {expert: verdict == "positive" for expert, verdict in per_expert.items()}
        for listing_id, per_expert in verdicts.items()
    }
