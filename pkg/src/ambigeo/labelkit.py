"""Sense-label management: merging, majority vote, inter-rater agreement.

Agreement is Krippendorff's alpha on a nominal scale, computed through the
coincidence-matrix formulation; items rated by fewer than two sources drop
out under the standard pairable-values rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .embedstore import RESERVED_LABEL, SenseLabeling
from .errors import (
    InsufficientDataError,
    ReservedLabelError,
    UndefinedAlphaError,
    ValidationError,
)

MAJORITY_SOURCE = "majority"


@dataclass(frozen=True)
class RaterTable:
    """Aligned label columns (one per source) over a shared context list."""

    target: str
    context_ids: tuple[str, ...]
    columns: dict[str, dict[str, str]]  # source -> context_id -> label
    allowed_labels: frozenset[str]

    def __post_init__(self) -> None:
        wanted = set(self.context_ids)
        for source, column in self.columns.items():
            if set(column) != wanted:
                raise ValidationError(f"column {source!r} does not cover the table")
            stray = set(column.values()) - self.allowed_labels
            if stray:
                raise ValidationError(
                    f"column {source!r} uses labels outside the allowed set: {sorted(stray)}"
                )


def build_rater_table(
    labelings: Sequence[SenseLabeling],
    allowed_labels: set[str] | None = None,
) -> RaterTable:
    """Align labelings on their shared context_ids (first labeling's order)."""
    if not labelings:
        raise InsufficientDataError("need at least one labeling")
    targets = {labeling.target for labeling in labelings}
    if len(targets) != 1:
        raise ValidationError(f"labelings mix targets: {sorted(targets)}")
    sources = [labeling.source for labeling in labelings]
    if len(set(sources)) != len(sources):
        raise ValidationError("labelings must come from distinct sources")

    shared = set(labelings[0].entries)
    for labeling in labelings[1:]:
        shared &= set(labeling.entries)
    ordered = tuple(cid for cid in labelings[0].entries if cid in shared)
    if allowed_labels is None:
        allowed_labels = {RESERVED_LABEL}
        for labeling in labelings:
            allowed_labels.update(labeling.entries.values())
    columns = {
        labeling.source: {cid: labeling.entries[cid] for cid in ordered}
        for labeling in labelings
    }
    return RaterTable(
        target=labelings[0].target,
        context_ids=ordered,
        columns=columns,
        allowed_labels=frozenset(allowed_labels),
    )


def merge_labels(labeling: SenseLabeling, merges: Mapping[str, str]) -> SenseLabeling:
    """Rewrite synonymous labels to canonical forms (single-step, no chains)."""
    for original, canonical in merges.items():
        if canonical == RESERVED_LABEL:
            raise ReservedLabelError(
                f"merge {original!r} -> {canonical!r} targets the reserved label"
            )
    entries = {
        cid: merges.get(label, label) for cid, label in labeling.entries.items()
    }
    return SenseLabeling(target=labeling.target, source=labeling.source, entries=entries)


def majority_label(table: RaterTable, min_agree: int = 2) -> SenseLabeling:
    """Ground truth from rater agreement.

    A context keeps label L iff at least ``min_agree`` columns chose L and
    L is not 'other'; contexts without such a label (including vote ties at
    the top) are excluded.
    """
    if min_agree < 1:
        raise ValidationError(f"min_agree must be >= 1, got {min_agree}")
    if len(table.columns) < min_agree:
        raise InsufficientDataError(
            f"table has {len(table.columns)} columns, fewer than min_agree={min_agree}"
        )
    entries: dict[str, str] = {}
    for cid in table.context_ids:
        votes: dict[str, int] = {}
        for column in table.columns.values():
            label = column[cid]
            if label != RESERVED_LABEL:
                votes[label] = votes.get(label, 0) + 1
        eligible = {label: n for label, n in votes.items() if n >= min_agree}
        if not eligible:
            continue
        top = max(eligible.values())
        winners = [label for label, n in eligible.items() if n == top]
        if len(winners) == 1:
            entries[cid] = winners[0]
    return SenseLabeling(target=table.target, source=MAJORITY_SOURCE, entries=entries)


def krippendorff_alpha(columns: Sequence[Sequence[str | None]]) -> float:
    """Nominal-scale Krippendorff's alpha; None marks a missing rating."""
    if len(columns) < 2:
        raise InsufficientDataError("alpha needs at least two columns")
    n_items = len(columns[0])
    if any(len(col) != n_items for col in columns):
        raise ValidationError("columns must share the same item list")

    units = []
    for item in range(n_items):
        values = [col[item] for col in columns if col[item] is not None]
        if len(values) >= 2:
            units.append(values)
    if len(units) < 2:
        raise InsufficientDataError("alpha needs >= 2 items with >= 2 ratings")

    n_pairable = sum(len(u) for u in units)
    margins: dict[str, int] = {}
    for unit in units:
        for value in unit:
            margins[value] = margins.get(value, 0) + 1
    if len(margins) < 2:
        raise UndefinedAlphaError("only one distinct label; expected disagreement is zero")

    observed = 0.0
    for unit in units:
        disagreements = sum(
            1 for a in unit for b in unit if a != b
        )  # ordered pairs, nominal metric
        observed += disagreements / (len(unit) - 1)
    observed /= n_pairable

    expected = (n_pairable**2 - sum(count**2 for count in margins.values())) / (
        n_pairable * (n_pairable - 1)
    )
    if expected == 0.0:
        raise UndefinedAlphaError("expected disagreement is zero")
    return 1.0 - observed / expected


def _aligned_columns(
    first: SenseLabeling, second: SenseLabeling
) -> tuple[list[str | None], list[str | None]]:
    ids = list(first.entries)
    ids.extend(cid for cid in second.entries if cid not in first.entries)
    return (
        [first.entries.get(cid) for cid in ids],
        [second.entries.get(cid) for cid in ids],
    )


def pairwise_alphas(
    auto: SenseLabeling, raters: Sequence[SenseLabeling]
) -> dict[str, float]:
    """Alpha between the auto column and each rater, keyed by rater source."""
    if not raters:
        raise InsufficientDataError("need at least one rater column")
    alphas: dict[str, float] = {}
    for rater in raters:
        try:
            alphas[rater.source] = krippendorff_alpha(_aligned_columns(auto, rater))
        except UndefinedAlphaError as exc:
            raise UndefinedAlphaError(f"rater {rater.source!r}: {exc}") from exc
    return alphas


def average_pairwise_alpha(
    auto: SenseLabeling, raters: Sequence[SenseLabeling]
) -> float:
    """Mean alpha between the auto-translation column and each rater."""
    alphas = pairwise_alphas(auto, raters)
    return sum(alphas.values()) / len(alphas)
