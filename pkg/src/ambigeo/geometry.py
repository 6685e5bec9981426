"""Cosine similarity, embedding diversity, and group-similarity metrics.

Diversity is the mean of (1 - cosine similarity) over all unordered
distinct row pairs of a word's embedding matrix; group similarity splits
the same pair population into same-label and different-label pairs.  All
accumulation happens in float64 with a fixed row-major pair order, so
results are bit-reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from . import stats
from .embedstore import EmbeddingSet, LabeledEmbeddingSet
from .errors import DomainError, InsufficientDataError, ShapeError


@dataclass(frozen=True)
class DiversityRecord:
    word: str
    context_count: int
    diversity: float  # mean pairwise cosine distance, in [0, 2]


@dataclass(frozen=True)
class GroupSimilarityReport:
    within_mean: float
    between_mean: float
    per_group_within: dict[str, float]
    ci_level: float
    within_ci: tuple[float, float]
    between_ci: tuple[float, float]


@dataclass(frozen=True)
class PairRecord:
    word: str
    group_status: str  # "within" or "between"
    similarity: float


def cosine_similarity(u, v) -> float:
    """dot(u, v) / (|u| |v|) in float64, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ShapeError(f"incompatible shapes {u.shape} and {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise DomainError("cosine similarity undefined for zero-norm vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _unit_rows(vectors: np.ndarray, word: str) -> np.ndarray:
    rows = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(rows, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise DomainError(f"zero-norm embedding row {bad[0]} for {word!r}")
    return rows / norms[:, None]


def _pair_similarities(vectors: np.ndarray, word: str) -> np.ndarray:
    """Similarities of all unordered pairs, row-major order, clamped."""
    unit = _unit_rows(vectors, word)
    sims = np.clip(unit @ unit.T, -1.0, 1.0)
    iu, ju = np.triu_indices(unit.shape[0], k=1)
    return sims[iu, ju]


def embedding_diversity(emb: EmbeddingSet) -> DiversityRecord:
    """Mean of 1 - cosine similarity over all unordered distinct row pairs."""
    if emb.count < 2:
        raise InsufficientDataError(
            f"diversity needs >= 2 contexts, got {emb.count} for {emb.word!r}"
        )
    sims = _pair_similarities(emb.vectors, emb.word)
    diversity = float(np.sum(1.0 - sims) / sims.size)
    return DiversityRecord(word=emb.word, context_count=emb.count, diversity=diversity)


def pairwise_records(data: LabeledEmbeddingSet) -> list[PairRecord]:
    """One record per unordered pair, flagged within/between by shared label."""
    _check_groups(data)
    sims = _pair_similarities(data.set.vectors, data.set.word)
    labels = data.labels
    n = data.set.count
    records = []
    pos = 0
    for i in range(n):
        for j in range(i + 1, n):
            status = "within" if labels[i] == labels[j] else "between"
            records.append(PairRecord(data.set.word, status, float(sims[pos])))
            pos += 1
    return records


def group_similarity(data: LabeledEmbeddingSet, ci_level: float = 0.99) -> GroupSimilarityReport:
    """Mean within-group and between-group cosine similarity with CIs.

    Confidence intervals use the normal approximation over the raw pair
    populations; pairs sharing a point are not independent, so the
    intervals are the plotted convention rather than exact coverage.
    """
    if not 0.0 < ci_level < 1.0:
        raise DomainError(f"ci_level must be in (0, 1), got {ci_level}")
    _check_groups(data)
    sims = _pair_similarities(data.set.vectors, data.set.word)
    labels = data.labels
    n = data.set.count

    within: list[float] = []
    between: list[float] = []
    by_group: dict[str, list[float]] = {}
    pos = 0
    for i in range(n):
        for j in range(i + 1, n):
            value = float(sims[pos])
            pos += 1
            if labels[i] == labels[j]:
                within.append(value)
                by_group.setdefault(labels[i], []).append(value)
            else:
                between.append(value)
    if not within:
        raise InsufficientDataError("no group has two members; no within pairs")

    within_mean, within_ci = _mean_with_ci(within, ci_level)
    between_mean, between_ci = _mean_with_ci(between, ci_level)
    per_group = {label: float(np.mean(vals)) for label, vals in sorted(by_group.items())}
    return GroupSimilarityReport(
        within_mean=within_mean,
        between_mean=between_mean,
        per_group_within=per_group,
        ci_level=ci_level,
        within_ci=within_ci,
        between_ci=between_ci,
    )


def _check_groups(data: LabeledEmbeddingSet) -> None:
    if len(set(data.labels)) < 2:
        raise InsufficientDataError(
            f"all rows of {data.set.word!r} share one label; no between pairs"
        )


def _mean_with_ci(values: list[float], level: float) -> tuple[float, tuple[float, float]]:
    if len(values) == 1:  # single pair: degenerate zero-width interval
        return values[0], (values[0], values[0])
    mean, lo, hi = stats.mean_ci(np.asarray(values), level)
    return mean, (lo, hi)


DIVERSITY_CSV_HEADER = ["word", "context_count", "diversity"]


def write_diversity_csv(records: Iterable[DiversityRecord], sink: IO[str]) -> int:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(DIVERSITY_CSV_HEADER)
    count = 0
    for record in records:
        writer.writerow([record.word, record.context_count, repr(record.diversity)])
        count += 1
    return count


def read_diversity_csv(source: IO[str]) -> list[DiversityRecord]:
    reader = csv.reader(source)
    header = next(reader, None)
    if header != DIVERSITY_CSV_HEADER:
        raise DomainError(f"bad diversity CSV header: {header}")
    return [
        DiversityRecord(word=row[0], context_count=int(row[1]), diversity=float(row[2]))
        for row in reader
        if row
    ]
