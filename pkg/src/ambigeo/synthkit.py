"""Synthetic labeled embedding sets emulating ambiguity geometry.

Cluster centres are placed on the unit sphere with an exact common
pairwise distance (simplex Gram construction embedded through a random
orthonormal frame); points are isotropic Gaussian draws around them.  One
cluster emulates an unambiguous word, a few far-apart clusters a homonym,
several close clusters a polyseme.  The naive_* functions are deliberately
slow, loop-based oracles kept independent of the geometry module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from . import stats
from .embedstore import EmbeddingSet, LabeledEmbeddingSet
from .errors import ConfigError, DomainError, InsufficientDataError
from .geometry import DiversityRecord, embedding_diversity
from .rng import mix_seed


@dataclass(frozen=True)
class ClusterSpec:
    n_clusters: int
    points_per_cluster: int
    dim: int
    centre_separation: float  # pairwise distance between unit centres
    within_spread: float  # isotropic Gaussian sd around each centre
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_clusters < 1:
            raise ConfigError("n_clusters must be >= 1")
        if self.points_per_cluster < 1:
            raise ConfigError("points_per_cluster must be >= 1")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.centre_separation <= 0 or self.within_spread <= 0:
            raise ConfigError("centre_separation and within_spread must be positive")


@dataclass(frozen=True)
class ExperimentResult:
    diversity: dict[str, list[DiversityRecord]]  # condition -> per-word records
    condition_means: dict[str, float]
    anova: stats.AnovaResult
    welch: dict[str, tuple[float, float, float]]  # "a|b" -> (t, df, p)


def _unit_centres(spec: ClusterSpec, rng: np.random.Generator) -> np.ndarray:
    """n_clusters unit vectors with exact pairwise distance centre_separation."""
    k = spec.n_clusters
    if spec.dim < k:
        raise ConfigError(
            f"dim={spec.dim} is too small for {k} mutually separated centres"
        )
    frame, _ = np.linalg.qr(rng.normal(size=(spec.dim, k)))
    if k == 1:
        return frame.T  # one random unit direction

    rho = 1.0 - spec.centre_separation**2 / 2.0
    if 1.0 + (k - 1) * rho < -1e-12:
        limit = math.sqrt(2.0 * k / (k - 1))
        raise ConfigError(
            f"centre_separation {spec.centre_separation} exceeds the "
            f"{limit:.4f} limit for {k} unit centres"
        )
    gram = np.full((k, k), rho)
    np.fill_diagonal(gram, 1.0)
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    factor = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))
    return factor @ frame.T  # rows: centres in R^dim with Gram == gram


def gen_cluster_set(spec: ClusterSpec, word: str = "synth") -> LabeledEmbeddingSet:
    """Deterministic per seed; labels are cluster ids c0..c{k-1}."""
    rng = np.random.default_rng(spec.seed)
    centres = _unit_centres(spec, rng)
    n_total = spec.n_clusters * spec.points_per_cluster
    noise = rng.normal(0.0, spec.within_spread, size=(n_total, spec.dim))
    vectors = np.repeat(centres, spec.points_per_cluster, axis=0) + noise
    if np.any(np.linalg.norm(vectors, axis=1) == 0.0):
        raise DomainError("generated a zero-norm vector; change the seed")

    labels = [
        f"c{cluster}"
        for cluster in range(spec.n_clusters)
        for _ in range(spec.points_per_cluster)
    ]
    context_ids = [f"{word}-{i:05d}" for i in range(n_total)]
    emb = EmbeddingSet(word=word, context_ids=context_ids, vectors=vectors)
    return LabeledEmbeddingSet(emb, labels)


def simulate_ambiguity_experiment(
    profiles: Mapping[str, ClusterSpec],
    words_per_condition: int,
    seed: int = 0,
) -> ExperimentResult:
    """Per-condition synthetic words, their diversities, and test statistics.

    Every word gets its own derived seed (experiment seed, condition index,
    word index), so streams are independent but reproducible.
    """
    if len(profiles) < 2:
        raise InsufficientDataError("need at least two conditions")
    if words_per_condition < 2:
        raise InsufficientDataError("need at least two words per condition")

    diversity: dict[str, list[DiversityRecord]] = {}
    for cond_index, (condition, spec) in enumerate(profiles.items()):
        records = []
        for word_index in range(words_per_condition):
            word_seed = mix_seed(seed, cond_index, word_index)
            data = gen_cluster_set(
                replace(spec, seed=word_seed),
                word=f"{condition}-w{word_index:03d}",
            )
            records.append(embedding_diversity(data.set))
        diversity[condition] = records

    values = {
        condition: [r.diversity for r in records]
        for condition, records in diversity.items()
    }
    anova = stats.one_way_anova(list(values.values()))
    welch: dict[str, tuple[float, float, float]] = {}
    names = list(values)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            welch[f"{a}|{b}"] = stats.welch_t(values[a], values[b])
    means = {condition: float(np.mean(v)) for condition, v in values.items()}
    return ExperimentResult(
        diversity=diversity, condition_means=means, anova=anova, welch=welch
    )


# --------------------------------------------------------------------------
# brute-force oracles (independent of the geometry module on purpose)


def naive_cosine(u: Sequence[float], v: Sequence[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    return dot / (nu * nv)


def naive_diversity(rows: Sequence[Sequence[float]]) -> float:
    """Double-loop mean pairwise cosine distance."""
    n = len(rows)
    total = 0.0
    pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += 1.0 - naive_cosine(rows[i], rows[j])
            pairs += 1
    return total / pairs


def naive_group_means(
    rows: Sequence[Sequence[float]], labels: Sequence[str]
) -> tuple[float, float]:
    """Double-loop (within_mean, between_mean) cosine similarity."""
    within: list[float] = []
    between: list[float] = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            sim = naive_cosine(rows[i], rows[j])
            (within if labels[i] == labels[j] else between).append(sim)
    return sum(within) / len(within), sum(between) / len(between)
