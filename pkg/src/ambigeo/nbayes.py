"""Gaussian Naive Bayes sense classifier with a seeded half split.

The split shuffles indices with the package's own xoshiro256** generator
(see rng module), so plans are reproducible across platforms; no attempt
is made to be bit-compatible with any external library's shuffle.
Variances are smoothed by a ratio of the largest single-dimension variance
of the whole training matrix, so no dimension ever ends up with zero
variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, SplitError, UnknownClassError, ValidationError
from .rng import Xoshiro256StarStar


@dataclass(frozen=True)
class SplitPlan:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int
    test_fraction: float


@dataclass(frozen=True)
class GnbModel:
    classes: tuple[str, ...]
    priors: np.ndarray  # (n_classes,)
    means: np.ndarray  # (n_classes, dim)
    variances: np.ndarray  # (n_classes, dim), strictly positive

    def __post_init__(self) -> None:
        if abs(float(self.priors.sum()) - 1.0) > 1e-12:
            raise ValidationError("class priors must sum to 1")
        if not np.all(self.variances > 0.0):
            raise ValidationError("variances must be strictly positive")


def split_half(n: int, test_fraction: float = 0.5, seed: int = 0) -> SplitPlan:
    """Seeded Fisher-Yates shuffle, then a prefix/suffix split.

    The first round(n * test_fraction) shuffled indices form the test
    side (round = half up).  Unstratified.
    """
    if n < 2:
        raise SplitError(f"need at least 2 rows to split, got {n}")
    if not 0.0 < test_fraction < 1.0:
        raise SplitError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(np.floor(n * test_fraction + 0.5))
    if n_test == 0 or n_test == n:
        raise SplitError(
            f"fraction {test_fraction} of {n} rows leaves an empty side"
        )
    order = list(range(n))
    Xoshiro256StarStar(seed).shuffle(order)
    return SplitPlan(
        train_indices=tuple(order[n_test:]),
        test_indices=tuple(order[:n_test]),
        seed=seed,
        test_fraction=test_fraction,
    )


def stratified_split_half(
    labels: list[str], test_fraction: float = 0.5, seed: int = 0
) -> SplitPlan:
    """Per-class variant of split_half; class substreams derive from seed."""
    if len(labels) < 2:
        raise SplitError(f"need at least 2 rows to split, got {len(labels)}")
    train: list[int] = []
    test: list[int] = []
    for offset, cls in enumerate(sorted(set(labels))):
        members = [i for i, label in enumerate(labels) if label == cls]
        if len(members) < 2:
            raise SplitError(f"class {cls!r} has fewer than 2 rows; cannot stratify")
        plan = split_half(len(members), test_fraction, seed + offset + 1)
        train.extend(members[i] for i in plan.train_indices)
        test.extend(members[i] for i in plan.test_indices)
    return SplitPlan(
        train_indices=tuple(sorted(train)),
        test_indices=tuple(sorted(test)),
        seed=seed,
        test_fraction=test_fraction,
    )


def fit_gnb(
    x: np.ndarray, y: list[str], smoothing_eps_ratio: float = 1e-9
) -> GnbModel:
    """Per-class Gaussian fit; classes are ordered by sorted label."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ShapeError(f"training matrix must be 2-d and non-empty, got {x.shape}")
    if len(y) != x.shape[0]:
        raise ShapeError(f"{len(y)} labels for {x.shape[0]} rows")

    classes = tuple(sorted(set(y)))
    labels = np.asarray(y)
    epsilon = smoothing_eps_ratio * float(np.var(x, axis=0).max())
    if epsilon == 0.0:
        # Entirely constant data: fall back to the raw ratio so variances
        # stay strictly positive.
        epsilon = smoothing_eps_ratio

    priors = np.empty(len(classes))
    means = np.empty((len(classes), x.shape[1]))
    variances = np.empty((len(classes), x.shape[1]))
    for idx, cls in enumerate(classes):
        rows = x[labels == cls]
        priors[idx] = rows.shape[0] / x.shape[0]
        means[idx] = rows.mean(axis=0)
        variances[idx] = rows.var(axis=0) + epsilon
    return GnbModel(classes=classes, priors=priors, means=means, variances=variances)


def log_scores(model: GnbModel, x: np.ndarray) -> np.ndarray:
    """Per-class log prior + Gaussian log likelihood, shape (rows, classes)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.means.shape[1]:
        raise ShapeError(
            f"input dim {x.shape} does not match model dim {model.means.shape[1]}"
        )
    scores = np.empty((x.shape[0], len(model.classes)))
    for idx in range(len(model.classes)):
        mean, var = model.means[idx], model.variances[idx]
        log_density = -0.5 * np.sum(
            np.log(2.0 * np.pi * var) + (x - mean) ** 2 / var, axis=1
        )
        scores[:, idx] = np.log(model.priors[idx]) + log_density
    return scores


def predict_gnb(model: GnbModel, x: np.ndarray) -> tuple[list[str], np.ndarray]:
    """argmax over class log scores; ties resolve to the earlier class."""
    scores = log_scores(model, x)
    winners = np.argmax(scores, axis=1)  # first max wins: class-order tie rule
    return [model.classes[i] for i in winners], scores


def accuracy(predicted: list[str], truth: list[str]) -> float:
    if len(predicted) != len(truth) or not predicted:
        raise ShapeError(
            f"label lists must be equal non-zero length, got "
            f"{len(predicted)} and {len(truth)}"
        )
    hits = sum(1 for p, t in zip(predicted, truth) if p == t)
    return hits / len(predicted)


def classification_report(
    model: GnbModel, predicted: list[str], truth: list[str]
) -> dict:
    """JSON-ready report: accuracy, per-class support, confusion matrix."""
    for label in truth:
        if label not in model.classes:
            raise UnknownClassError(f"true label {label!r} unseen at training time")
    index = {cls: i for i, cls in enumerate(model.classes)}
    confusion = np.zeros((len(model.classes), len(model.classes)), dtype=int)
    for p, t in zip(predicted, truth):
        confusion[index[t], index[p]] += 1
    return {
        "classes": list(model.classes),
        "accuracy": accuracy(predicted, truth),
        "support": {cls: int(confusion[index[cls]].sum()) for cls in model.classes},
        "confusion_matrix": confusion.tolist(),
    }


def model_to_dict(model: GnbModel) -> dict:
    return {
        "classes": list(model.classes),
        "priors": model.priors.tolist(),
        "means": model.means.tolist(),
        "variances": model.variances.tolist(),
    }


def model_from_dict(data: dict) -> GnbModel:
    return GnbModel(
        classes=tuple(data["classes"]),
        priors=np.asarray(data["priors"], dtype=np.float64),
        means=np.asarray(data["means"], dtype=np.float64),
        variances=np.asarray(data["variances"], dtype=np.float64),
    )
