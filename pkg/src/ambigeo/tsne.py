"""Exact t-SNE: perplexity-calibrated affinities and KL gradient descent.

High-dimensional affinities are per-row Gaussian conditionals whose
bandwidths are found by binary search on the entropy-implied perplexity,
then symmetrized to a joint distribution.  The low-dimensional kernel is
Student-t with one degree of freedom.  Optimization is plain momentum
gradient descent with early exaggeration; no Barnes-Hut approximation, so
cost is O(n^2) per iteration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .errors import ConfigError, ConvergenceError, DegenerateInputError, ShapeError

PERPLEXITY_TOLERANCE = 1e-3
MAX_SEARCH_STEPS = 100
EXAGGERATION_ITERATIONS = 250
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration_factor: float = 12.0
    seed: int = 0
    output_dim: int = 2

    def __post_init__(self) -> None:
        if self.perplexity <= 0:
            raise ConfigError(f"perplexity must be positive, got {self.perplexity}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.output_dim != 2:
            raise ConfigError("output_dim is fixed at 2")
        if self.exaggeration_enabled and self.iterations < EXAGGERATION_ITERATIONS:
            raise ConfigError(
                f"iterations must be >= {EXAGGERATION_ITERATIONS} while early "
                f"exaggeration is enabled (factor != 1)"
            )

    @property
    def exaggeration_enabled(self) -> bool:
        return self.early_exaggeration_factor != 1.0


@dataclass(frozen=True)
class TsneResult:
    layout: np.ndarray  # (n, 2)
    kl_trace: np.ndarray  # per-iteration KL against the unexaggerated P


def _squared_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def _row_entropy(d_sq: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Shannon entropy (nats) and probabilities for one row at bandwidth beta."""
    logits = -beta * d_sq
    shift = logits.max()
    weights = np.exp(logits - shift)
    total = weights.sum()
    probs = weights / total
    entropy = math.log(total) + shift + beta * float(np.dot(probs, d_sq))
    return entropy, probs


def hd_affinities(x: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized joint affinities P with each row calibrated to perplexity.

    The per-row bandwidth search runs until the realized perplexity is
    within 1e-3 of the target (at most 100 steps); failure raises rather
    than returning an uncalibrated row.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"expected 2-d input, got shape {x.shape}")
    n = x.shape[0]
    if n < 3:
        raise ShapeError(f"need at least 3 points, got {n}")
    if not perplexity < n:
        raise ConfigError(f"perplexity {perplexity} must be below point count {n}")
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError("input contains non-finite values")

    d_sq = _squared_distances(x)
    conditional = np.zeros((n, n))
    others = np.arange(n)
    for i in range(n):
        row = d_sq[i, np.delete(others, i)]
        if row.max() == 0.0:
            raise DegenerateInputError(
                f"row {i}: all pairwise distances are zero (duplicate points)"
            )
        probs = _calibrate_row(row, perplexity, i)
        conditional[i, np.delete(others, i)] = probs
    joint = (conditional + conditional.T) / (2.0 * n)
    np.fill_diagonal(joint, 0.0)
    return joint


def _calibrate_row(d_sq_row: np.ndarray, perplexity: float, row_index: int) -> np.ndarray:
    spread = float(d_sq_row.max() - d_sq_row.min())
    if spread <= 1e-9 * float(d_sq_row.max()):
        # Equidistant neighbours (up to fp noise): the conditional is
        # uniform for every bandwidth, so no perplexity target below n-1
        # is reachable and calibrating on the noise would be meaningless.
        return np.full(d_sq_row.shape, 1.0 / d_sq_row.size)
    beta = 1.0
    lo: float | None = None
    hi: float | None = None
    for _ in range(MAX_SEARCH_STEPS):
        entropy, probs = _row_entropy(d_sq_row, beta)
        realized = math.exp(entropy)
        if abs(realized - perplexity) <= PERPLEXITY_TOLERANCE:
            return probs
        if realized > perplexity:  # kernel too flat: narrow it
            lo = beta
            beta = beta * 2.0 if hi is None else (beta + hi) / 2.0
        else:
            hi = beta
            beta = beta / 2.0 if lo is None else (beta + lo) / 2.0
    raise ConvergenceError(
        f"row {row_index}: perplexity search did not reach {perplexity} "
        f"within {MAX_SEARCH_STEPS} steps"
    )


def _student_t_q(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized Student-t weights and the normalized Q matrix."""
    weights = 1.0 / (1.0 + _squared_distances(y))
    np.fill_diagonal(weights, 0.0)
    q = weights / weights.sum()
    return weights, q


def kl_gradient(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of KL(P || Q): 4 sum_j (p_ij - q_ij) w_ij (y_i - y_j)."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != 2:
        raise ShapeError(f"layout must be (n, 2), got {y.shape}")
    if p.shape != (y.shape[0], y.shape[0]):
        raise ShapeError(f"affinity shape {p.shape} does not match layout {y.shape}")
    weights, q = _student_t_q(y)
    pq_w = (p - q) * weights
    return 4.0 * (pq_w.sum(axis=1)[:, None] * y - pq_w @ y)


def kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    _, q = _student_t_q(y)
    mask = p > 0.0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def tsne_embed(x: np.ndarray, config: TsneConfig = TsneConfig()) -> TsneResult:
    """Run the full embedding; deterministic for fixed (x, config)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2 and x.shape[0] > 1 and np.all(x == x[0]):
        raise DegenerateInputError("all points identical; refusing to jitter")
    p = hd_affinities(x, config.perplexity)
    n = x.shape[0]

    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, 1e-4, size=(n, config.output_dim))
    velocity = np.zeros_like(y)
    kl_trace = np.empty(config.iterations)

    for iteration in range(config.iterations):
        exaggerating = (
            config.exaggeration_enabled and iteration < EXAGGERATION_ITERATIONS
        )
        p_eff = p * config.early_exaggeration_factor if exaggerating else p
        grad = kl_gradient(p_eff, y)
        momentum = MOMENTUM_EARLY if iteration < EXAGGERATION_ITERATIONS else MOMENTUM_LATE
        velocity = momentum * velocity - config.learning_rate * grad
        y = y + velocity
        y = y - y.mean(axis=0)
        kl_trace[iteration] = kl_divergence(p, y)

    y = y - y.mean(axis=0)
    return TsneResult(layout=y, kl_trace=kl_trace)


def write_layout_csv(
    layout: np.ndarray,
    context_ids: Sequence[str],
    sink: IO[str],
    labels: Sequence[str] | None = None,
) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    if labels is None:
        writer.writerow(["context_id", "x", "y"])
        for cid, (px, py) in zip(context_ids, layout):
            writer.writerow([cid, repr(float(px)), repr(float(py))])
    else:
        writer.writerow(["context_id", "x", "y", "label"])
        for cid, (px, py), label in zip(context_ids, layout, labels):
            writer.writerow([cid, repr(float(px)), repr(float(py)), label])


def write_kl_csv(kl_trace: np.ndarray, sink: IO[str]) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["iteration", "kl"])
    for iteration, value in enumerate(kl_trace):
        writer.writerow([iteration, repr(float(value))])
