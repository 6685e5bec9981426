"""Nearest-neighbour overlay graphs rendered over a 2-D layout.

Edges are chosen by cosine distance in the original high-dimensional
space, never by layout distance, so the overlay exposes neighbourhoods the
2-D projection may have torn apart.  Edge colour interpolates from the
near colour (red) at this graph's minimum distance to the far colour
(blue) at its maximum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import DomainError, EmptyDatasetError, ShapeError

DEFAULT_NEAR = "#ff0000"
DEFAULT_FAR = "#0000ff"
UNLABELED_FILL = "#333333"

# Categorical fill cycle for point labels.
LABEL_COLOURS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896",
)

VIEWBOX = 1000.0
MARGIN_FRACTION = 0.05


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    hd_distance: float  # cosine distance in the high-dimensional space
    rank: int  # 1 = nearest neighbour


@dataclass(frozen=True)
class ProxigramGraph:
    points: np.ndarray  # (n, 2) layout coordinates
    context_ids: tuple[str, ...]
    labels: tuple[str, ...] | None
    edges: tuple[Edge, ...]
    k: int


def knn_graph(
    x_hd: np.ndarray,
    layout: np.ndarray,
    k: int,
    context_ids: Sequence[str] | None = None,
    labels: Sequence[str] | None = None,
) -> ProxigramGraph:
    """k nearest neighbours per point by high-dimensional cosine distance.

    Ties break toward the lower point index; k is clamped to n - 1 so each
    point always carries exactly min(k, n - 1) outgoing edges.
    """
    x_hd = np.asarray(x_hd, dtype=np.float64)
    layout = np.asarray(layout, dtype=np.float64)
    n = x_hd.shape[0]
    if x_hd.ndim != 2 or layout.shape != (n, 2):
        raise ShapeError(
            f"incompatible shapes: embeddings {x_hd.shape}, layout {layout.shape}"
        )
    if n < 2:
        raise ShapeError(f"need at least 2 points, got {n}")
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    effective_k = min(k, n - 1)

    norms = np.linalg.norm(x_hd, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise DomainError(f"zero-norm high-dimensional row {bad[0]}")
    unit = x_hd / norms[:, None]
    distances = 1.0 - np.clip(unit @ unit.T, -1.0, 1.0)

    if context_ids is None:
        context_ids = [f"p{i}" for i in range(n)]
    if len(context_ids) != n or (labels is not None and len(labels) != n):
        raise ShapeError("context_ids/labels length must equal point count")

    edges = []
    for i in range(n):
        row = distances[i].copy()
        row[i] = np.inf
        order = np.argsort(row, kind="stable")  # stable: ties keep lower index
        for rank, j in enumerate(order[:effective_k], start=1):
            edges.append(Edge(i, int(j), float(distances[i, j]), rank))
    return ProxigramGraph(
        points=layout,
        context_ids=tuple(context_ids),
        labels=tuple(labels) if labels is not None else None,
        edges=tuple(edges),
        k=effective_k,
    )


def _parse_colour(colour: str) -> tuple[int, int, int]:
    if len(colour) != 7 or not colour.startswith("#"):
        raise DomainError(f"colour must look like #rrggbb, got {colour!r}")
    return int(colour[1:3], 16), int(colour[3:5], 16), int(colour[5:7], 16)


def _blend(near: str, far: str, t: float) -> str:
    a = _parse_colour(near)
    b = _parse_colour(far)
    mixed = tuple(round(ca + (cb - ca) * t) for ca, cb in zip(a, b))
    return "#{:02x}{:02x}{:02x}".format(*mixed)


def _axis_map(values: np.ndarray, flip: bool) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    margin = VIEWBOX * MARGIN_FRACTION
    usable = VIEWBOX - 2.0 * margin
    if hi == lo:
        return np.full_like(values, VIEWBOX / 2.0)
    scaled = (values - lo) / (hi - lo)
    if flip:
        scaled = 1.0 - scaled
    return margin + scaled * usable


def render_proxigram(
    graph: ProxigramGraph,
    palette: tuple[str, str] = (DEFAULT_NEAR, DEFAULT_FAR),
) -> str:
    """Byte-deterministic SVG 1.1 document: one line per edge, one circle per point."""
    n = graph.points.shape[0]
    if n == 0:
        raise EmptyDatasetError("cannot render an empty graph")
    near, far = palette
    xs = _axis_map(graph.points[:, 0], flip=False)
    ys = _axis_map(graph.points[:, 1], flip=True)

    if graph.edges:
        dist = np.array([e.hd_distance for e in graph.edges])
        d_lo, d_hi = float(dist.min()), float(dist.max())
    else:
        d_lo = d_hi = 0.0

    fills = _point_fills(graph)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {VIEWBOX:.0f} {VIEWBOX:.0f}">\n',
        '<g stroke-width="1.5">\n',
    ]
    for edge in graph.edges:
        if d_hi == d_lo:
            colour = near  # degenerate range: everything is equally near
        else:
            colour = _blend(near, far, (edge.hd_distance - d_lo) / (d_hi - d_lo))
        title = escape(
            f"{graph.context_ids[edge.source]} -> {graph.context_ids[edge.target]}"
        )
        parts.append(
            f'<line x1="{xs[edge.source]:.3f}" y1="{ys[edge.source]:.3f}" '
            f'x2="{xs[edge.target]:.3f}" y2="{ys[edge.target]:.3f}" '
            f'stroke="{colour}"><title>{title}</title></line>\n'
        )
    parts.append("</g>\n<g>\n")
    for i in range(n):
        title = escape(graph.context_ids[i])
        parts.append(
            f'<circle cx="{xs[i]:.3f}" cy="{ys[i]:.3f}" r="6" '
            f'fill="{fills[i]}"><title>{title}</title></circle>\n'
        )
    parts.append("</g>\n</svg>\n")
    return "".join(parts)


def _point_fills(graph: ProxigramGraph) -> list[str]:
    if graph.labels is None:
        return [UNLABELED_FILL] * graph.points.shape[0]
    palette = {
        label: LABEL_COLOURS[i % len(LABEL_COLOURS)]
        for i, label in enumerate(sorted(set(graph.labels)))
    }
    return [palette[label] for label in graph.labels]


def graph_to_dict(graph: ProxigramGraph) -> dict:
    return {
        "k": graph.k,
        "context_ids": list(graph.context_ids),
        "labels": list(graph.labels) if graph.labels is not None else None,
        "points": [[float(x), float(y)] for x, y in graph.points],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "hd_distance": e.hd_distance,
                "rank": e.rank,
            }
            for e in graph.edges
        ],
    }


def write_graph_json(graph: ProxigramGraph, sink) -> None:
    json.dump(graph_to_dict(graph), sink, indent=2)
    sink.write("\n")
