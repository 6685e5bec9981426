"""Tests for neighbour-graph construction and SVG rendering."""

import numpy as np
import pytest

from ambigeo.errors import DomainError, EmptyDatasetError, ShapeError
from ambigeo.proxigram import Edge, ProxigramGraph, knn_graph, render_proxigram
from ambigeo.synthkit import ClusterSpec, gen_cluster_set


def _line_points(positions, angle_scale=0.3):
    """Lift 1-d positions onto the unit circle: cosine distance grows with gap."""
    angles = np.asarray(positions, dtype=float) * angle_scale
    return np.column_stack([np.cos(angles), np.sin(angles)])


class TestKnnGraph:
    def test_three_points_on_a_line(self):
        x = _line_points([0.0, 1.0, 3.0])
        layout = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
        graph = knn_graph(x, layout, k=1)
        neighbour = {e.source: e.target for e in graph.edges}
        assert neighbour == {0: 1, 1: 0, 2: 1}

    def test_two_points(self):
        x = _line_points([0.0, 1.0])
        graph = knn_graph(x, np.zeros((2, 2)), k=5)
        assert {(e.source, e.target) for e in graph.edges} == {(0, 1), (1, 0)}
        assert graph.k == 1  # clamped to n - 1

    def test_complete_graph(self):
        x = _line_points([0.0, 1.0, 2.0, 4.0])
        graph = knn_graph(x, np.zeros((4, 2)), k=3)
        assert len(graph.edges) == 4 * 3

    def test_ranks_sorted_by_distance(self):
        x = _line_points([0.0, 1.0, 3.0, 7.0])
        graph = knn_graph(x, np.zeros((4, 2)), k=3)
        for i in range(4):
            own = sorted(
                (e for e in graph.edges if e.source == i), key=lambda e: e.rank
            )
            distances = [e.hd_distance for e in own]
            assert distances == sorted(distances)

    def test_tie_breaks_to_lower_index(self):
        # points 1 and 2 are identical: both at distance d from point 0
        x = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        graph = knn_graph(x, np.zeros((3, 2)), k=1)
        edge_from_0 = next(e for e in graph.edges if e.source == 0)
        assert edge_from_0.target == 1

    def test_edges_use_hd_distance_not_layout(self):
        """Permuting layout coordinates never changes the edge set."""
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 5))
        layout = rng.normal(size=(8, 2))
        base = knn_graph(x, layout, k=3)
        permuted = knn_graph(x, layout[::-1].copy(), k=3)
        key = lambda g: [(e.source, e.target, e.hd_distance, e.rank) for e in g.edges]
        assert key(base) == key(permuted)

    def test_zero_norm_row(self):
        x = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(DomainError):
            knn_graph(x, np.zeros((2, 2)), k=1)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            knn_graph(np.eye(3), np.zeros((4, 2)), k=1)


class TestRenderProxigram:
    def _graph(self, n=6, k=2, seed=0, labels=None):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, 4))
        layout = rng.normal(size=(n, 2))
        return knn_graph(x, layout, k, labels=labels)

    def test_structural_counts(self):
        graph = self._graph(n=7, k=3)
        svg = render_proxigram(graph)
        assert svg.count("<circle ") == 7
        assert svg.count("<line ") == 7 * 3

    def test_min_distance_edge_gets_near_colour(self):
        graph = self._graph(n=6, k=2)
        svg = render_proxigram(graph, palette=("#ff0000", "#0000ff"))
        nearest = min(graph.edges, key=lambda e: e.hd_distance)
        wanted_title = (
            f"<title>{graph.context_ids[nearest.source]} -&gt; "
            f"{graph.context_ids[nearest.target]}</title>"
        )
        nearest_lines = [
            line for line in svg.splitlines()
            if line.startswith("<line") and wanted_title in line
        ]
        assert nearest_lines and all(
            'stroke="#ff0000"' in line for line in nearest_lines
        )

    def test_equidistant_edges_all_near_colour(self):
        # three mutually orthogonal points: every pairwise distance is 1
        x = np.eye(3)
        graph = knn_graph(x, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), k=2)
        svg = render_proxigram(graph)
        for line in svg.splitlines():
            if line.startswith("<line"):
                assert 'stroke="#ff0000"' in line

    def test_byte_deterministic(self):
        graph = self._graph(n=9, k=3, seed=5)
        assert render_proxigram(graph) == render_proxigram(graph)

    def test_titles_carry_context_ids(self):
        graph = self._graph(n=4, k=1)
        svg = render_proxigram(graph)
        for cid in graph.context_ids:
            assert f"<title>{cid}</title>" in svg

    def test_label_fills_cycle(self):
        graph = self._graph(n=4, k=1, labels=["a", "a", "b", "b"])
        svg = render_proxigram(graph)
        fills = {
            line.split('fill="')[1].split('"')[0]
            for line in svg.splitlines()
            if line.startswith("<circle")
        }
        assert len(fills) == 2

    def test_empty_graph_rejected(self):
        empty = ProxigramGraph(
            points=np.zeros((0, 2)), context_ids=(), labels=None, edges=(), k=1
        )
        with pytest.raises(EmptyDatasetError):
            render_proxigram(empty)

    def test_coordinates_within_viewbox_margin(self):
        graph = self._graph(n=12, k=2, seed=9)
        svg = render_proxigram(graph)
        for line in svg.splitlines():
            if line.startswith("<circle"):
                cx = float(line.split('cx="')[1].split('"')[0])
                cy = float(line.split('cy="')[1].split('"')[0])
                assert 50.0 <= cx <= 950.0
                assert 50.0 <= cy <= 950.0


class TestClusterSeparation:
    def test_few_between_cluster_edges(self):
        """Two well-separated clusters keep >95% of k=3 edges internal."""
        data = gen_cluster_set(ClusterSpec(2, 30, 16, 1.2, 0.1, seed=0), word="w")
        x = np.asarray(data.set.vectors, dtype=np.float64)
        rng = np.random.default_rng(1)
        graph = knn_graph(x, rng.normal(size=(60, 2)), k=3, labels=data.labels)
        between = sum(
            1 for e in graph.edges if data.labels[e.source] != data.labels[e.target]
        )
        assert between / len(graph.edges) < 0.05
