"""Vertex and edge betweenness centrality on unweighted scene graphs.

Shortest paths are hop-count shortest paths. Scores are unnormalized and
counted over unordered vertex pairs {s, t}: each pair contributes the
fraction of its shortest paths passing through the vertex (as an interior
vertex) or through the edge (endpoint pairs included). The fast route is
Brandes' accumulation; ``brute_force_betweenness`` enumerates every
shortest path explicitly and exists to cross-check it on small graphs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import DisconnectedGraph, GraphTooLarge
from .nav_graph import Edge, SceneGraph, norm_edge

BRUTE_FORCE_MAX_VERTICES = 12


@dataclass(frozen=True)
class CentralityScores:
    vertex_scores: dict[str, float]
    edge_scores: dict[Edge, float]


def _check_connected(g: SceneGraph) -> None:
    if len(g._bfs_from(min(g.vertices))) != len(g.vertices):
        raise DisconnectedGraph(f"scene {g.scene_id} is not connected")


def _brandes(g: SceneGraph) -> CentralityScores:
    """One pass of Brandes' algorithm producing both score maps.

    Sources are visited in sorted order and neighbor lists are sorted, so
    floating-point accumulation order is reproducible.
    """
    vertex_scores = {v: 0.0 for v in g.vertices}
    edge_scores: dict[Edge, float] = {e: 0.0 for e in g.edges}

    for source in sorted(g.vertices):
        stack: list[str] = []
        preds: dict[str, list[str]] = {v: [] for v in g.vertices}
        sigma = {v: 0.0 for v in g.vertices}
        dist = {v: -1 for v in g.vertices}
        sigma[source] = 1.0
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in g.adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)

        delta = {v: 0.0 for v in g.vertices}
        while stack:
            w = stack.pop()
            for v in preds[w]:
                c = sigma[v] / sigma[w] * (1.0 + delta[w])
                edge_scores[norm_edge(v, w)] += c
                delta[v] += c
            if w != source:
                vertex_scores[w] += delta[w]

    # each unordered pair was visited from both endpoints
    return CentralityScores(
        vertex_scores={v: s / 2.0 for v, s in vertex_scores.items()},
        edge_scores={e: s / 2.0 for e, s in edge_scores.items()},
    )


def vertex_betweenness(g: SceneGraph) -> dict[str, float]:
    """Betweenness of every vertex (pairs with the vertex itself excluded)."""
    _check_connected(g)
    return _brandes(g).vertex_scores


def edge_betweenness(g: SceneGraph) -> dict[Edge, float]:
    """Betweenness of every edge, endpoint pairs included."""
    _check_connected(g)
    return _brandes(g).edge_scores


def _all_shortest_paths(g: SceneGraph, s: str, t: str) -> list[list[str]]:
    """Every hop-shortest s-t path, via BFS layering then backward DFS."""
    dist = {s: 0}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w in g.adjacency[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    paths: list[list[str]] = []
    rev: list[str] = [t]

    def walk(v: str) -> None:
        if v == s:
            paths.append(list(reversed(rev)))
            return
        for w in g.adjacency[v]:
            if dist.get(w, -1) == dist[v] - 1:
                rev.append(w)
                walk(w)
                rev.pop()

    walk(t)
    return paths


def brute_force_betweenness(g: SceneGraph) -> CentralityScores:
    """Exact scores by explicit enumeration of all shortest paths.

    Deliberately naive; refuses graphs above BRUTE_FORCE_MAX_VERTICES.
    """
    if len(g.vertices) > BRUTE_FORCE_MAX_VERTICES:
        raise GraphTooLarge(
            f"{len(g.vertices)} vertices exceeds oracle limit {BRUTE_FORCE_MAX_VERTICES}"
        )
    _check_connected(g)
    vertex_scores = {v: 0.0 for v in g.vertices}
    edge_scores: dict[Edge, float] = {e: 0.0 for e in g.edges}
    ids = sorted(g.vertices)
    for i, s in enumerate(ids):
        for t in ids[i + 1 :]:
            paths = _all_shortest_paths(g, s, t)
            sigma = float(len(paths))
            through_vertex: dict[str, int] = {}
            through_edge: dict[Edge, int] = {}
            for path in paths:
                for v in path[1:-1]:
                    through_vertex[v] = through_vertex.get(v, 0) + 1
                for u, w in zip(path, path[1:]):
                    e = norm_edge(u, w)
                    through_edge[e] = through_edge.get(e, 0) + 1
            for v, n in through_vertex.items():
                vertex_scores[v] += n / sigma
            for e, n in through_edge.items():
                edge_scores[e] += n / sigma
    return CentralityScores(vertex_scores=vertex_scores, edge_scores=edge_scores)
