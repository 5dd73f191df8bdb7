"""Key-edge selection: pick the doorway edge where a scene gets cut.

Candidates are edges ranking in the top-k by edge betweenness whose two
endpoints both rank in the top-k by vertex betweenness. Among candidate
bridges, the winner is the edge crossed by the most supervised paths
(counted once per path, either traversal direction). If no candidate
bridge is crossed by any path the candidate pool is widened (2k, 4k, ...)
until one is found; a scene whose bridges are never crossed has no key
edge at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TYPE_CHECKING

from . import centrality
from .errors import NoKeyEdge
from .nav_graph import Edge, SceneGraph

if TYPE_CHECKING:
    from .splice import PathRecord

DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class KeyEdge:
    """Selected cut edge with selection diagnostics (1-based ranks)."""

    scene_id: str
    v_s: str
    v_t: str
    path_count: int
    vc_rank_s: int
    vc_rank_t: int
    ec_rank: int

    def __post_init__(self) -> None:
        if self.v_s > self.v_t:
            raise ValueError("v_s must be the smaller endpoint id")

    @property
    def edge(self) -> Edge:
        return (self.v_s, self.v_t)


def count_paths_through_edge(e: tuple[str, str], paths: Sequence["PathRecord"]) -> int:
    """Number of paths traversing ``e`` at least once, in either direction."""
    key = frozenset(e)
    n = 0
    for p in paths:
        verts = p.vertices
        for u, v in zip(verts, verts[1:]):
            if frozenset((u, v)) == key:
                n += 1
                break
    return n


def _ranked_vertices(g: SceneGraph, scores: dict[str, float]) -> list[str]:
    return sorted(g.vertices, key=lambda v: (-scores[v], v))


def _ranked_edges(g: SceneGraph, scores: dict[Edge, float]) -> list[Edge]:
    return sorted(g.edges, key=lambda e: (-scores[e], e))


def candidate_key_edges(g: SceneGraph, k: int = DEFAULT_TOP_K) -> list[Edge]:
    """Top-k edges by edge betweenness with both endpoints in the vertex top-k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    centrality._check_connected(g)
    scores = centrality._brandes(g)
    top_vertices = set(_ranked_vertices(g, scores.vertex_scores)[:k])
    top_edges = _ranked_edges(g, scores.edge_scores)[:k]
    return sorted(e for e in top_edges if e[0] in top_vertices and e[1] in top_vertices)


def select_key_edge(
    g: SceneGraph, paths: Sequence["PathRecord"], k: int = DEFAULT_TOP_K
) -> KeyEdge:
    """Run the full selection for one scene against its supervised paths."""
    if not paths:
        raise NoKeyEdge(f"scene {g.scene_id}: no supervised paths given")
    centrality._check_connected(g)
    scores = centrality._brandes(g)
    vertex_order = _ranked_vertices(g, scores.vertex_scores)
    edge_order = _ranked_edges(g, scores.edge_scores)
    vertex_rank = {v: i + 1 for i, v in enumerate(vertex_order)}
    edge_rank = {e: i + 1 for i, e in enumerate(edge_order)}
    exhausted = max(len(vertex_order), len(edge_order))

    width = k
    while True:
        top_vertices = set(vertex_order[:width])
        candidates = sorted(
            e
            for e in edge_order[:width]
            if e[0] in top_vertices and e[1] in top_vertices and e in g.bridges
        )
        best: tuple[int, Edge] | None = None
        for e in candidates:
            n_e = count_paths_through_edge(e, paths)
            if n_e >= 1 and (best is None or n_e > best[0]):
                best = (n_e, e)
        if best is not None:
            n_e, (v_s, v_t) = best
            return KeyEdge(
                scene_id=g.scene_id,
                v_s=v_s,
                v_t=v_t,
                path_count=n_e,
                vc_rank_s=vertex_rank[v_s],
                vc_rank_t=vertex_rank[v_t],
                ec_rank=edge_rank[(v_s, v_t)],
            )
        if width >= exhausted:
            raise NoKeyEdge(
                f"scene {g.scene_id}: no bridge is crossed by any supervised path"
            )
        width *= 2
