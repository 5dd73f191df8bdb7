"""Discrete navigation scenes: a graph of viewpoints with 3-D positions,
undirected edges, and a 12x3 panoramic view grid per viewpoint.

Geometry conventions used everywhere downstream:

* Headings are measured clockwise from the +Y axis in the scene's X-Y
  plane, in radians within [0, 2*pi). Z is ignored (floors are treated
  as near-planar).
* The 12 horizontal panorama sectors are centered on multiples of 30
  degrees; sector ``i`` covers [30i-15, 30i+15) degrees, with boundary
  ties rounding to the higher index.

Scene graphs are immutable once built and validate themselves at
construction time, including connectivity: a disconnected scene is
rejected rather than repaired.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import (
    DegenerateDirection,
    DisconnectedGraph,
    InvariantViolation,
    NotABridge,
    UnknownEdge,
)

Vec3 = tuple[float, float, float]
Edge = tuple[str, str]

SECTOR_COUNT = 12
TIER_COUNT = 3
CELLS_PER_PANORAMA = SECTOR_COUNT * TIER_COUNT

TWO_PI = 2.0 * math.pi
SECTOR_WIDTH = TWO_PI / SECTOR_COUNT


def norm_edge(u: str, v: str) -> Edge:
    """Canonical undirected edge key: endpoint ids in ascending order."""
    if u == v:
        raise InvariantViolation(record=u, rule="self-loop")
    return (u, v) if u < v else (v, u)


def heading(origin: Vec3, target: Vec3) -> float:
    """Clockwise-from-+Y heading of the X-Y direction from origin to target.

    Raises DegenerateDirection when the two points coincide in X-Y: a
    vertical step has no horizontal direction.
    """
    dx = target[0] - origin[0]
    dy = target[1] - origin[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateDirection(f"zero X-Y offset between {origin} and {target}")
    h = math.atan2(dx, dy)
    if h < 0.0:
        h += TWO_PI
    if h >= TWO_PI:  # guards atan2(-eps, ...) + 2pi rounding up
        h -= TWO_PI
    return h


def heading_delta(a: float, b: float) -> float:
    """Signed smallest rotation from heading ``b`` to heading ``a``, in (-pi, pi]."""
    d = (a - b) % TWO_PI
    if d > math.pi:
        d -= TWO_PI
    return d


def sector_index(h: float) -> int:
    """Horizontal sector (0..11) containing heading ``h``.

    Sector i covers [30i-15, 30i+15) degrees; exact boundaries round up.
    """
    if not 0.0 <= h < TWO_PI:
        raise ValueError(f"heading {h!r} outside [0, 2*pi)")
    return int(math.floor(h / SECTOR_WIDTH + 0.5)) % SECTOR_COUNT


class Provenance(NamedTuple):
    """Where a view cell's content originally came from."""

    scene_id: str
    viewpoint_id: str
    h_index: int
    v_index: int


@dataclass(frozen=True)
class ViewCell:
    """A single view of the panorama grid: feature vector plus provenance."""

    feature: tuple[float, ...]
    provenance: Provenance

    def __post_init__(self) -> None:
        p = self.provenance
        if not (0 <= p.h_index < SECTOR_COUNT and 0 <= p.v_index < TIER_COUNT):
            raise InvariantViolation(
                record=f"{p.scene_id}/{p.viewpoint_id}",
                rule="provenance-index-range",
                detail=f"h={p.h_index} v={p.v_index}",
            )


@dataclass(frozen=True)
class Panorama:
    """12 (horizontal) x 3 (vertical) grid of view cells.

    Cells are stored flat in vertical-major order: index = v * 12 + h,
    matching the on-disk cell order.
    """

    feature_dim: int
    cells: tuple[ViewCell, ...]

    def __post_init__(self) -> None:
        if self.feature_dim <= 0:
            raise InvariantViolation(record="panorama", rule="feature-dim-positive")
        if len(self.cells) != CELLS_PER_PANORAMA:
            raise InvariantViolation(
                record="panorama",
                rule="grid-shape",
                detail=f"{len(self.cells)} cells",
            )
        for cell in self.cells:
            if len(cell.feature) != self.feature_dim:
                raise InvariantViolation(
                    record="panorama",
                    rule="feature-dim-uniform",
                    detail=f"cell {cell.provenance} has {len(cell.feature)} dims",
                )

    def cell(self, h: int, v: int) -> ViewCell:
        return self.cells[v * SECTOR_COUNT + h]

    def replaced(self, updates: Mapping[tuple[int, int], ViewCell]) -> "Panorama":
        """New panorama with the (h, v)-indexed cells swapped out."""
        cells = list(self.cells)
        for (h, v), cell in updates.items():
            cells[v * SECTOR_COUNT + h] = cell
        return Panorama(feature_dim=self.feature_dim, cells=tuple(cells))


@dataclass(frozen=True)
class Vertex:
    id: str
    position: Vec3

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantViolation(record="<empty>", rule="vertex-id-nonempty")
        if len(self.position) != 3 or not all(math.isfinite(c) for c in self.position):
            raise InvariantViolation(
                record=self.id, rule="position-finite", detail=repr(self.position)
            )


@dataclass(frozen=True)
class SceneGraph:
    """One navigation scene. Immutable and validated at construction.

    ``edges`` must already be normalized (ascending endpoint order);
    loaders are responsible for rejecting duplicates before the set is
    formed so the offending input line can be named.

    Ordinary scenes must be connected; a disconnected input is rejected,
    not repaired. Cross-connected scenes are the one exception: cutting
    two bridges and relinking crosswise always yields exactly two
    connected halves, so they are built with ``n_components=2``. The
    field is a structural expectation, not data, and is excluded from
    equality.
    """

    scene_id: str
    vertices: Mapping[str, Vertex]
    edges: frozenset[Edge]
    panoramas: Mapping[str, Panorama] = field(default_factory=dict)
    n_components: int = field(default=1, compare=False)

    def __post_init__(self) -> None:
        if not self.scene_id:
            raise InvariantViolation(record="<scene>", rule="scene-id-nonempty")
        if not self.vertices:
            raise InvariantViolation(record=self.scene_id, rule="vertices-nonempty")
        for vid, vertex in self.vertices.items():
            if vertex.id != vid:
                raise InvariantViolation(
                    record=self.scene_id, rule="vertex-key-mismatch", detail=vid
                )
        for u, v in self.edges:
            if u >= v:
                raise InvariantViolation(
                    record=self.scene_id, rule="edge-not-normalized", detail=f"{u}-{v}"
                )
            if u not in self.vertices or v not in self.vertices:
                raise InvariantViolation(
                    record=self.scene_id, rule="edge-endpoint-missing", detail=f"{u}-{v}"
                )
        for pid in self.panoramas:
            if pid not in self.vertices:
                raise InvariantViolation(
                    record=self.scene_id, rule="panorama-vertex-missing", detail=pid
                )
        found = len(self.components())
        if found != self.n_components:
            raise DisconnectedGraph(
                f"scene {self.scene_id}: {found} connected components, "
                f"expected {self.n_components}"
            )

    def components(self) -> list[frozenset[str]]:
        """Connected components, each sorted-first-vertex order."""
        out: list[frozenset[str]] = []
        remaining = set(self.vertices)
        while remaining:
            seed = min(remaining)
            comp = self._bfs_from(seed)
            out.append(frozenset(comp))
            remaining -= comp
        return out

    # derived views ----------------------------------------------------

    @cached_property
    def adjacency(self) -> dict[str, tuple[str, ...]]:
        """Sorted neighbor lists; the one iteration order used everywhere."""
        nbrs: dict[str, list[str]] = {vid: [] for vid in self.vertices}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {vid: tuple(sorted(ns)) for vid, ns in nbrs.items()}

    @cached_property
    def bridges(self) -> frozenset[Edge]:
        """All bridge edges, found by one iterative lowlink DFS."""
        disc: dict[str, int] = {}
        low: dict[str, int] = {}
        out: set[Edge] = set()
        counter = 0
        for root in sorted(self.vertices):
            if root in disc:
                continue
            stack: list[tuple[str, str | None, Iterator[str]]] = [
                (root, None, iter(self.adjacency[root]))
            ]
            disc[root] = low[root] = counter
            counter += 1
            while stack:
                v, parent, it = stack[-1]
                advanced = False
                for w in it:
                    if w == parent:
                        # skip one parent edge; parallel edges cannot occur
                        parent = None
                        stack[-1] = (v, parent, it)
                        continue
                    if w in disc:
                        low[v] = min(low[v], disc[w])
                        continue
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, v, iter(self.adjacency[w])))
                    advanced = True
                    break
                if not advanced:
                    stack.pop()
                    if stack:
                        parent_v = stack[-1][0]
                        low[parent_v] = min(low[parent_v], low[v])
                        if low[v] > disc[parent_v]:
                            out.add(norm_edge(parent_v, v))
        return frozenset(out)

    def position(self, vid: str) -> Vec3:
        return self.vertices[vid].position

    def has_edge(self, u: str, v: str) -> bool:
        return u != v and norm_edge(u, v) in self.edges

    def sorted_vertices(self) -> list[str]:
        return sorted(self.vertices)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def _bfs_from(self, start: str, skip: Edge | None = None) -> set[str]:
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if skip is not None and norm_edge(v, w) == skip:
                    continue
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen


def make_scene(
    scene_id: str,
    vertices: Iterable[Vertex],
    edges: Iterable[tuple[str, str]],
    panoramas: Mapping[str, Panorama] | None = None,
    n_components: int = 1,
) -> SceneGraph:
    """Build a scene from raw parts, normalizing edges and naming duplicates."""
    vmap: dict[str, Vertex] = {}
    for vertex in vertices:
        if vertex.id in vmap:
            raise InvariantViolation(record=scene_id, rule="duplicate-vertex", detail=vertex.id)
        vmap[vertex.id] = vertex
    vmap = dict(sorted(vmap.items()))
    eset: set[Edge] = set()
    for u, v in edges:
        e = norm_edge(u, v)
        if e in eset:
            raise InvariantViolation(record=scene_id, rule="duplicate-edge", detail=f"{e[0]}-{e[1]}")
        eset.add(e)
    return SceneGraph(
        scene_id=scene_id,
        vertices=vmap,
        edges=frozenset(eset),
        panoramas=dict(sorted((panoramas or {}).items())),
        n_components=n_components,
    )


def is_bridge(g: SceneGraph, e: tuple[str, str]) -> bool:
    """True iff removing ``e`` disconnects the scene."""
    key = norm_edge(*e)
    if key not in g.edges:
        raise UnknownEdge(f"{key[0]}-{key[1]} not in scene {g.scene_id}")
    return key in g.bridges


def side_component(g: SceneGraph, e: tuple[str, str], anchor: str) -> frozenset[str]:
    """Vertex set of the component containing ``anchor`` once bridge ``e`` is cut."""
    key = norm_edge(*e)
    if key not in g.edges:
        raise UnknownEdge(f"{key[0]}-{key[1]} not in scene {g.scene_id}")
    if anchor not in key:
        raise ValueError(f"anchor {anchor!r} is not an endpoint of {key}")
    if key not in g.bridges:
        raise NotABridge(f"{key[0]}-{key[1]} does not split scene {g.scene_id}")
    return frozenset(g._bfs_from(anchor, skip=key))


def shortest_path(g: SceneGraph, start: str, goal: str) -> list[str]:
    """One hop-shortest path, deterministic via sorted adjacency BFS."""
    if start == goal:
        return [start]
    parent: dict[str, str] = {start: start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in g.adjacency[v]:
            if w not in parent:
                parent[w] = v
                if w == goal:
                    path = [goal]
                    while path[-1] != start:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                queue.append(w)
    raise DisconnectedGraph(f"{goal} unreachable from {start} in {g.scene_id}")


def euclidean(a: Vec3, b: Vec3) -> float:
    return math.dist(a, b)
