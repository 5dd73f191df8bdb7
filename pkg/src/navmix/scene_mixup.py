"""Cross-connecting two scenes at their key edges.

Three stages, each a pure transformation:

1. ``cross_connect`` merges the two graphs under namespaced vertex ids,
   cuts both key edges and relinks the endpoints crosswise, so each
   scene's near side now leads into the other scene's far side.
2. ``align_orientation`` rigidly translates each cut-off far-side
   component so the two far-side key vertexes swap positions. After the
   swap, stepping across either new junction has exactly the heading the
   host scene's original doorway had, which is what keeps spliced
   instructions consistent with the geometry.
3. ``mix_panoramas`` rebuilds the view grid at the four junction
   vertexes: the horizontal sectors facing the junction are replaced by
   the matching donor-scene sectors around the donor's own doorway
   direction, across all three vertical tiers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

from .errors import (
    AlreadyAligned,
    InvariantViolation,
    KeyEdgeInvalid,
    KReplaceOutOfRange,
    NotAligned,
    SceneIdCollision,
)
from .key_select import KeyEdge
from .nav_graph import (
    SECTOR_COUNT,
    TIER_COUNT,
    Edge,
    Panorama,
    SceneGraph,
    Vec3,
    Vertex,
    heading,
    norm_edge,
    sector_index,
    side_component,
)

DEFAULT_K_REPLACE = 3


def namespaced(scene_id: str, vertex_id: str) -> str:
    return f"{scene_id}/{vertex_id}"


def split_namespace(vertex_id: str) -> tuple[str, str]:
    scene_id, _, local = vertex_id.partition("/")
    if not local:
        raise ValueError(f"vertex id {vertex_id!r} carries no scene namespace")
    return scene_id, local


def cross_scene_id(id1: str, id2: str) -> str:
    return f"{id1}+{id2}"


@dataclass(frozen=True)
class KeyVertices:
    """The four junction vertexes of a cross scene, namespaced.

    vs1/vt1 are the first scene's key-edge endpoints, vs2/vt2 the second
    scene's. Cross edge 1 joins vs1 to vt2; cross edge 2 joins vs2 to vt1.
    """

    vs1: str
    vt1: str
    vs2: str
    vt2: str

    def all(self) -> tuple[str, str, str, str]:
        return (self.vs1, self.vt1, self.vs2, self.vt2)

    def junction_neighbor(self, vid: str) -> str:
        return {self.vs1: self.vt2, self.vt2: self.vs1,
                self.vs2: self.vt1, self.vt1: self.vs2}[vid]

    def donor_of(self, vid: str) -> str:
        return {self.vs1: self.vs2, self.vs2: self.vs1,
                self.vt1: self.vt2, self.vt2: self.vt1}[vid]


@dataclass(frozen=True)
class AlignmentRecord:
    """Rigid translations of the two far-side components.

    ``translation_b1`` moves the first scene's vt-side; ``translation_b2``
    moves the second scene's vt-side. Both are computed from the original
    positions before either is applied.
    """

    translation_b1: Vec3
    translation_b2: Vec3
    applied: bool


@dataclass(frozen=True)
class CrossScene:
    scene_id: str
    graph: SceneGraph
    source_scenes: tuple[str, str]
    key_vertices: KeyVertices
    cross_edges: tuple[tuple[str, str], tuple[str, str]]
    removed_edges: tuple[Edge, Edge]
    original_headings: Mapping[str, float]
    alignment: AlignmentRecord
    k_replace: int = 0

    @property
    def panoramas(self) -> Mapping[str, Panorama]:
        return self.graph.panoramas

    def cross_edge_set(self) -> frozenset[Edge]:
        return frozenset(norm_edge(*e) for e in self.cross_edges)

    def host_scene_of(self, vertex_id: str) -> str:
        return split_namespace(vertex_id)[0]


def _check_key(g: SceneGraph, k: KeyEdge) -> None:
    if k.scene_id != g.scene_id:
        raise KeyEdgeInvalid(f"key edge belongs to {k.scene_id}, not {g.scene_id}")
    if k.edge not in g.edges:
        raise KeyEdgeInvalid(f"{k.v_s}-{k.v_t} is not an edge of {g.scene_id}")
    if k.edge not in g.bridges:
        raise KeyEdgeInvalid(f"{k.v_s}-{k.v_t} is not a bridge of {g.scene_id}")


def cross_connect(g1: SceneGraph, k1: KeyEdge, g2: SceneGraph, k2: KeyEdge) -> CrossScene:
    """Merge two scenes, cut their key edges, relink crosswise.

    Vertex positions and panoramas are carried over untouched; alignment
    and view mixing are separate stages.
    """
    if g1.scene_id == g2.scene_id:
        raise SceneIdCollision(f"both scenes are named {g1.scene_id}")
    _check_key(g1, k1)
    _check_key(g2, k2)

    kv = KeyVertices(
        vs1=namespaced(g1.scene_id, k1.v_s),
        vt1=namespaced(g1.scene_id, k1.v_t),
        vs2=namespaced(g2.scene_id, k2.v_s),
        vt2=namespaced(g2.scene_id, k2.v_t),
    )
    removed = (
        norm_edge(kv.vs1, kv.vt1),
        norm_edge(kv.vs2, kv.vt2),
    )
    cross = ((kv.vs1, kv.vt2), (kv.vs2, kv.vt1))

    vertices: dict[str, Vertex] = {}
    panoramas: dict[str, Panorama] = {}
    edges: set[Edge] = set()
    for g in (g1, g2):
        for vid, vertex in g.vertices.items():
            nid = namespaced(g.scene_id, vid)
            vertices[nid] = Vertex(id=nid, position=vertex.position)
        for pid, pano in g.panoramas.items():
            panoramas[namespaced(g.scene_id, pid)] = pano
        for u, v in g.edges:
            edges.add(norm_edge(namespaced(g.scene_id, u), namespaced(g.scene_id, v)))
    edges.difference_update(removed)
    edges.update(norm_edge(*e) for e in cross)

    # bridge cuts split the merged graph into exactly two navigable halves
    graph = SceneGraph(
        scene_id=cross_scene_id(g1.scene_id, g2.scene_id),
        vertices=dict(sorted(vertices.items())),
        edges=frozenset(edges),
        panoramas=dict(sorted(panoramas.items())),
        n_components=2,
    )

    p_s1, p_t1 = g1.position(k1.v_s), g1.position(k1.v_t)
    p_s2, p_t2 = g2.position(k2.v_s), g2.position(k2.v_t)
    original_headings = {
        kv.vs1: heading(p_s1, p_t1),
        kv.vt1: heading(p_t1, p_s1),
        kv.vs2: heading(p_s2, p_t2),
        kv.vt2: heading(p_t2, p_s2),
    }
    alignment = AlignmentRecord(
        translation_b1=tuple(b - a for a, b in zip(p_t1, p_t2)),
        translation_b2=tuple(b - a for a, b in zip(p_t2, p_t1)),
        applied=False,
    )
    return CrossScene(
        scene_id=graph.scene_id,
        graph=graph,
        source_scenes=(g1.scene_id, g2.scene_id),
        key_vertices=kv,
        cross_edges=cross,
        removed_edges=removed,
        original_headings=original_headings,
        alignment=alignment,
        k_replace=0,
    )


def align_orientation(c: CrossScene) -> CrossScene:
    """Swap the positions of the two far-side key vertexes (rigidly).

    The vt1 side moves onto vt2's old location and vice versa, so each
    cross edge reproduces the heading of the host scene's original key
    edge, in both traversal directions.
    """
    if c.alignment.applied:
        raise AlreadyAligned(f"{c.scene_id} is already aligned")
    kv = c.key_vertices
    side_b1 = side_component(c.graph, norm_edge(kv.vs2, kv.vt1), anchor=kv.vt1)
    side_b2 = side_component(c.graph, norm_edge(kv.vs1, kv.vt2), anchor=kv.vt2)

    t1 = c.alignment.translation_b1
    t2 = c.alignment.translation_b2
    vertices: dict[str, Vertex] = {}
    for vid, vertex in c.graph.vertices.items():
        if vid in side_b1:
            shift = t1
        elif vid in side_b2:
            shift = t2
        else:
            vertices[vid] = vertex
            continue
        pos = tuple(p + s for p, s in zip(vertex.position, shift))
        vertices[vid] = Vertex(id=vid, position=pos)

    graph = replace(c.graph, vertices=vertices)
    return replace(c, graph=graph, alignment=replace(c.alignment, applied=True))


def replacement_offsets(k_replace: int) -> tuple[int, ...]:
    """Sector offsets (relative to the junction sector) swapped for ``k`` views.

    Odd counts are symmetric around the center; even counts favor the
    clockwise (positive) side by one.
    """
    if not 0 <= k_replace <= SECTOR_COUNT:
        raise KReplaceOutOfRange(f"k_replace {k_replace} outside 0..{SECTOR_COUNT}")
    if k_replace == 0:
        return ()
    low = -((k_replace - 1) // 2)
    return tuple(range(low, low + k_replace))


def mix_panoramas(
    c: CrossScene, k_replace: int = DEFAULT_K_REPLACE, allow_unaligned: bool = False
) -> CrossScene:
    """Rebuild the four junction panoramas with donor-scene view sectors.

    For each key vertex, the ``k_replace`` horizontal sectors centered on
    the heading toward its junction neighbor are replaced by the donor key
    vertex's sectors centered on the donor's original doorway heading,
    offset for offset, across all three vertical tiers. ``k_replace=0`` is
    the identity. Call once per cross scene.
    """
    offsets = replacement_offsets(k_replace)
    if not c.alignment.applied and not allow_unaligned:
        raise NotAligned(f"{c.scene_id}: align orientation first (or override)")

    kv = c.key_vertices
    dims = {c.panoramas[v].feature_dim for v in kv.all() if v in c.panoramas}
    if len(dims) > 1:
        raise InvariantViolation(
            record=c.scene_id, rule="feature-dim-uniform", detail=str(sorted(dims))
        )

    originals = dict(c.graph.panoramas)
    mixed: dict[str, Panorama] = {}
    for host in kv.all():
        if host not in originals:
            continue
        nbr = kv.junction_neighbor(host)
        donor = kv.donor_of(host)
        host_center = sector_index(heading(c.graph.position(host), c.graph.position(nbr)))
        donor_center = sector_index(c.original_headings[donor])
        donor_pano = originals[donor]
        updates = {}
        for off in offsets:
            h_host = (host_center + off) % SECTOR_COUNT
            h_donor = (donor_center + off) % SECTOR_COUNT
            for tier in range(TIER_COUNT):
                updates[(h_host, tier)] = donor_pano.cell(h_donor, tier)
        mixed[host] = originals[host].replaced(updates)

    panoramas = dict(originals)
    panoramas.update(mixed)
    graph = replace(c.graph, panoramas=dict(sorted(panoramas.items())))
    return replace(c, graph=graph, k_replace=k_replace)


def junction_expected_heading(c: CrossScene, u: str, w: str) -> float:
    """Heading a u->w junction step should have once orientation is aligned.

    Stepping out of a near-side key vertex reproduces that vertex's own
    original doorway heading; stepping into one (reverse traversal)
    reproduces the host's doorway heading from the far end.
    """
    kv = c.key_vertices
    if norm_edge(u, w) not in c.cross_edge_set():
        raise ValueError(f"({u}, {w}) is not a cross edge of {c.scene_id}")
    if u in (kv.vs1, kv.vs2):
        return c.original_headings[u]
    return (c.original_headings[w] + math.pi) % (2.0 * math.pi)
