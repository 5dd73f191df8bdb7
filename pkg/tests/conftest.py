"""Shared fixtures: oracle graph generators and the doorway scene pair."""

from __future__ import annotations

import math
import random
from collections import deque

import pytest

from navmix.key_select import KeyEdge
from navmix.nav_graph import (
    Panorama,
    Provenance,
    SceneGraph,
    Vertex,
    ViewCell,
    make_scene,
)
from navmix.splice import Chunk, InstructionRecord, PathRecord

ROOT3 = math.sqrt(3.0)


def random_connected_scene(
    rng: random.Random, n_min: int = 3, n_max: int = 10, scene_id: str = "g"
) -> SceneGraph:
    """Random spanning tree plus a few extra edges; always connected."""
    n = rng.randint(n_min, n_max)
    ids = [f"n{i:02d}" for i in range(n)]
    edges: set[tuple[str, str]] = set()
    for i in range(1, n):
        j = rng.randrange(i)
        edges.add(tuple(sorted((ids[i], ids[j]))))
    for _ in range(rng.randint(0, n)):
        a, b = rng.sample(ids, 2)
        edges.add(tuple(sorted((a, b))))
    vertices = [
        Vertex(id=v, position=(rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0)) for v in ids
    ]
    return make_scene(scene_id, vertices, edges)


def count_components_without_edge(g: SceneGraph, e: tuple[str, str]) -> int:
    """Removal + BFS oracle, written against raw adjacency."""
    adj = {v: set(ns) for v, ns in g.adjacency.items()}
    adj[e[0]].discard(e[1])
    adj[e[1]].discard(e[0])
    remaining = set(g.vertices)
    n = 0
    while remaining:
        n += 1
        queue = deque([min(remaining)])
        remaining.discard(min(remaining))
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w in remaining:
                    remaining.discard(w)
                    queue.append(w)
    return n


def grid_panorama(scene_id: str, vid: str) -> Panorama:
    """Panorama whose cell features encode (h, v); provenance is honest."""
    cells = tuple(
        ViewCell(feature=(float(h), float(v)), provenance=Provenance(scene_id, vid, h, v))
        for v in range(3)
        for h in range(12)
    )
    return Panorama(feature_dim=2, cells=cells)


def chain_instruction(path: PathRecord, index: int = 0, words_per_step: int = 2) -> InstructionRecord:
    """One chunk per step with synthetic tokens; alignment exact by construction."""
    tokens: list[str] = []
    chunks: list[Chunk] = []
    for i in range(len(path.vertices) - 1):
        step = [f"{path.path_id}.s{i}.w{j}" for j in range(words_per_step)]
        chunks.append(Chunk(token_span=(len(tokens), len(tokens) + len(step)), path_span=(i, i + 1)))
        tokens.extend(step)
    return InstructionRecord(
        path_id=path.path_id,
        instr_id=f"{path.path_id}#{index}",
        tokens=tuple(tokens),
        chunks=tuple(chunks),
    )


class DoorwayPair:
    """Two corridor scenes arranged to reproduce the 90->150 degree relink.

    Scene A runs along +X with its doorway heading at 90 degrees; scene B
    runs along +Y with its doorway at 0 degrees, placed so that before
    alignment the relinked junction from A's near vertex points at exactly
    150 degrees (a 60 degree mismatch).
    """

    def __init__(self) -> None:
        a_pos = {
            "ua": (-1.0, 0.0, 0.0),
            "s1": (0.0, 0.0, 0.0),
            "t1": (1.0, 0.0, 0.0),
            "wa": (2.0, 0.0, 0.0),
        }
        b_pos = {
            "ub": (1.0, -ROOT3 - 2.0, 0.0),
            "s2": (1.0, -ROOT3 - 1.0, 0.0),
            "t2": (1.0, -ROOT3, 0.0),
            "wb": (1.0, -ROOT3 + 1.0, 0.0),
        }
        self.scene_a = make_scene(
            "A",
            [Vertex(id=v, position=p) for v, p in a_pos.items()],
            [("ua", "s1"), ("s1", "t1"), ("t1", "wa")],
            {v: grid_panorama("A", v) for v in a_pos},
        )
        self.scene_b = make_scene(
            "B",
            [Vertex(id=v, position=p) for v, p in b_pos.items()],
            [("ub", "s2"), ("s2", "t2"), ("t2", "wb")],
            {v: grid_panorama("B", v) for v in b_pos},
        )
        self.key_a = KeyEdge(
            scene_id="A", v_s="s1", v_t="t1", path_count=1, vc_rank_s=1, vc_rank_t=2, ec_rank=1
        )
        self.key_b = KeyEdge(
            scene_id="B", v_s="s2", v_t="t2", path_count=1, vc_rank_s=1, vc_rank_t=2, ec_rank=1
        )
        self.path_a = PathRecord(path_id="pa", scene_id="A", vertices=("ua", "s1", "t1", "wa"))
        self.path_b = PathRecord(path_id="pb", scene_id="B", vertices=("ub", "s2", "t2", "wb"))
        self.instr_a = chain_instruction(self.path_a)
        self.instr_b = chain_instruction(self.path_b)


@pytest.fixture
def doorway() -> DoorwayPair:
    return DoorwayPair()
