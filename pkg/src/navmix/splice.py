"""Splitting supervised paths and chunk-aligned instructions at the key
edge, and splicing head/tail halves across a cross-connected scene pair.

A donor is one (path, instruction) pair cut at its scene's key edge. The
head keeps everything up to and including the first key-edge endpoint the
path reaches; the tail starts at the other endpoint. Chunks travel with
the side their sub-path lies on; a chunk that spans the cut goes with the
head, since it narrates the doorway transition before arrival.

Spliced candidates combine one scene's head with the other scene's tail;
a combination is kept exactly when its junction pair is one of the cross
scene's two cross edges.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, TYPE_CHECKING

from .errors import InvalidJunction, MisalignedChunks, NoDonors
from .key_select import KeyEdge
from .nav_graph import SceneGraph, norm_edge
from .scene_mixup import CrossScene, cross_connect, namespaced

if TYPE_CHECKING:
    from .dataset_io import DatasetBundle


@dataclass(frozen=True)
class Chunk:
    """One sub-instruction: token span (half-open) aligned to an inclusive
    sub-path span."""

    token_span: tuple[int, int]
    path_span: tuple[int, int]


@dataclass(frozen=True)
class PathRecord:
    path_id: str
    scene_id: str
    vertices: tuple[str, ...]


@dataclass(frozen=True)
class InstructionRecord:
    path_id: str
    instr_id: str
    tokens: tuple[str, ...]
    chunks: tuple[Chunk, ...]

    def check(self, path_len: int) -> None:
        """Raise MisalignedChunks unless the chunk alignment is valid."""
        if not self.chunks:
            raise MisalignedChunks(f"{self.instr_id}: no chunks")
        expect_token = 0
        prev_start = -1
        prev_end = -1
        for i, ch in enumerate(self.chunks):
            ta, tb = ch.token_span
            pa, pb = ch.path_span
            if ta != expect_token or tb <= ta:
                raise MisalignedChunks(
                    f"{self.instr_id}: chunk {i} token span [{ta},{tb}) breaks the partition"
                )
            expect_token = tb
            if not (0 <= pa <= pb < path_len):
                raise MisalignedChunks(
                    f"{self.instr_id}: chunk {i} path span [{pa},{pb}] out of bounds"
                )
            if pa < prev_start or pb < prev_end:
                raise MisalignedChunks(f"{self.instr_id}: chunk {i} path span out of order")
            if i == 0 and pa != 0:
                raise MisalignedChunks(f"{self.instr_id}: first chunk starts at {pa}")
            if i > 0 and pa > prev_end + 1:
                raise MisalignedChunks(f"{self.instr_id}: gap before chunk {i}")
            prev_start, prev_end = pa, pb
        if expect_token != len(self.tokens):
            raise MisalignedChunks(
                f"{self.instr_id}: chunks cover {expect_token} of {len(self.tokens)} tokens"
            )
        if prev_end != path_len - 1:
            raise MisalignedChunks(
                f"{self.instr_id}: chunks end at vertex {prev_end}, path ends at {path_len - 1}"
            )


@dataclass(frozen=True)
class SplitDonor:
    """A path (and optionally one of its instructions) cut at the key edge."""

    path_id: str
    scene_id: str
    head: tuple[str, ...]
    tail: tuple[str, ...]
    crossing_index: int
    instr_id: str | None = None
    tokens: tuple[str, ...] | None = None
    head_chunks: tuple[Chunk, ...] | None = None
    tail_chunks: tuple[Chunk, ...] | None = None

    @property
    def path_len(self) -> int:
        return len(self.head) + len(self.tail)

    def head_tokens(self) -> tuple[str, ...]:
        assert self.tokens is not None and self.head_chunks is not None
        return tuple(
            t for ch in self.head_chunks for t in self.tokens[ch.token_span[0] : ch.token_span[1]]
        )

    def tail_tokens(self) -> tuple[str, ...]:
        assert self.tokens is not None and self.tail_chunks is not None
        return tuple(
            t for ch in self.tail_chunks for t in self.tokens[ch.token_span[0] : ch.token_span[1]]
        )


@dataclass(frozen=True)
class TripletProvenance:
    head_path_id: str
    head_instr_id: str
    tail_path_id: str
    tail_instr_id: str
    junction: tuple[str, str]
    head_token_count: int


@dataclass(frozen=True)
class AugmentedTriplet:
    cross_scene_id: str
    vertices: tuple[str, ...]
    tokens: tuple[str, ...]
    provenance: TripletProvenance | None = None


@dataclass(frozen=True)
class GenConfig:
    cap_per_pair: int = 64
    seed: int = 0


def split_at_key_edge(p: PathRecord, k: KeyEdge) -> SplitDonor | None:
    """Cut ``p`` at its first traversal of the key edge, either direction.

    Returns None when the path never crosses the edge.
    """
    if p.scene_id != k.scene_id:
        raise ValueError(f"path {p.path_id} is from {p.scene_id}, key edge from {k.scene_id}")
    key = frozenset(k.edge)
    for i in range(len(p.vertices) - 1):
        if frozenset(p.vertices[i : i + 2]) == key:
            return SplitDonor(
                path_id=p.path_id,
                scene_id=p.scene_id,
                head=p.vertices[: i + 1],
                tail=p.vertices[i + 1 :],
                crossing_index=i,
            )
    return None


def split_chunks(instr: InstructionRecord, d: SplitDonor) -> SplitDonor:
    """Distribute the instruction's chunks onto the donor's head and tail.

    A chunk lies on the head when its sub-path ends by the cut, on the
    tail when it starts at or after the cut (the shared junction vertex
    counts for both sides, head checked first); a chunk spanning the cut
    joins the head.
    """
    if instr.path_id != d.path_id:
        raise ValueError(f"instruction {instr.instr_id} is not for path {d.path_id}")
    instr.check(d.path_len)
    cr = d.crossing_index
    head: list[Chunk] = []
    tail: list[Chunk] = []
    for ch in instr.chunks:
        pa, pb = ch.path_span
        if pb <= cr:
            head.append(ch)
        elif pa >= cr:
            tail.append(ch)
        else:
            head.append(ch)
    if [c.token_span for c in head + tail] != [c.token_span for c in instr.chunks]:
        raise MisalignedChunks(
            f"{instr.instr_id}: head/tail split is not a prefix/suffix partition"
        )
    return replace(
        d,
        instr_id=instr.instr_id,
        tokens=instr.tokens,
        head_chunks=tuple(head),
        tail_chunks=tuple(tail),
    )


def cross_splice(head_donor: SplitDonor, tail_donor: SplitDonor, c: CrossScene) -> AugmentedTriplet:
    """Join one donor's head to the other donor's tail across a cross edge."""
    if head_donor.head_chunks is None or tail_donor.tail_chunks is None:
        raise ValueError("donors must have their chunks split before splicing")
    head = tuple(namespaced(head_donor.scene_id, v) for v in head_donor.head)
    tail = tuple(namespaced(tail_donor.scene_id, v) for v in tail_donor.tail)
    junction = (head[-1], tail[0])
    if norm_edge(*junction) not in c.cross_edge_set():
        raise InvalidJunction(
            f"{junction[0]} -> {junction[1]} is not a cross edge of {c.scene_id}"
        )
    head_tokens = head_donor.head_tokens()
    return AugmentedTriplet(
        cross_scene_id=c.scene_id,
        vertices=head + tail,
        tokens=head_tokens + tail_donor.tail_tokens(),
        provenance=TripletProvenance(
            head_path_id=head_donor.path_id,
            head_instr_id=head_donor.instr_id or "",
            tail_path_id=tail_donor.path_id,
            tail_instr_id=tail_donor.instr_id or "",
            junction=junction,
            head_token_count=len(head_tokens),
        ),
    )


def pair_seed(global_seed: int, scene_id1: str, scene_id2: str) -> int:
    """Stable per-pair seed; independent of process hash randomization."""
    digest = hashlib.sha256(f"{global_seed}:{scene_id1}:{scene_id2}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def scene_donors(
    g: SceneGraph,
    k: KeyEdge,
    paths: Iterable[PathRecord],
    instructions: Iterable[InstructionRecord],
) -> list[SplitDonor]:
    """All chunk-filled donors a scene contributes: one per (crossing path,
    instruction) pair, sorted deterministically."""
    by_path: dict[str, list[InstructionRecord]] = {}
    for instr in instructions:
        by_path.setdefault(instr.path_id, []).append(instr)
    donors: list[SplitDonor] = []
    for p in sorted(paths, key=lambda p: p.path_id):
        if p.scene_id != g.scene_id:
            continue
        base = split_at_key_edge(p, k)
        if base is None:
            continue
        for instr in sorted(by_path.get(p.path_id, []), key=lambda i: i.instr_id):
            donors.append(split_chunks(instr, base))
    return donors


def generate_pair(
    g1: SceneGraph,
    g2: SceneGraph,
    k1: KeyEdge,
    k2: KeyEdge,
    data: "DatasetBundle",
    config: GenConfig,
) -> list[AugmentedTriplet]:
    """Every valid spliced triplet for one scene pair, deduplicated and capped.

    Candidates are grouped by spliced vertex sequence (instruction variants
    of the same donor paths share one path); the groups are subsampled to
    ``cap_per_pair`` with the pair seed, keeping the deterministic order.
    """
    cross = cross_connect(g1, k1, g2, k2)
    donors1 = scene_donors(g1, k1, data.paths, data.instructions)
    donors2 = scene_donors(g2, k2, data.paths, data.instructions)
    if not donors1 or not donors2:
        empty = g1.scene_id if not donors1 else g2.scene_id
        raise NoDonors(f"scene {empty} contributes no crossing path with instructions")

    def path_groups(donors: list[SplitDonor]) -> list[list[SplitDonor]]:
        grouped: dict[str, list[SplitDonor]] = {}
        for d in donors:
            grouped.setdefault(d.path_id, []).append(d)
        return [grouped[pid] for pid in sorted(grouped)]

    groups: list[list[AugmentedTriplet]] = []
    seen_paths: set[tuple[str, ...]] = set()
    for head_side, tail_side in ((donors1, donors2), (donors2, donors1)):
        for head_group in path_groups(head_side):
            for tail_group in path_groups(tail_side):
                triplets: list[AugmentedTriplet] = []
                for hd in head_group:
                    for td in tail_group:
                        try:
                            triplets.append(cross_splice(hd, td, cross))
                        except InvalidJunction:
                            break  # junction depends only on the path pair
                    if not triplets:
                        break
                if not triplets:
                    continue
                key = triplets[0].vertices
                if key in seen_paths:
                    continue
                seen_paths.add(key)
                groups.append(triplets)

    if len(groups) > config.cap_per_pair:
        rng = random.Random(config.seed)
        keep = sorted(rng.sample(range(len(groups)), config.cap_per_pair))
        groups = [groups[i] for i in keep]
    return [t for group in groups for t in group]
