"""Loading, saving, importing and generating navigation datasets.

On-disk formats (all JSON, all lists in sorted order, floats written with
Python's exact shortest round-trip repr so byte output is deterministic
and load/save is lossless):

* Scene file: ``{scene_id, vertices: [{id, position}], edges: [[u, v]],
  panoramas: {id: {feature_dim, cells: [36 x {feature, provenance}]}}}``
  with cells in vertical-major order (v * 12 + h).
* Cross-scene sidecar ``<scene>.mixup.json`` next to the scene file:
  source scenes, key edges with their selection diagnostics, cross and
  removed edges, original junction headings, the alignment record,
  ``k_replace`` and the per-pair seed.
* Dataset file: array of ``{path_id, scan, path, instructions}`` records;
  augmented records additionally carry ``provenance``.
* Chunk file: ``{path_id: [per-instruction [{token_span, path_span}]]}``.

The synthetic generator builds desk-scale scenes shaped like real indoor
connectivity: dense room cliques joined by single corridor edges (always
bridges), random-walk paths biased to cross corridors, and templated
step-by-step instructions whose chunk alignment is exact by construction.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass
from hashlib import sha256
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import AsymmetricAdjacency, BadParams, InvariantViolation, ParseError
from .key_select import KeyEdge
from .nav_graph import (
    SECTOR_COUNT,
    TIER_COUNT,
    Panorama,
    Provenance,
    SceneGraph,
    Vertex,
    ViewCell,
    heading,
    heading_delta,
    make_scene,
    shortest_path,
)
from .scene_mixup import AlignmentRecord, CrossScene, KeyVertices
from .splice import Chunk, InstructionRecord, PathRecord

SIDE_CAR_SUFFIX = ".mixup.json"


def round9(x: float) -> float:
    """Quantize to 9 significant digits (used when inventing coordinates)."""
    return float(f"{x:.9g}")


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_dumps(obj), encoding="utf-8")


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def file_digest(path: Path) -> str:
    return sha256(Path(path).read_bytes()).hexdigest()


# scene files ------------------------------------------------------------


def scene_to_obj(g: SceneGraph) -> dict[str, Any]:
    return {
        "scene_id": g.scene_id,
        "vertices": [
            {"id": vid, "position": list(g.vertices[vid].position)}
            for vid in g.sorted_vertices()
        ],
        "edges": [list(e) for e in g.sorted_edges()],
        "panoramas": {
            pid: {
                "feature_dim": pano.feature_dim,
                "cells": [
                    {"feature": list(cell.feature), "provenance": list(cell.provenance)}
                    for cell in pano.cells
                ],
            }
            for pid, pano in sorted(g.panoramas.items())
        },
    }


def scene_from_obj(obj: Mapping[str, Any], n_components: int = 1) -> SceneGraph:
    try:
        vertices = [
            Vertex(id=v["id"], position=tuple(float(c) for c in v["position"]))
            for v in obj["vertices"]
        ]
        edges = [(u, v) for u, v in obj["edges"]]
        panoramas = {
            pid: Panorama(
                feature_dim=int(p["feature_dim"]),
                cells=tuple(
                    ViewCell(
                        feature=tuple(float(x) for x in cell["feature"]),
                        provenance=Provenance(*cell["provenance"]),
                    )
                    for cell in p["cells"]
                ),
            )
            for pid, p in obj.get("panoramas", {}).items()
        }
        scene_id = obj["scene_id"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed scene object: {exc}") from exc
    return make_scene(scene_id, vertices, edges, panoramas, n_components=n_components)


def save_scene(g: SceneGraph, path: Path) -> None:
    write_json(Path(path), scene_to_obj(g))


def load_scene(path: Path) -> SceneGraph:
    return scene_from_obj(read_json(Path(path)))


# cross scenes -----------------------------------------------------------


@dataclass(frozen=True)
class CrossSceneFile:
    cross: CrossScene
    key_edges: dict[str, KeyEdge]
    pair_seed: int


def _key_edge_to_obj(k: KeyEdge) -> dict[str, Any]:
    return {
        "scene_id": k.scene_id,
        "v_s": k.v_s,
        "v_t": k.v_t,
        "path_count": k.path_count,
        "vc_rank_s": k.vc_rank_s,
        "vc_rank_t": k.vc_rank_t,
        "ec_rank": k.ec_rank,
    }


def _key_edge_from_obj(obj: Mapping[str, Any]) -> KeyEdge:
    return KeyEdge(**obj)


def save_cross_scene(
    cross: CrossScene, key_edges: Mapping[str, KeyEdge], pair_seed: int, scene_path: Path
) -> None:
    scene_path = Path(scene_path)
    save_scene(cross.graph, scene_path)
    kv = cross.key_vertices
    sidecar = {
        "scene_id": cross.scene_id,
        "source_scenes": list(cross.source_scenes),
        "key_vertices": {"vs1": kv.vs1, "vt1": kv.vt1, "vs2": kv.vs2, "vt2": kv.vt2},
        "key_edges": {sid: _key_edge_to_obj(k) for sid, k in sorted(key_edges.items())},
        "cross_edges": [list(e) for e in cross.cross_edges],
        "removed_edges": [list(e) for e in cross.removed_edges],
        "original_headings": {vid: h for vid, h in sorted(cross.original_headings.items())},
        "alignment": {
            "translation_b1": list(cross.alignment.translation_b1),
            "translation_b2": list(cross.alignment.translation_b2),
            "applied": cross.alignment.applied,
        },
        "k_replace": cross.k_replace,
        "pair_seed": pair_seed,
    }
    write_json(scene_path.parent / (scene_path.stem + SIDE_CAR_SUFFIX), sidecar)


def load_cross_scene(scene_path: Path) -> CrossSceneFile:
    scene_path = Path(scene_path)
    graph = scene_from_obj(read_json(scene_path), n_components=2)
    obj = read_json(scene_path.parent / (scene_path.stem + SIDE_CAR_SUFFIX))
    try:
        kv = KeyVertices(**obj["key_vertices"])
        cross = CrossScene(
            scene_id=obj["scene_id"],
            graph=graph,
            source_scenes=tuple(obj["source_scenes"]),
            key_vertices=kv,
            cross_edges=tuple((u, v) for u, v in obj["cross_edges"]),
            removed_edges=tuple((u, v) for u, v in obj["removed_edges"]),
            original_headings={k: float(v) for k, v in obj["original_headings"].items()},
            alignment=AlignmentRecord(
                translation_b1=tuple(float(x) for x in obj["alignment"]["translation_b1"]),
                translation_b2=tuple(float(x) for x in obj["alignment"]["translation_b2"]),
                applied=bool(obj["alignment"]["applied"]),
            ),
            k_replace=int(obj["k_replace"]),
        )
        key_edges = {sid: _key_edge_from_obj(k) for sid, k in obj["key_edges"].items()}
        return CrossSceneFile(cross=cross, key_edges=key_edges, pair_seed=int(obj["pair_seed"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{scene_path}: malformed cross-scene sidecar: {exc}") from exc


# datasets ---------------------------------------------------------------


@dataclass(frozen=True)
class DatasetBundle:
    scenes: dict[str, SceneGraph]
    paths: list[PathRecord]
    instructions: list[InstructionRecord]

    def paths_by_scene(self, scene_id: str) -> list[PathRecord]:
        return [p for p in self.paths if p.scene_id == scene_id]

    def instructions_by_path(self, path_id: str) -> list[InstructionRecord]:
        return [i for i in self.instructions if i.path_id == path_id]


def instr_id_for(path_id: str, index: int) -> str:
    return f"{path_id}#{index}"


def validate_bundle(bundle: DatasetBundle) -> None:
    """Enforce every typed invariant, naming the offending record."""
    paths_by_id: dict[str, PathRecord] = {}
    for p in bundle.paths:
        if p.path_id in paths_by_id:
            raise InvariantViolation(record=p.path_id, rule="duplicate-path-id")
        paths_by_id[p.path_id] = p
        scene = bundle.scenes.get(p.scene_id)
        if scene is None:
            raise InvariantViolation(record=p.path_id, rule="unknown-scene", detail=p.scene_id)
        if len(p.vertices) < 2:
            raise InvariantViolation(record=p.path_id, rule="path-too-short")
        for v in p.vertices:
            if v not in scene.vertices:
                raise InvariantViolation(record=p.path_id, rule="unknown-vertex", detail=v)
        for u, v in zip(p.vertices, p.vertices[1:]):
            if not scene.has_edge(u, v):
                raise InvariantViolation(
                    record=p.path_id, rule="nonadjacent-step", detail=f"{u}->{v}"
                )
    seen_instr: set[str] = set()
    for instr in bundle.instructions:
        if instr.instr_id in seen_instr:
            raise InvariantViolation(record=instr.instr_id, rule="duplicate-instruction-id")
        seen_instr.add(instr.instr_id)
        path = paths_by_id.get(instr.path_id)
        if path is None:
            raise InvariantViolation(
                record=instr.instr_id, rule="unknown-path", detail=instr.path_id
            )
        try:
            instr.check(len(path.vertices))
        except Exception as exc:
            raise InvariantViolation(
                record=instr.instr_id, rule="chunk-alignment", detail=str(exc)
            ) from exc


def load_bundle(scene_dir: Path, dataset_file: Path, chunk_file: Path) -> DatasetBundle:
    """Load and fully validate a (scenes, paths, instructions) bundle."""
    scene_dir = Path(scene_dir)
    scenes: dict[str, SceneGraph] = {}
    for path in sorted(scene_dir.glob("*.json")):
        if path.name.endswith(SIDE_CAR_SUFFIX):
            continue
        g = load_scene(path)
        scenes[g.scene_id] = g

    records = read_json(Path(dataset_file))
    chunks_obj = read_json(Path(chunk_file))
    if not isinstance(records, list):
        raise ParseError(f"{dataset_file}: expected a JSON array of path records")
    if not isinstance(chunks_obj, dict):
        raise ParseError(f"{chunk_file}: expected a JSON object keyed by path id")

    paths: list[PathRecord] = []
    instructions: list[InstructionRecord] = []
    for rec in records:
        try:
            pid = rec["path_id"]
            paths.append(
                PathRecord(path_id=pid, scene_id=rec["scan"], vertices=tuple(rec["path"]))
            )
            token_lists = rec["instructions"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{dataset_file}: malformed record: {exc}") from exc
        chunk_lists = chunks_obj.get(pid)
        if chunk_lists is None or len(chunk_lists) != len(token_lists):
            raise InvariantViolation(record=pid, rule="missing-chunks")
        for i, (tokens, chunk_list) in enumerate(zip(token_lists, chunk_lists)):
            try:
                chunks = tuple(
                    Chunk(token_span=tuple(c["token_span"]), path_span=tuple(c["path_span"]))
                    for c in chunk_list
                )
            except (KeyError, TypeError) as exc:
                raise ParseError(f"{chunk_file}: malformed chunk for {pid}: {exc}") from exc
            instructions.append(
                InstructionRecord(
                    path_id=pid,
                    instr_id=instr_id_for(pid, i),
                    tokens=tuple(tokens),
                    chunks=chunks,
                )
            )
    bundle = DatasetBundle(scenes=scenes, paths=paths, instructions=instructions)
    validate_bundle(bundle)
    return bundle


def dataset_records(bundle: DatasetBundle) -> list[dict[str, Any]]:
    instr_by_path: dict[str, list[InstructionRecord]] = {}
    for instr in bundle.instructions:
        instr_by_path.setdefault(instr.path_id, []).append(instr)
    records = []
    for p in sorted(bundle.paths, key=lambda p: p.path_id):
        records.append(
            {
                "path_id": p.path_id,
                "scan": p.scene_id,
                "path": list(p.vertices),
                "instructions": [
                    list(i.tokens)
                    for i in sorted(instr_by_path.get(p.path_id, []), key=lambda i: i.instr_id)
                ],
            }
        )
    return records


def chunk_records(bundle: DatasetBundle) -> dict[str, Any]:
    instr_by_path: dict[str, list[InstructionRecord]] = {}
    for instr in bundle.instructions:
        instr_by_path.setdefault(instr.path_id, []).append(instr)
    return {
        pid: [
            [
                {"token_span": list(c.token_span), "path_span": list(c.path_span)}
                for c in instr.chunks
            ]
            for instr in sorted(instrs, key=lambda i: i.instr_id)
        ]
        for pid, instrs in sorted(instr_by_path.items())
    }


def save_bundle(bundle: DatasetBundle, outdir: Path) -> None:
    outdir = Path(outdir)
    for sid, g in sorted(bundle.scenes.items()):
        save_scene(g, outdir / "scenes" / f"{sid}.json")
    write_json(outdir / "dataset.json", dataset_records(bundle))
    write_json(outdir / "chunks.json", chunk_records(bundle))


# external connectivity import --------------------------------------------


def _placeholder_panorama(scene_id: str, vid: str, feature_dim: int) -> Panorama:
    cells = tuple(
        ViewCell(
            feature=(0.0,) * feature_dim,
            provenance=Provenance(scene_id, vid, h, v),
        )
        for v in range(TIER_COUNT)
        for h in range(SECTOR_COUNT)
    )
    return Panorama(feature_dim=feature_dim, cells=cells)


def import_matterport_connectivity(
    file: Path, scene_id: str | None = None, feature_dim: int = 1
) -> SceneGraph:
    """Build a scene from a simulator connectivity file.

    Included viewpoints become vertices placed at their pose translation;
    an edge exists where both endpoints flag each other unobstructed.
    One-sided flags are warned about and symmetrized by intersection.
    Panoramas are zero-feature placeholders since no view features ship
    with connectivity data.
    """
    file = Path(file)
    if scene_id is None:
        scene_id = file.stem.removesuffix("_connectivity")
    data = read_json(file)
    if not isinstance(data, list):
        raise ParseError(f"{file}: expected a JSON array of viewpoint records")
    try:
        ids = [rec["image_id"] for rec in data]
        included = [bool(rec["included"]) for rec in data]
        unobstructed = [rec["unobstructed"] for rec in data]
        positions = [
            (float(rec["pose"][3]), float(rec["pose"][7]), float(rec["pose"][11]))
            for rec in data
        ]
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"{file}: malformed viewpoint record: {exc}") from exc

    vertices = [
        Vertex(id=ids[i], position=positions[i]) for i in range(len(data)) if included[i]
    ]
    edges: list[tuple[str, str]] = []
    asymmetric = 0
    for i in range(len(data)):
        if not included[i]:
            continue
        for j in range(i + 1, len(data)):
            if not included[j]:
                continue
            forward = bool(unobstructed[i][j])
            backward = bool(unobstructed[j][i])
            if forward and backward:
                edges.append((ids[i], ids[j]))
            elif forward != backward:
                asymmetric += 1
    if asymmetric:
        warnings.warn(
            f"{file}: {asymmetric} one-sided unobstructed flags symmetrized by intersection",
            AsymmetricAdjacency,
        )
    panoramas = {v.id: _placeholder_panorama(scene_id, v.id, feature_dim) for v in vertices}
    return make_scene(scene_id, vertices, edges, panoramas)


# synthetic generation -----------------------------------------------------

_STEP_TEMPLATES: dict[str, tuple[tuple[str, ...], ...]] = {
    "start": (
        ("walk", "forward"),
        ("head", "out"),
        ("move", "ahead"),
    ),
    "straight": (
        ("continue", "straight"),
        ("keep", "going", "straight"),
        ("go", "straight", "on"),
    ),
    "left": (
        ("turn", "left", "and", "go", "forward"),
        ("take", "a", "left"),
        ("turn", "left", "then", "continue"),
    ),
    "right": (
        ("turn", "right", "and", "go", "forward"),
        ("take", "a", "right"),
        ("turn", "right", "then", "continue"),
    ),
}

_STRAIGHT_CONE = math.pi / 6.0


def _step_kinds(scene: SceneGraph, vertices: Sequence[str]) -> list[str]:
    kinds = ["start"]
    prev = heading(scene.position(vertices[0]), scene.position(vertices[1]))
    for u, v in zip(vertices[1:], vertices[2:]):
        h = heading(scene.position(u), scene.position(v))
        d = heading_delta(h, prev)
        if abs(d) <= _STRAIGHT_CONE:
            kinds.append("straight")
        elif d > 0:
            kinds.append("right")
        else:
            kinds.append("left")
        prev = h
    return kinds


def _templated_instruction(
    rng: random.Random, scene: SceneGraph, path: PathRecord, instr_id: str
) -> InstructionRecord:
    tokens: list[str] = []
    chunks: list[Chunk] = []
    for i, kind in enumerate(_step_kinds(scene, path.vertices)):
        words = rng.choice(_STEP_TEMPLATES[kind])
        chunks.append(
            Chunk(
                token_span=(len(tokens), len(tokens) + len(words)),
                path_span=(i, i + 1),
            )
        )
        tokens.extend(words)
    return InstructionRecord(
        path_id=path.path_id, instr_id=instr_id, tokens=tuple(tokens), chunks=tuple(chunks)
    )


def _random_unit_feature(rng: random.Random, dim: int) -> tuple[float, ...]:
    raw = [rng.gauss(0.0, 1.0) for _ in range(dim)]
    norm = math.sqrt(sum(x * x for x in raw)) or 1.0
    return tuple(round9(x / norm) for x in raw)


def synth_generate(
    seed: int,
    n_scenes: int,
    rooms_per_scene: int = 3,
    room_size: float = 4.0,
    paths_per_scene: int = 8,
    feature_dim: int = 4,
) -> DatasetBundle:
    """Deterministic desk-scale bundle: scenes, paths and instructions.

    Scenes are chains of fully-connected room clusters joined by single
    corridor edges, so every scene is connected and owns at least one
    bridge. Paths are hop-shortest routes whose endpoints usually sit in
    different rooms, which makes most of them cross a corridor. Roughly
    half the paths get a second instruction variant.
    """
    if n_scenes < 1 or rooms_per_scene < 2 or paths_per_scene < 1:
        raise BadParams("need n_scenes >= 1, rooms_per_scene >= 2, paths_per_scene >= 1")
    if room_size <= 0 or feature_dim < 1:
        raise BadParams("need room_size > 0 and feature_dim >= 1")

    rng = random.Random(seed)
    scenes: dict[str, SceneGraph] = {}
    paths: list[PathRecord] = []
    instructions: list[InstructionRecord] = []

    for s in range(n_scenes):
        scene_id = f"synth{s:03d}"
        rooms: list[list[str]] = []
        vertices: list[Vertex] = []
        edges: list[tuple[str, str]] = []
        idx = 0
        for r in range(rooms_per_scene):
            center = (r * 2.0 * room_size, rng.uniform(-0.5, 0.5) * room_size, 0.0)
            members: list[str] = []
            for _ in range(rng.randint(3, 5)):
                vid = f"v{idx:02d}"
                idx += 1
                pos = (
                    round9(center[0] + rng.uniform(-0.5, 0.5) * room_size),
                    round9(center[1] + rng.uniform(-0.5, 0.5) * room_size),
                    round9(rng.uniform(0.0, 0.3)),
                )
                vertices.append(Vertex(id=vid, position=pos))
                members.append(vid)
            for a, b in combinations(members, 2):
                edges.append((a, b))
            rooms.append(members)
        for r in range(rooms_per_scene - 1):
            edges.append((rng.choice(rooms[r]), rng.choice(rooms[r + 1])))

        panoramas = {
            v.id: Panorama(
                feature_dim=feature_dim,
                cells=tuple(
                    ViewCell(
                        feature=_random_unit_feature(rng, feature_dim),
                        provenance=Provenance(scene_id, v.id, h, t),
                    )
                    for t in range(TIER_COUNT)
                    for h in range(SECTOR_COUNT)
                ),
            )
            for v in vertices
        }
        scene = make_scene(scene_id, vertices, edges, panoramas)
        scenes[scene_id] = scene

        for j in range(paths_per_scene):
            start_room = rng.randrange(rooms_per_scene)
            if rng.random() < 0.85:
                other = [r for r in range(rooms_per_scene) if r != start_room]
                end_room = rng.choice(other)
            else:
                end_room = start_room
            start = rng.choice(rooms[start_room])
            end = rng.choice([v for v in rooms[end_room] if v != start] or rooms[end_room])
            if end == start:
                continue
            route = shortest_path(scene, start, end)
            path = PathRecord(
                path_id=f"{scene_id}_p{j:02d}", scene_id=scene_id, vertices=tuple(route)
            )
            paths.append(path)
            variants = 1 + (rng.random() < 0.5)
            for i in range(variants):
                instructions.append(
                    _templated_instruction(
                        rng, scene, path, instr_id_for(path.path_id, i)
                    )
                )

    bundle = DatasetBundle(scenes=scenes, paths=paths, instructions=instructions)
    validate_bundle(bundle)
    return bundle


# pair sampling ------------------------------------------------------------


@dataclass(frozen=True)
class PairPlan:
    seed: int
    pairs: tuple[tuple[str, str], ...]


def sample_pairs(scene_ids: Iterable[str], n_pairs: int, seed: int) -> PairPlan:
    """Uniform distinct unordered pairs, repetition only after exhaustion."""
    ids = sorted(set(scene_ids))
    if n_pairs < 1:
        raise BadParams(f"n_pairs must be >= 1, got {n_pairs}")
    if len(ids) < 2:
        raise BadParams(f"need at least 2 scenes, got {len(ids)}")
    all_pairs = list(combinations(ids, 2))
    rng = random.Random(seed)
    if n_pairs <= len(all_pairs):
        chosen = rng.sample(all_pairs, n_pairs)
    else:
        chosen = rng.sample(all_pairs, len(all_pairs))
        chosen += rng.choices(all_pairs, k=n_pairs - len(all_pairs))
    return PairPlan(seed=seed, pairs=tuple(chosen))
