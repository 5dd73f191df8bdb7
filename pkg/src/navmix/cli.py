"""Command-line entry point.

Subcommands: synth, import, stats, augment, validate, metrics. Every
paper-worthy knob of the augmentation is a flag (alignment on/off, view
replacement count, pair count, sampling ratio), all runs are seeded, and
every augment run writes a manifest sufficient to reproduce it byte for
byte: the verbatim config, the seed, and content digests of the inputs.

Exit codes: 0 ok, 2 config error, 3 validation/data failure, 4 I/O.
The environment variable REM_SEED overrides --seed when set.
"""

from __future__ import annotations

import argparse
import csv
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

from . import dataset_io, eval_metrics
from .centrality import _brandes, _check_connected
from .dataset_io import DatasetBundle, file_digest, load_bundle, read_json, write_json
from .errors import BadParams, InvariantViolation, NavmixError, NoDonors, NoKeyEdge, ParseError
from .key_select import KeyEdge, select_key_edge
from .scene_mixup import CrossScene, align_orientation, cross_connect, mix_panoramas
from .splice import (
    AugmentedTriplet,
    GenConfig,
    SplitDonor,
    generate_pair,
    pair_seed,
    split_at_key_edge,
    split_chunks,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunConfig:
    """Everything an augment run depends on; goes into the manifest verbatim."""

    seed: int
    n_pairs: int
    scenes_dir: str
    dataset_file: str
    chunks_file: str
    out_dir: str
    top_k: int = 10
    k_replace: int = 3
    orientation_align: bool = True
    view_mix: bool = True
    cap_per_pair: int = 64
    sample_ratio: float = 1.0
    merge: bool = False
    workers: int = 1

    def check(self) -> None:
        if self.top_k < 1:
            raise BadParams(f"top_k must be >= 1, got {self.top_k}")
        if not 0 <= self.k_replace <= 12:
            raise BadParams(f"k_replace must be within 0..12, got {self.k_replace}")
        if self.n_pairs < 1:
            raise BadParams(f"n_pairs must be >= 1, got {self.n_pairs}")
        if self.cap_per_pair < 1:
            raise BadParams(f"cap_per_pair must be >= 1, got {self.cap_per_pair}")
        if not 0.0 <= self.sample_ratio <= 1.0:
            raise BadParams(f"sample_ratio must be within 0..1, got {self.sample_ratio}")
        if self.workers < 1:
            raise BadParams(f"workers must be >= 1, got {self.workers}")


@dataclass
class PairResult:
    scenes: tuple[str, str]
    cross: CrossScene | None
    key_edges: dict[str, KeyEdge]
    seed: int
    triplets: list[AugmentedTriplet]
    skipped_reason: str | None = None


def _build_pair(
    bundle: DatasetBundle,
    key_cache: dict[str, KeyEdge | None],
    config: RunConfig,
    sid1: str,
    sid2: str,
) -> PairResult:
    k1, k2 = key_cache[sid1], key_cache[sid2]
    ps = pair_seed(config.seed, sid1, sid2)
    if k1 is None or k2 is None:
        missing = sid1 if k1 is None else sid2
        return PairResult(
            scenes=(sid1, sid2), cross=None, key_edges={}, seed=ps,
            triplets=[], skipped_reason=f"no key edge in {missing}",
        )
    g1, g2 = bundle.scenes[sid1], bundle.scenes[sid2]
    cross = cross_connect(g1, k1, g2, k2)
    if config.orientation_align:
        cross = align_orientation(cross)
    if config.view_mix:
        cross = mix_panoramas(
            cross, config.k_replace, allow_unaligned=not config.orientation_align
        )
    try:
        triplets = generate_pair(
            g1, g2, k1, k2, bundle, GenConfig(cap_per_pair=config.cap_per_pair, seed=ps)
        )
        reason = None
    except NoDonors as exc:
        triplets = []
        reason = str(exc)
    return PairResult(
        scenes=(sid1, sid2), cross=cross, key_edges={sid1: k1, sid2: k2},
        seed=ps, triplets=triplets, skipped_reason=reason,
    )


def _triplet_records(results: Sequence[PairResult]) -> list[dict[str, Any]]:
    """Group triplets into dataset records: one record per spliced path."""
    records: dict[tuple[str, tuple[str, ...]], dict[str, Any]] = {}
    for res in results:
        for t in res.triplets:
            key = (t.cross_scene_id, t.vertices)
            rec = records.get(key)
            if rec is None:
                prov = t.provenance
                rec = {
                    "path_id": f"{t.cross_scene_id}::{prov.head_path_id}+{prov.tail_path_id}",
                    "scan": t.cross_scene_id,
                    "path": list(t.vertices),
                    "instructions": [],
                    "provenance": {
                        "head_path": prov.head_path_id,
                        "tail_path": prov.tail_path_id,
                        "junction": list(prov.junction),
                        "instruction_provenance": [],
                    },
                }
                records[key] = rec
            rec["instructions"].append(list(t.tokens))
            rec["provenance"]["instruction_provenance"].append(
                {
                    "head_instr": t.provenance.head_instr_id,
                    "tail_instr": t.provenance.tail_instr_id,
                    "head_token_count": t.provenance.head_token_count,
                }
            )
    return sorted(records.values(), key=lambda r: r["path_id"])


def run_augment(config: RunConfig) -> dict[str, Any]:
    """Full augmentation run; returns the manifest that was written."""
    config.check()
    bundle = load_bundle(config.scenes_dir, config.dataset_file, config.chunks_file)
    plan = dataset_io.sample_pairs(bundle.scenes, config.n_pairs, config.seed)

    key_cache: dict[str, KeyEdge | None] = {}
    for sid in sorted({s for pair in plan.pairs for s in pair}):
        try:
            key_cache[sid] = select_key_edge(
                bundle.scenes[sid], bundle.paths_by_scene(sid), config.top_k
            )
        except NoKeyEdge:
            key_cache[sid] = None

    def work(pair: tuple[str, str]) -> PairResult:
        return _build_pair(bundle, key_cache, config, *pair)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, plan.pairs))
    else:
        results = [work(pair) for pair in plan.pairs]

    records = _triplet_records(results)
    if config.sample_ratio < 1.0:
        keep_n = int(round(config.sample_ratio * len(records)))
        rng = random.Random(config.seed)
        keep = sorted(rng.sample(range(len(records)), keep_n))
        records = [records[i] for i in keep]

    out = Path(config.out_dir)
    emitted: set[str] = set()
    for res in results:
        if res.cross is None or res.cross.scene_id in emitted:
            continue
        emitted.add(res.cross.scene_id)
        dataset_io.save_cross_scene(
            res.cross, res.key_edges, res.seed, out / "scenes" / f"{res.cross.scene_id}.json"
        )
    write_json(out / "dataset.json", records)

    if config.merge:
        merged = dataset_io.dataset_records(bundle) + records
        write_json(out / "merged_dataset.json", sorted(merged, key=lambda r: r["path_id"]))

    n_instructions = sum(len(r["instructions"]) for r in records)
    manifest = {
        "config": asdict(config),
        "input_digests": {
            "dataset": file_digest(config.dataset_file),
            "chunks": file_digest(config.chunks_file),
            "scenes": {
                p.name: file_digest(p)
                for p in sorted(Path(config.scenes_dir).glob("*.json"))
                if not p.name.endswith(dataset_io.SIDE_CAR_SUFFIX)
            },
        },
        "counts": {
            "cross_scenes": len(emitted),
            "paths": len(records),
            "instructions": n_instructions,
        },
        "pairs": [
            {
                "scenes": list(res.scenes),
                "cross_scene": res.cross.scene_id if res.cross else None,
                "pair_seed": res.seed,
                "key_edges": {
                    sid: dataset_io._key_edge_to_obj(k) for sid, k in sorted(res.key_edges.items())
                },
                "n_triplets": len(res.triplets),
                "skipped_reason": res.skipped_reason,
            }
            for res in results
        ],
    }
    write_json(out / "manifest.json", manifest)
    return manifest


# validate ------------------------------------------------------------------


class _DonorIndex:
    """Rebuilds donors for recorded provenance from the original bundle."""

    def __init__(self, source: DatasetBundle):
        self.paths = {p.path_id: p for p in source.paths}
        self.instructions = {i.instr_id: i for i in source.instructions}
        self._splits: dict[tuple[str, str], SplitDonor | None] = {}

    def donor(self, key_edges: dict[str, KeyEdge], path_id: str, instr_id: str) -> SplitDonor | None:
        p = self.paths.get(path_id)
        instr = self.instructions.get(instr_id)
        if p is None or instr is None or p.scene_id not in key_edges:
            return None
        cache_key = (path_id, p.scene_id)
        if cache_key not in self._splits:
            self._splits[cache_key] = split_at_key_edge(p, key_edges[p.scene_id])
        base = self._splits[cache_key]
        return None if base is None else split_chunks(instr, base)


def run_validate(
    scenes_dir: str,
    dataset_file: str,
    source: DatasetBundle | None = None,
) -> tuple[int, dict[str, list[str]]]:
    """Validate an augment output tree. Returns (item count, violations by rule)."""
    scenes_dir = Path(scenes_dir)
    crosses: dict[str, dataset_io.CrossSceneFile] = {}
    for sidecar in sorted(scenes_dir.glob(f"*{dataset_io.SIDE_CAR_SUFFIX}")):
        scene_file = sidecar.parent / (sidecar.name[: -len(dataset_io.SIDE_CAR_SUFFIX)] + ".json")
        csf = dataset_io.load_cross_scene(scene_file)
        crosses[csf.cross.scene_id] = csf

    records = read_json(Path(dataset_file))
    if not isinstance(records, list):
        raise ParseError(f"{dataset_file}: expected a JSON array")
    index = _DonorIndex(source) if source is not None else None

    by_rule: dict[str, set[str]] = {}
    n_items = 0
    for rec in records:
        scan = rec.get("scan")
        csf = crosses.get(scan)
        if csf is None:
            by_rule.setdefault("unknown-cross-scene", set()).add(
                f"{rec.get('path_id')}: scene {scan} has no mixup sidecar"
            )
            continue
        prov = rec.get("provenance", {})
        iprov = prov.get("instruction_provenance", [])
        for i, tokens in enumerate(rec.get("instructions", [])):
            n_items += 1
            donors = None
            if index is not None and i < len(iprov):
                head = index.donor(csf.key_edges, prov.get("head_path", ""), iprov[i]["head_instr"])
                tail = index.donor(csf.key_edges, prov.get("tail_path", ""), iprov[i]["tail_instr"])
                if head is not None and tail is not None:
                    donors = (head, tail)
            triplet = AugmentedTriplet(
                cross_scene_id=scan,
                vertices=tuple(rec["path"]),
                tokens=tuple(tokens),
            )
            for v in eval_metrics.validate_triplet(triplet, csf.cross, donors):
                by_rule.setdefault(v.rule, set()).add(v.message)
    return n_items, {rule: sorted(msgs) for rule, msgs in sorted(by_rule.items())}


# metrics ---------------------------------------------------------------------


def run_metrics(
    scenes_dir: str, dataset_file: str, predictions_file: str, out_csv: str,
    d_th: float = eval_metrics.SUCCESS_RADIUS_M,
) -> None:
    scenes = {}
    for p in sorted(Path(scenes_dir).glob("*.json")):
        if p.name.endswith(dataset_io.SIDE_CAR_SUFFIX):
            continue
        g = dataset_io.load_scene(p)
        scenes[g.scene_id] = g
    refs = {
        rec["path_id"]: (rec["scan"], list(rec["path"]))
        for rec in read_json(Path(dataset_file))
    }
    preds = {rec["path_id"]: list(rec["path"]) for rec in read_json(Path(predictions_file))}

    fields = ["path_id", "tl", "ne", "sr", "oracle_sr", "spl", "ndtw", "sdtw", "cls"]
    rows = []
    for pid in sorted(preds):
        if pid not in refs:
            raise InvariantViolation(record=pid, rule="unknown-reference-path")
        scan, ref_path = refs[pid]
        scene = scenes.get(scan)
        if scene is None:
            raise InvariantViolation(record=pid, rule="unknown-scene", detail=scan)
        pred_path = preds[pid]
        rep = eval_metrics.replay(pred_path, scene, goal=ref_path[-1])
        ref_len = eval_metrics.path_length_m(ref_path, scene)
        rows.append(
            {
                "path_id": pid,
                "tl": rep.trajectory_length,
                "ne": rep.nav_error,
                "sr": int(rep.success),
                "oracle_sr": int(rep.oracle_success),
                "spl": eval_metrics.spl(rep.success, ref_len, rep.trajectory_length),
                "ndtw": eval_metrics.ndtw(ref_path, pred_path, scene, d_th),
                "sdtw": eval_metrics.sdtw(ref_path, pred_path, scene, d_th),
                "cls": eval_metrics.cls_score(ref_path, pred_path, scene, d_th),
            }
        )
    out_path = Path(out_csv)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        if rows:
            agg = {"path_id": "AGGREGATE"}
            for key in fields[1:]:
                agg[key] = _fmt(sum(r[key] for r in rows) / len(rows))
            writer.writerow(agg)
    write_json(
        out_path.parent / (out_path.name + ".meta.json"),
        {
            "d_th_m": d_th,
            "cls_variant": "original (coverage x length-score, no clamp)",
            "spl_reference_length": "metric length of the reference path",
            "items": len(rows),
        },
    )


def _fmt(value: Any) -> Any:
    if isinstance(value, float):
        return f"{value:.9g}"
    return value


# command handlers ------------------------------------------------------------


def _cmd_synth(args: argparse.Namespace) -> int:
    bundle = dataset_io.synth_generate(
        seed=args.seed,
        n_scenes=args.n_scenes,
        rooms_per_scene=args.rooms_per_scene,
        room_size=args.room_size,
        paths_per_scene=args.paths_per_scene,
        feature_dim=args.feature_dim,
    )
    out = Path(args.out)
    dataset_io.save_bundle(bundle, out)
    write_json(
        out / "manifest.json",
        {
            "generator": {
                "seed": args.seed,
                "n_scenes": args.n_scenes,
                "rooms_per_scene": args.rooms_per_scene,
                "room_size": args.room_size,
                "paths_per_scene": args.paths_per_scene,
                "feature_dim": args.feature_dim,
            },
            "counts": {
                "scenes": len(bundle.scenes),
                "paths": len(bundle.paths),
                "instructions": len(bundle.instructions),
            },
        },
    )
    print(
        f"synth: {len(bundle.scenes)} scenes, {len(bundle.paths)} paths, "
        f"{len(bundle.instructions)} instructions -> {out}"
    )
    return EXIT_OK


def _cmd_import(args: argparse.Namespace) -> int:
    g = dataset_io.import_matterport_connectivity(
        Path(args.infile), scene_id=args.scene_id, feature_dim=args.feature_dim
    )
    dataset_io.save_scene(g, Path(args.out))
    print(f"import: scene {g.scene_id}: {len(g.vertices)} vertices, {len(g.edges)} edges")
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    bundle = load_bundle(args.scenes, args.dataset, args.chunks)
    csv_rows = []
    for sid in sorted(bundle.scenes):
        g = bundle.scenes[sid]
        try:
            k = select_key_edge(g, bundle.paths_by_scene(sid), args.top_k)
            print(
                f"scene={sid} key_edge={k.v_s}-{k.v_t} n_e={k.path_count} "
                f"vc_rank_s={k.vc_rank_s} vc_rank_t={k.vc_rank_t} ec_rank={k.ec_rank}"
            )
        except NoKeyEdge as exc:
            print(f"scene={sid} key_edge=none reason={exc}")
        if args.scores_csv:
            _check_connected(g)
            scores = _brandes(g)
            for vid in sorted(scores.vertex_scores):
                csv_rows.append((sid, "vertex", vid, "", scores.vertex_scores[vid]))
            for u, v in sorted(scores.edge_scores):
                csv_rows.append((sid, "edge", u, v, scores.edge_scores[(u, v)]))
    if args.scores_csv:
        path = Path(args.scores_csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scene", "vertex_or_edge", "id1", "id2", "score"])
            for row in sorted(csv_rows):
                writer.writerow([*row[:4], _fmt(float(row[4]))])
    return EXIT_OK


def _cmd_augment(args: argparse.Namespace) -> int:
    config = RunConfig(
        seed=args.seed,
        n_pairs=args.n_pairs,
        scenes_dir=args.scenes,
        dataset_file=args.dataset,
        chunks_file=args.chunks,
        out_dir=args.out,
        top_k=args.top_k,
        k_replace=args.k_replace,
        orientation_align=not args.no_orientation_align,
        view_mix=not args.no_view_mix,
        cap_per_pair=args.cap_per_pair,
        sample_ratio=args.sample_ratio,
        merge=args.merge,
        workers=args.workers,
    )
    manifest = run_augment(config)
    counts = manifest["counts"]
    print(
        f"augment: {counts['cross_scenes']} cross scenes, {counts['paths']} paths, "
        f"{counts['instructions']} instructions -> {config.out_dir}"
    )
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    source = None
    if args.source_scenes and args.source_dataset and args.source_chunks:
        source = load_bundle(args.source_scenes, args.source_dataset, args.source_chunks)
    n_items, by_rule = run_validate(args.scenes, args.dataset, source)
    if not by_rule:
        print(f"validate: {n_items} items, no violations")
        return EXIT_OK
    total = sum(len(msgs) for msgs in by_rule.values())
    print(f"validate: {n_items} items, {total} violations")
    for rule, msgs in by_rule.items():
        print(f"  [{rule}] x{len(msgs)}")
        for msg in msgs[:5]:
            print(f"    {msg}")
        if len(msgs) > 5:
            print(f"    ... {len(msgs) - 5} more")
    return EXIT_VALIDATION


def _cmd_metrics(args: argparse.Namespace) -> int:
    run_metrics(args.scenes, args.dataset, args.predictions, args.out, d_th=args.d_th)
    print(f"metrics: wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="navmix",
        description="Cross-connect navigation scenes and splice augmented training triplets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a deterministic synthetic bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-scenes", type=int, default=10)
    p.add_argument("--rooms-per-scene", type=int, default=3)
    p.add_argument("--room-size", type=float, default=4.0)
    p.add_argument("--paths-per-scene", type=int, default=8)
    p.add_argument("--feature-dim", type=int, default=4)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("import", help="import a simulator connectivity file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scene-id", default=None)
    p.add_argument("--feature-dim", type=int, default=1)
    p.set_defaults(fn=_cmd_import)

    p = sub.add_parser("stats", help="print per-scene key edges and centrality")
    p.add_argument("--scenes", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--chunks", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--scores-csv", default=None)
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("augment", help="emit cross scenes and spliced triplets")
    p.add_argument("--scenes", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--chunks", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-pairs", type=int, required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--k-replace", type=int, default=3)
    p.add_argument("--no-orientation-align", action="store_true")
    p.add_argument("--no-view-mix", action="store_true")
    p.add_argument("--cap-per-pair", type=int, default=64)
    p.add_argument("--sample-ratio", type=float, default=1.0)
    p.add_argument("--merge", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=_cmd_augment)

    p = sub.add_parser("validate", help="re-check every emitted triplet")
    p.add_argument("--scenes", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--source-scenes", default=None)
    p.add_argument("--source-dataset", default=None)
    p.add_argument("--source-chunks", default=None)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("metrics", help="score predicted paths against references")
    p.add_argument("--scenes", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--d-th", type=float, default=eval_metrics.SUCCESS_RADIUS_M)
    p.set_defaults(fn=_cmd_metrics)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "seed") and os.environ.get("REM_SEED"):
        try:
            args.seed = int(os.environ["REM_SEED"])
        except ValueError:
            print("REM_SEED must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    try:
        return args.fn(args)
    except BadParams as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, FileNotFoundError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NavmixError as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
