"""Path replay, navigation metrics, and triplet validation.

Success uses the standard 3-meter goal radius. Path-fidelity metrics are
computed on vertex positions with Euclidean ground distance:

* nDTW = exp(-DTW(ref, pred) / (|ref| * d_th)) with the textbook monotone
  alignment (match / insert / delete, each visited cell's distance added
  once), normalized by the reference point count.
* SDTW gates nDTW on endpoint success against the reference goal.
* CLS = coverage * length-score in its original form: coverage is the
  mean over reference points of exp(-d(point, pred) / d_th); the expected
  length is coverage * reference length; the length score is
  EPL / (EPL + |EPL - PL|). No clamping variant is applied.

``validate_triplet`` re-checks everything the mixing pipeline promises
about an emitted triplet; violations come back as data so ablation runs
can report mismatches instead of crashing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import BadLengths, DegenerateDirection, EmptyPath, InvalidPath
from .nav_graph import (
    SECTOR_COUNT,
    TIER_COUNT,
    SceneGraph,
    Vec3,
    euclidean,
    heading,
    heading_delta,
    norm_edge,
    sector_index,
)
from .scene_mixup import CrossScene, junction_expected_heading, replacement_offsets
from .splice import AugmentedTriplet, SplitDonor

SUCCESS_RADIUS_M = 3.0
JUNCTION_HEADING_TOL_RAD = 1e-9


@dataclass(frozen=True)
class ReplayResult:
    trajectory_length: float
    nav_error: float
    success: bool
    oracle_success: bool
    step_headings: tuple[float, ...]
    step_sectors: tuple[int, ...]


def _resolve_path(path: Sequence[str], scene: SceneGraph) -> list[Vec3]:
    if not path:
        raise InvalidPath("empty path")
    for i, v in enumerate(path):
        if v not in scene.vertices:
            raise InvalidPath(f"step {i}: unknown vertex {v!r}")
    for i, (u, v) in enumerate(zip(path, path[1:])):
        if not scene.has_edge(u, v):
            raise InvalidPath(f"step {i}: {u} -> {v} is not an edge")
    return [scene.position(v) for v in path]


def replay(path: Sequence[str], scene: SceneGraph, goal: str) -> ReplayResult:
    """Walk an edge-valid path and measure it against a goal viewpoint."""
    positions = _resolve_path(path, scene)
    if goal not in scene.vertices:
        raise InvalidPath(f"unknown goal vertex {goal!r}")
    goal_pos = scene.position(goal)
    tl = sum(euclidean(a, b) for a, b in zip(positions, positions[1:]))
    ne = euclidean(positions[-1], goal_pos)
    headings = tuple(heading(a, b) for a, b in zip(positions, positions[1:]))
    return ReplayResult(
        trajectory_length=tl,
        nav_error=ne,
        success=ne <= SUCCESS_RADIUS_M,
        oracle_success=min(euclidean(p, goal_pos) for p in positions) <= SUCCESS_RADIUS_M,
        step_headings=headings,
        step_sectors=tuple(sector_index(h) for h in headings),
    )


def spl(success: bool, shortest_len: float, actual_len: float) -> float:
    """Success weighted by path length."""
    for name, value in (("shortest_len", shortest_len), ("actual_len", actual_len)):
        if not math.isfinite(value) or value < 0.0:
            raise BadLengths(f"{name} must be finite and >= 0, got {value!r}")
    if not success:
        return 0.0
    if shortest_len == 0.0 and actual_len == 0.0:
        return 1.0
    return shortest_len / max(shortest_len, actual_len)


def dtw_distance(ref: Sequence[Vec3], pred: Sequence[Vec3]) -> float:
    """Monotone dynamic-time-warping cost between two position sequences."""
    if not ref or not pred:
        raise EmptyPath("both paths must be nonempty")
    n, m = len(ref), len(pred)
    local = np.empty((n, m))
    for i, a in enumerate(ref):
        for j, b in enumerate(pred):
            local[i, j] = euclidean(a, b)
    acc = np.full((n, m), np.inf)
    acc[0, 0] = local[0, 0]
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                continue
            best = np.inf
            if i > 0:
                best = min(best, acc[i - 1, j])
            if j > 0:
                best = min(best, acc[i, j - 1])
            if i > 0 and j > 0:
                best = min(best, acc[i - 1, j - 1])
            acc[i, j] = local[i, j] + best
    return float(acc[n - 1, m - 1])


def _positions(path: Sequence[str], scene: SceneGraph) -> list[Vec3]:
    if not path:
        raise EmptyPath("path is empty")
    return [scene.position(v) for v in path]


def path_length_m(path: Sequence[str], scene: SceneGraph) -> float:
    pos = _positions(path, scene)
    return sum(euclidean(a, b) for a, b in zip(pos, pos[1:]))


def ndtw(
    ref_path: Sequence[str],
    pred_path: Sequence[str],
    scene: SceneGraph,
    d_th: float = SUCCESS_RADIUS_M,
) -> float:
    ref = _positions(ref_path, scene)
    pred = _positions(pred_path, scene)
    return math.exp(-dtw_distance(ref, pred) / (len(ref) * d_th))


def sdtw(
    ref_path: Sequence[str],
    pred_path: Sequence[str],
    scene: SceneGraph,
    d_th: float = SUCCESS_RADIUS_M,
) -> float:
    ref = _positions(ref_path, scene)
    pred = _positions(pred_path, scene)
    if euclidean(pred[-1], ref[-1]) > d_th:
        return 0.0
    return ndtw(ref_path, pred_path, scene, d_th)


def cls_score(
    ref_path: Sequence[str],
    pred_path: Sequence[str],
    scene: SceneGraph,
    d_th: float = SUCCESS_RADIUS_M,
) -> float:
    ref = _positions(ref_path, scene)
    pred = _positions(pred_path, scene)
    coverage = sum(
        math.exp(-min(euclidean(r, p) for p in pred) / d_th) for r in ref
    ) / len(ref)
    ref_len = sum(euclidean(a, b) for a, b in zip(ref, ref[1:]))
    pred_len = sum(euclidean(a, b) for a, b in zip(pred, pred[1:]))
    expected = coverage * ref_len
    if expected == 0.0 and pred_len == 0.0:
        length_score = 1.0
    else:
        length_score = expected / (expected + abs(expected - pred_len))
    return coverage * length_score


# triplet validation --------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    value: float | None = None


def _junction_steps(t: AugmentedTriplet, c: CrossScene) -> list[int]:
    cross = c.cross_edge_set()
    return [
        i
        for i, (u, v) in enumerate(zip(t.vertices, t.vertices[1:]))
        if norm_edge(u, v) in cross
    ]


def validate_triplet(
    t: AugmentedTriplet,
    c: CrossScene,
    donors: tuple[SplitDonor, SplitDonor] | None = None,
) -> list[Violation]:
    """Check one emitted triplet against its cross scene.

    Verifies edge validity, the single junction crossing, junction heading
    restoration, and the panorama provenance pattern; with the head/tail
    donors supplied it also re-derives the spliced path and tokens.
    Violations are returned, never raised.
    """
    out: list[Violation] = []

    for i, (u, v) in enumerate(zip(t.vertices, t.vertices[1:])):
        if u not in c.graph.vertices or v not in c.graph.vertices or not c.graph.has_edge(u, v):
            out.append(
                Violation(rule="edge-validity", message=f"step {i}: {u} -> {v} is not an edge")
            )

    junctions = _junction_steps(t, c)
    if len(junctions) != 1:
        out.append(
            Violation(
                rule="cross-crossing-count",
                message=f"path crosses a cross edge {len(junctions)} times, expected 1",
                value=float(len(junctions)),
            )
        )

    if donors is not None:
        head_donor, tail_donor = donors
        expect_tokens = head_donor.head_tokens() + tail_donor.tail_tokens()
        if t.tokens != expect_tokens:
            out.append(
                Violation(
                    rule="token-reconstruction",
                    message="tokens differ from donor chunk concatenation",
                )
            )

    if len(junctions) == 1 and not any(v.rule == "edge-validity" for v in out):
        i = junctions[0]
        u, w = t.vertices[i], t.vertices[i + 1]
        expected = junction_expected_heading(c, u, w)
        try:
            actual = heading(c.graph.position(u), c.graph.position(w))
        except DegenerateDirection:
            out.append(
                Violation(rule="junction-heading", message=f"junction {u} -> {w} is vertical")
            )
            actual = None
        mismatch = None if actual is None else abs(heading_delta(actual, expected))
        if mismatch is not None and mismatch > JUNCTION_HEADING_TOL_RAD:
            out.append(
                Violation(
                    rule="junction-heading",
                    message=(
                        f"junction {u} -> {w} heading off by "
                        f"{math.degrees(mismatch):.6f} degrees"
                    ),
                    value=mismatch,
                )
            )

    out.extend(check_panorama_pattern(c))
    return out


def check_panorama_pattern(c: CrossScene) -> list[Violation]:
    """Verify the donor/host provenance layout at the four key vertexes."""
    out: list[Violation] = []
    kv = c.key_vertices
    offsets = replacement_offsets(c.k_replace)
    for host in kv.all():
        if host not in c.panoramas:
            continue
        host_scene = c.host_scene_of(host)
        donor = kv.donor_of(host)
        donor_scene = c.host_scene_of(donor)
        nbr = kv.junction_neighbor(host)
        center = sector_index(heading(c.graph.position(host), c.graph.position(nbr)))
        expected_donor = {(center + off) % SECTOR_COUNT for off in offsets}
        pano = c.panoramas[host]
        for h in range(SECTOR_COUNT):
            want = donor_scene if h in expected_donor else host_scene
            for v in range(TIER_COUNT):
                got = pano.cell(h, v).provenance.scene_id
                if got != want:
                    out.append(
                        Violation(
                            rule="panorama-provenance",
                            message=(
                                f"{host} cell (h={h}, v={v}) is from {got}, expected {want}"
                            ),
                        )
                    )
    return out
