"""Offline track reconstruction from logged detections.

The whole video's detections (HOG vector + window center each) are clustered
once: k is the maximum per-frame detection count, k-means runs with many
seeded random restarts, and each cluster's points connected in frame order
form one person's path. Two same-frame detections can land in one cluster;
that is reported as a collision diagnostic, not repaired.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from .detector import Detection
from .errors import DataError, ConfigError, FormatError, ShapeError

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DetectionRecord:
    """Per-frame detection log with the frame geometry it was taken on."""

    frame_w: int
    frame_h: int
    frames: Tuple[Tuple[int, Tuple[Detection, ...]], ...]

    def __post_init__(self):
        indices = [f for f, _ in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise DataError("frame indices must be strictly increasing")

    @property
    def total_detections(self) -> int:
        return sum(len(dets) for _, dets in self.frames)


def make_record(frame_w: int, frame_h: int,
                frames: Sequence[Tuple[int, Sequence[Detection]]]) -> DetectionRecord:
    return DetectionRecord(frame_w, frame_h,
                           tuple((f, tuple(dets)) for f, dets in frames))


@dataclass(frozen=True)
class ClusterPoint:
    frame: int
    cx: float
    cy: float
    vector: np.ndarray


@dataclass(frozen=True)
class Track:
    id: int
    points: Tuple[Tuple[int, float, float], ...]  # (frame, cx, cy), frame-sorted


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float


def choose_k(record: DetectionRecord) -> int:
    """Maximum per-frame detection count over the whole record."""
    if not record.frames:
        raise DataError("record has no frames")
    return max(len(dets) for _, dets in record.frames)


def build_points(record: DetectionRecord, location_weight: float = 1.0) -> List[ClusterPoint]:
    """One clustering point per detection: HOG vector with the normalized,
    weighted window center appended."""
    points: List[ClusterPoint] = []
    dim = None
    for frame, dets in record.frames:
        for d in dets:
            if d.features is None:
                raise ShapeError(f"detection in frame {frame} carries no feature vector")
            if dim is None:
                dim = d.features.shape[0]
            elif d.features.shape[0] != dim:
                raise ShapeError(
                    f"feature length {d.features.shape[0]} != {dim} in frame {frame}")
            cx, cy = d.center
            vector = np.concatenate([
                np.asarray(d.features, dtype=np.float64),
                [location_weight * cx / record.frame_w,
                 location_weight * cy / record.frame_h],
            ])
            points.append(ClusterPoint(frame, cx, cy, vector))
    return points


def _mix64(seed: int, restart: int) -> int:
    """splitmix64 of (seed, restart): one independent stream per restart."""
    z = (seed + (restart + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def _sq_dists(pts: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _lloyd(pts: np.ndarray, k: int, rng: np.random.Generator,
           max_iters: int) -> Tuple[np.ndarray, np.ndarray, float, List[float]]:
    """One k-means run from k distinct sampled points.

    Returns (assignments, centroids, inertia, history) where history holds
    the inertia after every update step; it is non-increasing. Empty clusters
    seize the point currently farthest from its centroid.
    """
    n = len(pts)
    init = rng.choice(n, size=k, replace=False)
    centroids = pts[init].astype(np.float64).copy()
    assign = np.argmin(_sq_dists(pts, centroids), axis=1)
    history: List[float] = []
    inertia = float("inf")
    for it in range(max_iters):
        for j in range(k):
            members = pts[assign == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
        counts = np.bincount(assign, minlength=k)
        if np.any(counts == 0):
            dist_own = ((pts - centroids[assign]) ** 2).sum(axis=1)
            for j in np.flatnonzero(counts == 0):
                farthest = int(np.argmax(dist_own))
                centroids[j] = pts[farthest]
                assign[farthest] = j
                dist_own[farthest] = 0.0
        d2 = _sq_dists(pts, centroids)
        inertia = float(d2[np.arange(n), assign].sum())
        assert not history or inertia <= history[-1] + 1e-9
        history.append(inertia)
        new_assign = np.argmin(d2, axis=1)
        if np.array_equal(new_assign, assign) or it == max_iters - 1:
            break
        assign = new_assign
    return assign.copy(), centroids, inertia, history


def kmeans(points: Sequence[np.ndarray], k: int, restarts: int = 100,
           max_iters: int = 300, seed: int = 0) -> KMeansResult:
    """Best of ``restarts`` seeded Lloyd runs (ties go to the lowest restart).

    Initialization samples k distinct points; restart r draws from a
    generator seeded with mix(seed, r), so results do not depend on how
    restarts are scheduled.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ShapeError("points must be a 2-D array-like (n, dim)")
    n = len(pts)
    if n == 0:
        raise DataError("k-means needs at least one point")
    if k < 1 or k > n:
        raise DataError(f"k must be in [1, {n}], got {k}")
    if restarts < 1:
        raise ConfigError("restarts must be >= 1")
    best = None
    for r in range(restarts):
        rng = np.random.Generator(np.random.PCG64(_mix64(seed, r)))
        assign, centroids, inertia, _ = _lloyd(pts, k, rng, max_iters)
        if best is None or inertia < best.inertia:
            best = KMeansResult(assign, centroids, inertia)
    return best


def build_tracks(record: DetectionRecord, result: KMeansResult) -> List[Track]:
    """Connect each cluster's detections in frame order (ties by cx then cy)."""
    centers = [(frame, d.center[0], d.center[1])
               for frame, dets in record.frames for d in dets]
    if len(result.assignments) != len(centers):
        raise ShapeError(
            f"{len(result.assignments)} assignments for {len(centers)} detections")
    k = len(result.centroids)
    tracks = []
    for cluster in range(k):
        pts = [c for c, a in zip(centers, result.assignments) if a == cluster]
        if pts:
            tracks.append(Track(cluster, tuple(sorted(pts))))
    return tracks


def track(record: DetectionRecord, location_weight: float = 1.0,
          restarts: int = 100, seed: int = 0, max_iters: int = 300) -> List[Track]:
    """choose_k -> build_points -> kmeans -> build_tracks; no detections, no tracks."""
    k = choose_k(record)
    if k == 0:
        return []
    points = build_points(record, location_weight)
    vectors = np.stack([p.vector for p in points])
    result = kmeans(vectors, k, restarts=restarts, max_iters=max_iters, seed=seed)
    return build_tracks(record, result)


def same_frame_collisions(tracks: Sequence[Track]) -> int:
    """Number of extra points sharing a frame within one track (0 is clean)."""
    collisions = 0
    for t in tracks:
        frames = [f for f, _, _ in t.points]
        collisions += len(frames) - len(set(frames))
    return collisions


# ---------------------------------------------------------------------------
# record files: header `hog_dim frame_w frame_h`, then one line per detection
# `frame x y w h score f1 .. fN`. Frames without detections are not stored.


def save_record(record: DetectionRecord, path) -> None:
    dims = {d.features.shape[0] for _, dets in record.frames for d in dets
            if d.features is not None}
    if len(dims) > 1:
        raise ShapeError(f"inconsistent feature lengths in record: {sorted(dims)}")
    hog_dim = dims.pop() if dims else 0
    with open(path, "w") as f:
        f.write(f"{hog_dim} {record.frame_w} {record.frame_h}\n")
        for frame, dets in record.frames:
            for d in dets:
                feats = " ".join(repr(float(v)) for v in d.features)
                f.write(f"{frame} {d.x} {d.y} {d.w} {d.h} {d.score!r} {feats}\n".rstrip() + "\n")


def load_record(path) -> DetectionRecord:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError("record file is empty", line=1)
    header = lines[0].split()
    if len(header) != 3:
        raise FormatError("header must be 'hog_dim frame_w frame_h'", line=1)
    try:
        hog_dim, frame_w, frame_h = (int(v) for v in header)
    except ValueError:
        raise FormatError(f"non-integer header field in {lines[0]!r}", line=1) from None
    frames: List[Tuple[int, List[Detection]]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6 + hog_dim:
            raise FormatError(
                f"expected {6 + hog_dim} fields, got {len(parts)}", line=lineno)
        try:
            frame, x, y, w, h = (int(v) for v in parts[:5])
            score = float(parts[5])
            feats = np.array([float(v) for v in parts[6:]])
        except ValueError:
            raise FormatError(f"malformed record line", line=lineno) from None
        det = Detection(frame, x, y, w, h, score, feats)
        if frames and frames[-1][0] == frame:
            frames[-1][1].append(det)
        else:
            frames.append((frame, [det]))
    return make_record(frame_w, frame_h, frames)


def save_tracks(tracks: Sequence[Track], path) -> None:
    """JSON document: [{id, points: [{frame, cx, cy}]}]."""
    import json

    doc = [{"id": t.id,
            "points": [{"frame": f, "cx": cx, "cy": cy} for f, cx, cy in t.points]}
           for t in tracks]
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_tracks(path) -> List[Track]:
    import json

    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"tracks file is not valid JSON: {e.msg}", offset=e.pos) from e
    return [Track(int(t["id"]),
                  tuple((int(p["frame"]), float(p["cx"]), float(p["cy"]))
                        for p in t["points"]))
            for t in doc]
