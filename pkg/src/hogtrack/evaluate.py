"""Precision/recall scoring against ground truth, plus the two-path benchmark
that compares full-frame detection against saliency-windowed detection."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import DataError
from .hog import GrayImage, HogConfig
from .svm import LinearSvmModel


@dataclass(frozen=True)
class GroundTruthBox:
    frame: int
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise DataError(f"ground truth box must have positive size, got {self.w}x{self.h}")


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    wall_time_s: float
    windows_classified: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int,
                    wall_time_s: float = 0.0, windows_classified: int = 0) -> "EvalReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        return cls(tp, fp, fn, precision, recall, wall_time_s, windows_classified)


def iou(a: Tuple[int, int, int, int], b: Tuple[int, int, int, int]) -> float:
    """Intersection over union of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union else 0.0


def match_and_score(detections: Sequence, truth: Iterable[GroundTruthBox],
                    iou_cutoff: float = 0.5, wall_time_s: float = 0.0,
                    windows_classified: int = 0) -> EvalReport:
    """Greedy per-frame matching.

    Detections are taken in descending score (ties keep input order) and each
    one claims the unmatched truth box of highest IoU; the claim counts as a
    TP only when that IoU reaches the cutoff, otherwise the detection is a FP
    and the box stays available. Remaining truth boxes are FNs.
    """
    truth = list(truth)
    truth_by_frame: dict = {}
    for t in truth:
        truth_by_frame.setdefault(t.frame, []).append(t)
    dets_by_frame: dict = {}
    for d in detections:
        dets_by_frame.setdefault(d.frame, []).append(d)

    tp = fp = 0
    for frame, dets in dets_by_frame.items():
        boxes = truth_by_frame.get(frame, [])
        used = [False] * len(boxes)
        for d in sorted(dets, key=lambda d: -d.score):
            best_i = -1
            best_iou = 0.0
            for i, t in enumerate(boxes):
                if used[i]:
                    continue
                v = iou((d.x, d.y, d.w, d.h), (t.x, t.y, t.w, t.h))
                if v > best_iou:  # strict: ties resolve to the lower truth index
                    best_iou = v
                    best_i = i
            if best_i >= 0 and best_iou >= iou_cutoff:
                tp += 1
                used[best_i] = True
            else:
                fp += 1
    fn = len(truth) - tp
    return EvalReport.from_counts(tp, fp, fn, wall_time_s, windows_classified)


@dataclass(frozen=True)
class BenchResult:
    full: EvalReport
    salient: EvalReport
    time_ratio: float      # full time / salient time
    windows_ratio: float   # salient classified / full classified
    saliency_time_s: float


def bench_compare(frames: Sequence[GrayImage], provider, model: LinearSvmModel,
                  hog_config: HogConfig, params, truth: Iterable[GroundTruthBox] = (),
                  stems: Optional[Sequence[str]] = None,
                  iou_cutoff: float = 0.5) -> BenchResult:
    """Run both detector paths over the same frames and score each.

    Saliency maps are computed up front and their cost is reported separately;
    the per-path wall times cover detection work only (frame decode is the
    caller's responsibility and is excluded by construction).
    """
    from . import detector  # local import: detector depends on this module

    truth = list(truth)
    if stems is None:
        stems = [str(i) for i in range(len(frames))]

    t0 = time.perf_counter()
    maps = [provider.compute(img, stem) for img, stem in zip(frames, stems)]
    saliency_time = time.perf_counter() - t0

    windows_full = sum(
        len(detector.sliding_windows(img.width, img.height, hog_config.window_w,
                                     hog_config.window_h, params.stride))
        for img in frames)

    t0 = time.perf_counter()
    full_dets: List = []
    for i, img in enumerate(frames):
        full_dets.extend(detector.detect_full(img, model, hog_config, params, frame=i))
    full_time = time.perf_counter() - t0

    t0 = time.perf_counter()
    salient_dets: List = []
    windows_salient = 0
    for i, (img, smap) in enumerate(zip(frames, maps)):
        dets, stats = detector.detect_salient(img, smap, model, hog_config, params, frame=i)
        salient_dets.extend(dets)
        windows_salient += stats.windows_classified
    salient_time = time.perf_counter() - t0

    full_report = match_and_score(full_dets, truth, iou_cutoff, full_time, windows_full)
    salient_report = match_and_score(salient_dets, truth, iou_cutoff, salient_time,
                                     windows_salient)
    time_ratio = full_time / salient_time if salient_time > 0 else float("inf")
    windows_ratio = windows_salient / windows_full if windows_full else 0.0
    return BenchResult(full_report, salient_report, time_ratio, windows_ratio, saliency_time)


def format_bench_report(result: BenchResult) -> str:
    """Two-column comparison table, one line per metric."""
    rows = [
        ("Execution Time (s)", f"{result.full.wall_time_s:.6f}", f"{result.salient.wall_time_s:.6f}"),
        ("Precision", f"{result.full.precision:.4f}", f"{result.salient.precision:.4f}"),
        ("Recall", f"{result.full.recall:.4f}", f"{result.salient.recall:.4f}"),
        ("Windows classified", str(result.full.windows_classified),
         str(result.salient.windows_classified)),
    ]
    lines = [f"{'Parameters':<24}{'Full frame':>16}{'Saliency-windowed':>20}"]
    for label, a, b in rows:
        lines.append(f"{label:<24}{a:>16}{b:>20}")
    lines.append(f"Saliency computation (s): {result.saliency_time_s:.6f}")
    lines.append(f"Time ratio (full/salient): {result.time_ratio:.2f}")
    lines.append(f"Windows ratio (salient/full): {result.windows_ratio:.4f}")
    return "\n".join(lines)
