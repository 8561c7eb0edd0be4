"""Sliding-window person detection over a frame.

Two paths share one classification core: the full-frame baseline scores
every window, the saliency-windowed path multiplies the frame by its map,
skips windows whose mean saliency is below tau, and scores the rest on the
windowed pixels. Detections carry their HOG vectors for the tracker.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import hog as hog_mod
from . import saliency as saliency_mod
from . import svm as svm_mod
from .errors import ConfigError, ShapeError
from .evaluate import iou
from .hog import GrayImage, HogConfig
from .saliency import SaliencyMap
from .svm import LinearSvmModel


@dataclass(frozen=True)
class Detection:
    frame: int
    x: int
    y: int
    w: int
    h: int
    score: float
    features: Optional[np.ndarray] = None

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


@dataclass(frozen=True)
class DetectParams:
    stride: int = 8
    tau: float = 0.20
    nms_iou: Optional[float] = None

    def __post_init__(self):
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError("tau must be in [0, 1]")
        if self.nms_iou is not None and not 0.0 < self.nms_iou < 1.0:
            raise ConfigError("nms_iou must be in (0, 1)")


@dataclass(frozen=True)
class DetectStats:
    windows_total: int
    windows_classified: int
    wall_time_s: float


def sliding_windows(frame_w: int, frame_h: int, win_w: int, win_h: int,
                    stride: int) -> List[Tuple[int, int]]:
    """Stride-aligned in-bounds window positions, row-major (empty when the
    window exceeds the frame)."""
    return hog_mod.window_positions(frame_w, frame_h, win_w, win_h, stride)


def _check_setup(image: GrayImage, model: LinearSvmModel, config: HogConfig,
                 params: DetectParams) -> None:
    if model.dim != config.descriptor_length:
        raise ShapeError(
            f"model dim {model.dim} != descriptor length {config.descriptor_length}")
    if params.stride % config.cell:
        raise ConfigError(
            f"stride {params.stride} is not a multiple of cell {config.cell}")


def _classify_region(image: GrayImage, positions: Sequence[Tuple[int, int]],
                     x0: int, y0: int, x1: int, y1: int, config: HogConfig,
                     model: LinearSvmModel, frame: int) -> List[Detection]:
    """Score the given windows, sharing cell histograms over [x0,x1)x[y0,y1).

    The region bounds must be cell-aligned and cover every window. Gradients
    read image pixels with clamped neighbor indices, so replicate padding
    only ever applies at true image borders; values match a full-frame
    computation bitwise.
    """
    grad = hog_mod._gradients_region(image, x0, y0, x1, y1)
    cells = hog_mod._cell_grid(grad, 0, 0, (x1 - x0) // config.cell,
                               (y1 - y0) // config.cell, config.cell, config.bins)
    grid = hog_mod._block_grid(cells, config.block, config.clip)
    out: List[Detection] = []
    for x, y in positions:
        values = hog_mod._gather_window(grid, (x - x0) // config.cell,
                                        (y - y0) // config.cell, config)
        s = svm_mod.score(model, values)
        if s > model.threshold:
            out.append(Detection(frame, x, y, config.window_w, config.window_h,
                                 s, values))
    return out


def detect_full(image: GrayImage, model: LinearSvmModel, config: HogConfig,
                params: DetectParams, frame: int = 0) -> List[Detection]:
    """Classify every sliding window; emit those scoring above the threshold,
    in window order (greedy NMS afterwards when configured)."""
    _check_setup(image, model, config, params)
    positions = sliding_windows(image.width, image.height,
                                config.window_w, config.window_h, params.stride)
    if not positions:
        return []
    dets = _classify_region(image, positions, 0, 0,
                            (image.width // config.cell) * config.cell,
                            (image.height // config.cell) * config.cell,
                            config, model, frame)
    if params.nms_iou is not None:
        dets = nms(dets, params.nms_iou)
    return dets


def detect_salient(image: GrayImage, smap: SaliencyMap, model: LinearSvmModel,
                   config: HogConfig, params: DetectParams, frame: int = 0,
                   ) -> Tuple[List[Detection], DetectStats]:
    """Saliency-windowed detection.

    Multiplies the frame by its map, skips every window whose mean saliency
    is below params.tau, and runs HOG + SVM on the windowed pixels for the
    survivors only (their shared cell grid covers just the surviving area).
    """
    _check_setup(image, model, config, params)
    if (smap.height, smap.width) != (image.height, image.width):
        raise ShapeError(
            f"map {smap.width}x{smap.height} does not match image "
            f"{image.width}x{image.height}")
    start = time.perf_counter()
    positions = sliding_windows(image.width, image.height,
                                config.window_w, config.window_h, params.stride)
    means = saliency_mod.window_means(smap, positions,
                                      config.window_w, config.window_h)
    survivors = [pos for pos, m in zip(positions, means) if m >= params.tau]
    if survivors:
        x0 = min(x for x, _ in survivors)
        y0 = min(y for _, y in survivors)
        x1 = max(x for x, _ in survivors) + config.window_w
        y1 = max(y for _, y in survivors) + config.window_h
        # window only the pixels the classifier reads: the surviving region
        # plus the one-pixel gradient halo
        windowed = saliency_mod._apply_window_region(image, smap, x0 - 1, y0 - 1,
                                                     x1 + 1, y1 + 1)
        dets = _classify_region(windowed, survivors, x0, y0, x1, y1,
                                config, model, frame)
    else:
        dets = []
    if params.nms_iou is not None:
        dets = nms(dets, params.nms_iou)
    stats = DetectStats(windows_total=len(positions),
                        windows_classified=len(survivors),
                        wall_time_s=time.perf_counter() - start)
    return dets, stats


def nms(detections: Sequence[Detection], iou_cutoff: float) -> List[Detection]:
    """Greedy suppression: walk detections by descending score (ties by
    lower y, then lower x) and keep each one iff its IoU with every kept
    detection stays at or below the cutoff."""
    if not 0.0 < iou_cutoff < 1.0:
        raise ConfigError("iou_cutoff must be in (0, 1)")
    kept: List[Detection] = []
    for d in sorted(detections, key=lambda d: (-d.score, d.y, d.x)):
        box = (d.x, d.y, d.w, d.h)
        if all(iou(box, (k.x, k.y, k.w, k.h)) <= iou_cutoff for k in kept):
            kept.append(d)
    return kept
