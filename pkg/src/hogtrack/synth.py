"""Synthetic corpora for experiments and tests.

Small deterministic scenes: textured movers on a flat background with exact
ground truth, window-aligned binary masks for the saliency-skip experiments,
and a template corpus for training-accuracy checks. Everything is seeded.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from .evaluate import GroundTruthBox
from .hog import GrayImage
from .saliency import SaliencyMap


def stripe_texture(w: int, h: int, period: int = 4, lo: int = 60, hi: int = 200) -> np.ndarray:
    cols = (np.arange(w) // period) % 2
    return np.where(cols[None, :] == 0, lo, hi).astype(np.uint8) * np.ones((h, 1), np.uint8)


def checker_texture(w: int, h: int, period: int = 4, lo: int = 60, hi: int = 200) -> np.ndarray:
    rows = (np.arange(h) // period) % 2
    cols = (np.arange(w) // period) % 2
    return np.where((rows[:, None] + cols[None, :]) % 2 == 0, lo, hi).astype(np.uint8)


def person_template(w: int = 16, h: int = 32, fg: int = 50, bg: int = 210) -> np.ndarray:
    """Blocky upright figure: head disc over a torso slab over two legs."""
    img = np.full((h, w), bg, dtype=np.uint8)
    cx = w / 2.0
    head_r = w / 5.0
    head_cy = h / 7.0
    yy, xx = np.mgrid[0:h, 0:w]
    img[(xx - cx + 0.5) ** 2 + (yy - head_cy) ** 2 <= head_r ** 2] = fg
    torso_top, torso_bot = int(h * 0.22), int(h * 0.60)
    img[torso_top:torso_bot, int(w * 0.25):int(w * 0.75)] = fg
    leg_bot = int(h * 0.95)
    img[torso_bot:leg_bot, int(w * 0.30):int(w * 0.44)] = fg
    img[torso_bot:leg_bot, int(w * 0.56):int(w * 0.70)] = fg
    return img


def cross_template(w: int = 16, h: int = 32, fg: int = 30, bg: int = 128,
                   thickness: int = 3) -> np.ndarray:
    """Two thick diagonal bars (an X); its orientation profile is dominated
    by 45/135-degree edges, well apart from the upright person template."""
    img = np.full((h, w), bg, dtype=np.uint8)
    yy, xx = np.mgrid[0:h, 0:w]
    u = xx / max(w - 1, 1)
    v = yy / max(h - 1, 1)
    d1 = np.abs(u - v) * min(w, h)
    d2 = np.abs(u + v - 1.0) * min(w, h)
    img[(d1 <= thickness) | (d2 <= thickness)] = fg
    return img


def paste(canvas: np.ndarray, patch: np.ndarray, x: int, y: int) -> None:
    canvas[y:y + patch.shape[0], x:x + patch.shape[1]] = patch


def mover_frames(n_frames: int, frame_w: int, frame_h: int,
                 movers: Sequence[Tuple[np.ndarray, Tuple[int, int], Tuple[int, int]]],
                 background: int = 128,
                 ) -> Tuple[List[GrayImage], List[GroundTruthBox]]:
    """Render movers (patch, start, per-frame step) over a flat background.

    Returns the frames plus one ground-truth box per mover per frame.
    """
    frames = []
    truth = []
    for f in range(n_frames):
        canvas = np.full((frame_h, frame_w), background, dtype=np.uint8)
        for patch, (x0, y0), (dx, dy) in movers:
            x = x0 + f * dx
            y = y0 + f * dy
            paste(canvas, patch, x, y)
            truth.append(GroundTruthBox(f, x, y, patch.shape[1], patch.shape[0]))
        frames.append(GrayImage(canvas))
    return frames, truth


def template_corpus(n_pos: int, n_neg: int, w: int = 16, h: int = 32,
                    noise: float = 6.0, seed: int = 0) -> List[Tuple[GrayImage, int]]:
    """Noisy copies of the person template vs. pure-noise crops."""
    rng = np.random.default_rng(seed)
    template = person_template(w, h).astype(np.float64)
    samples: List[Tuple[GrayImage, int]] = []
    for _ in range(n_pos):
        jittered = template + rng.normal(0.0, noise, size=template.shape)
        samples.append((GrayImage(np.clip(jittered, 0, 255).astype(np.uint8)), 1))
    for _ in range(n_neg):
        crop = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
        samples.append((GrayImage(crop), -1))
    return samples


# ---------------------------------------------------------------------------
# window-aligned binary masks


def aligned_rect_mask(frame_w: int, frame_h: int,
                      rects: Sequence[Tuple[int, int, int, int]],
                      margin: int = 1) -> SaliencyMap:
    """Binary mask: the union of the given (x, y, w, h) rectangles, each grown
    by ``margin`` pixels and clipped to the frame."""
    values = np.zeros((frame_h, frame_w))
    for x, y, w, h in rects:
        x0 = max(0, x - margin)
        y0 = max(0, y - margin)
        x1 = min(frame_w, x + w + margin)
        y1 = min(frame_h, y + h + margin)
        values[y0:y1, x0:x1] = 1.0
    return SaliencyMap(values)


def random_window_rects(rng: np.random.Generator, frame_w: int, frame_h: int,
                        win_w: int, win_h: int, stride: int, count: int,
                        max_span: int = 3) -> List[Tuple[int, int, int, int]]:
    """Random rectangles that are unions of whole window positions: each one
    spans 1..max_span consecutive grid steps in x and y."""
    nx = (frame_w - win_w) // stride + 1
    ny = (frame_h - win_h) // stride + 1
    rects = []
    for _ in range(count):
        sx = int(rng.integers(1, max_span + 1))
        sy = int(rng.integers(1, max_span + 1))
        i = int(rng.integers(0, max(1, nx - sx + 1)))
        j = int(rng.integers(0, max(1, ny - sy + 1)))
        rects.append((i * stride, j * stride,
                      (sx - 1) * stride + win_w, (sy - 1) * stride + win_h))
    return rects


def random_image(rng: np.random.Generator, w: int, h: int) -> GrayImage:
    return GrayImage(rng.integers(0, 256, size=(h, w), dtype=np.uint8))
