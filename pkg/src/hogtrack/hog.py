"""Dense HOG descriptor extraction.

Pipeline: centered-difference gradients, magnitude-weighted orientation
histograms over square cells (orientation interpolation only, no spatial
interpolation), and L2-Hys contrast normalization over overlapping blocks.
Orientations are unsigned, folded into [0, 180) degrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import BoundsError, ConfigError, ShapeError

# Epsilon used by both L2 normalization passes: v / sqrt(|v|^2 + eps^2).
L2HYS_EPS = 1e-6


@dataclass(frozen=True)
class GrayImage:
    """Single-channel 8-bit raster. ``pixels`` is (height, width), row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if not isinstance(p, np.ndarray) or p.ndim != 2:
            raise ShapeError("image pixels must be a 2-D numpy array")
        if p.dtype != np.uint8:
            raise ShapeError(f"image pixels must be uint8, got {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ShapeError("image must be at least 1x1")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class GradientField:
    """Per-pixel gradient magnitude (>= 0) and orientation in [0, 180) degrees."""

    magnitude: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        if self.magnitude.shape != self.orientation.shape:
            raise ShapeError("magnitude and orientation shapes differ")

    @property
    def width(self) -> int:
        return self.magnitude.shape[1]

    @property
    def height(self) -> int:
        return self.magnitude.shape[0]


@dataclass(frozen=True)
class HogConfig:
    """Extraction geometry.

    ``cell`` and ``block_stride`` are in pixels, ``block`` is the block side
    in cells. Blocks must tile the window exactly. Defaults are the classic
    64x128 pedestrian window.
    """

    window_w: int = 64
    window_h: int = 128
    cell: int = 8
    block: int = 2
    block_stride: int = 8
    bins: int = 9
    clip: float = 0.2

    def __post_init__(self):
        for name in ("window_w", "window_h", "cell", "block", "block_stride", "bins"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.bins < 2:
            raise ConfigError("bins must be >= 2")
        if not 0.0 < self.clip <= 1.0:
            raise ConfigError("clip must be in (0, 1]")
        if self.window_w % self.cell or self.window_h % self.cell:
            raise ConfigError("window size must be a multiple of the cell size")
        if self.block_stride % self.cell:
            raise ConfigError("block_stride must be a multiple of the cell size")
        sc = self.block_stride // self.cell
        for span in (self.cells_x, self.cells_y):
            if span < self.block:
                raise ConfigError("window too small for one block")
            if (span - self.block) % sc:
                raise ConfigError("blocks do not tile the window exactly")

    @property
    def cells_x(self) -> int:
        return self.window_w // self.cell

    @property
    def cells_y(self) -> int:
        return self.window_h // self.cell

    @property
    def blocks_x(self) -> int:
        return (self.window_w - self.block * self.cell) // self.block_stride + 1

    @property
    def blocks_y(self) -> int:
        return (self.window_h - self.block * self.cell) // self.block_stride + 1

    @property
    def block_len(self) -> int:
        return self.block * self.block * self.bins

    @property
    def descriptor_length(self) -> int:
        return self.blocks_x * self.blocks_y * self.block_len


@dataclass(frozen=True)
class HogDescriptor:
    """Flat descriptor vector plus the config it was extracted with."""

    values: np.ndarray
    config: HogConfig


def _gradients_region(image: GrayImage, x0: int, y0: int, x1: int, y1: int) -> GradientField:
    """Gradient field restricted to [x0, x1) x [y0, y1).

    Neighbor indices are clamped to the image, so replicate padding applies
    exactly at true image borders; inside the image the values are identical
    to a full-frame computation restricted to the rectangle.
    """
    rows = np.clip(np.arange(y0 - 1, y1 + 1), 0, image.height - 1)
    cols = np.clip(np.arange(x0 - 1, x1 + 1), 0, image.width - 1)
    padded = image.pixels[np.ix_(rows, cols)].astype(np.float64)
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    magnitude = np.hypot(gx, gy)
    orientation = np.degrees(np.arctan2(gy, gx)) % 180.0
    # float fold can land exactly on 180 for tiny negative angles
    orientation[orientation >= 180.0] = 0.0
    return GradientField(magnitude, orientation)


def compute_gradients(image: GrayImage) -> GradientField:
    """Centered differences ([-1, 0, 1] kernel) with replicate-edge padding."""
    return _gradients_region(image, 0, 0, image.width, image.height)


def _cell_grid(grad: GradientField, x: int, y: int, cells_x: int, cells_y: int,
               cell: int, bins: int) -> np.ndarray:
    """Orientation histograms for a grid of cells anchored at pixel (x, y).

    Each pixel's magnitude is split linearly between the two nearest bin
    centers (centers at (i + 0.5) * 180 / bins, wrapping at 180). Returns
    an array of shape (cells_y, cells_x, bins).
    """
    h = cells_y * cell
    w = cells_x * cell
    mag = grad.magnitude[y:y + h, x:x + w]
    ori = grad.orientation[y:y + h, x:x + w]

    bin_width = 180.0 / bins
    t = ori / bin_width - 0.5
    lower = np.floor(t)
    frac = t - lower
    lo = lower.astype(np.int64) % bins
    hi = (lo + 1) % bins

    cell_row = np.arange(h) // cell
    cell_col = np.arange(w) // cell
    base = (cell_row[:, None] * cells_x + cell_col[None, :]) * bins

    n = cells_y * cells_x * bins
    hist = np.bincount((base + lo).ravel(), weights=(mag * (1.0 - frac)).ravel(),
                       minlength=n)
    hist += np.bincount((base + hi).ravel(), weights=(mag * frac).ravel(),
                        minlength=n)
    return hist.reshape(cells_y, cells_x, bins)


def cell_histograms(grad: GradientField, x: int, y: int, config: HogConfig) -> np.ndarray:
    """Cell histogram grid for one window; rejects out-of-bounds windows."""
    if x < 0 or y < 0 or x + config.window_w > grad.width or y + config.window_h > grad.height:
        raise BoundsError(
            f"window {config.window_w}x{config.window_h} at ({x}, {y}) exceeds "
            f"{grad.width}x{grad.height} field")
    return _cell_grid(grad, x, y, config.cells_x, config.cells_y, config.cell, config.bins)


def _normalize_rows(rows: np.ndarray, clip: float) -> np.ndarray:
    """L2-Hys per row: L2-normalize with epsilon, clip, L2-normalize again."""
    norms = np.sqrt(np.einsum("ij,ij->i", rows, rows) + L2HYS_EPS ** 2)
    v = rows / norms[:, None]
    np.minimum(v, clip, out=v)
    norms = np.sqrt(np.einsum("ij,ij->i", v, v) + L2HYS_EPS ** 2)
    v /= norms[:, None]
    return v


def _block_grid(cells: np.ndarray, block: int, clip: float) -> np.ndarray:
    """L2-Hys-normalized block vectors at every cell position (stride 1 cell).

    Returns (cells_y - block + 1, cells_x - block + 1, block*block*bins); each
    entry concatenates its block's cells row-major, bins innermost.
    """
    cy, cx, bins = cells.shape
    view = np.lib.stride_tricks.sliding_window_view(cells, (block, block), axis=(0, 1))
    # view is (by, bx, bins, block, block); reorder to cells-row-major, bins last
    by, bx = view.shape[0], view.shape[1]
    flat = view.transpose(0, 1, 3, 4, 2).reshape(by * bx, block * block * bins)
    flat = np.ascontiguousarray(flat)
    return _normalize_rows(flat, clip).reshape(by, bx, -1)


def _gather_window(grid: np.ndarray, cell_x: int, cell_y: int, config: HogConfig) -> np.ndarray:
    """Flat descriptor for the window whose top-left cell is (cell_x, cell_y)."""
    sc = config.block_stride // config.cell
    sel = grid[cell_y:cell_y + (config.blocks_y - 1) * sc + 1:sc,
               cell_x:cell_x + (config.blocks_x - 1) * sc + 1:sc]
    return np.ascontiguousarray(sel).reshape(-1)


def block_normalize(cells: np.ndarray, config: HogConfig) -> HogDescriptor:
    """L2-Hys-normalize overlapping blocks and concatenate them row-major."""
    expected = (config.cells_y, config.cells_x, config.bins)
    if cells.shape != expected:
        raise ShapeError(f"cell grid shape {cells.shape} does not match config {expected}")
    grid = _block_grid(cells, config.block, config.clip)
    values = _gather_window(grid, 0, 0, config)
    return HogDescriptor(values, config)


def hog_window(image: GrayImage, x: int, y: int, config: HogConfig) -> HogDescriptor:
    """Descriptor for one window.

    Gradients are computed on the full image, so border padding only applies
    at true image borders, never at window edges.
    """
    grad = compute_gradients(image)
    cells = cell_histograms(grad, x, y, config)
    return block_normalize(cells, config)


def window_positions(frame_w: int, frame_h: int, win_w: int, win_h: int,
                     stride: int) -> List[Tuple[int, int]]:
    """All (x, y) with both coordinates multiples of stride and the window
    inside the frame, row-major. Empty when the window exceeds the frame."""
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    if win_w < 1 or win_h < 1 or frame_w < 1 or frame_h < 1:
        raise ConfigError("window and frame dimensions must be >= 1")
    return [(x, y)
            for y in range(0, frame_h - win_h + 1, stride)
            for x in range(0, frame_w - win_w + 1, stride)]


def hog_dense(image: GrayImage, config: HogConfig, stride: int) -> List[Tuple[int, int, HogDescriptor]]:
    """Descriptors for every stride-aligned window, sharing cell histograms.

    Requires stride to be a multiple of the cell size so that all windows
    land on one global cell grid. Results match hog_window per position.
    """
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    if stride % config.cell:
        raise ConfigError(f"stride {stride} is not a multiple of cell {config.cell}")
    positions = window_positions(image.width, image.height,
                                 config.window_w, config.window_h, stride)
    if not positions:
        return []
    grad = compute_gradients(image)
    grid_cx = image.width // config.cell
    grid_cy = image.height // config.cell
    cells = _cell_grid(grad, 0, 0, grid_cx, grid_cy, config.cell, config.bins)
    grid = _block_grid(cells, config.block, config.clip)
    out = []
    for x, y in positions:
        values = _gather_window(grid, x // config.cell, y // config.cell, config)
        out.append((x, y, HogDescriptor(values, config)))
    return out
