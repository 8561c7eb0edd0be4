"""Saliency maps as region proposal.

A saliency map assigns each pixel a value in [0, 1]; the detector multiplies
the frame by its map ("salience windowing") and skips windows whose mean
saliency falls below a threshold. Maps come from a pluggable provider: the
built-in spectral-residual provider, or maps precomputed by an external
model and imported from PGM files.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from . import dataio
from .errors import BoundsError, ConfigError, DataError, ShapeError
from .hog import GrayImage

SPECTRUM_EPS = 1e-12
DEGENERATE_RANGE = 1e-12


@dataclass(frozen=True)
class SaliencyMap:
    """Per-pixel attention raster; (height, width) float64, row-major."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if not isinstance(v, np.ndarray) or v.ndim != 2:
            raise ShapeError("saliency values must be a 2-D numpy array")
        if v.dtype != np.float64:
            raise ShapeError(f"saliency values must be float64, got {v.dtype}")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @cached_property
    def integral(self) -> np.ndarray:
        """(h+1, w+1) summed-area table; built lazily, cached per map."""
        sat = np.zeros((self.height + 1, self.width + 1))
        np.cumsum(np.cumsum(self.values, axis=0), axis=1, out=sat[1:, 1:])
        return sat


@runtime_checkable
class SaliencyProvider(Protocol):
    """Anything that turns a frame into a same-sized saliency map.

    ``stem`` is the frame's filename stem; file-backed providers need it to
    locate the matching map, computed providers ignore it.
    """

    name: str

    def compute(self, image: GrayImage, stem: Optional[str] = None) -> SaliencyMap:
        ...


# ---------------------------------------------------------------------------
# radix-2 FFT (sizes are powers of two by construction)


def _bit_reverse_indices(n: int) -> np.ndarray:
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    bits = n.bit_length() - 1
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _fft_last_axis(a: np.ndarray, inverse: bool) -> np.ndarray:
    n = a.shape[-1]
    if n < 1 or n & (n - 1):
        raise ConfigError(f"FFT length {n} is not a power of two")
    out = np.ascontiguousarray(a, dtype=np.complex128)[..., _bit_reverse_indices(n)]
    sign = 1.0 if inverse else -1.0
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(sign * 2j * np.pi * np.arange(half) / size)
        shaped = out.reshape(out.shape[:-1] + (n // size, size))
        even = shaped[..., :half]
        odd = shaped[..., half:] * twiddle
        shaped[..., :half], shaped[..., half:] = even + odd, even - odd
        size *= 2
    if inverse:
        out = out / n
    return out


def fft2(values: np.ndarray) -> np.ndarray:
    """2-D DFT via radix-2 transforms along rows then columns."""
    out = _fft_last_axis(np.asarray(values, dtype=np.complex128), inverse=False)
    return _fft_last_axis(out.swapaxes(-1, -2), inverse=False).swapaxes(-1, -2)


def ifft2(values: np.ndarray) -> np.ndarray:
    out = _fft_last_axis(np.asarray(values, dtype=np.complex128), inverse=True)
    return _fft_last_axis(out.swapaxes(-1, -2), inverse=True).swapaxes(-1, -2)


# ---------------------------------------------------------------------------
# resampling and blurring


def _overlap_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) matrix of exact box-overlap fractions (area averaging)."""
    weights = np.zeros((dst, src))
    scale = src / dst
    for i in range(dst):
        a = i * scale
        b = a + scale
        for r in range(int(np.floor(a)), min(int(np.ceil(b)), src)):
            weights[i, r] = min(b, r + 1.0) - max(a, float(r))
    return weights / scale


def area_resize(values: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = values.shape
    return _overlap_weights(h, out_h) @ values @ _overlap_weights(w, out_w).T


def _bilinear_weights(src: int, dst: int) -> np.ndarray:
    weights = np.zeros((dst, src))
    if src == 1:
        weights[:, 0] = 1.0
        return weights
    pos = np.clip((np.arange(dst) + 0.5) * (src / dst) - 0.5, 0.0, src - 1.0)
    lo = np.minimum(np.floor(pos).astype(np.int64), src - 2)
    frac = pos - lo
    rows = np.arange(dst)
    weights[rows, lo] = 1.0 - frac
    weights[rows, lo + 1] += frac
    return weights


def bilinear_resize(values: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = values.shape
    return _bilinear_weights(h, out_h) @ values @ _bilinear_weights(w, out_w).T


def _box_blur_last_axis(a: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return a.copy()
    k = 2 * radius + 1
    pad = [(0, 0)] * (a.ndim - 1) + [(radius, radius)]
    cs = np.cumsum(np.pad(a, pad, mode="edge"), axis=-1)
    zero = np.zeros(cs.shape[:-1] + (1,))
    cs = np.concatenate([zero, cs], axis=-1)
    return (cs[..., k:] - cs[..., :-k]) / k


def box_blur(values: np.ndarray, radius: int, passes: int = 1) -> np.ndarray:
    """Separable box blur with replicate edges, applied ``passes`` times."""
    out = np.asarray(values, dtype=np.float64)
    for _ in range(passes):
        out = _box_blur_last_axis(out, radius)
        out = _box_blur_last_axis(out.T, radius).T
    return out


# ---------------------------------------------------------------------------
# map operations


def normalize_map(smap: SaliencyMap) -> SaliencyMap:
    """Min-max rescale to [0, 1]; a (near-)constant map becomes all zeros."""
    v = smap.values
    if not np.all(np.isfinite(v)):
        raise DataError("saliency map contains NaN or Inf")
    lo = float(v.min())
    hi = float(v.max())
    if hi - lo < DEGENERATE_RANGE:
        return SaliencyMap(np.zeros_like(v))
    return SaliencyMap((v - lo) / (hi - lo))


def apply_window(image: GrayImage, smap: SaliencyMap) -> GrayImage:
    """Salience-window a frame: pixel' = floor(pixel * map + 0.5), clamped."""
    if (smap.height, smap.width) != (image.height, image.width):
        raise ShapeError(
            f"map {smap.width}x{smap.height} does not match image "
            f"{image.width}x{image.height}")
    v = smap.values
    if v.size and (v.min() < 0.0 or v.max() > 1.0):
        raise DataError("saliency map must be normalized to [0, 1]")
    out = np.floor(image.pixels * v + 0.5)
    return GrayImage(np.clip(out, 0, 255).astype(np.uint8))


def mean_saliency(smap: SaliencyMap, x: int, y: int, w: int, h: int) -> float:
    """Mean map value inside a rectangle, via the cached summed-area table."""
    if w < 1 or h < 1 or x < 0 or y < 0 or x + w > smap.width or y + h > smap.height:
        raise BoundsError(f"rectangle ({x},{y},{w},{h}) outside {smap.width}x{smap.height} map")
    s = smap.integral
    total = s[y + h, x + w] - s[y, x + w] - s[y + h, x] + s[y, x]
    return float(total) / (w * h)


def window_means(smap: SaliencyMap, positions, w: int, h: int) -> np.ndarray:
    """mean_saliency for many same-sized rectangles at once (same arithmetic)."""
    if not len(positions):
        return np.zeros(0)
    xs = np.fromiter((p[0] for p in positions), dtype=np.int64, count=len(positions))
    ys = np.fromiter((p[1] for p in positions), dtype=np.int64, count=len(positions))
    if w < 1 or h < 1 or xs.min() < 0 or ys.min() < 0 \
            or xs.max() + w > smap.width or ys.max() + h > smap.height:
        raise BoundsError(f"some {w}x{h} rectangle falls outside the "
                          f"{smap.width}x{smap.height} map")
    s = smap.integral
    total = s[ys + h, xs + w] - s[ys, xs + w] - s[ys + h, xs] + s[ys, xs]
    return total / (w * h)


def _apply_window_region(image: GrayImage, smap: SaliencyMap,
                         x0: int, y0: int, x1: int, y1: int) -> GrayImage:
    """apply_window evaluated only on [x0, x1) x [y0, y1) (clamped); pixels
    outside the rectangle are copied unchanged. Callers must not read them
    as windowed values."""
    if (smap.height, smap.width) != (image.height, image.width):
        raise ShapeError(
            f"map {smap.width}x{smap.height} does not match image "
            f"{image.width}x{image.height}")
    x0, x1 = max(x0, 0), min(x1, image.width)
    y0, y1 = max(y0, 0), min(y1, image.height)
    v = smap.values[y0:y1, x0:x1]
    if v.size and (v.min() < 0.0 or v.max() > 1.0):
        raise DataError("saliency map must be normalized to [0, 1]")
    out = image.pixels.copy()
    region = np.floor(image.pixels[y0:y1, x0:x1] * v + 0.5)
    out[y0:y1, x0:x1] = np.clip(region, 0, 255).astype(np.uint8)
    return GrayImage(out)


# ---------------------------------------------------------------------------
# spectral-residual provider


def _log_amplitude_residual(spectrum: np.ndarray) -> np.ndarray:
    """Log amplitude minus its 3x3 box smoothing.

    log(1 + amplitude) keeps empty spectrum bins at zero; a plain log would
    send them to log(eps) and blow up the residual around strong bins.
    """
    log_amp = np.log1p(np.abs(spectrum))
    return log_amp - box_blur(log_amp, radius=1)


def spectral_residual(image: GrayImage, blur_radius: int = 3,
                      resize_to: int = 64) -> SaliencyMap:
    """Classical spectral-residual saliency.

    Downscale to resize_to^2 by area averaging, take the 2-D FFT, keep the
    residual of the log-amplitude spectrum against its 3x3 smoothing, invert
    with the original phase, square, smooth with a triple box blur, upscale
    bilinearly, and min-max normalize. resize_to must be a power of two
    (radix-2 transform).
    """
    if resize_to < 2 or resize_to & (resize_to - 1):
        raise ConfigError(f"resize_to must be a power of two >= 2, got {resize_to}")
    if blur_radius < 0:
        raise ConfigError("blur_radius must be >= 0")
    small = area_resize(image.pixels.astype(np.float64), resize_to, resize_to)
    if small.max() - small.min() < 1e-9:
        # constant frame: in exact arithmetic the pop-out field is flat, so the
        # degenerate rule of normalize_map applies; short-circuit before
        # resampler rounding noise can masquerade as structure
        return SaliencyMap(np.zeros((image.height, image.width)))
    spectrum = fft2(small)
    residual = _log_amplitude_residual(spectrum)
    # unit-phase factor; zero-amplitude bins carry no phase and stay zero
    phase = spectrum / (np.abs(spectrum) + SPECTRUM_EPS)
    pop_out = ifft2(np.exp(residual) * phase)
    energy = pop_out.real ** 2 + pop_out.imag ** 2
    smooth = box_blur(energy, blur_radius, passes=3)
    full = bilinear_resize(smooth, image.height, image.width)
    return normalize_map(SaliencyMap(full))


# ---------------------------------------------------------------------------
# map files (8-bit binary PGM, maxval 255)


def save_map(smap: SaliencyMap, path) -> None:
    """Quantize to bytes with round-half-up; round-trip error <= 1/510."""
    data = np.clip(np.floor(smap.values * 255.0 + 0.5), 0, 255).astype(np.uint8)
    dataio.write_pgm(data, path)


def load_map(path) -> SaliencyMap:
    return SaliencyMap(dataio.read_pgm(path).astype(np.float64) / 255.0)


# ---------------------------------------------------------------------------
# providers


@dataclass(frozen=True)
class SpectralResidualProvider:
    blur_radius: int = 3
    resize_to: int = 64

    name = "spectral"

    def compute(self, image: GrayImage, stem: Optional[str] = None) -> SaliencyMap:
        return spectral_residual(image, self.blur_radius, self.resize_to)


@dataclass(frozen=True)
class FileMapProvider:
    """Looks up <frame_stem>.pgm in a directory of precomputed maps."""

    directory: Path

    @property
    def name(self) -> str:
        return f"file:{self.directory}"

    def compute(self, image: GrayImage, stem: Optional[str] = None) -> SaliencyMap:
        if stem is None:
            raise DataError("file map provider needs the frame stem")
        path = Path(self.directory) / f"{stem}.pgm"
        if not path.exists():
            raise DataError(f"no saliency map for frame '{stem}' at {path}")
        smap = load_map(path)
        if (smap.height, smap.width) != (image.height, image.width):
            raise ShapeError(
                f"map for frame '{stem}' is {smap.width}x{smap.height}, "
                f"frame is {image.width}x{image.height}")
        return smap


def resolve_provider(name: str) -> SaliencyProvider:
    """"spectral" or "file:<directory>"."""
    if name == "spectral":
        return SpectralResidualProvider()
    if name.startswith("file:"):
        directory = name[len("file:"):]
        if not directory:
            raise ConfigError("file provider needs a directory: file:<directory>")
        return FileMapProvider(Path(directory))
    raise ConfigError(f"unknown saliency provider {name!r} (use 'spectral' or 'file:<dir>')")
