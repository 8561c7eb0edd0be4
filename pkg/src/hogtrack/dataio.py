"""File I/O: binary PGM/PPM rasters, frame sequences, annotation CSVs,
training-crop sampling, and detection/track overlay rendering.

Only the raw binary netpbm containers (P5, P6) with maxval 255 are decoded
natively; anything else is rejected with a pointer at the supported formats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BoundsError, ConfigError, DataError, FormatError
from .evaluate import GroundTruthBox, iou
from .hog import GrayImage

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# 12-color palette for track polylines; detection rectangles are drawn red.
TRACK_PALETTE = [
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 190), (0, 128, 128), (170, 110, 40),
]
DETECTION_COLOR = (255, 0, 0)


# ---------------------------------------------------------------------------
# netpbm parsing


def _next_token(data: bytes, pos: int) -> Tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise FormatError("unexpected end of header", offset=pos)
    start = pos
    while pos < n and not data[pos:pos + 1].isspace():
        pos += 1
    return data[start:pos], pos


def _parse_pnm(path) -> Tuple[bytes, int, int, np.ndarray]:
    """Returns (magic, width, height, payload) for a raw P5/P6 file."""
    data = Path(path).read_bytes()
    if len(data) < 2:
        raise FormatError("file too short for a netpbm header", offset=0)
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(
            f"unsupported magic {magic!r}; only binary PGM (P5) and PPM (P6) "
            "are supported", offset=0)
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        if not re.fullmatch(rb"[0-9]+", token):
            raise FormatError(f"non-numeric header field {token!r}", offset=pos - len(token))
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"invalid dimensions {width}x{height}", offset=2)
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}; only 255 is supported",
                          offset=pos - len(str(maxval).encode()))
    # exactly one whitespace byte separates the header from the payload
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("missing whitespace before payload", offset=pos)
    pos += 1
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = data[pos:pos + expected]
    if len(payload) != expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}",
            offset=pos + len(payload))
    return magic, width, height, np.frombuffer(payload, dtype=np.uint8)


def read_pgm(path) -> np.ndarray:
    magic, w, h, payload = _parse_pnm(path)
    if magic != b"P5":
        raise FormatError(f"expected a PGM (P5) file, got {magic!r}", offset=0)
    return payload.reshape(h, w).copy()

def read_ppm(path) -> np.ndarray:
    magic, w, h, payload = _parse_pnm(path)
    if magic != b"P6":
        raise FormatError(f"expected a PPM (P6) file, got {magic!r}", offset=0)
    return payload.reshape(h, w, 3).copy()


def write_pgm(pixels: np.ndarray, path) -> None:
    if pixels.ndim != 2 or pixels.dtype != np.uint8:
        raise DataError("PGM payload must be a 2-D uint8 array")
    h, w = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode())
        f.write(pixels.tobytes())


def write_ppm(pixels: np.ndarray, path) -> None:
    if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.dtype != np.uint8:
        raise DataError("PPM payload must be an (h, w, 3) uint8 array")
    h, w = pixels.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode())
        f.write(pixels.tobytes())


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Luma conversion 0.299/0.587/0.114, rounded half-up."""
    r, g, b = LUMA_WEIGHTS
    y = r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]
    return np.minimum(np.floor(y + 0.5), 255.0).astype(np.uint8)


def decode_image(path) -> GrayImage:
    """Decode a P5 or P6 file to a gray image (P6 goes through the luma rule)."""
    magic, w, h, payload = _parse_pnm(path)
    if magic == b"P5":
        return GrayImage(payload.reshape(h, w).copy())
    return GrayImage(rgb_to_gray(payload.reshape(h, w, 3).astype(np.float64)))


# ---------------------------------------------------------------------------
# frame sequences


@dataclass
class FrameSequence:
    """Ordered list of same-sized frames in one directory.

    Ordering is plain lexicographic filename order, which is stable across
    platforms for the ASCII names this package writes.
    """

    directory: Path
    files: List[Path]
    width: int
    height: int

    @classmethod
    def scan(cls, directory) -> "FrameSequence":
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"frame directory not found: {directory}")
        files = sorted((p for p in directory.iterdir()
                        if p.suffix.lower() in (".pgm", ".ppm")),
                       key=lambda p: p.name)
        if not files:
            raise DataError(f"no .pgm/.ppm frames in {directory}")
        dims = None
        for p in files:
            _, w, h, _ = _parse_pnm(p)
            if dims is None:
                dims = (w, h)
            elif dims != (w, h):
                raise DataError(
                    f"frame {p.name} is {w}x{h}, expected {dims[0]}x{dims[1]}")
        return cls(directory, files, dims[0], dims[1])

    def __len__(self) -> int:
        return len(self.files)

    def load(self, index: int) -> GrayImage:
        return decode_image(self.files[index])

    def stem(self, index: int) -> str:
        return self.files[index].stem

    def load_all(self) -> List[GrayImage]:
        return [self.load(i) for i in range(len(self))]


# ---------------------------------------------------------------------------
# annotations


@dataclass(frozen=True)
class AnnotationSet:
    by_frame: Dict[int, List[GroundTruthBox]]

    def boxes(self) -> List[GroundTruthBox]:
        return [b for frame in sorted(self.by_frame) for b in self.by_frame[frame]]

    def for_frame(self, frame: int) -> List[GroundTruthBox]:
        return self.by_frame.get(frame, [])


def load_annotations(path, frame_w: int, frame_h: int) -> AnnotationSet:
    """Parse `frame,x,y,w,h` CSV lines (optional header, blank lines ignored).

    Boxes must lie fully inside the declared frame size; violations are
    rejected with their line number.
    """
    by_frame: Dict[int, List[GroundTruthBox]] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if lineno == 1 and parts and not re.fullmatch(r"-?[0-9]+", parts[0]):
            continue  # header row
        if len(parts) != 5:
            raise FormatError(f"expected 5 fields, got {len(parts)}", line=lineno)
        try:
            frame, x, y, w, h = (int(p) for p in parts)
        except ValueError:
            raise FormatError(f"non-integer field in {line!r}", line=lineno) from None
        if frame < 0:
            raise FormatError(f"negative frame index {frame}", line=lineno)
        if w < 1 or h < 1:
            raise FormatError(f"box must have positive size, got {w}x{h}", line=lineno)
        if x < 0 or y < 0 or x + w > frame_w or y + h > frame_h:
            raise FormatError(
                f"box ({x},{y},{w},{h}) extends outside the {frame_w}x{frame_h} frame",
                line=lineno)
        by_frame.setdefault(frame, []).append(GroundTruthBox(frame, x, y, w, h))
    return AnnotationSet(by_frame)


# ---------------------------------------------------------------------------
# training-crop sampling


def resize_nearest(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resize using pixel-center sampling."""
    h, w = pixels.shape
    rows = np.minimum(((np.arange(out_h) + 0.5) * h / out_h).astype(np.int64), h - 1)
    cols = np.minimum(((np.arange(out_w) + 0.5) * w / out_w).astype(np.int64), w - 1)
    return pixels[rows[:, None], cols[None, :]]


def sample_crops(frames: Union[FrameSequence, Sequence[GrayImage]],
                 annotations: AnnotationSet, window_w: int, window_h: int,
                 negatives_per_frame: int = 2, seed: int = 0,
                 neg_iou_cap: float = 0.2, max_attempts: int = 100,
                 ) -> Tuple[List[Tuple[GrayImage, int]], int]:
    """Positive and negative training crops for the SVM.

    Positives are the annotated boxes, nearest-neighbor resized to the
    window. Negatives are window-sized crops drawn uniformly at random
    (seeded) with IoU < neg_iou_cap against every truth box of the frame;
    each is retried up to max_attempts times. Returns (samples, skipped)
    where skipped counts negatives that could not be placed.
    """
    if isinstance(frames, FrameSequence):
        images = frames.load_all()
    else:
        images = list(frames)
    rng = np.random.default_rng(seed)
    samples: List[Tuple[GrayImage, int]] = []
    skipped = 0
    for index, img in enumerate(images):
        truths = annotations.for_frame(index)
        for t in truths:
            crop = img.pixels[t.y:t.y + t.h, t.x:t.x + t.w]
            samples.append((GrayImage(resize_nearest(crop, window_h, window_w)), 1))
        if img.width < window_w or img.height < window_h:
            skipped += negatives_per_frame
            continue
        for _ in range(negatives_per_frame):
            placed = False
            for _ in range(max_attempts):
                x = int(rng.integers(0, img.width - window_w + 1))
                y = int(rng.integers(0, img.height - window_h + 1))
                box = (x, y, window_w, window_h)
                if all(iou(box, (t.x, t.y, t.w, t.h)) < neg_iou_cap for t in truths):
                    crop = img.pixels[y:y + window_h, x:x + window_w].copy()
                    samples.append((GrayImage(crop), -1))
                    placed = True
                    break
            if not placed:
                skipped += 1
    return samples, skipped


# ---------------------------------------------------------------------------
# detection / track serialization and overlays


def save_detections(detections, path) -> None:
    """One `frame,x,y,w,h,score` line per detection (no feature vectors)."""
    with open(path, "w") as f:
        for d in detections:
            f.write(f"{d.frame},{d.x},{d.y},{d.w},{d.h},{d.score!r}\n")


def load_detections(path):
    from .detector import Detection  # local import avoids a module cycle

    out = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise FormatError(f"expected 6 fields, got {len(parts)}", line=lineno)
        try:
            frame, x, y, w, h = (int(p) for p in parts[:5])
            s = float(parts[5])
        except ValueError:
            raise FormatError(f"malformed detection line {line!r}", line=lineno) from None
        out.append(Detection(frame, x, y, w, h, s))
    return out


def _line_pixels(x0: int, y0: int, x1: int, y1: int) -> List[Tuple[int, int]]:
    """Bresenham rasterization of the segment (x0, y0) -> (x1, y1), inclusive."""
    points = []
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        points.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return points


def render_overlay(image: GrayImage, detections, tracks, path) -> None:
    """Write a PPM with 1-px detection rectangles and per-track polylines.

    Track colors come from a fixed 12-color palette indexed by track id
    (cycling); detections are red. With nothing to draw the output is the
    input replicated to three channels.
    """
    rgb = np.repeat(image.pixels[:, :, None], 3, axis=2).copy()
    for d in detections:
        x0, y0 = d.x, d.y
        x1, y1 = d.x + d.w - 1, d.y + d.h - 1
        rgb[y0, x0:x1 + 1] = DETECTION_COLOR
        rgb[y1, x0:x1 + 1] = DETECTION_COLOR
        rgb[y0:y1 + 1, x0] = DETECTION_COLOR
        rgb[y0:y1 + 1, x1] = DETECTION_COLOR
    for t in tracks:
        color = TRACK_PALETTE[t.id % len(TRACK_PALETTE)]
        centers = [(int(np.floor(cx + 0.5)), int(np.floor(cy + 0.5)))
                   for _, cx, cy in t.points]
        for (x0, y0), (x1, y1) in zip(centers, centers[1:]):
            for x, y in _line_pixels(x0, y0, x1, y1):
                if 0 <= x < image.width and 0 <= y < image.height:
                    rgb[y, x] = color
    write_ppm(rgb, path)
