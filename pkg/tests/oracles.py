"""Independent reference implementations used to derive expected values.

Deliberately written as plain Python loops from the operation definitions,
sharing no code with the package, so they can serve as oracles.
"""

import cmath
import itertools
import math


def naive_gradients(pixels):
    """pixels: list of rows -> (magnitude, orientation) lists of rows.

    Centered differences with replicate-edge padding; orientation in
    degrees folded into [0, 180).
    """
    h = len(pixels)
    w = len(pixels[0])

    def px(x, y):
        x = min(max(x, 0), w - 1)
        y = min(max(y, 0), h - 1)
        return float(pixels[y][x])

    mag = [[0.0] * w for _ in range(h)]
    ori = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            gx = px(x + 1, y) - px(x - 1, y)
            gy = px(x, y + 1) - px(x, y - 1)
            mag[y][x] = math.hypot(gx, gy)
            angle = math.degrees(math.atan2(gy, gx)) % 180.0
            if angle >= 180.0:
                angle = 0.0
            ori[y][x] = angle
    return mag, ori


def naive_cell_histograms(mag, ori, x0, y0, cells_x, cells_y, cell, bins):
    """Per-pixel magnitude vote split linearly between the two nearest
    orientation bin centers (centers at (i + 0.5) * 180 / bins)."""
    grid = [[[0.0] * bins for _ in range(cells_x)] for _ in range(cells_y)]
    bin_width = 180.0 / bins
    for cy in range(cells_y):
        for cx in range(cells_x):
            for dy in range(cell):
                for dx in range(cell):
                    x = x0 + cx * cell + dx
                    y = y0 + cy * cell + dy
                    m = mag[y][x]
                    t = ori[y][x] / bin_width - 0.5
                    lower = math.floor(t)
                    frac = t - lower
                    lo = int(lower) % bins
                    hi = (lo + 1) % bins
                    grid[cy][cx][lo] += m * (1.0 - frac)
                    grid[cy][cx][hi] += m * frac
    return grid


def naive_block_normalize(grid, block, bins, clip, blocks_x, blocks_y, stride_cells):
    """L2-Hys per block (eps 1e-6 inside both norms), blocks row-major."""
    eps2 = 1e-6 ** 2
    out = []
    for by in range(blocks_y):
        for bx in range(blocks_x):
            v = []
            for cy in range(block):
                for cx in range(block):
                    v.extend(grid[by * stride_cells + cy][bx * stride_cells + cx])
            norm = math.sqrt(sum(c * c for c in v) + eps2)
            v = [min(c / norm, clip) for c in v]
            norm = math.sqrt(sum(c * c for c in v) + eps2)
            out.extend(c / norm for c in v)
    return out


def naive_hog_window(pixels, x, y, window_w, window_h, cell, block,
                     block_stride, bins, clip):
    """Full window descriptor; gradients come from the whole image."""
    mag, ori = naive_gradients(pixels)
    cells_x = window_w // cell
    cells_y = window_h // cell
    grid = naive_cell_histograms(mag, ori, x, y, cells_x, cells_y, cell, bins)
    sc = block_stride // cell
    blocks_x = (window_w - block * cell) // block_stride + 1
    blocks_y = (window_h - block * cell) // block_stride + 1
    return naive_block_normalize(grid, block, bins, clip, blocks_x, blocks_y, sc)


def naive_dft2(values):
    """Direct O(n^4) 2-D DFT of a square list-of-lists."""
    n = len(values)
    out = [[0j] * n for _ in range(n)]
    for u in range(n):
        for v in range(n):
            acc = 0j
            for y in range(n):
                for x in range(n):
                    acc += values[y][x] * cmath.exp(-2j * cmath.pi * (u * y / n + v * x / n))
            out[u][v] = acc
    return out


def brute_force_kmeans(points, k):
    """Minimum SSE over every assignment of points to at most k clusters."""
    n = len(points)
    d = len(points[0])
    best = math.inf
    for assign in itertools.product(range(k), repeat=n):
        sse = 0.0
        for j in set(assign):
            members = [points[i] for i in range(n) if assign[i] == j]
            centroid = [sum(p[c] for p in members) / len(members) for c in range(d)]
            sse += sum((p[c] - centroid[c]) ** 2 for p in members for c in range(d))
        if sse < best:
            best = sse
    return best


def naive_rect_mean(values, x, y, w, h):
    """Double-loop mean of a rectangle of a list-of-rows raster."""
    total = 0.0
    for yy in range(y, y + h):
        for xx in range(x, x + w):
            total += values[yy][xx]
    return total / (w * h)


def naive_line_pixels(x0, y0, x1, y1):
    """DDA line rasterization: round the ideal line at unit parameter steps."""
    steps = max(abs(x1 - x0), abs(y1 - y0))
    if steps == 0:
        return [(x0, y0)]
    pts = []
    for i in range(steps + 1):
        t = i / steps
        pts.append((round(x0 + t * (x1 - x0)), round(y0 + t * (y1 - y0))))
    return pts
