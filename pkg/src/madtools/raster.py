"""Integer rasterization primitives: rounding, Bresenham lines, pixel stamping."""

from __future__ import annotations

import math

import numpy as np


def px_round(value: float) -> int:
    """Round half up, independent of banker's rounding."""
    return int(math.floor(value + 0.5))


def bresenham(x0: int, y0: int, x1: int, y1: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer line pixels from (x0, y0) to (x1, y1), inclusive."""
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    xs, ys = [], []
    x, y = x0, y0
    while True:
        xs.append(x)
        ys.append(y)
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64)


def stamp(canvas: np.ndarray, xs: np.ndarray, ys: np.ndarray,
          offsets: tuple[np.ndarray, np.ndarray], color: tuple[int, int, int]) -> None:
    """Write `color` at every (x + ox, y + oy) that lands on the canvas."""
    h, w = canvas.shape[:2]
    ox, oy = offsets
    px = (np.asarray(xs)[:, None] + ox[None, :]).ravel()
    py = (np.asarray(ys)[:, None] + oy[None, :]).ravel()
    keep = (px >= 0) & (px < w) & (py >= 0) & (py < h)
    canvas[py[keep], px[keep]] = color


def square_offsets(width: int) -> tuple[np.ndarray, np.ndarray]:
    lo = -(width - 1) // 2
    rng = np.arange(lo, lo + width)
    ox, oy = np.meshgrid(rng, rng)
    return ox.ravel(), oy.ravel()


def disc_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.arange(-radius, radius + 1)
    ox, oy = np.meshgrid(rng, rng)
    keep = ox * ox + oy * oy <= radius * radius
    return ox[keep].ravel(), oy[keep].ravel()
