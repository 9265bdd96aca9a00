"""Targeted noise on latent grids aligned to rendered skeleton pixels.

The latent tensor stands in for an encoded control video: a (T, H, W, C)
grid whose cells map to f_t x f_h x f_w pixel blocks. Noise of a randomly
drawn strength is added only where the skeleton mask is set; background
cells pass through bit-identical, which is the whole point of the scheme.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ShapeError
from .pose_render import ForegroundMask


class SigmaScope(enum.Enum):
    PER_CLIP = "per_clip"
    PER_FRAME = "per_frame"


@dataclass(frozen=True)
class NoiseConfig:
    sigma_max: float = 0.3
    seed: int = 0
    sigma_scope: SigmaScope = SigmaScope.PER_CLIP

    def __post_init__(self):
        if self.sigma_max < 0:
            raise ValueError("sigma_max must be >= 0")


class LatentTensor:
    """(T, H, W, C) float grid plus the pixel-block factors it was pooled by.

    Values are kept at float64 in memory; the file format is float32.
    """

    __slots__ = ("values", "factors")

    def __init__(self, values: np.ndarray, factors: tuple[int, int, int]):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 4:
            raise ShapeError(f"latent tensor must be (t, h, w, c), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ShapeError("latent dims must all be >= 1")
        if len(factors) != 3 or min(factors) < 1:
            raise ValueError("factors must be three counts >= 1")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "factors", (int(factors[0]), int(factors[1]), int(factors[2])))

    def __setattr__(self, name, value):
        raise AttributeError("LatentTensor is immutable")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.values.shape

    def __eq__(self, other):
        return (isinstance(other, LatentTensor) and self.factors == other.factors
                and self.shape == other.shape
                and bool(np.array_equal(self.values, other.values)))

    def __hash__(self):
        return hash((self.shape, self.factors))


class SkeletonMask:
    """(T, H, W) bit grid aligned to a LatentTensor's spatial-temporal grid."""

    __slots__ = ("grid",)

    def __init__(self, grid: np.ndarray):
        arr = np.ascontiguousarray(grid, dtype=bool)
        if arr.ndim != 3:
            raise ShapeError(f"skeleton mask must be (t, h, w), got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SkeletonMask is immutable")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.grid.shape

    def __eq__(self, other):
        return isinstance(other, SkeletonMask) and bool(np.array_equal(self.grid, other.grid))

    def __hash__(self):
        return hash(self.shape)


def skeleton_latent_mask(mask: ForegroundMask, factors: tuple[int, int, int]) -> SkeletonMask:
    """Pool a pixel foreground mask down to the latent grid.

    A latent cell is set iff ANY pixel in its f_t x f_h x f_w block is
    foreground; skeleton strokes are thin, so fractional thresholds would
    erase them. H and W must divide evenly; a ragged tail in T is padded by
    repeating the last frame.
    """
    f_t, f_h, f_w = factors
    if min(factors) < 1:
        raise ValueError("factors must be >= 1")
    grid = mask.grid
    t, h, w = grid.shape
    if h % f_h or w % f_w:
        raise ShapeError(f"pixel dims ({h}, {w}) not divisible by factors ({f_h}, {f_w})")
    if t % f_t:
        pad = f_t - t % f_t
        grid = np.concatenate([grid, np.repeat(grid[-1:], pad, axis=0)], axis=0)
        t += pad
    pooled = grid.reshape(t // f_t, f_t, h // f_h, f_h, w // f_w, f_w).any(axis=(1, 3, 5))
    return SkeletonMask(pooled)


def draw_sigmas(cfg: NoiseConfig, frame_count: int) -> np.ndarray:
    """Noise strengths exactly as inject_targeted_noise will draw them.

    One value per clip or one per frame, from U(0, sigma_max) on the seeded
    stream. Exposed so callers and tests can recover the realized sigma.
    """
    gen = np.random.Generator(np.random.Philox(key=cfg.seed))
    n = 1 if cfg.sigma_scope is SigmaScope.PER_CLIP else frame_count
    sigmas = gen.uniform(0.0, cfg.sigma_max, size=n)
    if cfg.sigma_scope is SigmaScope.PER_CLIP:
        sigmas = np.full(frame_count, sigmas[0])
    return sigmas


def inject_targeted_noise(latent: LatentTensor, mask: SkeletonMask,
                          cfg: NoiseConfig | None = None) -> LatentTensor:
    """Add zero-mean Gaussian noise to masked cells only.

    sigma ~ U(0, sigma_max) is drawn first (per clip or per frame), then
    i.i.d. samples of that standard deviation go into every channel of every
    masked cell, frames in order. Unmasked cells come back bit-identical.
    """
    cfg = cfg or NoiseConfig()
    if latent.shape[:3] != mask.shape:
        raise ShapeError(f"latent grid {latent.shape[:3]} != mask grid {mask.shape}")
    frame_count = latent.shape[0]
    gen = np.random.Generator(np.random.Philox(key=cfg.seed))
    n_sigma = 1 if cfg.sigma_scope is SigmaScope.PER_CLIP else frame_count
    sigmas = gen.uniform(0.0, cfg.sigma_max, size=n_sigma)
    if cfg.sigma_scope is SigmaScope.PER_CLIP:
        sigmas = np.full(frame_count, sigmas[0])

    out = latent.values.copy()
    out.setflags(write=True)
    for t in range(frame_count):
        cells = mask.grid[t]
        n = int(cells.sum())
        if n == 0 or sigmas[t] == 0.0:
            continue
        out[t][cells] += gen.normal(0.0, sigmas[t], size=(n, latent.shape[3]))
    return LatentTensor(out, latent.factors)


def write_latent(latent: LatentTensor, path: str | Path) -> None:
    """Binary little-endian float32 buffer plus a `<path>.json` sidecar."""
    path = Path(path)
    sidecar = path.with_name(path.name + ".json")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(latent.values.astype("<f4").tobytes())
    os.replace(tmp, path)
    meta = {"shape": list(latent.shape), "factors": list(latent.factors)}
    tmp_meta = sidecar.with_name(sidecar.name + ".tmp")
    tmp_meta.write_text(json.dumps(meta) + "\n")
    os.replace(tmp_meta, sidecar)


def read_latent(path: str | Path) -> LatentTensor:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    shape = tuple(meta["shape"])
    values = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(shape)
    return LatentTensor(values, tuple(meta["factors"]))
