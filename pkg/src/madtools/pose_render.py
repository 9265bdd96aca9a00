"""Rasterize pose videos into black-background skeleton frames and foreground masks.

Rendering is exact-color: a pixel is either the schema color of the geometry
that covered it last, or exactly (0, 0, 0). Lines use integer Bresenham
stepping with width achieved by stamping a line_width x line_width square at
every line pixel; no anti-aliasing, no blending, so outputs are bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    AgentSkeleton,
    EmptyInputError,
    FrameImage,
    Keypoint,
    PoseVideo,
    ShapeError,
    SkeletonSchema,
    default_schema,
)
from .raster import bresenham, disc_offsets, px_round, square_offsets, stamp


@dataclass(frozen=True)
class RenderConfig:
    line_width: int = 2
    joint_radius: int = 3
    min_confidence: float = 0.3

    def __post_init__(self):
        if self.line_width < 1:
            raise ValueError(f"line_width must be >= 1, got {self.line_width}")
        if self.joint_radius < 0:
            raise ValueError(f"joint_radius must be >= 0, got {self.joint_radius}")


class ForegroundMask:
    """Per-frame bit grid; True marks a non-black pixel."""

    __slots__ = ("grid",)

    def __init__(self, grid: np.ndarray):
        arr = np.ascontiguousarray(grid, dtype=bool)
        if arr.ndim != 3:
            raise ShapeError(f"expected (frames, h, w) grid, got shape {arr.shape}")
        arr.setflags(write=False)
        self.grid = arr

    @property
    def frame_count(self) -> int:
        return self.grid.shape[0]

    @property
    def height(self) -> int:
        return self.grid.shape[1]

    @property
    def width(self) -> int:
        return self.grid.shape[2]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ForegroundMask):
            return NotImplemented
        return self.grid.shape == other.grid.shape and bool(np.array_equal(self.grid, other.grid))


def _qualifies(kp: Keypoint, min_confidence: float) -> bool:
    return kp.visible and kp.confidence >= min_confidence


def render_skeleton(canvas: np.ndarray, agent: AgentSkeleton, schema: SkeletonSchema,
                    cfg: RenderConfig) -> None:
    """Draw one agent onto an existing canvas (edges first, joints on top)."""
    cs = schema.for_class(agent.agent_class)
    ok = [_qualifies(kp, cfg.min_confidence) for kp in agent.keypoints]
    square = square_offsets(cfg.line_width)
    for a, b in cs.edges:
        if a >= len(agent.keypoints) or b >= len(agent.keypoints):
            continue
        if not (ok[a] and ok[b]):
            continue
        ka, kb = agent.keypoints[a], agent.keypoints[b]
        xs, ys = bresenham(px_round(ka.x), px_round(ka.y), px_round(kb.x), px_round(kb.y))
        stamp(canvas, xs, ys, square, cs.edge_color)
    disc = disc_offsets(cfg.joint_radius)
    for kp, keep in zip(agent.keypoints, ok):
        if not keep:
            continue
        stamp(canvas, np.array([px_round(kp.x)]), np.array([px_round(kp.y)]), disc, cs.joint_color)


def rasterize_pose_video(
    video: PoseVideo, schema: SkeletonSchema | None = None, cfg: RenderConfig | None = None
) -> list[FrameImage]:
    """Render every frame of a pose video on a black background.

    Keypoints that are invisible or below the confidence threshold are
    skipped, along with any edge touching them. Agents later in frame order
    overdraw earlier ones.
    """
    schema = schema or default_schema()
    cfg = cfg or RenderConfig()
    frames = []
    for frame in video.frames:
        canvas = np.zeros((video.height, video.width, 3), dtype=np.uint8)
        for agent in frame.agents:
            render_skeleton(canvas, agent, schema, cfg)
        frames.append(FrameImage(canvas))
    return frames


def foreground_mask(frames: Sequence[FrameImage]) -> ForegroundMask:
    """Mark every pixel that differs from pure black. Idempotent by construction."""
    if not frames:
        raise EmptyInputError("foreground_mask needs at least one frame")
    h, w = frames[0].height, frames[0].width
    grid = np.empty((len(frames), h, w), dtype=bool)
    for i, frame in enumerate(frames):
        if frame.height != h or frame.width != w:
            raise ShapeError("frames have mixed dimensions")
        grid[i] = frame.pixels.any(axis=2)
    return ForegroundMask(grid)
