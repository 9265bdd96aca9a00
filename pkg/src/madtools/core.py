"""Shared domain model: agents, skeletons, pose videos, camera poses, boxes, tracks.

All types are immutable value objects. Invariant checking is report-based via
:func:`validate` so that malformed values can be constructed, inspected and
rejected by callers instead of blowing up mid-pipeline.

Image coordinates are origin top-left, x right, y down, in pixels. World
coordinates are metric with x right, y down, z forward; the ground plane is
x-z and the camera at identity orientation looks along +z.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class SchemaError(ValueError):
    """An agent class is missing from the skeleton schema."""


class EmptyInputError(ValueError):
    """An operation that needs at least one element received none."""


class ShapeError(ValueError):
    """Array dimensions do not line up."""


class AgentClass(Enum):
    CAR = "car"
    PEDESTRIAN = "pedestrian"
    LANE_LINE = "lane"


@dataclass(frozen=True)
class Keypoint:
    """One named 2D joint. Coordinates may lie outside the canvas."""

    name: str
    x: float
    y: float
    confidence: float = 1.0
    visible: bool = True


@dataclass(frozen=True)
class ClassSchema:
    """Keypoint layout and drawing colors for a single agent class."""

    keypoint_names: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    joint_color: tuple[int, int, int]
    edge_color: tuple[int, int, int]


@dataclass(frozen=True)
class SkeletonSchema:
    classes: dict[AgentClass, ClassSchema] = field(default_factory=dict)

    def for_class(self, agent_class: AgentClass) -> ClassSchema:
        try:
            return self.classes[agent_class]
        except KeyError:
            raise SchemaError(f"no schema for agent class {agent_class.value!r}") from None


@dataclass(frozen=True)
class AgentSkeleton:
    """Pose of one agent in one frame. agent_id is stable within a clip."""

    agent_id: str
    agent_class: AgentClass
    keypoints: tuple[Keypoint, ...]


@dataclass(frozen=True)
class PoseFrame:
    frame_index: int
    agents: tuple[AgentSkeleton, ...]


@dataclass(frozen=True)
class PoseVideo:
    """Timed sequence of per-frame agent skeletons on an implicit canvas."""

    width: int
    height: int
    fps: float
    frames: tuple[PoseFrame, ...]

    @property
    def frame_count(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class CameraPose:
    """6-DoF ego-camera pose: world position and world-from-camera quaternion (w,x,y,z)."""

    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]
    timestamp: float


@dataclass(frozen=True)
class Intrinsics:
    horizontal_fov_deg: float
    width: int
    height: int


@dataclass(frozen=True)
class CameraTrajectory:
    poses: tuple[CameraPose, ...]
    intrinsics: Intrinsics


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def area(self) -> float:
        return max(0.0, self.x_max - self.x_min) * max(0.0, self.y_max - self.y_min)


@dataclass(frozen=True)
class Track:
    """One tracked object: (frame_index, BBox) entries, gaps allowed."""

    track_id: int
    entries: tuple[tuple[int, BBox], ...]

    def box_at(self, frame_index: int) -> BBox | None:
        for f, box in self.entries:
            if f == frame_index:
                return box
        return None


class FrameImage:
    """RGB image, 8 bits per channel, row-major (height, width, 3) buffer."""

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray):
        arr = np.ascontiguousarray(pixels, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ShapeError(f"expected (h, w, 3) uint8 buffer, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self) -> int:
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self) -> str:
        return f"FrameImage({self.width}x{self.height})"


# Default schema. The upstream pose extractors do not pin down car/lane
# keypoint layouts, so these are documented project defaults: a 24-point
# vehicle wireframe, the standard 17-point body convention, and lane lines as
# 16-point polylines.

PEDESTRIAN_KEYPOINTS = (
    "nose", "left_eye", "right_eye", "left_ear", "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist", "left_hip", "right_hip",
    "left_knee", "right_knee", "left_ankle", "right_ankle",
)

PEDESTRIAN_EDGES = (
    (15, 13), (13, 11), (16, 14), (14, 12), (11, 12),
    (5, 11), (6, 12), (5, 6), (5, 7), (6, 8), (7, 9), (8, 10),
    (1, 2), (0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 6),
)

CAR_KEYPOINTS = (
    "body_front_left_bottom", "body_front_right_bottom",
    "body_rear_right_bottom", "body_rear_left_bottom",
    "body_front_left_top", "body_front_right_top",
    "body_rear_right_top", "body_rear_left_top",
    "roof_front_left", "roof_front_right", "roof_rear_right", "roof_rear_left",
    "wheel_front_left", "wheel_front_right", "wheel_rear_right", "wheel_rear_left",
    "headlight_left", "headlight_right", "taillight_right", "taillight_left",
    "mirror_left", "mirror_right", "bumper_front", "bumper_rear",
)

CAR_EDGES = (
    # bottom ring, top ring, roof ring
    (0, 1), (1, 2), (2, 3), (3, 0),
    (4, 5), (5, 6), (6, 7), (7, 4),
    (8, 9), (9, 10), (10, 11), (11, 8),
    # verticals and roof pillars
    (0, 4), (1, 5), (2, 6), (3, 7),
    (4, 8), (5, 9), (6, 10), (7, 11),
    # wheels hang off the bottom ring
    (12, 0), (13, 1), (14, 2), (15, 3),
    # lights, mirrors, bumpers
    (16, 17), (16, 4), (17, 5),
    (18, 19), (18, 6), (19, 7),
    (20, 4), (21, 5),
    (22, 16), (22, 17), (23, 18), (23, 19),
)

LANE_POINT_COUNT = 16
LANE_KEYPOINTS = tuple(f"p{i:02d}" for i in range(LANE_POINT_COUNT))
LANE_EDGES = tuple((i, i + 1) for i in range(LANE_POINT_COUNT - 1))


def default_schema() -> SkeletonSchema:
    return SkeletonSchema(
        classes={
            AgentClass.CAR: ClassSchema(
                keypoint_names=CAR_KEYPOINTS,
                edges=CAR_EDGES,
                joint_color=(255, 0, 0),
                edge_color=(255, 128, 0),
            ),
            AgentClass.PEDESTRIAN: ClassSchema(
                keypoint_names=PEDESTRIAN_KEYPOINTS,
                edges=PEDESTRIAN_EDGES,
                joint_color=(0, 255, 0),
                edge_color=(0, 200, 100),
            ),
            AgentClass.LANE_LINE: ClassSchema(
                keypoint_names=LANE_KEYPOINTS,
                edges=LANE_EDGES,
                joint_color=(0, 128, 255),
                edge_color=(0, 128, 255),
            ),
        }
    )


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


def validate(entity: object, schema: SkeletonSchema | None = None) -> list[Violation]:
    """Check every declared invariant of a domain value.

    Returns an empty list iff the value is well formed. Passing a schema adds
    the keypoint-count check for skeletons and pose videos.
    """
    out: list[Violation] = []
    _validate_into(entity, schema, out)
    return out


def _validate_into(entity: object, schema: SkeletonSchema | None, out: list[Violation]) -> None:
    if isinstance(entity, Keypoint):
        if not (0.0 <= entity.confidence <= 1.0):
            out.append(Violation("confidence range", f"confidence {entity.confidence} outside [0, 1]"))
    elif isinstance(entity, ClassSchema):
        n = len(entity.keypoint_names)
        for a, b in entity.edges:
            if not (0 <= a < n and 0 <= b < n):
                out.append(Violation("edge index", f"edge ({a}, {b}) outside 0..{n - 1}"))
        for color in (entity.joint_color, entity.edge_color):
            if tuple(color) == (0, 0, 0):
                out.append(Violation("black color", "schema color equals the background (0, 0, 0)"))
    elif isinstance(entity, SkeletonSchema):
        for cs in entity.classes.values():
            _validate_into(cs, schema, out)
        joints = [cs.joint_color for cs in entity.classes.values()]
        edges = [cs.edge_color for cs in entity.classes.values()]
        if len(set(joints)) != len(joints) or len(set(edges)) != len(edges):
            out.append(Violation("color clash", "drawing colors are not distinct across classes"))
    elif isinstance(entity, AgentSkeleton):
        for kp in entity.keypoints:
            _validate_into(kp, schema, out)
        if schema is not None and entity.agent_class in schema.classes:
            want = len(schema.classes[entity.agent_class].keypoint_names)
            if len(entity.keypoints) != want:
                out.append(Violation(
                    "keypoint count",
                    f"agent {entity.agent_id}: {len(entity.keypoints)} keypoints, schema has {want}",
                ))
    elif isinstance(entity, PoseVideo):
        if entity.width <= 0 or entity.height <= 0:
            out.append(Violation("canvas size", f"{entity.width}x{entity.height} not positive"))
        if entity.fps <= 0:
            out.append(Violation("fps", f"fps {entity.fps} not positive"))
        for i, frame in enumerate(entity.frames):
            if frame.frame_index != i:
                out.append(Violation("frame indices", f"frame {i} carries index {frame.frame_index}"))
                break
        for frame in entity.frames:
            for agent in frame.agents:
                _validate_into(agent, schema, out)
    elif isinstance(entity, CameraPose):
        norm = math.sqrt(sum(c * c for c in entity.orientation))
        if abs(norm - 1.0) > 1e-9:
            out.append(Violation("unit quaternion", f"quaternion norm {norm} != 1"))
    elif isinstance(entity, Intrinsics):
        if not (0.0 < entity.horizontal_fov_deg < 180.0):
            out.append(Violation("fov range", f"fov {entity.horizontal_fov_deg} outside (0, 180)"))
        if entity.width <= 0 or entity.height <= 0:
            out.append(Violation("canvas size", f"{entity.width}x{entity.height} not positive"))
    elif isinstance(entity, CameraTrajectory):
        _validate_into(entity.intrinsics, schema, out)
        ts = [p.timestamp for p in entity.poses]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            out.append(Violation("timestamps", "pose timestamps not strictly increasing"))
        for pose in entity.poses:
            _validate_into(pose, schema, out)
    elif isinstance(entity, BBox):
        if entity.x_min > entity.x_max or entity.y_min > entity.y_max:
            out.append(Violation("box order", f"min corner exceeds max corner in {entity}"))
    elif isinstance(entity, Track):
        frames = [f for f, _ in entity.entries]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            out.append(Violation("track frames", f"track {entity.track_id} frame indices not strictly increasing"))
        for _, box in entity.entries:
            _validate_into(box, schema, out)
    elif isinstance(entity, FrameImage):
        pass  # shape enforced at construction
    else:
        raise TypeError(f"cannot validate values of type {type(entity).__name__}")


# JSON Lines codecs. Keypoint files carry one line per frame; canvas size and
# fps travel out of band (CLI flags). Trajectory files carry one line per pose.


def skeleton_to_json(agent: AgentSkeleton) -> dict:
    return {
        "id": agent.agent_id,
        "class": agent.agent_class.value,
        "kp": [[kp.x, kp.y, kp.confidence, kp.visible] for kp in agent.keypoints],
    }


def skeleton_from_json(obj: dict, schema: SkeletonSchema) -> AgentSkeleton:
    agent_class = AgentClass(obj["class"])
    names = schema.for_class(agent_class).keypoint_names
    kps = obj["kp"]
    keypoints = tuple(
        Keypoint(
            name=names[i] if i < len(names) else f"kp{i}",
            x=float(kp[0]),
            y=float(kp[1]),
            confidence=float(kp[2]),
            visible=bool(kp[3]),
        )
        for i, kp in enumerate(kps)
    )
    return AgentSkeleton(agent_id=str(obj["id"]), agent_class=agent_class, keypoints=keypoints)


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_keypoints_jsonl(video: PoseVideo, path: str | Path) -> None:
    lines = []
    for frame in video.frames:
        line = {
            "frame": frame.frame_index,
            "agents": [skeleton_to_json(a) for a in frame.agents],
        }
        lines.append(json.dumps(line, separators=(",", ":")))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_keypoints_jsonl(
    path: str | Path,
    width: int,
    height: int,
    fps: float,
    schema: SkeletonSchema | None = None,
) -> PoseVideo:
    schema = schema or default_schema()
    frames = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            frames.append(
                PoseFrame(
                    frame_index=int(obj["frame"]),
                    agents=tuple(skeleton_from_json(a, schema) for a in obj["agents"]),
                )
            )
    return PoseVideo(width=width, height=height, fps=fps, frames=tuple(frames))


def write_trajectory_jsonl(traj: CameraTrajectory, path: str | Path) -> None:
    lines = [
        json.dumps({"t": pose.timestamp, "p": list(pose.position), "q": list(pose.orientation)},
                   separators=(",", ":"))
        for pose in traj.poses
    ]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_trajectory_jsonl(path: str | Path, intrinsics: Intrinsics) -> CameraTrajectory:
    poses = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            poses.append(
                CameraPose(
                    position=tuple(float(v) for v in obj["p"]),
                    orientation=tuple(float(v) for v in obj["q"]),
                    timestamp=float(obj["t"]),
                )
            )
    return CameraTrajectory(poses=tuple(poses), intrinsics=intrinsics)


def write_tracks_jsonl(tracks: Iterable[Track], path: str | Path) -> None:
    lines = []
    for track in tracks:
        line = {
            "track": track.track_id,
            "entries": [[f, b.x_min, b.y_min, b.x_max, b.y_max] for f, b in track.entries],
        }
        lines.append(json.dumps(line, separators=(",", ":")))
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_tracks_jsonl(path: str | Path) -> list[Track]:
    tracks = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            entries = tuple(
                (int(e[0]), BBox(float(e[1]), float(e[2]), float(e[3]), float(e[4])))
                for e in obj["entries"]
            )
            tracks.append(Track(track_id=int(obj["track"]), entries=entries))
    return tracks
