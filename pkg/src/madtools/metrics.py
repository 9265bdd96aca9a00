"""Evaluation math: trajectory accuracy/diversity, box fidelity, Frechet core.

Trajectories are planar ground tracks at a fixed timestep. Feature sets for
the Frechet distance are externally extracted vectors; no feature networks
live here.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import BBox, CameraTrajectory, EmptyInputError, ShapeError, Track


class Alignment(enum.Enum):
    NONE = "none"
    FIRST_POSE = "first_pose"


@dataclass(frozen=True)
class Trajectory2D:
    """Ground-plane track, fixed timestep, units meters."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) < 1:
            raise EmptyInputError("trajectory needs at least one point")

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.float64)


@dataclass(frozen=True)
class SampleSet:
    """k same-length trajectories sampled for one scene."""

    trajectories: tuple[Trajectory2D, ...]

    def __post_init__(self):
        if len(self.trajectories) < 1:
            raise EmptyInputError("sample set needs at least one trajectory")
        lengths = {len(t) for t in self.trajectories}
        if len(lengths) != 1:
            raise ShapeError(f"sample trajectories differ in length: {sorted(lengths)}")

    @property
    def k(self) -> int:
        return len(self.trajectories)


class FeatureSet:
    """(n, d) matrix of externally extracted feature vectors, n >= 2."""

    __slots__ = ("vectors",)

    def __init__(self, vectors: np.ndarray):
        arr = np.ascontiguousarray(vectors, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"feature set must be (n, d), got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise ShapeError("need n >= 2 vectors to estimate covariance")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FeatureSet is immutable")


def ground_track(traj: CameraTrajectory) -> Trajectory2D:
    """Planar projection of camera positions; altitude is discarded."""
    return Trajectory2D(points=tuple((p.position[0], p.position[2]) for p in traj.poses))


def _initial_heading(pts: np.ndarray) -> float:
    # first nonzero displacement defines heading; a static track gets 0
    for j in range(1, len(pts)):
        d = pts[j] - pts[0]
        if d[0] != 0.0 or d[1] != 0.0:
            return math.atan2(d[1], d[0])
    return 0.0


def _align_first_pose(ref: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Rigidly move `other` so its first point and initial heading match `ref`."""
    theta = _initial_heading(ref) - _initial_heading(other)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    return (other - other[0]) @ rot.T + ref[0]


def ade(a: Trajectory2D, b: Trajectory2D, align: Alignment = Alignment.NONE) -> float:
    """Average displacement error in meters, optionally first-pose aligned."""
    if len(a) != len(b):
        raise ShapeError(f"trajectory lengths differ: {len(a)} vs {len(b)}")
    pa, pb = a.as_array(), b.as_array()
    if align is Alignment.FIRST_POSE:
        pb = _align_first_pose(pa, pb)
    return float(np.mean(np.linalg.norm(pa - pb, axis=1)))


def min_ade_k(gt: Trajectory2D, samples: SampleSet,
              align: Alignment = Alignment.FIRST_POSE) -> float:
    """Best-of-k displacement error against the ground-truth track."""
    return min(ade(gt, s, align=align) for s in samples.trajectories)


def apd_k(samples: SampleSet) -> float:
    """Mean pairwise ADE over the sample set, in centimeters."""
    if samples.k < 2:
        raise EmptyInputError("pairwise diversity needs k >= 2 samples")
    trajs = samples.trajectories
    total = 0.0
    pairs = 0
    for i in range(len(trajs)):
        for j in range(i + 1, len(trajs)):
            total += ade(trajs[i], trajs[j], align=Alignment.NONE)
            pairs += 1
    return 100.0 * total / pairs


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint or zero-area unions."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(0.0, ix) * max(0.0, iy)
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def object_control_score(gt_track: Track, detected: Track | None, frame_count: int) -> float:
    """Mean per-frame IoU against the conditioned box over the gt frames.

    Frames where no detected box exists score 0; a missing track scores 0
    everywhere.
    """
    gt_frames = [(f, box) for f, box in gt_track.entries if 0 <= f < frame_count]
    if not gt_frames:
        raise EmptyInputError("gt track has no frames in range")
    total = 0.0
    for f, gt_box in gt_frames:
        det_box = detected.box_at(f) if detected is not None else None
        if det_box is not None:
            total += iou(gt_box, det_box)
    return total / len(gt_frames)


def success_rate(answers: list) -> float:
    """Fraction of yes answers; accepts booleans or yes/no strings."""
    if not answers:
        raise EmptyInputError("no answers")
    def is_yes(a) -> bool:
        if isinstance(a, bool):
            return a
        if isinstance(a, str) and a.strip().lower() in ("yes", "no"):
            return a.strip().lower() == "yes"
        raise ValueError(f"answer must be yes/no, got {a!r}")
    return sum(1 for a in answers if is_yes(a)) / len(answers)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    # symmetric square root with eigenvalues clamped at zero
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: FeatureSet, b: FeatureSet, eps: float = 1e-6) -> float:
    """Frechet distance between Gaussians fit to the two feature sets.

    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the cross
    term computed through the symmetric product S_a^{1/2} S_b S_a^{1/2}.
    eps goes on both covariance diagonals before factorization, which keeps
    frechet_distance(x, x) at exactly zero.
    """
    va, vb = a.vectors, b.vectors
    if va.shape[1] != vb.shape[1]:
        raise ShapeError(f"feature dims differ: {va.shape[1]} vs {vb.shape[1]}")
    mu_a, mu_b = va.mean(axis=0), vb.mean(axis=0)
    cov_a = np.cov(va, rowvar=False).reshape(va.shape[1], va.shape[1])
    cov_b = np.cov(vb, rowvar=False).reshape(vb.shape[1], vb.shape[1])
    d = va.shape[1]
    cov_a = cov_a + eps * np.eye(d)
    cov_b = cov_b + eps * np.eye(d)
    root_a = _sqrtm_psd(cov_a)
    cross = root_a @ cov_b @ root_a
    cross_vals = np.clip(np.linalg.eigvalsh(cross), 0.0, None)
    mean_term = float(np.sum((mu_a - mu_b) ** 2))
    trace_term = float(np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.sum(np.sqrt(cross_vals)))
    # the distance is non-negative; clamp away eigensolver noise near zero
    return max(0.0, mean_term + trace_term)


def read_scene_file(path: str | Path) -> list[dict]:
    """Scene JSONL: {"scene": id, "gt": [[x,y],...], "samples": [[[x,y],...],...]}."""
    scenes = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        scenes.append({
            "scene": d["scene"],
            "gt": Trajectory2D(points=tuple(map(tuple, d["gt"]))),
            "samples": SampleSet(trajectories=tuple(
                Trajectory2D(points=tuple(map(tuple, s))) for s in d["samples"]
            )),
        })
    if not scenes:
        raise EmptyInputError("scene file is empty")
    return scenes


def evaluate_scenes(scenes: list[dict], align: Alignment = Alignment.FIRST_POSE) -> dict:
    """Per-scene and aggregate minADE/APD report over a scene list."""
    rows = []
    for sc in scenes:
        rows.append({
            "scene": sc["scene"],
            "min_ade": min_ade_k(sc["gt"], sc["samples"], align=align),
            "apd": apd_k(sc["samples"]) if sc["samples"].k >= 2 else None,
        })
    apds = [r["apd"] for r in rows if r["apd"] is not None]
    return {
        "scenes": rows,
        "aggregate": {
            "count": len(rows),
            "min_ade_mean": float(np.mean([r["min_ade"] for r in rows])),
            "apd_mean": float(np.mean(apds)) if apds else None,
        },
    }
