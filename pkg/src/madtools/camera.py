"""Pinhole camera and quaternion helpers shared by the renderers and the scene generator.

Camera frame: x right, y down, z forward (optical axis). A pose quaternion
maps camera-frame vectors into the world frame. Pixel (u, v) rays are taken
through pixel centers, so pixel (i, j) samples (i + 0.5, j + 0.5).
"""

from __future__ import annotations

import math

import numpy as np

from .core import CameraPose, Intrinsics


def quat_to_matrix(q: tuple[float, float, float, float]) -> np.ndarray:
    """Rotation matrix (world-from-camera) for a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    n = math.sqrt(w * w + x * x + y * y + z * z)
    w, x, y, z = w / n, x / n, y / n, z / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def yaw_quaternion(heading_rad: float) -> tuple[float, float, float, float]:
    """Quaternion for a heading rotation about the up axis; positive turns left."""
    # Up is -y in this convention, so a left turn is a negative rotation about +y.
    half = heading_rad / 2.0
    return (math.cos(half), 0.0, -math.sin(half), 0.0)


def heading_of(q: tuple[float, float, float, float]) -> float:
    """Heading angle (left-positive) of the camera forward axis, in radians."""
    fwd = quat_to_matrix(q) @ np.array([0.0, 0.0, 1.0])
    return math.atan2(-fwd[0], fwd[2])


def focal_px(intr: Intrinsics) -> float:
    return (intr.width / 2.0) / math.tan(math.radians(intr.horizontal_fov_deg) / 2.0)


def principal_point(intr: Intrinsics) -> tuple[float, float]:
    return intr.width / 2.0, intr.height / 2.0


def project_points(
    pose: CameraPose, intr: Intrinsics, points_world: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Project world points through the pinhole model.

    Returns (uv, z) where uv is (n, 2) pixel coordinates and z the camera-frame
    depth; points with z <= 0 are behind the camera and their uv is meaningless.
    """
    pts = np.asarray(points_world, dtype=np.float64).reshape(-1, 3)
    r = quat_to_matrix(pose.orientation)
    cam = (pts - np.asarray(pose.position, dtype=np.float64)) @ r
    f = focal_px(intr)
    cx, cy = principal_point(intr)
    z = cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = f * cam[:, 0] / z + cx
        v = f * cam[:, 1] / z + cy
    return np.stack([u, v], axis=1), z


def project_directions(
    pose: CameraPose, intr: Intrinsics, dirs_world: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Project world-frame view directions (points at infinity); camera position is irrelevant."""
    d = np.asarray(dirs_world, dtype=np.float64).reshape(-1, 3)
    r = quat_to_matrix(pose.orientation)
    cam = d @ r
    f = focal_px(intr)
    cx, cy = principal_point(intr)
    z = cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = f * cam[:, 0] / z + cx
        v = f * cam[:, 1] / z + cy
    return np.stack([u, v], axis=1), z


def ray_directions(intr: Intrinsics) -> np.ndarray:
    """Unit camera-frame ray directions for every pixel, shape (height, width, 3)."""
    f = focal_px(intr)
    cx, cy = principal_point(intr)
    u = (np.arange(intr.width) + 0.5 - cx) / f
    v = (np.arange(intr.height) + 0.5 - cy) / f
    xs, ys = np.meshgrid(u, v)
    rays = np.stack([xs, ys, np.ones_like(xs)], axis=-1)
    return rays / np.linalg.norm(rays, axis=-1, keepdims=True)
