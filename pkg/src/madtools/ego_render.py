"""Render the visual ego-motion conditioning video.

The synthetic world is a checkerboard sphere at infinity plus world-fixed dust
particles. The sphere is sampled by view direction only, so camera rotation is
the one and only thing that moves it; translation shows up exclusively as
particle parallax. Everything is deterministic given (trajectory, config).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .camera import quat_to_matrix, focal_px, principal_point, ray_directions
from .core import CameraTrajectory, EmptyInputError, FrameImage
from .raster import disc_offsets, px_round, stamp

DEFAULT_PALETTE = (
    (64, 120, 192),
    (222, 196, 84),
    (170, 74, 68),
    (88, 160, 96),
)


@dataclass(frozen=True)
class SkyboxConfig:
    cells_longitude: int = 24
    cells_latitude: int = 12
    palette: tuple[tuple[int, int, int], ...] = DEFAULT_PALETTE

    def __post_init__(self):
        if self.cells_longitude < 2 or self.cells_latitude < 2:
            raise ValueError("checkerboard needs at least 2 cells per axis")
        if len(self.palette) < 2 or len(set(self.palette)) != len(self.palette):
            raise ValueError("palette needs >= 2 distinct colors")


@dataclass(frozen=True)
class ParticleField:
    seed: int = 0
    density: float = 0.0  # particles per cubic meter
    bounds_min: tuple[float, float, float] = (-50.0, -25.0, -50.0)
    bounds_max: tuple[float, float, float] = (50.0, 25.0, 150.0)
    particle_radius_px: int = 2
    color: tuple[int, int, int] = (255, 255, 255)

    def __post_init__(self):
        if self.density < 0:
            raise ValueError("density must be >= 0")
        if any(hi <= lo for lo, hi in zip(self.bounds_min, self.bounds_max)):
            raise ValueError("bounds box is degenerate")

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in zip(self.bounds_min, self.bounds_max))


@dataclass(frozen=True)
class EgoRenderConfig:
    skybox: SkyboxConfig = field(default_factory=SkyboxConfig)
    particles: ParticleField = field(default_factory=ParticleField)


def config_from_json(path: str | Path) -> EgoRenderConfig:
    d = json.loads(Path(path).read_text())
    sky = d.get("skybox", {})
    fld = d.get("particles", {})
    skybox = SkyboxConfig(
        cells_longitude=int(sky.get("cells_longitude", 24)),
        cells_latitude=int(sky.get("cells_latitude", 12)),
        palette=tuple(tuple(c) for c in sky.get("palette", DEFAULT_PALETTE)),
    )
    particles = ParticleField(
        seed=int(fld.get("seed", 0)),
        density=float(fld.get("density", 0.0)),
        bounds_min=tuple(fld.get("bounds_min", (-50.0, -25.0, -50.0))),
        bounds_max=tuple(fld.get("bounds_max", (50.0, 25.0, 150.0))),
        particle_radius_px=int(fld.get("particle_radius_px", 2)),
        color=tuple(fld.get("color", (255, 255, 255))),
    )
    return EgoRenderConfig(skybox=skybox, particles=particles)


def default_ego_config(traj: CameraTrajectory, visible_target: int = 200) -> EgoRenderConfig:
    """Config with particle bounds covering the whole trajectory.

    Particles are never respawned, so the box must enclose every camera pose
    with margin; density is set so roughly `visible_target` particles land in
    the view frustum per frame, using a fixed-seed Monte Carlo estimate of the
    mean frustum/box overlap along the trajectory.
    """
    pos = np.array([p.position for p in traj.poses], dtype=np.float64)
    lo = pos.min(axis=0) - np.array([60.0, 25.0, 40.0])
    hi = pos.max(axis=0) + np.array([60.0, 25.0, 160.0])
    volume = float(np.prod(hi - lo))

    intr = traj.intrinsics
    tan_h = math.tan(math.radians(intr.horizontal_fov_deg) / 2.0)
    tan_v = tan_h * intr.height / intr.width
    probe = np.random.Generator(np.random.Philox(key=0x5eedb0b)).uniform(
        lo, hi, size=(4096, 3))
    inside = 0
    for pose in traj.poses:
        r = quat_to_matrix(pose.orientation)
        cam = (probe - np.asarray(pose.position)) @ r
        z = cam[:, 2]
        ok = (z > 0) & (np.abs(cam[:, 0]) <= z * tan_h) & (np.abs(cam[:, 1]) <= z * tan_v)
        inside += int(ok.sum())
    frac = inside / (len(probe) * len(traj.poses))
    # fall back to a fixed guess if the box never intersects the frustum
    density = visible_target / (max(frac, 1e-3) * volume)
    particles = ParticleField(seed=0, density=density, bounds_min=tuple(lo), bounds_max=tuple(hi))
    return EgoRenderConfig(skybox=SkyboxConfig(), particles=particles)


def particle_positions(fld: ParticleField) -> np.ndarray:
    """World positions of the dust particles, shape (n, 3).

    Drawn from a counter-based generator keyed by the seed, so the field is a
    pure function of its config; count = round(density * volume).
    """
    count = px_round(fld.density * fld.volume)
    if count <= 0:
        return np.zeros((0, 3), dtype=np.float64)
    gen = np.random.Generator(np.random.Philox(key=fld.seed))
    lo = np.asarray(fld.bounds_min, dtype=np.float64)
    hi = np.asarray(fld.bounds_max, dtype=np.float64)
    return gen.uniform(lo, hi, size=(count, 3))


def checkerboard_cell_index(skybox: SkyboxConfig, dirs_world: np.ndarray) -> np.ndarray:
    """Palette index for each unit world direction (..., 3) -> (...,)."""
    d = np.asarray(dirs_world, dtype=np.float64)
    lon = np.arctan2(d[..., 0], d[..., 2])
    lat = np.arcsin(np.clip(-d[..., 1], -1.0, 1.0))
    dlon = 2.0 * math.pi / skybox.cells_longitude
    dlat = math.pi / skybox.cells_latitude
    ilon = np.floor((lon + math.pi) / dlon).astype(np.int64) % skybox.cells_longitude
    ilat = np.clip(np.floor((lat + math.pi / 2.0) / dlat).astype(np.int64),
                   0, skybox.cells_latitude - 1)
    return (ilon + ilat) % len(skybox.palette)


def checkerboard_corner_directions(skybox: SkyboxConfig) -> np.ndarray:
    """Unit world directions of all interior checkerboard cell corners."""
    dlon = 2.0 * math.pi / skybox.cells_longitude
    dlat = math.pi / skybox.cells_latitude
    lons = -math.pi + dlon * np.arange(skybox.cells_longitude)
    lats = -math.pi / 2.0 + dlat * np.arange(1, skybox.cells_latitude)
    lon, lat = np.meshgrid(lons, lats)
    lon, lat = lon.ravel(), lat.ravel()
    return np.stack(
        [np.cos(lat) * np.sin(lon), -np.sin(lat), np.cos(lat) * np.cos(lon)], axis=1
    )


def render_ego_video(traj: CameraTrajectory, cfg: EgoRenderConfig | None = None) -> list[FrameImage]:
    """Render the ego-motion video frame per camera pose.

    Skybox color depends only on the per-pixel view direction; particles are
    projected through the pinhole model, culled behind the camera, and drawn
    as filled discs over the skybox.
    """
    if not traj.poses:
        raise EmptyInputError("trajectory has no poses")
    cfg = cfg or default_ego_config(traj)
    intr = traj.intrinsics
    rays = ray_directions(intr)  # (h, w, 3) camera frame
    palette = np.array(cfg.skybox.palette, dtype=np.uint8)
    particles = particle_positions(cfg.particles)
    f = focal_px(intr)
    cx, cy = principal_point(intr)
    disc = disc_offsets(cfg.particles.particle_radius_px)

    frames = []
    for pose in traj.poses:
        r = quat_to_matrix(pose.orientation)
        world_dirs = rays @ r.T
        canvas = palette[checkerboard_cell_index(cfg.skybox, world_dirs)]
        if len(particles):
            cam = (particles - np.asarray(pose.position)) @ r
            z = cam[:, 2]
            front = z > 1e-9
            u = f * cam[front, 0] / z[front] + cx
            v = f * cam[front, 1] / z[front] + cy
            margin = cfg.particles.particle_radius_px + 1
            on = (u >= -margin) & (u < intr.width + margin) & (v >= -margin) & (v < intr.height + margin)
            pxs = np.floor(u[on] + 0.5).astype(np.int64)
            pys = np.floor(v[on] + 0.5).astype(np.int64)
            stamp(canvas, pxs, pys, disc, cfg.particles.color)
        frames.append(FrameImage(canvas))
    return frames
