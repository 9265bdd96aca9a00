"""Analytic synthetic driving scenes: poses, ego trajectory, and gt tracks.

Every scene is closed-form kinematics projected through the shared pinhole
camera, so tests can check outputs against hand math. Realism is explicitly
out of scope; the templates are boxes and stick figures.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .camera import project_points, quat_to_matrix, yaw_quaternion
from .core import (
    AgentClass,
    AgentSkeleton,
    BBox,
    CAR_KEYPOINTS,
    CameraPose,
    CameraTrajectory,
    Intrinsics,
    Keypoint,
    LANE_KEYPOINTS,
    LANE_POINT_COUNT,
    PEDESTRIAN_KEYPOINTS,
    PoseFrame,
    PoseVideo,
    Track,
)

CAMERA_HEIGHT = 1.5  # meters above ground; y points down, so camera y = -1.5


class ScenarioKind(enum.Enum):
    STRAIGHT_ROAD = "straight"
    LEFT_TURN = "left_turn"
    PEDESTRIAN_CROSSING = "crossing"


@dataclass(frozen=True)
class Scenario:
    kind: ScenarioKind = ScenarioKind.STRAIGHT_ROAD
    ego_speed: float = 8.0
    duration: float = 5.0
    fps: float = 24.0
    seed: int = 0

    def __post_init__(self):
        if self.ego_speed < 0:
            raise ValueError("ego_speed must be >= 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.fps <= 0:
            raise ValueError("fps must be > 0")


# 24-point car wireframe in car-local meters: x right, y down (ground 0),
# z forward. Order matches core.CAR_KEYPOINTS.
CAR_TEMPLATE = np.array([
    (-0.9, -0.35, 2.2), (0.9, -0.35, 2.2), (0.9, -0.35, -2.2), (-0.9, -0.35, -2.2),
    (-0.9, -1.10, 2.2), (0.9, -1.10, 2.2), (0.9, -1.10, -2.2), (-0.9, -1.10, -2.2),
    (-0.7, -1.50, 0.9), (0.7, -1.50, 0.9), (0.7, -1.50, -1.3), (-0.7, -1.50, -1.3),
    (-0.85, -0.30, 1.4), (0.85, -0.30, 1.4), (0.85, -0.30, -1.4), (-0.85, -0.30, -1.4),
    (-0.6, -0.70, 2.2), (0.6, -0.70, 2.2), (0.6, -0.80, -2.2), (-0.6, -0.80, -2.2),
    (-1.0, -1.05, 0.9), (1.0, -1.05, 0.9), (0.0, -0.45, 2.3), (0.0, -0.50, -2.3),
])

# 17-point stick figure, order matches core.PEDESTRIAN_KEYPOINTS.
PEDESTRIAN_TEMPLATE = np.array([
    (0.00, -1.62, 0.10),
    (-0.04, -1.66, 0.08), (0.04, -1.66, 0.08),
    (-0.08, -1.64, 0.02), (0.08, -1.64, 0.02),
    (-0.20, -1.45, 0.00), (0.20, -1.45, 0.00),
    (-0.25, -1.15, 0.03), (0.25, -1.15, -0.03),
    (-0.27, -0.85, 0.08), (0.27, -0.85, -0.08),
    (-0.12, -0.95, 0.00), (0.12, -0.95, 0.00),
    (-0.13, -0.50, 0.06), (0.13, -0.50, -0.06),
    (-0.14, -0.08, 0.10), (0.14, -0.08, -0.10),
])

LANE_HALF_WIDTH = 1.75
NEAR_PLANE = 1e-6


@dataclass(frozen=True)
class _Agent:
    agent_id: str
    agent_class: AgentClass
    template: np.ndarray  # local (n, 3) or, for lanes, world points directly
    position_fn: object   # t -> (x, y, z) world
    heading_fn: object    # t -> heading rad
    world_fixed: bool = False


def _static(pos, heading=0.0):
    return (lambda t: pos), (lambda t: heading)


def _ego_state(s: Scenario, t: float) -> tuple[tuple[float, float, float], float]:
    v = s.ego_speed
    if s.kind is ScenarioKind.LEFT_TURN:
        omega = (math.pi / 2.0) / s.duration
        psi = omega * t
        if v == 0.0:
            return (0.0, -CAMERA_HEIGHT, 0.0), psi
        r = v / omega
        return (-r * (1.0 - math.cos(psi)), -CAMERA_HEIGHT, r * math.sin(psi)), psi
    return (0.0, -CAMERA_HEIGHT, v * t), 0.0


def _lane_agent(agent_id: str, points_world: np.ndarray) -> _Agent:
    pos_fn, head_fn = _static((0.0, 0.0, 0.0))
    return _Agent(agent_id, AgentClass.LANE_LINE, points_world, pos_fn, head_fn,
                  world_fixed=True)


def _straight_lanes(z_max: float) -> list[_Agent]:
    zs = np.linspace(0.0, z_max, LANE_POINT_COUNT)
    agents = []
    for side, x in (("l", -LANE_HALF_WIDTH), ("r", LANE_HALF_WIDTH)):
        pts = np.stack([np.full_like(zs, x), np.zeros_like(zs), zs], axis=1)
        agents.append(_lane_agent(f"lane_{side}", pts))
    return agents


def _arc_lanes(radius: float) -> list[_Agent]:
    psis = np.linspace(0.0, math.pi / 2.0, LANE_POINT_COUNT)
    agents = []
    for side, r in (("l", radius + LANE_HALF_WIDTH), ("r", radius - LANE_HALF_WIDTH)):
        xs = -radius + r * np.cos(psis)
        zs = r * np.sin(psis)
        pts = np.stack([xs, np.zeros_like(xs), zs], axis=1)
        agents.append(_lane_agent(f"lane_{side}", pts))
    return agents


def _scene_agents(s: Scenario, gen: np.random.Generator) -> list[_Agent]:
    path_len = s.ego_speed * s.duration
    agents: list[_Agent] = []
    if s.kind is ScenarioKind.LEFT_TURN:
        omega = (math.pi / 2.0) / s.duration
        radius = s.ego_speed / omega if s.ego_speed > 0 else 20.0
        agents += _arc_lanes(radius)
        z1 = gen.uniform(10.0, 0.5 * radius + 15.0)
        agents.append(_Agent("car_0", AgentClass.CAR, CAR_TEMPLATE,
                             *_static((radius * 0.35 + 3.0, 0.0, z1))))
        agents.append(_Agent("car_1", AgentClass.CAR, CAR_TEMPLATE,
                             *_static((-radius - 4.0, 0.0, gen.uniform(8.0, 20.0)),
                                      heading=math.pi / 2.0)))
        return agents

    agents += _straight_lanes(path_len + 60.0)
    z_parked = gen.uniform(15.0, 35.0)
    agents.append(_Agent("car_0", AgentClass.CAR, CAR_TEMPLATE,
                         *_static((3.5, 0.0, z_parked))))
    z0 = path_len + gen.uniform(25.0, 40.0)
    u = 0.8 * s.ego_speed + 2.0
    agents.append(_Agent(
        "car_1", AgentClass.CAR, CAR_TEMPLATE,
        lambda t, z0=z0, u=u: (-1.2, 0.0, z0 - u * t),
        lambda t: math.pi,
    ))
    if s.kind is ScenarioKind.PEDESTRIAN_CROSSING:
        z_cross = 10.0 + 0.55 * path_len + gen.uniform(0.0, 5.0)
        x0, x1 = -7.0, 7.0
        agents.append(_Agent(
            "ped_0", AgentClass.PEDESTRIAN, PEDESTRIAN_TEMPLATE,
            lambda t, z=z_cross: (x0 + (x1 - x0) * t / s.duration, 0.0, z),
            lambda t: -math.pi / 2.0,  # facing +x, the walking direction
        ))
    else:
        agents.append(_Agent("car_2", AgentClass.CAR, CAR_TEMPLATE,
                             *_static((-3.5, 0.0, z_parked + gen.uniform(15.0, 30.0)))))
    return agents


def _world_keypoints(agent: _Agent, t: float) -> np.ndarray:
    if agent.world_fixed:
        return agent.template
    rot = quat_to_matrix(yaw_quaternion(agent.heading_fn(t)))
    return agent.template @ rot.T + np.asarray(agent.position_fn(t))


def generate_scene(s: Scenario, intrinsics: Intrinsics | None = None
                   ) -> tuple[PoseVideo, CameraTrajectory, list[Track]]:
    """Build one scene: projected poses, the ego trajectory, and gt tracks.

    Keypoints landing behind the camera are emitted at (0, 0) with
    visible=false. Track entries exist only on frames where an object keeps
    at least two visible keypoints.
    """
    intr = intrinsics or Intrinsics(horizontal_fov_deg=90.0, width=1056, height=704)
    gen = np.random.Generator(np.random.Philox(key=s.seed))
    agents = _scene_agents(s, gen)
    frame_count = int(round(s.duration * s.fps))

    poses = []
    frames = []
    boxes: dict[str, list[tuple[int, BBox]]] = {a.agent_id: [] for a in agents
                                                if a.agent_class is not AgentClass.LANE_LINE}
    name_table = {
        AgentClass.CAR: CAR_KEYPOINTS,
        AgentClass.PEDESTRIAN: PEDESTRIAN_KEYPOINTS,
        AgentClass.LANE_LINE: LANE_KEYPOINTS,
    }

    for i in range(frame_count):
        t = i / s.fps
        pos, psi = _ego_state(s, t)
        pose = CameraPose(position=pos, orientation=yaw_quaternion(psi), timestamp=t)
        poses.append(pose)

        skeletons = []
        for agent in agents:
            world = _world_keypoints(agent, t)
            uv, depth = project_points(pose, intr, world)
            kps = []
            for j, name in enumerate(name_table[agent.agent_class]):
                if depth[j] > NEAR_PLANE:
                    kps.append(Keypoint(name=name, x=float(uv[j, 0]), y=float(uv[j, 1]),
                                        confidence=1.0, visible=True))
                else:
                    kps.append(Keypoint(name=name, x=0.0, y=0.0, confidence=1.0,
                                        visible=False))
            skeletons.append(AgentSkeleton(agent_id=agent.agent_id,
                                           agent_class=agent.agent_class,
                                           keypoints=tuple(kps)))
            if agent.agent_class is not AgentClass.LANE_LINE:
                vis = [(k.x, k.y) for k in kps if k.visible]
                if len(vis) >= 2:
                    xs = [p[0] for p in vis]
                    ys = [p[1] for p in vis]
                    boxes[agent.agent_id].append(
                        (i, BBox(min(xs), min(ys), max(xs), max(ys))))
        frames.append(PoseFrame(frame_index=i, agents=tuple(skeletons)))

    video = PoseVideo(width=intr.width, height=intr.height, fps=s.fps, frames=tuple(frames))
    traj = CameraTrajectory(poses=tuple(poses), intrinsics=intr)
    tracks = [Track(track_id=k, entries=tuple(entries))
              for k, (agent_id, entries) in enumerate(boxes.items()) if entries]
    return video, traj, tracks
