"""Object tracks from pose data and the sparse box-trajectory control video.

Boxes are pseudo-labels distilled from skeleton keypoints, associated into
tracks by greedy IoU (source agent ids short-circuit matching when present),
thinned to a small random subset, and drawn as colored rectangle outlines on
black. The subset cap mirrors how the control is used downstream: a handful
of boxes, never the full scene.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AgentClass, BBox, FrameImage, PoseVideo, Track
from .metrics import iou
from .raster import px_round, stamp, square_offsets

# per-track outline colors; index = track rank in input order mod palette size
TRACK_PALETTE = (
    (255, 64, 64),
    (64, 255, 64),
    (64, 128, 255),
    (255, 255, 64),
    (255, 64, 255),
    (64, 255, 255),
)

OUTLINE_WIDTH = 2


@dataclass(frozen=True)
class TrackerConfig:
    iou_threshold: float = 0.3
    max_gap: int = 2

    def __post_init__(self):
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise ValueError("iou_threshold must be in [0, 1]")
        if self.max_gap < 0:
            raise ValueError("max_gap must be >= 0")


@dataclass(frozen=True)
class Detection:
    agent_id: str
    agent_class: AgentClass
    box: BBox


def bboxes_from_skeletons(video: PoseVideo, min_confidence: float = 0.3) -> list[list[Detection]]:
    """Axis-aligned boxes over qualifying keypoints, one list per frame.

    A keypoint qualifies if visible and confidence >= min_confidence; agents
    with fewer than two qualifying keypoints produce no box. Lane polylines
    are not objects and are excluded.
    """
    out = []
    for frame in video.frames:
        dets = []
        for agent in frame.agents:
            if agent.agent_class is AgentClass.LANE_LINE:
                continue
            pts = [(k.x, k.y) for k in agent.keypoints
                   if k.visible and k.confidence >= min_confidence]
            if len(pts) < 2:
                continue
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            dets.append(Detection(agent.agent_id, agent.agent_class,
                                  BBox(min(xs), min(ys), max(xs), max(ys))))
        out.append(dets)
    return out


def track(detections: list[list[Detection]], cfg: TrackerConfig | None = None) -> list[Track]:
    """Greedy IoU association of per-frame detections into tracks.

    Per frame, detections carrying an agent_id already owned by a live track
    are claimed by identity first. The rest are matched to live tracks in
    descending IoU against each track's last box, accepted iff IoU >= the
    threshold. Unmatched detections open new tracks. A track stays live while
    its gap since last detection is <= max_gap. Every detection lands in
    exactly one track.
    """
    cfg = cfg or TrackerConfig()
    tracks: list[dict] = []  # {"entries": {frame: box}, "agent": id, "last": frame}

    for frame_idx, dets in enumerate(detections):
        live = [t for t in tracks if frame_idx - t["last"] <= cfg.max_gap + 1]
        claimed_tracks: set[int] = set()
        claimed_dets: set[int] = set()

        by_agent = {t["agent"]: i for i, t in enumerate(live) if t["agent"] is not None}
        for di, det in enumerate(dets):
            ti = by_agent.get(det.agent_id)
            if ti is not None and ti not in claimed_tracks:
                live[ti]["entries"][frame_idx] = det.box
                live[ti]["last"] = frame_idx
                claimed_tracks.add(ti)
                claimed_dets.add(di)

        pairs = []
        for di, det in enumerate(dets):
            if di in claimed_dets:
                continue
            for ti, t in enumerate(live):
                if ti in claimed_tracks:
                    continue
                score = iou(t["entries"][t["last"]], det.box)
                if score >= cfg.iou_threshold:
                    pairs.append((score, ti, di))
        pairs.sort(key=lambda p: (-p[0], p[1], p[2]))
        for score, ti, di in pairs:
            if ti in claimed_tracks or di in claimed_dets:
                continue
            live[ti]["entries"][frame_idx] = dets[di].box
            live[ti]["last"] = frame_idx
            claimed_tracks.add(ti)
            claimed_dets.add(di)

        for di, det in enumerate(dets):
            if di not in claimed_dets:
                tracks.append({"entries": {frame_idx: det.box},
                               "agent": det.agent_id, "last": frame_idx})

    return [Track(track_id=i, entries=tuple(sorted(t["entries"].items())))
            for i, t in enumerate(tracks)]


def select_tracks(tracks: list[Track], max_n: int = 5, seed: int = 0) -> list[Track]:
    """Uniform random subset of at most max_n tracks, input order preserved."""
    if max_n < 0:
        raise ValueError("max_n must be >= 0")
    if len(tracks) <= max_n:
        return list(tracks)
    gen = np.random.Generator(np.random.Philox(key=seed))
    keep = set(gen.permutation(len(tracks))[:max_n].tolist())
    return [t for i, t in enumerate(tracks) if i in keep]


def _outline_points(box: BBox) -> tuple[np.ndarray, np.ndarray]:
    x0, y0 = px_round(box.x_min), px_round(box.y_min)
    x1, y1 = px_round(box.x_max), px_round(box.y_max)
    xs, ys = [], []
    for x in range(x0, x1 + 1):
        xs += [x, x]
        ys += [y0, y1]
    for y in range(y0 + 1, y1):
        xs += [x0, x1]
        ys += [y, y]
    return np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64)


def render_track_video(tracks: list[Track], width: int, height: int,
                       fps: float, frame_count: int) -> list[FrameImage]:
    """Rectangle-outline control video; black wherever no box is present.

    Outlines are OUTLINE_WIDTH px (the same square stamp as skeleton lines);
    a track's color never appears in frames where the track has no box.
    """
    if frame_count < 1:
        raise ValueError("frame_count must be >= 1")
    offsets = square_offsets(OUTLINE_WIDTH)
    frames = []
    for f in range(frame_count):
        canvas = np.zeros((height, width, 3), dtype=np.uint8)
        for rank, t in enumerate(tracks):
            box = t.box_at(f)
            if box is None:
                continue
            xs, ys = _outline_points(box)
            stamp(canvas, xs, ys, offsets, TRACK_PALETTE[rank % len(TRACK_PALETTE)])
        frames.append(FrameImage(canvas))
    return frames
