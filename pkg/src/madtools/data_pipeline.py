"""Clip preprocessing: segmentation, object-count filtering, split sampling.

Source videos arrive pre-assigned to train or val; clips inherit that
assignment and quota sampling never crosses it, so overlapping clip windows
cannot leak a video across the split boundary.
"""

from __future__ import annotations

import enum
import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import AgentClass, EmptyInputError, PoseFrame, PoseVideo

log = logging.getLogger("madtools.pipeline")

DEFAULT_CLIP_LEN = 120
DEFAULT_OVERLAP = 72


class Split(enum.Enum):
    TRAIN = "train"
    VAL = "val"


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    frame_count: int
    fps: float = 24.0
    width: int = 1056
    height: int = 704
    split: Split = Split.TRAIN

    def __post_init__(self):
        if self.frame_count < 0:
            raise ValueError("frame_count must be >= 0")


@dataclass(frozen=True)
class ClipRecord:
    clip_id: str
    video_id: str
    start_frame: int
    length: int
    object_score: float = 0.0
    caption: str = ""
    split: Split = Split.TRAIN


@dataclass(frozen=True)
class ClipManifest:
    records: tuple[ClipRecord, ...]
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [r.clip_id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("clip_ids must be unique")


def segment_clips(meta: VideoMeta, clip_len: int = DEFAULT_CLIP_LEN,
                  overlap: int = DEFAULT_OVERLAP) -> list[ClipRecord]:
    """Fixed-length clips tiled with constant overlap.

    Starts are 0, s, 2s, ... with stride s = clip_len - overlap; the last
    clip must end within the video, so a source shorter than clip_len yields
    nothing.
    """
    if overlap >= clip_len:
        raise ValueError("overlap must be smaller than clip_len")
    if clip_len < 1:
        raise ValueError("clip_len must be >= 1")
    stride = clip_len - overlap
    clips = []
    start = 0
    while start + clip_len <= meta.frame_count:
        clips.append(ClipRecord(
            clip_id=f"{meta.video_id}:{start:06d}",
            video_id=meta.video_id,
            start_frame=start,
            length=clip_len,
            split=meta.split,
        ))
        start += stride
    return clips


def slice_clip(video: PoseVideo, start: int, length: int) -> PoseVideo:
    """Frames of `video` with frame_index in [start, start+length), re-indexed from 0."""
    picked = [f for f in video.frames if start <= f.frame_index < start + length]
    frames = tuple(PoseFrame(frame_index=i, agents=f.agents) for i, f in enumerate(picked))
    return PoseVideo(width=video.width, height=video.height, fps=video.fps, frames=frames)


def object_count_score(poses: PoseVideo) -> float:
    """Mean number of non-lane agents per frame."""
    if not poses.frames:
        raise EmptyInputError("clip has no frames")
    total = sum(
        sum(1 for a in f.agents if a.agent_class is not AgentClass.LANE_LINE)
        for f in poses.frames
    )
    return total / len(poses.frames)


def filter_clips(clips: list[ClipRecord]) -> list[ClipRecord]:
    """Keep the ceil(n/2) highest-scoring clips.

    Ties at the cut break by ascending clip_id; relative input order is
    preserved among the survivors.
    """
    if not clips:
        return []
    n_keep = (len(clips) + 1) // 2
    ranked = sorted(clips, key=lambda r: (-r.object_score, r.clip_id))
    kept = {r.clip_id for r in ranked[:n_keep]}
    return [r for r in clips if r.clip_id in kept]


def assign_splits(manifest: ClipManifest, train_quota: int, val_quota: int,
                  seed: int = 0) -> ClipManifest:
    """Sample quota-sized clip sets from train videos and val videos.

    Sampling is uniform without replacement under the seed, independently per
    side; a quota larger than the pool just takes the whole pool. Output
    preserves manifest order.
    """
    if train_quota < 0 or val_quota < 0:
        raise ValueError("quotas must be >= 0")
    gen = np.random.Generator(np.random.Philox(key=seed))
    selected: set[str] = set()
    for split, quota in ((Split.TRAIN, train_quota), (Split.VAL, val_quota)):
        pool = [r for r in manifest.records if r.split is split]
        take = min(quota, len(pool))
        idx = gen.permutation(len(pool))[:take]
        selected.update(pool[i].clip_id for i in idx)
    records = tuple(r for r in manifest.records if r.clip_id in selected)
    config = dict(manifest.config)
    config["split_sampling"] = {"train_quota": train_quota, "val_quota": val_quota, "seed": seed}
    return ClipManifest(records=records, config=config)


def attach_captions(manifest: ClipManifest, captions: dict[str, str]) -> ClipManifest:
    """Attach externally produced captions by clip_id.

    Unknown ids are warned about and skipped; coverage stats land in the
    config snapshot.
    """
    known = {r.clip_id for r in manifest.records}
    for clip_id in captions:
        if clip_id not in known:
            log.warning("caption for unknown clip_id %r ignored", clip_id)
    records = tuple(
        replace(r, caption=captions[r.clip_id]) if r.clip_id in captions else r
        for r in manifest.records
    )
    applied = sum(1 for r in records if r.caption)
    config = dict(manifest.config)
    config["captions"] = {
        "provided": len(captions),
        "applied": applied,
        "coverage": applied / len(records) if records else 0.0,
    }
    return ClipManifest(records=records, config=config)


def write_manifest(manifest: ClipManifest, path: str | Path) -> None:
    """JSON Lines: a config-snapshot header line, then one record per line."""
    path = Path(path)
    lines = [json.dumps({"config": manifest.config}, sort_keys=True)]
    for r in manifest.records:
        lines.append(json.dumps({
            "clip_id": r.clip_id,
            "video_id": r.video_id,
            "start_frame": r.start_frame,
            "length": r.length,
            "object_score": r.object_score,
            "caption": r.caption,
            "split": r.split.value,
        }, sort_keys=True))
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_manifest(path: str | Path) -> ClipManifest:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise EmptyInputError("manifest file is empty")
    header = json.loads(lines[0])
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        d = json.loads(line)
        records.append(ClipRecord(
            clip_id=d["clip_id"],
            video_id=d["video_id"],
            start_frame=d["start_frame"],
            length=d["length"],
            object_score=d["object_score"],
            caption=d.get("caption", ""),
            split=Split(d["split"]),
        ))
    return ClipManifest(records=tuple(records), config=header.get("config", {}))
