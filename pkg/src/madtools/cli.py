"""`mad`: one command-line entry point over all the library modules.

Every subcommand is deterministic I/O glue: explicit seeds, atomic writes,
and a machine-readable JSON summary on stdout. Exit codes: 0 ok, 1 runtime
failure, 2 usage or input error. `MAD_LOG` selects verbosity.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import logging
import os
import sys
from pathlib import Path

import click

from . import core, data_pipeline, ego_render, latent_noise, metrics as metrics_mod
from . import object_control, pose_render, report, synth as synth_mod
from .frames_io import read_png_sequence, write_png_sequence, write_raw_stream
from .study.core import StudyConfig, StudyError, StudyState


def _echo_summary(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True))


def guarded(fn):
    """Map domain failures to exit 1 with a structured error on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (ValueError, OSError, KeyError, StudyError) as exc:
            click.echo(json.dumps({
                "error": {"type": type(exc).__name__, "message": str(exc)}
            }, sort_keys=True), err=True)
            sys.exit(1)

    return wrapper


def _write_frames(frames, out: str, fmt: str, jobs: int) -> None:
    if fmt == "png":
        write_png_sequence(frames, out, jobs=jobs)
    else:
        write_raw_stream(frames, out)


_jobs_option = click.option("--jobs", type=int, default=os.cpu_count() or 1,
                            show_default="cpu count", help="Worker threads for frame output.")
_format_option = click.option("--format", "fmt", type=click.Choice(["png", "raw"]),
                              default="png", show_default=True,
                              help="PNG sequence directory or single raw stream file.")


@click.group()
@click.version_option(package_name="madtools")
def main():
    level = os.environ.get("MAD_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


# -- rendering ------------------------------------------------------------


@main.command("render-pose")
@click.option("--poses", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Keypoint JSONL file.")
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--fps", type=float, default=24.0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@_format_option
@click.option("--line-width", type=int, default=2, show_default=True)
@click.option("--joint-radius", type=int, default=3, show_default=True)
@click.option("--min-confidence", type=float, default=0.3, show_default=True)
@_jobs_option
@guarded
def render_pose_cmd(poses, width, height, fps, out, fmt, line_width, joint_radius,
                    min_confidence, jobs):
    """Rasterize a skeleton pose video onto black frames."""
    video = core.read_keypoints_jsonl(poses, width=width, height=height, fps=fps)
    cfg = pose_render.RenderConfig(line_width=line_width, joint_radius=joint_radius,
                                   min_confidence=min_confidence)
    frames = pose_render.rasterize_pose_video(video, cfg=cfg)
    _write_frames(frames, out, fmt, jobs)
    _echo_summary({"command": "render-pose", "frames": len(frames), "out": out,
                   "format": fmt})


@main.command("render-ego")
@click.option("--trajectory", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Camera trajectory JSONL file.")
@click.option("--width", type=int, default=1056, show_default=True)
@click.option("--height", type=int, default=704, show_default=True)
@click.option("--fov", type=float, default=90.0, show_default=True,
              help="Horizontal field of view, degrees.")
@click.option("--out", type=click.Path(), required=True)
@_format_option
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Full render config as JSON; overrides the flags below.")
@click.option("--cells-lon", type=int, default=24, show_default=True)
@click.option("--cells-lat", type=int, default=12, show_default=True)
@click.option("--particle-seed", type=int, default=0, show_default=True)
@click.option("--particle-density", type=float, default=None,
              help="Particles per cubic meter; default targets ~200 visible per frame.")
@click.option("--particles/--no-particles", default=True, show_default=True)
@_jobs_option
@guarded
def render_ego_cmd(trajectory, width, height, fov, out, fmt, config_path, cells_lon,
                   cells_lat, particle_seed, particle_density, particles, jobs):
    """Render the checkerboard-skybox ego-motion video."""
    intr = core.Intrinsics(horizontal_fov_deg=fov, width=width, height=height)
    traj = core.read_trajectory_jsonl(trajectory, intrinsics=intr)
    if config_path is not None:
        cfg = ego_render.config_from_json(config_path)
    else:
        base = ego_render.default_ego_config(traj)
        fld = base.particles
        if not particles:
            fld = ego_render.ParticleField(seed=particle_seed, density=0.0,
                                           bounds_min=fld.bounds_min,
                                           bounds_max=fld.bounds_max)
        else:
            fld = ego_render.ParticleField(
                seed=particle_seed,
                density=fld.density if particle_density is None else particle_density,
                bounds_min=fld.bounds_min, bounds_max=fld.bounds_max,
                particle_radius_px=fld.particle_radius_px, color=fld.color)
        cfg = ego_render.EgoRenderConfig(
            skybox=ego_render.SkyboxConfig(cells_longitude=cells_lon,
                                           cells_latitude=cells_lat),
            particles=fld)
    frames = ego_render.render_ego_video(traj, cfg)
    _write_frames(frames, out, fmt, jobs)
    _echo_summary({"command": "render-ego", "frames": len(frames), "out": out,
                   "format": fmt})


@main.command("render-objects")
@click.option("--poses", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Keypoint JSONL to derive tracks from.")
@click.option("--tracks", "tracks_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Pre-tracked JSONL (skips detection/tracking).")
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--fps", type=float, default=24.0, show_default=True)
@click.option("--frame-count", type=int, default=None,
              help="Required with --tracks; defaults to the pose frame count.")
@click.option("--min-confidence", type=float, default=0.3, show_default=True)
@click.option("--iou-threshold", type=float, default=0.3, show_default=True)
@click.option("--max-gap", type=int, default=2, show_default=True)
@click.option("--max-tracks", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--tracks-out", type=click.Path(), default=None,
              help="Also dump the selected tracks as JSONL.")
@_format_option
@_jobs_option
@guarded
def render_objects_cmd(poses, tracks_path, width, height, fps, frame_count,
                       min_confidence, iou_threshold, max_gap, max_tracks, seed,
                       out, tracks_out, fmt, jobs):
    """Track objects and render the sparse box-trajectory control video."""
    if (poses is None) == (tracks_path is None):
        raise click.UsageError("provide exactly one of --poses or --tracks")
    if poses is not None:
        video = core.read_keypoints_jsonl(poses, width=width, height=height, fps=fps)
        detections = object_control.bboxes_from_skeletons(video, min_confidence=min_confidence)
        all_tracks = object_control.track(
            detections, object_control.TrackerConfig(iou_threshold=iou_threshold,
                                                     max_gap=max_gap))
        frame_count = frame_count or video.frame_count
    else:
        all_tracks = core.read_tracks_jsonl(tracks_path)
        if frame_count is None:
            raise click.UsageError("--frame-count is required with --tracks")
    selected = object_control.select_tracks(all_tracks, max_n=max_tracks, seed=seed)
    frames = object_control.render_track_video(selected, width, height, fps, frame_count)
    _write_frames(frames, out, fmt, jobs)
    if tracks_out:
        core.write_tracks_jsonl(selected, tracks_out)
    _echo_summary({"command": "render-objects", "tracks_total": len(all_tracks),
                   "tracks_rendered": len(selected), "frames": len(frames),
                   "out": out, "format": fmt})


@main.command("inject-noise")
@click.option("--latent", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Latent tensor binary (with its JSON sidecar).")
@click.option("--frames", "frames_dir", type=click.Path(exists=True, file_okay=False),
              required=True, help="Rendered pose PNG directory for the foreground mask.")
@click.option("--out", type=click.Path(), required=True)
@click.option("--sigma-max", type=float, default=0.3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scope", type=click.Choice(["clip", "frame"]), default="clip",
              show_default=True)
@guarded
def inject_noise_cmd(latent, frames_dir, out, sigma_max, seed, scope):
    """Add targeted Gaussian noise to skeleton-covered latent cells."""
    tensor = latent_noise.read_latent(latent)
    frames = read_png_sequence(frames_dir)
    fg = pose_render.foreground_mask(frames)
    mask = latent_noise.skeleton_latent_mask(fg, tensor.factors)
    cfg = latent_noise.NoiseConfig(
        sigma_max=sigma_max, seed=seed,
        sigma_scope=(latent_noise.SigmaScope.PER_CLIP if scope == "clip"
                     else latent_noise.SigmaScope.PER_FRAME))
    noised = latent_noise.inject_targeted_noise(tensor, mask, cfg)
    latent_noise.write_latent(noised, out)
    sigmas = latent_noise.draw_sigmas(cfg, tensor.shape[0])
    _echo_summary({
        "command": "inject-noise",
        "masked_cells": int(mask.grid.sum()),
        "total_cells": int(mask.grid.size),
        "sigma": sigmas[0] if scope == "clip" else list(sigmas),
        "out": out,
    })


# -- data pipeline ---------------------------------------------------------


@main.command("segment")
@click.option("--video-id", default="video", show_default=True)
@click.option("--frames", type=int, required=True, help="Source video frame count.")
@click.option("--fps", type=float, default=24.0, show_default=True)
@click.option("--width", type=int, default=1056, show_default=True)
@click.option("--height", type=int, default=704, show_default=True)
@click.option("--split", type=click.Choice(["train", "val"]), default="train",
              show_default=True)
@click.option("--clip-len", type=int, default=120, show_default=True)
@click.option("--overlap", type=int, default=72, show_default=True)
@click.option("--poses", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Keypoint JSONL used to compute object-count scores.")
@click.option("--out", type=click.Path(), default=None, help="Manifest JSONL to write.")
@guarded
def segment_cmd(video_id, frames, fps, width, height, split, clip_len, overlap,
                poses, out):
    """Segment a video into overlapping fixed-length clips."""
    if overlap >= clip_len:
        raise click.UsageError("overlap < clip-len is required")
    meta = data_pipeline.VideoMeta(video_id=video_id, frame_count=frames, fps=fps,
                                   width=width, height=height,
                                   split=data_pipeline.Split(split))
    clips = data_pipeline.segment_clips(meta, clip_len=clip_len, overlap=overlap)
    if poses is not None:
        video = core.read_keypoints_jsonl(poses, width=width, height=height, fps=fps)
        scored = []
        for c in clips:
            sliced = data_pipeline.slice_clip(video, c.start_frame, c.length)
            score = data_pipeline.object_count_score(sliced) if sliced.frames else 0.0
            scored.append(dataclasses.replace(c, object_score=score))
        clips = scored
    if out:
        manifest = data_pipeline.ClipManifest(
            records=tuple(clips),
            config={"clip_len": clip_len, "overlap": overlap, "video_id": video_id})
        data_pipeline.write_manifest(manifest, out)
    _echo_summary({"command": "segment", "clips": len(clips),
                   "stride": clip_len - overlap, "out": out})


@main.command("filter")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(), required=True)
@guarded
def filter_cmd(manifest, out):
    """Keep the top half of clips by object-count score."""
    src = data_pipeline.read_manifest(manifest)
    kept = data_pipeline.filter_clips(list(src.records))
    config = dict(src.config)
    config["filter"] = {"input_clips": len(src.records), "kept_clips": len(kept)}
    data_pipeline.write_manifest(
        data_pipeline.ClipManifest(records=tuple(kept), config=config), out)
    _echo_summary({"command": "filter", "kept": len(kept),
                   "dropped": len(src.records) - len(kept), "out": out})


@main.command("split")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--train-quota", type=int, required=True)
@click.option("--val-quota", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@guarded
def split_cmd(manifest, train_quota, val_quota, seed, out):
    """Sample train/val clip sets without crossing video splits."""
    src = data_pipeline.read_manifest(manifest)
    result = data_pipeline.assign_splits(src, train_quota=train_quota,
                                         val_quota=val_quota, seed=seed)
    data_pipeline.write_manifest(result, out)
    n_train = sum(1 for r in result.records if r.split is data_pipeline.Split.TRAIN)
    n_val = len(result.records) - n_train
    _echo_summary({"command": "split", "train": n_train, "val": n_val, "out": out})


# -- metrics ----------------------------------------------------------------


@main.group("metrics")
def metrics_group():
    """Trajectory and distribution metrics."""


def _load_traj(path: str) -> metrics_mod.Trajectory2D:
    pts = json.loads(Path(path).read_text())
    return metrics_mod.Trajectory2D(points=tuple(map(tuple, pts)))


def _load_samples(path: str, k: int | None) -> metrics_mod.SampleSet:
    raw = json.loads(Path(path).read_text())
    if k is not None:
        if len(raw) < k:
            raise ValueError(f"sample file has {len(raw)} trajectories, need k={k}")
        raw = raw[:k]
    return metrics_mod.SampleSet(trajectories=tuple(
        metrics_mod.Trajectory2D(points=tuple(map(tuple, s))) for s in raw))


_align_option = click.option("--align", type=click.Choice(["none", "first_pose"]),
                             default="first_pose", show_default=True)


@metrics_group.command("minade")
@click.option("--gt", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON array of [x, y] points.")
@click.option("--samples", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON array of trajectories.")
@click.option("--k", type=int, default=6, show_default=True)
@_align_option
@guarded
def minade_cmd(gt, samples, k, align):
    """Best-of-k average displacement error in meters."""
    value = metrics_mod.min_ade_k(_load_traj(gt), _load_samples(samples, k),
                                  align=metrics_mod.Alignment(align))
    _echo_summary({"command": "metrics.minade", "k": k, "min_ade_m": value})


@metrics_group.command("apd")
@click.option("--samples", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--k", type=int, default=6, show_default=True)
@guarded
def apd_cmd(samples, k):
    """Average pairwise trajectory distance in centimeters."""
    value = metrics_mod.apd_k(_load_samples(samples, k))
    _echo_summary({"command": "metrics.apd", "k": k, "apd_cm": value})


@metrics_group.command("eval")
@click.option("--scenes", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Scene JSONL: {scene, gt, samples} per line.")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@_align_option
@guarded
def eval_cmd(scenes, out, align):
    """Batch minADE/APD evaluation with CSV, JSON and figure output."""
    scene_list = metrics_mod.read_scene_file(scenes)
    rep = metrics_mod.evaluate_scenes(scene_list, align=metrics_mod.Alignment(align))
    artifacts = report.write_eval_report(rep, out)
    _echo_summary({"command": "metrics.eval", "scenes": rep["aggregate"]["count"],
                   "min_ade_mean": rep["aggregate"]["min_ade_mean"],
                   "apd_mean": rep["aggregate"]["apd_mean"], "artifacts": artifacts})


# -- synthesis and the study -------------------------------------------------


@main.command("synth")
@click.option("--scenario", type=click.Choice([k.value for k in synth_mod.ScenarioKind]),
              default="straight", show_default=True)
@click.option("--speed", type=float, default=8.0, show_default=True)
@click.option("--duration", type=float, default=5.0, show_default=True)
@click.option("--fps", type=float, default=24.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--width", type=int, default=1056, show_default=True)
@click.option("--height", type=int, default=704, show_default=True)
@click.option("--fov", type=float, default=90.0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@guarded
def synth_cmd(scenario, speed, duration, fps, seed, width, height, fov, out):
    """Generate a synthetic scene: poses, trajectory and gt tracks."""
    s = synth_mod.Scenario(kind=synth_mod.ScenarioKind(scenario), ego_speed=speed,
                           duration=duration, fps=fps, seed=seed)
    intr = core.Intrinsics(horizontal_fov_deg=fov, width=width, height=height)
    video, traj, tracks = synth_mod.generate_scene(s, intr)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    core.write_keypoints_jsonl(video, out_dir / "poses.jsonl")
    core.write_trajectory_jsonl(traj, out_dir / "trajectory.jsonl")
    core.write_tracks_jsonl(tracks, out_dir / "tracks.jsonl")
    _echo_summary({"command": "synth", "scenario": scenario, "frames": video.frame_count,
                   "tracks": len(tracks), "out": str(out_dir)})


@main.command("serve-study")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Study config JSON: models, scenes, seed.")
@click.option("--log", "log_path", type=click.Path(), default="study_log.jsonl",
              show_default=True)
@click.option("--media", type=click.Path(file_okay=False), default=None,
              help="Directory holding <model>/<scene>.mp4 files.")
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="Static UI bundle to mount at /ui.")
@click.option("--addr", default=None,
              help="host:port to listen on; defaults to $MAD_STUDY_ADDR or 127.0.0.1:8765.")
@guarded
def serve_study_cmd(config_path, log_path, media, ui_dir, addr):
    """Run the pairwise preference study service."""
    import uvicorn

    from .study.service import create_app

    addr = addr or os.environ.get("MAD_STUDY_ADDR", "127.0.0.1:8765")
    host, _, port_s = addr.rpartition(":")
    if not host or not port_s.isdigit():
        raise click.UsageError(f"--addr must be host:port, got {addr!r}")
    config = StudyConfig.from_json(config_path)
    state = StudyState.replay(config, log_path)
    app = create_app(state, media_dir=media, ui_dir=ui_dir)
    _echo_summary({"command": "serve-study", "models": len(config.models),
                   "scenes": len(config.scenes), "cells": len(state.cells),
                   "replayed_records": len(state.records), "addr": addr})
    uvicorn.run(app, host=host, port=int(port_s),
                log_level=os.environ.get("MAD_LOG", "warning").lower())


@main.command("study-report")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--log", "log_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@guarded
def study_report_cmd(config_path, log_path, out):
    """Render win-rate and Elo tables plus figures from a study log."""
    config = StudyConfig.from_json(config_path)
    state = StudyState.replay(config, log_path)
    artifacts = report.write_study_report(state.records, config.models, out,
                                          criteria=config.criteria)
    _echo_summary({"command": "study-report", "records": len(state.records),
                   "artifacts": artifacts, "out": out})


if __name__ == "__main__":
    main()
