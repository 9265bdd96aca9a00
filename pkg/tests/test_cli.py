import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from madtools.cli import main
from madtools.frames_io import read_png_sequence, read_raw_stream
from madtools.latent_noise import LatentTensor, read_latent, write_latent


@pytest.fixture
def runner():
    return CliRunner()


def run_ok(runner, args, **kwargs):
    result = runner.invoke(main, args, catch_exceptions=False, **kwargs)
    assert result.exit_code == 0, result.output
    return json.loads(result.output.strip().splitlines()[-1])


def synth_scene(runner, out, scenario="straight", duration="0.5", fps="8",
                width="128", height="96"):
    return run_ok(runner, [
        "synth", "--scenario", scenario, "--duration", duration, "--fps", fps,
        "--width", width, "--height", height, "--out", str(out)])


def test_help_lists_subcommands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for cmd in ["render-pose", "render-ego", "render-objects", "inject-noise",
                "segment", "filter", "split", "metrics", "synth",
                "serve-study", "study-report"]:
        assert cmd in result.output


def test_synth_writes_scene_files(runner, tmp_path):
    summary = synth_scene(runner, tmp_path / "scene")
    assert summary["frames"] == 4
    assert summary["tracks"] >= 1
    for name in ["poses.jsonl", "trajectory.jsonl", "tracks.jsonl"]:
        assert (tmp_path / "scene" / name).exists()


def test_render_pose_png_and_raw(runner, tmp_path):
    synth_scene(runner, tmp_path / "scene")
    poses = str(tmp_path / "scene" / "poses.jsonl")
    summary = run_ok(runner, [
        "render-pose", "--poses", poses, "--width", "128", "--height", "96",
        "--fps", "8", "--out", str(tmp_path / "png"), "--jobs", "2"])
    assert summary["frames"] == 4
    frames = read_png_sequence(tmp_path / "png")
    assert len(frames) == 4 and frames[0].pixels.any()

    run_ok(runner, [
        "render-pose", "--poses", poses, "--width", "128", "--height", "96",
        "--fps", "8", "--out", str(tmp_path / "stream.madv"), "--format", "raw"])
    raw = read_raw_stream(tmp_path / "stream.madv")
    assert all(np.array_equal(a.pixels, b.pixels) for a, b in zip(frames, raw))


def test_render_ego(runner, tmp_path):
    synth_scene(runner, tmp_path / "scene")
    traj = str(tmp_path / "scene" / "trajectory.jsonl")
    summary = run_ok(runner, [
        "render-ego", "--trajectory", traj, "--width", "64", "--height", "48",
        "--out", str(tmp_path / "ego"), "--no-particles"])
    assert summary["frames"] == 4
    frames = read_png_sequence(tmp_path / "ego")
    assert frames[0].pixels.any()


def test_render_objects_from_poses(runner, tmp_path):
    synth_scene(runner, tmp_path / "scene")
    poses = str(tmp_path / "scene" / "poses.jsonl")
    summary = run_ok(runner, [
        "render-objects", "--poses", poses, "--width", "128", "--height", "96",
        "--fps", "8", "--out", str(tmp_path / "objects"),
        "--tracks-out", str(tmp_path / "sel.jsonl")])
    assert summary["tracks_rendered"] <= 5
    assert summary["frames"] == 4
    assert (tmp_path / "sel.jsonl").exists()
    assert len(read_png_sequence(tmp_path / "objects")) == 4


def test_render_objects_requires_one_source(runner, tmp_path):
    result = runner.invoke(main, [
        "render-objects", "--width", "8", "--height", "8",
        "--out", str(tmp_path / "x")])
    assert result.exit_code == 2


def test_inject_noise_roundtrip(runner, tmp_path):
    synth_scene(runner, tmp_path / "scene")
    poses = str(tmp_path / "scene" / "poses.jsonl")
    run_ok(runner, [
        "render-pose", "--poses", poses, "--width", "128", "--height", "96",
        "--fps", "8", "--out", str(tmp_path / "png")])
    gen = np.random.Generator(np.random.Philox(key=1))
    latent = LatentTensor(gen.normal(size=(2, 24, 32, 4)), factors=(2, 4, 4))
    write_latent(latent, tmp_path / "clip.lat")
    summary = run_ok(runner, [
        "inject-noise", "--latent", str(tmp_path / "clip.lat"),
        "--frames", str(tmp_path / "png"), "--out", str(tmp_path / "noised.lat"),
        "--seed", "5"])
    assert summary["masked_cells"] > 0
    assert 0.0 <= summary["sigma"] <= 0.3
    noised = read_latent(tmp_path / "noised.lat")
    assert noised.shape == latent.shape


def test_segment_filter_split_chain(runner, tmp_path):
    summary = run_ok(runner, [
        "segment", "--video-id", "v0", "--frames", "1000",
        "--out", str(tmp_path / "m.jsonl")])
    assert summary["clips"] == 19
    assert summary["stride"] == 48

    filtered = run_ok(runner, [
        "filter", "--manifest", str(tmp_path / "m.jsonl"),
        "--out", str(tmp_path / "f.jsonl")])
    assert filtered["kept"] == 10  # ceil(19 / 2)
    assert filtered["dropped"] == 9

    split = run_ok(runner, [
        "split", "--manifest", str(tmp_path / "f.jsonl"),
        "--train-quota", "4", "--val-quota", "2", "--out", str(tmp_path / "s.jsonl")])
    assert split["train"] == 4
    assert split["val"] == 0  # the only source video is a train video


def test_segment_scores_with_poses(runner, tmp_path):
    synth_scene(runner, tmp_path / "scene", duration="2", fps="8")
    summary = run_ok(runner, [
        "segment", "--video-id", "v0", "--frames", "16", "--clip-len", "8",
        "--overlap", "4", "--poses", str(tmp_path / "scene" / "poses.jsonl"),
        "--width", "128", "--height", "96", "--fps", "8",
        "--out", str(tmp_path / "m.jsonl")])
    assert summary["clips"] == 3
    lines = (tmp_path / "m.jsonl").read_text().splitlines()
    scores = [json.loads(l)["object_score"] for l in lines[1:]]
    assert all(s > 0 for s in scores)


def test_metrics_minade_and_apd(runner, tmp_path):
    gt = [[0, 0], [1, 0], [2, 0]]
    samples = [gt, [[0, 1], [1, 1], [2, 1]]]
    (tmp_path / "gt.json").write_text(json.dumps(gt))
    (tmp_path / "samples.json").write_text(json.dumps(samples))
    out = run_ok(runner, [
        "metrics", "minade", "--gt", str(tmp_path / "gt.json"),
        "--samples", str(tmp_path / "samples.json"), "--k", "2"])
    assert out["min_ade_m"] == pytest.approx(0.0, abs=1e-12)
    out = run_ok(runner, [
        "metrics", "apd", "--samples", str(tmp_path / "samples.json"), "--k", "2"])
    assert out["apd_cm"] == pytest.approx(100.0)


def test_metrics_k_exceeds_pool(runner, tmp_path):
    (tmp_path / "samples.json").write_text(json.dumps([[[0, 0], [1, 0]]]))
    result = runner.invoke(main, [
        "metrics", "apd", "--samples", str(tmp_path / "samples.json"), "--k", "6"])
    assert result.exit_code == 1
    err = json.loads(result.stderr.strip())
    assert err["error"]["type"] == "ValueError"


def test_metrics_eval_report(runner, tmp_path):
    scenes = [
        {"scene": "s0", "gt": [[0, 0], [1, 0]],
         "samples": [[[0, 0], [1, 0]], [[0, 1], [1, 1]]]},
    ]
    (tmp_path / "scenes.jsonl").write_text(
        "\n".join(json.dumps(s) for s in scenes) + "\n")
    summary = run_ok(runner, [
        "metrics", "eval", "--scenes", str(tmp_path / "scenes.jsonl"),
        "--out", str(tmp_path / "rep")])
    assert summary["scenes"] == 1
    assert summary["min_ade_mean"] == pytest.approx(0.0, abs=1e-12)
    for key in ("json", "csv", "minade_png"):
        assert Path(summary["artifacts"][key]).exists()


def test_study_report_command(runner, tmp_path):
    import itertools

    from madtools.study import Criterion, StudyConfig, StudyState

    cfg_path = tmp_path / "study.json"
    cfg_path.write_text(json.dumps(
        {"models": ["m0", "m1"], "scenes": ["s0"], "seed": 0}))
    config = StudyConfig.from_json(cfg_path)
    counter = itertools.count()
    state = StudyState(config, tmp_path / "log.jsonl", clock=lambda: 1.0,
                       token_factory=lambda: f"t{next(counter)}")
    pres = state.next_pair("r0")
    state.submit(pres.token, {c: -1 for c in Criterion})

    summary = run_ok(runner, [
        "study-report", "--config", str(cfg_path),
        "--log", str(tmp_path / "log.jsonl"), "--out", str(tmp_path / "rep")])
    assert summary["records"] == 3
    assert Path(summary["artifacts"]["elo_csv"]).exists()
    assert (tmp_path / "rep" / "win_rates_general.png").exists()


def test_serve_study_parses_addr(runner, tmp_path, monkeypatch):
    import uvicorn

    calls = {}

    def fake_run(app, host, port, log_level):
        calls["host"] = host
        calls["port"] = port

    monkeypatch.setattr(uvicorn, "run", fake_run)
    cfg_path = tmp_path / "study.json"
    cfg_path.write_text(json.dumps({"models": ["m0", "m1"], "scenes": ["s0"]}))

    summary = run_ok(runner, [
        "serve-study", "--config", str(cfg_path),
        "--log", str(tmp_path / "log.jsonl"), "--addr", "0.0.0.0:9001"])
    assert summary["cells"] == 1
    assert calls == {"host": "0.0.0.0", "port": 9001}

    monkeypatch.setenv("MAD_STUDY_ADDR", "127.0.0.1:7777")
    run_ok(runner, ["serve-study", "--config", str(cfg_path),
                    "--log", str(tmp_path / "log.jsonl")])
    assert calls["port"] == 7777

    result = runner.invoke(main, [
        "serve-study", "--config", str(cfg_path), "--addr", "nonsense"])
    assert result.exit_code == 2


def test_missing_input_exits_2(runner, tmp_path):
    result = runner.invoke(main, [
        "render-pose", "--poses", str(tmp_path / "missing.jsonl"),
        "--width", "8", "--height", "8", "--out", str(tmp_path / "x")])
    assert result.exit_code == 2


def test_domain_error_exits_1_with_json(runner, tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    result = runner.invoke(main, [
        "filter", "--manifest", str(empty), "--out", str(tmp_path / "o.jsonl")])
    assert result.exit_code == 1
    err = json.loads(result.stderr.strip())
    assert err["error"]["type"] == "EmptyInputError"


def test_summary_is_sorted_json(runner, tmp_path):
    summary_line = synth_scene(runner, tmp_path / "scene")
    assert list(summary_line.keys()) == sorted(summary_line.keys())
