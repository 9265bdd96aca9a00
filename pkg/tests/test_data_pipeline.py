import pytest

from madtools.core import (
    AgentClass,
    AgentSkeleton,
    EmptyInputError,
    Keypoint,
    PoseFrame,
    PoseVideo,
)
from madtools.data_pipeline import (
    ClipManifest,
    ClipRecord,
    Split,
    VideoMeta,
    assign_splits,
    attach_captions,
    filter_clips,
    object_count_score,
    read_manifest,
    segment_clips,
    slice_clip,
    write_manifest,
)


def clip(cid, score=0.0, split=Split.TRAIN, video_id=None):
    return ClipRecord(clip_id=cid, video_id=video_id or cid.split(":")[0],
                      start_frame=0, length=120, object_score=score, split=split)


def test_segment_counts():
    # stride = 120 - 72 = 48; count = floor((fc - 120) / 48) + 1 when fc >= 120
    cases = {119: 0, 120: 1, 167: 1, 168: 2, 1000: 19}
    for fc, expected in cases.items():
        clips = segment_clips(VideoMeta("v", fc))
        assert len(clips) == expected, fc


def test_segment_starts_and_inheritance():
    clips = segment_clips(VideoMeta("vid7", 250, split=Split.VAL))
    assert [c.start_frame for c in clips] == [0, 48, 96]
    assert all(c.length == 120 for c in clips)
    assert all(c.video_id == "vid7" for c in clips)
    assert all(c.split is Split.VAL for c in clips)
    assert [c.clip_id for c in clips] == ["vid7:000000", "vid7:000048", "vid7:000096"]


def test_segment_custom_stride():
    clips = segment_clips(VideoMeta("v", 100), clip_len=30, overlap=20)
    assert [c.start_frame for c in clips] == [0, 10, 20, 30, 40, 50, 60, 70]


def test_segment_validation():
    with pytest.raises(ValueError):
        segment_clips(VideoMeta("v", 100), clip_len=30, overlap=30)
    with pytest.raises(ValueError):
        segment_clips(VideoMeta("v", 100), clip_len=0, overlap=-1)


def marker_agent(i):
    return AgentSkeleton(agent_id=f"m{i}", agent_class=AgentClass.PEDESTRIAN,
                         keypoints=(Keypoint("a", float(i), 0.0),
                                    Keypoint("b", float(i), 1.0)))


def test_slice_clip_reindexes_from_zero():
    frames = tuple(PoseFrame(i, (marker_agent(i),)) for i in range(10))
    video = PoseVideo(width=8, height=8, fps=24.0, frames=frames)
    sliced = slice_clip(video, 3, 4)
    assert len(sliced.frames) == 4
    assert [f.frame_index for f in sliced.frames] == [0, 1, 2, 3]
    # agents come from source frames 3..6
    assert [f.agents[0].agent_id for f in sliced.frames] == ["m3", "m4", "m5", "m6"]


def test_object_count_score_excludes_lanes():
    lane = AgentSkeleton(agent_id="lane", agent_class=AgentClass.LANE_LINE,
                         keypoints=(Keypoint("p0", 0, 0), Keypoint("p1", 1, 1)))
    f0 = PoseFrame(0, (marker_agent(0), marker_agent(1), lane))
    f1 = PoseFrame(1, (marker_agent(2),))
    video = PoseVideo(width=8, height=8, fps=24.0, frames=(f0, f1))
    assert object_count_score(video) == pytest.approx(1.5)
    with pytest.raises(EmptyInputError):
        object_count_score(PoseVideo(width=8, height=8, fps=24.0, frames=()))


def test_filter_keeps_top_half_rounded_up():
    clips = [clip(f"v:{i}", score=s) for i, s in enumerate([5, 1, 4, 2, 3])]
    kept = filter_clips(clips)
    assert [c.clip_id for c in kept] == ["v:0", "v:2", "v:4"]  # input order kept
    assert len(filter_clips(clips[:4])) == 2
    assert filter_clips([]) == []
    assert len(filter_clips(clips[:1])) == 1


def test_filter_breaks_ties_by_clip_id():
    clips = [clip(cid, score=1.0) for cid in ["v:d", "v:a", "v:c", "v:b"]]
    kept = filter_clips(clips)
    assert {c.clip_id for c in kept} == {"v:a", "v:b"}


def test_manifest_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        ClipManifest(records=(clip("v:0"), clip("v:0")))


def make_manifest():
    records = []
    for vid in range(6):
        split = Split.TRAIN if vid < 4 else Split.VAL
        for c in segment_clips(VideoMeta(f"v{vid}", 400, split=split)):
            records.append(c)
    return ClipManifest(records=tuple(records), config={"source": "unit"})


def test_assign_splits_quotas_and_no_leakage():
    manifest = make_manifest()
    out = assign_splits(manifest, train_quota=10, val_quota=5, seed=3)
    train = [r for r in out.records if r.split is Split.TRAIN]
    val = [r for r in out.records if r.split is Split.VAL]
    assert len(train) == 10 and len(val) == 5
    # a video id never appears on both sides
    assert not ({r.video_id for r in train} & {r.video_id for r in val})
    # manifest order preserved
    ids = [r.clip_id for r in out.records]
    source_order = [r.clip_id for r in manifest.records if r.clip_id in set(ids)]
    assert ids == source_order
    assert out.config["split_sampling"] == {"train_quota": 10, "val_quota": 5, "seed": 3}


def test_assign_splits_deterministic_and_seed_sensitive():
    manifest = make_manifest()
    a = assign_splits(manifest, 8, 4, seed=1)
    b = assign_splits(manifest, 8, 4, seed=1)
    c = assign_splits(manifest, 8, 4, seed=2)
    assert [r.clip_id for r in a.records] == [r.clip_id for r in b.records]
    assert [r.clip_id for r in a.records] != [r.clip_id for r in c.records]


def test_assign_splits_quota_capped_at_pool():
    manifest = make_manifest()
    val_pool = sum(1 for r in manifest.records if r.split is Split.VAL)
    out = assign_splits(manifest, train_quota=0, val_quota=10_000, seed=0)
    assert sum(1 for r in out.records if r.split is Split.VAL) == val_pool
    assert sum(1 for r in out.records if r.split is Split.TRAIN) == 0


def test_attach_captions(caplog):
    manifest = ClipManifest(records=(clip("v:0"), clip("v:1"), clip("v:2")))
    with caplog.at_level("WARNING", logger="madtools.pipeline"):
        out = attach_captions(manifest, {"v:0": "a car", "v:9": "ghost"})
    assert out.records[0].caption == "a car"
    assert out.records[1].caption == ""
    assert out.config["captions"]["provided"] == 2
    assert out.config["captions"]["applied"] == 1
    assert out.config["captions"]["coverage"] == pytest.approx(1 / 3)
    assert any("v:9" in r.message for r in caplog.records)


def test_manifest_roundtrip(tmp_path):
    manifest = attach_captions(make_manifest(), {"v0:000000": "dusk traffic"})
    path = tmp_path / "clips.jsonl"
    write_manifest(manifest, path)
    back = read_manifest(path)
    assert back.records == manifest.records
    assert back.config == manifest.config
    # header line first, then one record per line
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + len(manifest.records)
    assert "config" in lines[0]


def test_read_manifest_empty_file(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    with pytest.raises(EmptyInputError):
        read_manifest(p)
