import json
import math

import numpy as np
import pytest
import scipy.linalg

from madtools.core import BBox, CameraPose, CameraTrajectory, EmptyInputError, \
    Intrinsics, ShapeError, Track
from madtools.metrics import (
    Alignment,
    FeatureSet,
    SampleSet,
    Trajectory2D,
    ade,
    apd_k,
    evaluate_scenes,
    frechet_distance,
    ground_track,
    iou,
    min_ade_k,
    object_control_score,
    read_scene_file,
    success_rate,
)


def traj(*pts):
    return Trajectory2D(points=tuple(pts))


def test_ade_unaligned():
    a = traj((0, 0), (1, 0))
    b = traj((0, 1), (1, 1))
    assert ade(a, b) == pytest.approx(1.0)
    assert ade(a, a) == 0.0


def test_ade_length_mismatch():
    with pytest.raises(ShapeError):
        ade(traj((0, 0)), traj((0, 0), (1, 1)))


def test_ade_first_pose_absorbs_rigid_motion():
    a = traj((0, 0), (1, 0), (2, 1), (3, 3))
    theta = 1.1
    c, s = math.cos(theta), math.sin(theta)
    moved = [(c * x - s * y + 5.0, s * x + c * y - 2.0) for x, y in a.points]
    b = traj(*moved)
    assert ade(a, b, align=Alignment.NONE) > 1.0
    assert ade(a, b, align=Alignment.FIRST_POSE) == pytest.approx(0.0, abs=1e-9)


def test_ade_first_pose_hand_value():
    # b heads +y; aligning rotates it onto +x, leaving a 1 m error at step 2
    a = traj((0, 0), (1, 0))
    b = traj((0, 0), (0, 2))
    assert ade(a, b, align=Alignment.FIRST_POSE) == pytest.approx(0.5)


def test_static_trajectory_heading_defaults_to_zero():
    a = traj((1, 1), (2, 1))
    b = traj((0, 0), (0, 0))  # no displacement: heading 0, pure translation
    assert ade(a, b, align=Alignment.FIRST_POSE) == pytest.approx(0.5)


def test_min_ade_k_picks_best_sample():
    gt = traj((0, 0), (1, 0), (2, 0))
    good = traj((5, 5), (5, 6), (5, 7))  # same shape, rotated + moved
    bad = traj((0, 0), (3, 0), (6, 0))
    samples = SampleSet(trajectories=(bad, good))
    assert min_ade_k(gt, samples) == pytest.approx(0.0, abs=1e-9)
    assert min_ade_k(gt, samples, align=Alignment.NONE) > 0


def test_apd_k_centimeters():
    a = traj((0, 0), (1, 0))
    b = traj((0, 1), (1, 1))
    assert apd_k(SampleSet(trajectories=(a, b))) == pytest.approx(100.0)
    c = traj((0, 2), (1, 2))
    # pairwise ades: |ab|=1, |ac|=2, |bc|=1 -> mean 4/3 m -> 400/3 cm
    assert apd_k(SampleSet(trajectories=(a, b, c))) == pytest.approx(400.0 / 3)
    with pytest.raises(EmptyInputError):
        apd_k(SampleSet(trajectories=(a,)))


def test_sample_set_rejects_ragged_lengths():
    with pytest.raises(ShapeError):
        SampleSet(trajectories=(traj((0, 0)), traj((0, 0), (1, 1))))


def test_iou_cases():
    assert iou(BBox(0, 0, 2, 2), BBox(1, 1, 3, 3)) == pytest.approx(1 / 7)
    assert iou(BBox(0, 0, 20, 20), BBox(10, 0, 30, 20)) == pytest.approx(1 / 3)
    assert iou(BBox(0, 0, 1, 1), BBox(5, 5, 6, 6)) == 0.0
    assert iou(BBox(0, 0, 4, 4), BBox(0, 0, 4, 4)) == 1.0
    # degenerate zero-area union
    assert iou(BBox(1, 1, 1, 1), BBox(1, 1, 1, 1)) == 0.0
    # touching edges intersect with zero area
    assert iou(BBox(0, 0, 1, 1), BBox(1, 0, 2, 1)) == 0.0


def test_object_control_score_zero_fills_missing_frames():
    gt = Track(0, ((0, BBox(0, 0, 2, 2)), (1, BBox(0, 0, 2, 2)),
                   (2, BBox(0, 0, 2, 2))))
    det = Track(1, ((0, BBox(0, 0, 2, 2)), (2, BBox(1, 1, 3, 3))))
    score = object_control_score(gt, det, frame_count=3)
    assert score == pytest.approx((1.0 + 0.0 + 1 / 7) / 3)
    assert object_control_score(gt, None, frame_count=3) == 0.0


def test_object_control_score_ignores_out_of_range_gt():
    gt = Track(0, ((1, BBox(0, 0, 2, 2)), (9, BBox(0, 0, 2, 2))))
    det = Track(1, ((1, BBox(0, 0, 2, 2)),))
    assert object_control_score(gt, det, frame_count=5) == pytest.approx(1.0)
    with pytest.raises(EmptyInputError):
        object_control_score(gt, det, frame_count=1)


def test_success_rate():
    assert success_rate([True, False, True, True]) == pytest.approx(0.75)
    assert success_rate(["yes", "No", " YES "]) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        success_rate(["maybe"])
    with pytest.raises(EmptyInputError):
        success_rate([])


def test_frechet_identical_sets_is_zero():
    gen = np.random.Generator(np.random.Philox(key=1))
    v = gen.normal(size=(32, 6))
    a = FeatureSet(v)
    assert frechet_distance(a, a) == pytest.approx(0.0, abs=1e-9)
    assert frechet_distance(a, a) >= 0.0


def test_frechet_1d_closed_forms():
    # means 1 vs 6, equal variance 2: distance is (1-6)^2 = 25
    a = FeatureSet(np.array([[0.0], [2.0]]))
    b = FeatureSet(np.array([[5.0], [7.0]]))
    assert frechet_distance(a, b, eps=0.0) == pytest.approx(25.0, abs=1e-9)
    # means 1 vs 2, variances 2 vs 8: 1 + (sqrt(2)-sqrt(8))^2 = 3
    c = FeatureSet(np.array([[0.0], [4.0]]))
    assert frechet_distance(a, c, eps=0.0) == pytest.approx(3.0, abs=1e-9)


def test_frechet_symmetry_and_rotation_invariance():
    gen = np.random.Generator(np.random.Philox(key=2))
    a = FeatureSet(gen.normal(size=(64, 4)))
    b = FeatureSet(gen.normal(size=(48, 4)) * 1.5 + 0.3)
    d_ab = frechet_distance(a, b)
    d_ba = frechet_distance(b, a)
    assert d_ab == pytest.approx(d_ba, rel=1e-9)
    q, _ = np.linalg.qr(gen.normal(size=(4, 4)))
    a_rot = FeatureSet(a.vectors @ q)
    b_rot = FeatureSet(b.vectors @ q)
    assert frechet_distance(a_rot, b_rot) == pytest.approx(d_ab, rel=1e-6)


def test_frechet_matches_scipy_sqrtm_reference():
    gen = np.random.Generator(np.random.Philox(key=3))
    va = gen.normal(size=(100, 5)) @ gen.normal(size=(5, 5)) + gen.normal(size=5)
    vb = gen.normal(size=(80, 5)) @ gen.normal(size=(5, 5)) - 0.5
    mu_a, mu_b = va.mean(axis=0), vb.mean(axis=0)
    ca = np.cov(va, rowvar=False)
    cb = np.cov(vb, rowvar=False)
    cross = scipy.linalg.sqrtm(ca @ cb)
    if np.iscomplexobj(cross):
        cross = cross.real
    ref = float(np.sum((mu_a - mu_b) ** 2)
                + np.trace(ca + cb - 2.0 * cross))
    got = frechet_distance(FeatureSet(va), FeatureSet(vb), eps=0.0)
    assert got == pytest.approx(ref, rel=1e-8)


def test_frechet_diagonal_gaussians_dimensionwise():
    # independent dims: distance is the sum of per-dimension 1D closed forms
    gen = np.random.Generator(np.random.Philox(key=9))
    mu_a, mu_b = np.array([0.0, 1.0, -2.0]), np.array([3.0, 1.0, 0.5])
    sd_a, sd_b = np.array([1.0, 2.0, 0.5]), np.array([1.5, 1.0, 2.5])
    va = gen.normal(size=(200_000, 3)) * sd_a + mu_a
    vb = gen.normal(size=(200_000, 3)) * sd_b + mu_b
    expected = float(np.sum((mu_a - mu_b) ** 2 + (sd_a - sd_b) ** 2))
    got = frechet_distance(FeatureSet(va), FeatureSet(vb), eps=0.0)
    assert got == pytest.approx(expected, rel=0.02)


def test_min_ade_k_monotone_in_k():
    gen = np.random.Generator(np.random.Philox(key=12))
    gt = traj(*[tuple(p) for p in gen.normal(size=(8, 2))])
    pool = [traj(*[tuple(p) for p in gen.normal(size=(8, 2))]) for _ in range(6)]
    prev = math.inf
    for k in range(1, 7):
        cur = min_ade_k(gt, SampleSet(trajectories=tuple(pool[:k])))
        assert cur <= prev + 1e-12
        prev = cur


def test_apd_translation_invariant():
    gen = np.random.Generator(np.random.Philox(key=13))
    base = [gen.normal(size=(6, 2)) for _ in range(4)]
    samples = SampleSet(trajectories=tuple(
        traj(*[tuple(p) for p in arr]) for arr in base))
    shifted = SampleSet(trajectories=tuple(
        traj(*[tuple(p + np.array([17.0, -4.0])) for p in arr]) for arr in base))
    assert apd_k(shifted) == pytest.approx(apd_k(samples), rel=1e-12)


def test_iou_symmetric_and_bounded():
    gen = np.random.Generator(np.random.Philox(key=14))
    for _ in range(200):
        x0, y0, x2, y2 = gen.uniform(0, 50, size=4)
        a = BBox(min(x0, x2), min(y0, y2), max(x0, x2), max(y0, y2))
        u0, v0, u2, v2 = gen.uniform(0, 50, size=4)
        b = BBox(min(u0, u2), min(v0, v2), max(u0, u2), max(v0, v2))
        ab = iou(a, b)
        assert ab == iou(b, a)
        assert 0.0 <= ab <= 1.0


def test_frechet_dim_mismatch():
    with pytest.raises(ShapeError):
        frechet_distance(FeatureSet(np.zeros((4, 2))), FeatureSet(np.zeros((4, 3))))
    with pytest.raises(ShapeError):
        FeatureSet(np.zeros((1, 3)))


def test_ground_track_drops_altitude():
    intr = Intrinsics(horizontal_fov_deg=90, width=64, height=64)
    poses = tuple(CameraPose(position=(float(i), -1.5, 2.0 * i),
                             orientation=(1, 0, 0, 0), timestamp=float(i))
                  for i in range(3))
    gt = ground_track(CameraTrajectory(poses=poses, intrinsics=intr))
    assert gt.points == ((0.0, 0.0), (1.0, 2.0), (2.0, 4.0))


def test_scene_file_and_evaluation(tmp_path):
    scenes = [
        {"scene": "s0", "gt": [[0, 0], [1, 0]],
         "samples": [[[0, 0], [1, 0]], [[0, 1], [1, 1]]]},
        {"scene": "s1", "gt": [[0, 0], [0, 1]],
         "samples": [[[5, 5], [5, 6]]]},
    ]
    path = tmp_path / "scenes.jsonl"
    path.write_text("\n".join(json.dumps(s) for s in scenes) + "\n")
    loaded = read_scene_file(path)
    assert [s["scene"] for s in loaded] == ["s0", "s1"]
    report = evaluate_scenes(loaded)
    assert report["aggregate"]["count"] == 2
    # s0 contains the gt itself -> min_ade 0; s1 sample is gt translated -> 0
    assert report["aggregate"]["min_ade_mean"] == pytest.approx(0.0, abs=1e-9)
    assert report["scenes"][0]["apd"] == pytest.approx(100.0)
    assert report["scenes"][1]["apd"] is None
    assert report["aggregate"]["apd_mean"] == pytest.approx(100.0)


def test_read_scene_file_empty(tmp_path):
    p = tmp_path / "none.jsonl"
    p.write_text("\n")
    with pytest.raises(EmptyInputError):
        read_scene_file(p)
