import struct

import numpy as np
import pytest

from madtools.core import EmptyInputError, FrameImage, ShapeError
from madtools.frames_io import (
    RAW_MAGIC,
    read_png_sequence,
    read_raw_stream,
    write_png_sequence,
    write_raw_stream,
)


def frames_of(n=3, w=6, h=4, seed=0):
    gen = np.random.Generator(np.random.Philox(key=seed))
    return [FrameImage(gen.integers(0, 256, size=(h, w, 3), dtype=np.uint8))
            for _ in range(n)]


def test_png_sequence_roundtrip(tmp_path):
    frames = frames_of(4)
    paths = write_png_sequence(frames, tmp_path / "seq")
    assert [p.name for p in paths] == [f"frame_{i:06d}.png" for i in range(4)]
    back = read_png_sequence(tmp_path / "seq")
    assert len(back) == 4
    for a, b in zip(frames, back):
        assert np.array_equal(a.pixels, b.pixels)
    assert not list((tmp_path / "seq").glob("*.tmp"))


def test_png_sequence_parallel_writes_match(tmp_path):
    frames = frames_of(8, seed=2)
    write_png_sequence(frames, tmp_path / "a", jobs=1)
    write_png_sequence(frames, tmp_path / "b", jobs=4)
    a = read_png_sequence(tmp_path / "a")
    b = read_png_sequence(tmp_path / "b")
    assert all(np.array_equal(x.pixels, y.pixels) for x, y in zip(a, b))


def test_raw_stream_roundtrip(tmp_path):
    frames = frames_of(5, w=7, h=3, seed=3)
    path = tmp_path / "stream.madv"
    write_raw_stream(frames, path)
    back = read_raw_stream(path)
    assert len(back) == 5
    for a, b in zip(frames, back):
        assert np.array_equal(a.pixels, b.pixels)


def test_raw_stream_header_and_planar_layout(tmp_path):
    px = np.zeros((2, 2, 3), dtype=np.uint8)
    px[..., 0] = [[1, 2], [3, 4]]
    px[..., 1] = [[5, 6], [7, 8]]
    px[..., 2] = [[9, 10], [11, 12]]
    path = tmp_path / "one.madv"
    write_raw_stream([FrameImage(px)], path)
    blob = path.read_bytes()
    magic, w, h, n = struct.unpack("<4sIII", blob[:16])
    assert (magic, w, h, n) == (RAW_MAGIC, 2, 2, 1)
    assert list(blob[16:]) == [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]


def test_raw_stream_rejects_empty_and_ragged(tmp_path):
    with pytest.raises(EmptyInputError):
        write_raw_stream([], tmp_path / "x.madv")
    frames = [FrameImage(np.zeros((2, 2, 3), dtype=np.uint8)),
              FrameImage(np.zeros((2, 3, 3), dtype=np.uint8))]
    with pytest.raises(ShapeError):
        write_raw_stream(frames, tmp_path / "y.madv")


def test_raw_stream_bad_magic_and_truncation(tmp_path):
    good = tmp_path / "good.madv"
    write_raw_stream(frames_of(2), good)
    bad = tmp_path / "bad.madv"
    bad.write_bytes(b"NOPE" + good.read_bytes()[4:])
    with pytest.raises(ValueError):
        read_raw_stream(bad)
    short = tmp_path / "short.madv"
    short.write_bytes(good.read_bytes()[:-5])
    with pytest.raises(ValueError):
        read_raw_stream(short)
