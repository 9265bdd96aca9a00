"""Frame-sequence output shared by all renderers.

Two on-disk forms:
  * a PNG sequence ``frame_%06d.png`` for inspection, and
  * a single raw planar RGB stream for pipeline use: 16-byte header
    (4-byte magic ``MADV``, then width, height and frame count as little-endian
    uint32) followed by one R plane, G plane and B plane per frame, row-major.

All writes go through a temp file and rename.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .core import EmptyInputError, FrameImage, ShapeError

RAW_MAGIC = b"MADV"
_HEADER = struct.Struct("<4sIII")


def _save_png(frame: FrameImage, path: Path) -> Path:
    tmp = path.with_name(path.name + ".tmp")
    Image.fromarray(frame.pixels).save(tmp, format="PNG")
    os.replace(tmp, path)
    return path


def write_png_sequence(frames: Sequence[FrameImage], out_dir: str | Path,
                       jobs: int = 1) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / f"frame_{i:06d}.png" for i in range(len(frames))]
    if jobs > 1 and len(frames) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_save_png, frames, paths))
    else:
        for frame, path in zip(frames, paths):
            _save_png(frame, path)
    return paths


def read_png_sequence(in_dir: str | Path) -> list[FrameImage]:
    paths = sorted(Path(in_dir).glob("frame_*.png"))
    return [FrameImage(np.asarray(Image.open(p).convert("RGB"))) for p in paths]


def write_raw_stream(frames: Sequence[FrameImage], path: str | Path) -> None:
    if not frames:
        raise EmptyInputError("no frames to write")
    path = Path(path)
    w, h = frames[0].width, frames[0].height
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(RAW_MAGIC, w, h, len(frames)))
        for frame in frames:
            if frame.width != w or frame.height != h:
                raise ShapeError("frame dimensions vary within the stream")
            # interleaved (h, w, 3) -> planar (3, h, w)
            fh.write(np.ascontiguousarray(frame.pixels.transpose(2, 0, 1)).tobytes())
    os.replace(tmp, path)


def read_raw_stream(path: str | Path) -> list[FrameImage]:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        magic, w, h, n = _HEADER.unpack(header)
        if magic != RAW_MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        frames = []
        plane = w * h
        for _ in range(n):
            buf = fh.read(3 * plane)
            if len(buf) != 3 * plane:
                raise ValueError(f"truncated frame stream in {path}")
            arr = np.frombuffer(buf, dtype=np.uint8).reshape(3, h, w).transpose(1, 2, 0)
            frames.append(FrameImage(arr))
    return frames
