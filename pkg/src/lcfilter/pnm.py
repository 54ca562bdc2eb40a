"""Minimal netpbm I/O: P2/P5 grayscale in and out, P6 color out."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class PNMError(ValueError):
    pass


def _tokens(data: bytes):
    """Yield (token, end_offset) pairs from a netpbm header, skipping comments."""
    i, n = 0, len(data)
    while i < n:
        c = data[i:i + 1]
        if c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    toks = _tokens(data)
    try:
        magic, _ = next(toks)
        width, _ = next(toks)
        height, _ = next(toks)
        maxval, end = next(toks)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise PNMError(f"{path}: malformed PGM header") from exc
    if not 0 < maxval < 65536:
        raise PNMError(f"{path}: bad maxval {maxval}")
    if magic == b"P5":
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        raw = data[end + 1:]
        count = width * height
        if len(raw) < count * np.dtype(dtype).itemsize:
            raise PNMError(f"{path}: truncated raster")
        img = np.frombuffer(raw, dtype=dtype, count=count).reshape(height, width)
    elif magic == b"P2":
        vals = [int(t) for t, _ in toks]
        if len(vals) < width * height:
            raise PNMError(f"{path}: truncated raster")
        img = np.array(vals[: width * height], dtype=np.int64).reshape(height, width)
    else:
        raise PNMError(f"{path}: unsupported format {magic!r}")
    if maxval != 255:
        img = np.round(img.astype(np.float64) * 255.0 / maxval)
    return img.astype(np.uint8)


def write_pgm(path, image: np.ndarray, binary: bool = True) -> None:
    img = np.asarray(image, dtype=np.uint8)
    h, w = img.shape
    if binary:
        Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())
    else:
        rows = "\n".join(" ".join(str(v) for v in row) for row in img)
        Path(path).write_text(f"P2\n{w} {h}\n255\n{rows}\n")


def write_ppm(path, image: np.ndarray) -> None:
    img = np.asarray(image, dtype=np.uint8)
    h, w, _ = img.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + img.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    toks = _tokens(data)
    magic, _ = next(toks)
    if magic != b"P6":
        raise PNMError(f"{path}: not a binary PPM")
    w, _ = next(toks)
    h, _ = next(toks)
    _, end = next(toks)
    w, h = int(w), int(h)
    return np.frombuffer(data[end + 1:], dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)
