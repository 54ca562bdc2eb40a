"""FAST-9 segment-test corner detector over 8-bit grayscale images."""

from __future__ import annotations

import numpy as np

from .geometry import EdgePoint, PixelPoint

# Bresenham circle of radius 3, clockwise from 12 o'clock, as (dy, dx)
RING = (
    (-3, 0), (-3, 1), (-2, 2), (-1, 3), (0, 3), (1, 3), (2, 2), (3, 1),
    (3, 0), (3, -1), (2, -2), (1, -3), (0, -3), (-1, -3), (-2, -2), (-3, -1),
)
ARC = 9
MARGIN = 3


class ImageTooSmall(ValueError):
    pass


def _has_arc(mask: np.ndarray, arc: int = ARC) -> np.ndarray:
    """mask: (16, H, W) booleans; true where ``arc`` contiguous ring entries are set."""
    wrapped = np.concatenate([mask, mask[: arc - 1]], axis=0).astype(np.int32)
    csum = np.concatenate([np.zeros_like(wrapped[:1]), np.cumsum(wrapped, axis=0)], axis=0)
    runs = csum[arc:] - csum[:-arc]
    return (runs[:16] == arc).any(axis=0)


def segment_test(image: np.ndarray, threshold: int) -> tuple:
    """Return ``(corner_mask, score)`` for every pixel of ``image``.

    Border pixels within ``MARGIN`` of the edge are never corners. The score is
    the larger of the summed exceedances of the bright and the dark ring pixels.
    """
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    h, w = img.shape
    if h < 2 * MARGIN + 1 or w < 2 * MARGIN + 1:
        raise ImageTooSmall(f"image {w}x{h} smaller than {2 * MARGIN + 1}x{2 * MARGIN + 1}")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    img = img.astype(np.int32)
    ih, iw = h - 2 * MARGIN, w - 2 * MARGIN
    center = img[MARGIN:MARGIN + ih, MARGIN:MARGIN + iw]
    ring = np.stack([img[MARGIN + dy:MARGIN + dy + ih, MARGIN + dx:MARGIN + dx + iw] for dy, dx in RING])
    diff = ring - center[None]
    bright = diff > threshold
    dark = diff < -threshold
    inner = _has_arc(bright) | _has_arc(dark)
    exceed = np.abs(diff) - threshold
    inner_score = np.maximum(np.where(bright, exceed, 0).sum(axis=0), np.where(dark, exceed, 0).sum(axis=0))

    mask = np.zeros((h, w), dtype=bool)
    score = np.zeros((h, w), dtype=np.int64)
    mask[MARGIN:MARGIN + ih, MARGIN:MARGIN + iw] = inner
    score[MARGIN:MARGIN + ih, MARGIN:MARGIN + iw] = np.where(inner, inner_score, 0)
    return mask, score


def non_max_suppression(mask: np.ndarray, score: np.ndarray) -> np.ndarray:
    """Keep corners that beat every corner in their 3x3 neighborhood.

    Equal scores are resolved in raster order: the earlier pixel wins.
    """
    h, w = mask.shape
    s = np.where(mask, score, -1).astype(np.int64)
    padded = np.full((h + 2, w + 2), -1, dtype=np.int64)
    padded[1:-1, 1:-1] = s
    keep = mask.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            nb = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            earlier = dy < 0 or (dy == 0 and dx < 0)
            # a neighbor that precedes in raster order also wins ties
            keep &= (s > nb) | ((s == nb) & (not earlier) & (nb >= 0)) | (nb < 0)
    return keep


def detect_fast9(image, threshold: int = 25, nms: bool = True, frame_id: int = 0,
                 timestamp: float = 0.0) -> list:
    """Corners sorted by row then column."""
    mask, score = segment_test(image, threshold)
    if nms:
        mask = non_max_suppression(mask, score)
    ys, xs = np.nonzero(mask)
    return [EdgePoint(PixelPoint(float(x), float(y)), frame_id, timestamp) for y, x in zip(ys, xs)]
