"""PPM overlays of one filter frame.

Kept edges are green, culled edges red. Normal edge estimates are small cyan
marks and rebel edge estimates magenta. Normal circles are drawn solid white,
rebel circles dashed yellow, ignorance regions dark red.
"""

from __future__ import annotations

import math

import numpy as np

from .pnm import write_ppm

GREEN = (0, 220, 0)
RED = (230, 30, 30)
CYAN = (0, 200, 255)
MAGENTA = (255, 0, 255)
WHITE = (255, 255, 255)
YELLOW = (255, 220, 0)
DARK_RED = (120, 0, 0)


def _dot(img, x, y, color, half=1):
    h, w = img.shape[:2]
    xi, yi = int(round(x)), int(round(y))
    x0, x1 = max(0, xi - half), min(w, xi + half + 1)
    y0, y1 = max(0, yi - half), min(h, yi + half + 1)
    if x0 < x1 and y0 < y1:
        img[y0:y1, x0:x1] = color


def _circle(img, cx, cy, r, color, dashed=False):
    h, w = img.shape[:2]
    n = max(16, int(2 * math.pi * r))
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    xs = np.rint(cx + r * np.cos(t)).astype(int)
    ys = np.rint(cy + r * np.sin(t)).astype(int)
    keep = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    if dashed:
        keep &= (np.arange(n) // 4) % 2 == 0
    img[ys[keep], xs[keep]] = color


def overlay(result, state, frame, background=None) -> np.ndarray:
    """RGB overlay for a ``FrameResult`` and the filter state after that frame."""
    if background is None:
        img = np.zeros((frame.height, frame.width, 3), dtype=np.uint8)
    else:
        bg = np.asarray(background, dtype=np.uint8)
        # dim the image so the marks stand out
        img = np.repeat((bg // 2)[:, :, None], 3, axis=2) if bg.ndim == 2 else bg // 2
    for r in state.regions:
        _circle(img, r.location.x, r.location.y, r.radius, DARK_RED)
    for e in state.edges.normals:
        _dot(img, e.location.x, e.location.y, CYAN, 1)
    for e in state.edges.rebels:
        _dot(img, e.location.x, e.location.y, MAGENTA, 2)
    for c in state.circles.normals:
        _circle(img, c.center.x, c.center.y, c.radius, WHITE)
    for c in state.circles.rebels:
        _circle(img, c.center.x, c.center.y, c.radius, YELLOW, dashed=True)
    for e in result.grouped.edges():
        _dot(img, e.location.x, e.location.y, GREEN, 0)
    for e in result.culled:
        _dot(img, e.location.x, e.location.y, RED, 0)
    return img


def write_overlay(path, result, state, frame, background=None) -> None:
    write_ppm(path, overlay(result, state, frame, background))
