"""Independent brute-force references used by the equivalence tests.

These are written from the definitions with plain loops and share no code
with the package beyond its plain data types.
"""

import math
import random

from lcfilter.geometry import Collector, EdgePoint, IgnoreRegion, PixelPoint, RegionType

RING16 = [(0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
          (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3)]  # (dx, dy)


def region_covers(x, y, region):
    if region.region_type == RegionType.NONE:
        return False
    lx, ly = region.location
    if region.region_type == RegionType.CIRCLE:
        return (x - lx) ** 2 + (y - ly) ** 2 <= region.radius ** 2
    ry = region.radius if region.radius_y is None else region.radius_y
    return abs(x - lx) <= region.radius and abs(y - ly) <= ry


def line_expert_reference(edges, collectors, regions, frame_id, default_bs):
    """Returns (culled, groups) with groups as (collector index or -1, [edge indices])."""
    survivors, culled = [], []
    for i, e in enumerate(edges):
        hit = False
        for r in regions:
            if r.expires_at_frame >= frame_id and region_covers(e.location.x, e.location.y, r):
                hit = True
        (culled if hit else survivors).append(i)

    by_collector = {}
    fresh = []  # [center_x, center_y, [indices]]
    for i in survivors:
        x, y = edges[i].location
        best, best_d = None, None
        for k, c in enumerate(collectors):
            d = math.sqrt((c.location.x - x) ** 2 + (c.location.y - y) ** 2)
            if d < c.boundary_size and (best is None or d < best_d):
                best, best_d = k, d
        if best is not None:
            by_collector.setdefault(best, []).append(i)
            continue
        placed = False
        for g in fresh:
            if math.sqrt((g[0] - x) ** 2 + (g[1] - y) ** 2) < default_bs:
                g[2].append(i)
                placed = True
                break
        if not placed:
            fresh.append([x, y, [i]])
    groups = [(k, by_collector[k]) for k in sorted(by_collector)] + [(-1, g[2]) for g in fresh]
    return culled, groups


def random_line_frame(rng: random.Random, n_edges=200, max_regions=5, max_collectors=8,
                      width=640, height=480, frame_id=5):
    edges = [EdgePoint(PixelPoint(rng.uniform(0, width), rng.uniform(0, height)), frame_id, 0.0)
             for _ in range(n_edges)]
    regions = []
    for _ in range(rng.randint(0, max_regions)):
        kind = rng.choice([RegionType.NONE, RegionType.CIRCLE, RegionType.RECTANGLE])
        loc = PixelPoint(rng.uniform(0, width), rng.uniform(0, height))
        regions.append(IgnoreRegion(loc, rng.uniform(5, 80), kind,
                                    expires_at_frame=frame_id + rng.randint(-2, 3),
                                    radius_y=rng.uniform(5, 80) if kind == RegionType.RECTANGLE else None))
    collectors = [Collector(PixelPoint(rng.uniform(0, width), rng.uniform(0, height)), rng.uniform(10, 60))
                  for _ in range(rng.randint(0, max_collectors))]
    return edges, collectors, regions


def fast_reference(img, threshold, nms=True):
    """Pixel loop segment test; returns sorted [(x, y)]."""
    h, w = len(img), len(img[0])
    score = {}
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            c = int(img[y][x])
            ring = [int(img[y + dy][x + dx]) for dx, dy in RING16]
            states = [1 if p > c + threshold else (-1 if p < c - threshold else 0) for p in ring]
            corner = False
            for want in (1, -1):
                run = 0
                for s in states + states:
                    run = run + 1 if s == want else 0
                    if run >= 9:
                        corner = True
            if corner:
                bright = sum(p - c - threshold for p, s in zip(ring, states) if s == 1)
                dark = sum(c - threshold - p for p, s in zip(ring, states) if s == -1)
                score[(x, y)] = max(bright, dark)
    if not nms:
        return sorted(score, key=lambda p: (p[1], p[0]))
    kept = []
    for (x, y), s in score.items():
        ok = True
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if (dx, dy) == (0, 0) or (x + dx, y + dy) not in score:
                    continue
                t = score[(x + dx, y + dy)]
                precedes = (y + dy, x + dx) < (y, x)
                if t > s or (t == s and precedes):
                    ok = False
        if ok:
            kept.append((x, y))
    return sorted(kept, key=lambda p: (p[1], p[0]))
