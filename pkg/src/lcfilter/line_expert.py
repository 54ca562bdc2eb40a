"""Line expert: drop edges inside ignorance regions, group the rest by collectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import Collector, EdgePoint, IgnoreRegion, inside_ignore_region

FRESH = -1


@dataclass
class EdgeGroup:
    # index into the collector list, or FRESH for groups seeded this frame
    collector: int
    center: tuple
    boundary_size: float
    members: list = field(default_factory=list)


@dataclass
class GroupedEdges:
    groups: list = field(default_factory=list)

    def __len__(self):
        return sum(len(g.members) for g in self.groups)

    def edges(self) -> list:
        return [e for g in self.groups for e in g.members]

    def correlation(self) -> dict:
        """Map edge identity to the member count of its group."""
        return {id(e): len(g.members) for g in self.groups for e in g.members}


def cull_edges(edges, regions, frame_id: int) -> list:
    active = [r for r in regions if r.is_active(frame_id)]
    if not active:
        return list(edges)
    return [e for e in edges if not any(inside_ignore_region(e.location, r) for r in active)]


def _nearest_collector(edge: EdgePoint, collectors) -> int | None:
    best, best_d = None, math.inf
    for i, c in enumerate(collectors):
        d = math.hypot(c.location.x - edge.location.x, c.location.y - edge.location.y)
        if d < c.boundary_size and d < best_d:
            best, best_d = i, d
    return best


def group_edges(edges, collectors, default_bs: float) -> GroupedEdges:
    if default_bs <= 0:
        raise ValueError("default boundary size must be positive")
    collectors = list(collectors)
    by_collector = {}
    fresh: list[EdgeGroup] = []
    for e in edges:
        i = _nearest_collector(e, collectors)
        if i is not None:
            if i not in by_collector:
                c = collectors[i]
                by_collector[i] = EdgeGroup(i, tuple(c.location), c.boundary_size)
            by_collector[i].members.append(e)
            continue
        for g in fresh:
            if math.hypot(g.center[0] - e.location.x, g.center[1] - e.location.y) < default_bs:
                g.members.append(e)
                break
        else:
            fresh.append(EdgeGroup(FRESH, tuple(e.location), default_bs, [e]))
    groups = [by_collector[i] for i in sorted(by_collector)] + fresh
    return GroupedEdges(groups)


def run_line_expert(edges, collectors, regions, frame_id: int, default_bs: float) -> tuple:
    """Returns ``(grouped, culled)`` where ``culled`` lists the omitted edges."""
    kept = cull_edges(edges, regions, frame_id)
    kept_ids = {id(e) for e in kept}
    culled = [e for e in edges if id(e) not in kept_ids]
    return group_edges(kept, collectors, default_bs), culled
