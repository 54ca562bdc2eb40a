"""Circle estimation stage of the Circle expert.

Groups tracked edges by flow angle and speed, matches the groups against
normal and rebel circles, and produces the ignorance regions and collectors
fed back to the Line expert.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .edge_tracker import COAST_DELTA, LogEntry
from .geometry import (
    Collector,
    EgoState,
    IgnoreRegion,
    PixelPoint,
    RegionType,
    TrustThresholds,
    angle_difference,
    angle_within,
    circular_mean,
    inside_ignore_region,
    trust_weighted,
)

ALIGNED_DELTA = 1.0
DEVIATED_DELTA = -1.0


@dataclass
class NormalCircle:
    id: int
    center: PixelPoint
    radius: float
    trust: float
    angle: float
    speed: float


@dataclass
class RebelCircle:
    id: int
    center: PixelPoint
    radius: float
    trust: float
    angle: float
    speed: float
    deviation_level: float = 0.0


class Match(Enum):
    ALIGNED = "Aligned"
    DEVIATED = "Deviated"
    NONE = "NoMatch"


@dataclass
class CircleTrackerState:
    normals: list = field(default_factory=list)
    rebels: list = field(default_factory=list)
    next_id: int = 0

    def allocate_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i


@dataclass
class Feedback:
    regions: list
    collectors: list


@dataclass
class CircleStepReport:
    log: list = field(default_factory=list)
    feedback: Feedback | None = None
    new_normals: int = 0
    new_rebels: int = 0


def _positions(edges) -> np.ndarray:
    return np.array([[e.location.x, e.location.y] for e in edges], dtype=float).reshape(-1, 2)


def _greedy_groups(edges, joins, reach: float) -> list:
    """Highest-trust unassigned edge seeds a group; ``joins(ref, other)`` admits members."""
    order = sorted(range(len(edges)), key=lambda i: (-edges[i].trust, edges[i].id))
    pos = _positions(edges)
    assigned = np.zeros(len(edges), dtype=bool)
    groups = []
    for i in order:
        if assigned[i]:
            continue
        ref = edges[i]
        assigned[i] = True
        members = [ref]
        d = np.hypot(pos[:, 0] - pos[i, 0], pos[:, 1] - pos[i, 1])
        for j in order:
            if assigned[j] or d[j] >= reach:
                continue
            if joins(ref, edges[j]):
                assigned[j] = True
                members.append(edges[j])
        groups.append(members)
    return groups


def group_normal_edges(edges, eps_beta: float, eps_v: float, ego: EgoState, reach: float = 50.0) -> list:
    # a seed violating the speed bound still forms its own group
    return _greedy_groups(list(edges), _normal_joins(eps_beta, eps_v, ego), reach)


def group_rebel_edges(edges, eps_beta: float, eps_v: float, ego: EgoState, reach: float = 50.0) -> list:
    return _greedy_groups(list(edges), _rebel_joins(eps_beta, eps_v, ego), reach)


def involvement(group, center: PixelPoint, radius: float) -> float:
    pos = _positions(group)
    inside = np.hypot(pos[:, 0] - center.x, pos[:, 1] - center.y) < radius
    return float(inside.mean()) if len(group) else 0.0


def group_mean_angle(group, rebel: bool = False) -> float:
    if rebel:
        return circular_mean(e.angle + e.deviation_level for e in group)
    return circular_mean(e.angle for e in group)


def group_mean_speed(group) -> float:
    return abs(sum(e.speed for e in group)) / len(group)


def match_normal_circle(group, circle: NormalCircle, eps_beta: float, eps_v: float,
                        pct_cte: float) -> Match:
    if not group:
        raise ValueError("cannot match an empty group")
    if involvement(group, circle.center, circle.radius) < pct_cte:
        return Match.NONE
    aligned = (angle_within(circle.angle, group_mean_angle(group), eps_beta)
               and group_mean_speed(group) <= eps_v * circle.speed)
    return Match.ALIGNED if aligned else Match.DEVIATED


def match_rebel_circle(group, circle: RebelCircle, eps_beta: float, eps_v: float,
                       pct_cte: float, ego: EgoState) -> Match:
    if not group:
        raise ValueError("cannot match an empty group")
    if involvement(group, circle.center, circle.radius) < pct_cte:
        return Match.NONE
    aligned = (angle_within(circle.angle, group_mean_angle(group, rebel=True), eps_beta)
               and group_mean_speed(group) <= circle.speed + eps_v * ego.speed)
    return Match.ALIGNED if aligned else Match.DEVIATED


def _spread(group, center: PixelPoint) -> float:
    """Radius of the uniform disc with the group's RMS distance to ``center``.

    The RMS distance alone encloses only about half of a uniform patch, which
    sits right on the involvement gate.
    """
    pos = _positions(group)
    return math.sqrt(2.0) * float(np.sqrt(np.mean((pos[:, 0] - center.x) ** 2 + (pos[:, 1] - center.y) ** 2)))


def _centroid(group) -> PixelPoint:
    pos = _positions(group)
    return PixelPoint(float(pos[:, 0].mean()), float(pos[:, 1].mean()))


def _blend_angle(prior: float, target: float, trust: float, critical: float) -> float:
    w = trust - critical
    return (prior + angle_difference(target, prior) / (w + 1.0)) % 360.0


def update_normal_circle(circle, group, match: Match, ego: EgoState | None,
                         trust: TrustThresholds = TrustThresholds(), min_radius: float = 12.5,
                         rebel: bool = False):
    """Blend a matched circle toward its group; works for normal and rebel circles."""
    if match is Match.NONE:
        raise ValueError("update requires a matched group")
    tr, cr = circle.trust, trust.critical
    centroid = _centroid(group)
    center = PixelPoint(trust_weighted(circle.center.x, centroid.x, tr, cr),
                        trust_weighted(circle.center.y, centroid.y, tr, cr))
    rms = max(_spread(group, center), min_radius)
    delta = ALIGNED_DELTA if match is Match.ALIGNED else DEVIATED_DELTA
    return dataclasses.replace(
        circle,
        center=center,
        radius=trust_weighted(circle.radius, rms, tr, cr),
        angle=_blend_angle(circle.angle, group_mean_angle(group, rebel), tr, cr),
        speed=trust_weighted(circle.speed, group_mean_speed(group), tr, cr),
        trust=trust.clamp(tr + delta),
    )


def seed_circle(group, circle_id: int, trust: TrustThresholds, min_radius: float, rebel: bool = False):
    center = _centroid(group)
    kw = dict(
        id=circle_id,
        center=center,
        radius=max(_spread(group, center), min_radius),
        trust=trust.initial,
        angle=group_mean_angle(group, rebel),
        speed=group_mean_speed(group),
    )
    if rebel:
        return RebelCircle(deviation_level=float(np.mean([e.deviation_level for e in group])), **kw)
    return NormalCircle(**kw)


def _match_and_update(circles, edges, joins, grouper, matcher, trust, min_radius, rebel, reach,
                      state, log, frame_id, kind, regions=()):
    """Match circles in descending trust order, each grouping the free edges around
    its most trusted member; leftover edges are grouped to seed new circles."""
    edges = list(edges)
    pos = _positions(edges)
    free = np.ones(len(edges), dtype=bool)
    results = {}
    for c in sorted(circles, key=lambda c: (-c.trust, c.id)):
        upd = None
        d = np.hypot(pos[:, 0] - c.center.x, pos[:, 1] - c.center.y)
        inside = np.nonzero(free & (d < c.radius))[0]
        if len(inside):
            ref_i = min(inside, key=lambda i: (-edges[i].trust, d[i], edges[i].id))
            ref = edges[ref_i]
            dr = np.hypot(pos[:, 0] - pos[ref_i, 0], pos[:, 1] - pos[ref_i, 1])
            idx = [ref_i] + [j for j in np.nonzero(free & (dr < reach))[0]
                             if j != ref_i and joins(ref, edges[j])]
            members = [edges[j] for j in idx]
            m = matcher(members, c)
            if m is not Match.NONE:
                free[idx] = False
                upd = update_normal_circle(c, members, m, None, trust, min_radius, rebel)
                delta = ALIGNED_DELTA if m is Match.ALIGNED else DEVIATED_DELTA
                log.append(LogEntry(frame_id, kind, upd.id, m.value, delta, upd.trust))
        if upd is None and any(inside_ignore_region(c.center, r) for r in regions):
            # its edges were culled this frame; keep the circle as it is
            upd = c
            log.append(LogEntry(frame_id, kind, c.id, "Hold", 0, c.trust))
        elif upd is None:
            upd = dataclasses.replace(c, trust=c.trust + COAST_DELTA)
            log.append(LogEntry(frame_id, kind, c.id, "Coast", COAST_DELTA, upd.trust))
        results[c.id] = upd
    out = [results[c.id] for c in circles]
    created = []
    for g in grouper([edges[j] for j in np.nonzero(free)[0]]):
        nc = seed_circle(g, state.allocate_id(), trust, min_radius, rebel)
        log.append(LogEntry(frame_id, kind, nc.id, "Create", None, nc.trust))
        created.append(nc)
    return out, created


def _normal_joins(eps_beta: float, eps_v: float, ego: EgoState):
    limit = eps_v * ego.speed

    def joins(ref, e):
        return angle_within(e.angle, ref.angle, eps_beta) and abs(e.speed) <= limit
    return joins


def _rebel_joins(eps_beta: float, eps_v: float, ego: EgoState):
    def joins(ref, e):
        return angle_within(e.angle, ref.angle, eps_beta) and abs(ref.speed) <= e.speed + eps_v * ego.speed
    return joins


def group_and_match_rebels(edges, circles, eps_beta_r: float, eps_v_r: float, ego: EgoState,
                           pct_cte: float, *, eps_beta_group: float = 50.0, eps_v_group: float = 40.0,
                           reach: float = 50.0, trust: TrustThresholds = TrustThresholds(),
                           min_radius: float = 12.5, state: CircleTrackerState | None = None,
                           log: list | None = None, frame_id: int = 0) -> tuple:
    """Returns ``(updated_circles, new_circles)`` for the rebel layer."""
    state = state if state is not None else CircleTrackerState(next_id=max((c.id for c in circles), default=-1) + 1)
    log = log if log is not None else []

    def matcher(members, c):
        return match_rebel_circle(members, c, eps_beta_r, eps_v_r, pct_cte, ego)

    def grouper(free):
        return group_rebel_edges(free, eps_beta_group, eps_v_group, ego, reach)

    return _match_and_update(list(circles), edges, _rebel_joins(eps_beta_group, eps_v_group, ego),
                             grouper, matcher, trust, min_radius, True, reach, state, log,
                             frame_id, "Cr")


def emit_feedback(circles, trust_thresholds: TrustThresholds, frame_id: int, psi_lifetime: int,
                  default_bs: float = 25.0, log: list | None = None) -> Feedback:
    """Emit ignorance regions for saturated normal circles and one collector per circle.

    ``circles`` is a ``(normal, rebel)`` pair of lists; saturated normal circles
    have their trust refreshed in place.
    """
    normals, rebels = circles
    regions = []
    for c in normals:
        if c.trust >= trust_thresholds.maximum:
            regions.append(IgnoreRegion(c.center, c.radius, RegionType.CIRCLE,
                                        frame_id + psi_lifetime, source_circle=c.id))
            c.trust = trust_thresholds.standard
            if log is not None:
                log.append(LogEntry(frame_id, "Cn", c.id, "Refresh", None, c.trust))
    collectors = [Collector(c.center, max(c.radius, default_bs)) for c in list(normals) + list(rebels)]
    return Feedback(regions, collectors)


def step_circle_tracker(state: CircleTrackerState, normal_edges, rebel_edges, ego: EgoState,
                        params, frame_id: int, regions=()) -> CircleStepReport:
    trust = TrustThresholds(params.trust_standard, params.trust_critical, params.trust_max)
    reach = 2.0 * params.bs0
    min_radius = params.bs0 / 2.0
    report = CircleStepReport()
    log = report.log

    def normal_matcher(members, c):
        return match_normal_circle(members, c, params.eps_beta_circle, params.eps_v_circle,
                                   params.involvement)

    def normal_grouper(free):
        return group_normal_edges(free, params.eps_beta, params.eps_v, ego, reach)

    updated, created = _match_and_update(
        state.normals, normal_edges, _normal_joins(params.eps_beta, params.eps_v, ego),
        normal_grouper, normal_matcher, trust, min_radius, False, reach, state, log, frame_id, "Cn",
        regions)
    report.new_normals = len(created)

    r_updated, r_created = group_and_match_rebels(
        rebel_edges, state.rebels, params.eps_beta_rebel_circle, params.eps_v_rebel_circle, ego,
        params.involvement, eps_beta_group=params.eps_beta_rebel, eps_v_group=params.eps_v_rebel,
        reach=reach, trust=trust, min_radius=min_radius, state=state, log=log, frame_id=frame_id,
    ) if (rebel_edges or state.rebels) else ([], [])
    report.new_rebels = len(r_created)

    def prune(items, kind):
        kept = []
        for c in items:
            if trust.survives(c.trust):
                kept.append(c)
            else:
                log.append(LogEntry(frame_id, kind, c.id, "Delete", None, c.trust))
        return kept

    state.normals = prune(updated + created, "Cn")
    state.rebels = prune(r_updated + r_created, "Cr")
    report.feedback = emit_feedback((state.normals, state.rebels), trust, frame_id,
                                    params.psi_lifetime, params.bs0, log)
    return report
