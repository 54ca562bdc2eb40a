"""Edge estimation stage of the Circle expert.

Tracks normal edges (landmarks following the radial flow away from the frame
center) and rebel edges (landmarks that violate it), validating rebels over a
three-frame candidate chain before promotion.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    DegenerateGeometry,
    EdgePoint,
    EgoState,
    ErrorModel,
    FrameGeometry,
    PixelPoint,
    TrustThresholds,
    angle_difference,
    angle_within,
    error_span_distance,
    inside_ignore_region,
    radial_angle,
    trust_weighted,
    unit_vector,
)

CHAIN_LENGTH = 3


class Classification(Enum):
    LAMBDA1 = 1
    LAMBDA2 = 2
    LAMBDA3 = 3
    LAMBDA4 = 4
    LAMBDA5 = 5

    @property
    def trust_delta(self) -> float:
        return _TRUST_DELTA[self]


_TRUST_DELTA = {
    Classification.LAMBDA1: -1.0,
    Classification.LAMBDA2: 1.0,
    Classification.LAMBDA3: -1.0,
    Classification.LAMBDA4: 0.0,
    Classification.LAMBDA5: -1.0,
}

# trust changes for outcomes that are not an edge classification
COAST_DELTA = -1.0
REBEL_MATCH_DELTA = 1.0


@dataclass
class NormalEdge:
    id: int
    location: PixelPoint
    boundary_layer: float
    trust: float
    angle: float
    speed: float
    source_id: int = -1


@dataclass
class RebelEdge:
    id: int
    location: PixelPoint
    trust: float
    angle: float
    speed: float
    deviation_level: float
    origin: PixelPoint
    boundary_layer: float
    source_id: int = -1


@dataclass
class RebelCandidateChain:
    points: list
    source_id: int = -1

    @property
    def frames_checked(self) -> int:
        return len(self.points)


@dataclass
class LogEntry:
    frame_id: int
    kind: str
    entity_id: int
    event: str
    delta: float | None
    trust: float


@dataclass
class EdgeTrackerState:
    normals: list = field(default_factory=list)
    rebels: list = field(default_factory=list)
    chains: list = field(default_factory=list)
    next_id: int = 0

    def allocate_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i


@dataclass
class EdgeStepReport:
    log: list = field(default_factory=list)
    consumed: int = 0
    spawned: int = 0
    chained: int = 0
    rejected: int = 0
    promoted: list = field(default_factory=list)
    new_normals: int = 0
    new_rebels: int = 0


def predict_normal_edge(edge: NormalEdge, ego: EgoState, frame: FrameGeometry) -> NormalEdge:
    c = frame.center
    dx = edge.location.x - c.x
    dy = edge.location.y - c.y
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise DegenerateGeometry("normal edge located on the frame center")
    step = 0.5 * (edge.speed + ego.speed) * ego.frame_interval
    loc = PixelPoint(edge.location.x + step * dx / r, edge.location.y + step * dy / r)
    return dataclasses.replace(edge, location=loc)


def _motion_consistent(obs: PixelPoint, previous: NormalEdge, ego: EgoState,
                       eps_beta: float, eps_v: float, span: float) -> bool:
    dx = obs.x - previous.location.x
    dy = obs.y - previous.location.y
    step = math.hypot(dx, dy)
    # the span is the allowance for rotational jitter in both tests
    if step / ego.frame_interval > eps_v * ego.speed + span / ego.frame_interval:
        return False
    if step <= span:
        return True
    heading = math.degrees(math.atan2(dy, dx)) % 360.0
    return angle_within(heading, previous.angle, eps_beta)


def classify(edge_obs: EdgePoint, predicted: NormalEdge, previous: NormalEdge,
             error_model: ErrorModel, frame: FrameGeometry, eps_beta: float,
             eps_v: float, ego: EgoState) -> Classification:
    obs = edge_obs.location
    span = error_model.rotational_span
    in_span = error_span_distance(obs, predicted.location, frame) < span
    in_bl = obs.distance_to(predicted.location) < predicted.boundary_layer
    if in_bl and in_span:
        if _motion_consistent(obs, previous, ego, eps_beta, eps_v, span):
            return Classification.LAMBDA2
        return Classification.LAMBDA3
    if in_span:
        return Classification.LAMBDA1
    if obs.distance_to(previous.location) < previous.boundary_layer:
        return Classification.LAMBDA5
    return Classification.LAMBDA4


def update_normal_edge(tracked: NormalEdge, obs: EdgePoint, ego: EgoState,
                       group_correlation: int, trust_thresholds: TrustThresholds,
                       frame: FrameGeometry,
                       classification: Classification = Classification.LAMBDA2,
                       bl_min: float = 0.0) -> NormalEdge:
    """Trust-weighted update of a matched normal edge from its previous state."""
    if group_correlation < 1:
        raise ValueError("group correlation must be at least 1")
    pred = predict_normal_edge(tracked, ego, frame)
    tr_cr = trust_thresholds.critical
    o = obs.location
    loc = PixelPoint(
        trust_weighted(pred.location.x, o.x, tracked.trust, tr_cr),
        trust_weighted(pred.location.y, o.y, tracked.trust, tr_cr),
    )
    c = frame.center
    residual = o.distance_to(pred.location)
    outward = o.distance_to(c) > pred.location.distance_to(c)
    sign = 1.0 if outward else -1.0
    # clamped rather than reflected: a reflected inward residual reads as outward speed
    speed = max(0.0, ego.speed + sign * residual / ego.frame_interval)
    v_prime = 0.5 * (tracked.speed + ego.speed)
    bl = 0.5 * (abs(ego.speed - v_prime) / group_correlation + tracked.boundary_layer)
    trust = trust_thresholds.clamp(tracked.trust + classification.trust_delta)
    return dataclasses.replace(tracked, location=loc, speed=speed,
                               boundary_layer=max(bl, bl_min), trust=trust,
                               source_id=obs.source_id)


def predict_rebel_edge(edge: RebelEdge, ego: EgoState) -> PixelPoint:
    u = unit_vector(edge.angle + edge.deviation_level)
    step = edge.speed * ego.frame_interval
    return PixelPoint(edge.location.x + step * u.x, edge.location.y + step * u.y)


def chain_admits(chain: RebelCandidateChain, point: PixelPoint, max_deviation: float,
                 error_span: float, gate: float) -> bool:
    """Whether ``point`` continues the chain within its deviation corridor."""
    last = chain.points[-1]
    if len(chain.points) < 2:
        return point.distance_to(last) < gate
    prev = chain.points[-2]
    expected = PixelPoint(2 * last.x - prev.x, 2 * last.y - prev.y)
    if point.distance_to(expected) >= gate:
        return False
    seg = last.distance_to(prev)
    if seg == 0.0 or point == last:
        return True
    seg_angle = radial_angle(last, prev)
    new_angle = radial_angle(point, last)
    slack = math.degrees(math.atan2(error_span, seg))
    return abs(angle_difference(new_angle, seg_angle)) <= max_deviation + slack


def promote_chain(points, frame_interval: float, trust: TrustThresholds,
                  boundary_layer: float, entity_id: int = -1, source_id: int = -1) -> RebelEdge:
    p1, p2, p3 = points[:3]
    beta = radial_angle(p3, p1)
    deviation = angle_difference(beta, radial_angle(p2, p1))
    return RebelEdge(
        id=entity_id,
        location=p3,
        trust=trust.initial,
        angle=beta,
        speed=p3.distance_to(p2) / frame_interval,
        deviation_level=deviation,
        origin=p1,
        boundary_layer=boundary_layer,
        source_id=source_id,
    )


def advance_rebel_chain(chain: RebelCandidateChain, obs: EdgePoint | None, max_deviation: float,
                        *, error_span: float = 4.0, gate: float = 25.0,
                        frame_interval: float = 1.0,
                        trust: TrustThresholds = TrustThresholds(),
                        boundary_layer: float = 25.0):
    """Returns the extended chain, a promoted ``RebelEdge``, or ``None`` on discard."""
    if chain.frames_checked >= CHAIN_LENGTH:
        raise ValueError("chain already complete")
    if obs is None or not chain_admits(chain, obs.location, max_deviation, error_span, gate):
        return None
    points = chain.points + [obs.location]
    if len(points) < CHAIN_LENGTH:
        return RebelCandidateChain(points, obs.source_id)
    return promote_chain(points, frame_interval, trust, boundary_layer, source_id=obs.source_id)


def update_rebel_edge(tracked: RebelEdge, obs: EdgePoint, ego: EgoState,
                      trust_thresholds: TrustThresholds) -> RebelEdge:
    o = obs.location
    if o == tracked.origin:
        beta = tracked.angle
    else:
        beta = radial_angle(o, tracked.origin)
    turn = angle_difference(beta, tracked.angle)
    deviation = tracked.deviation_level - (turn - tracked.deviation_level)
    pred = predict_rebel_edge(tracked, ego)
    tr, tr_cr = tracked.trust, trust_thresholds.critical
    loc = PixelPoint(trust_weighted(pred.x, o.x, tr, tr_cr), trust_weighted(pred.y, o.y, tr, tr_cr))
    measured = o.distance_to(tracked.location) / ego.frame_interval
    return dataclasses.replace(
        tracked,
        location=loc,
        angle=beta,
        deviation_level=deviation,
        speed=trust_weighted(tracked.speed, measured, tr, tr_cr),
        trust=trust_thresholds.clamp(tr + REBEL_MATCH_DELTA),
        source_id=obs.source_id,
    )


def _in_regions(p: PixelPoint, regions) -> bool:
    return any(inside_ignore_region(p, r) for r in regions)


def step_edge_tracker(grouped, state: EdgeTrackerState, ego: EgoState, error_model: ErrorModel,
                      frame: FrameGeometry, params, frame_id: int, regions=()) -> EdgeStepReport:
    """Advance the edge tracker by one frame, mutating ``state``.

    ``params`` is a RunConfig-like object; ``regions`` are the ignorance
    regions active this frame; tracks predicted inside them are carried
    forward unmatched at unchanged trust.
    """
    trust = TrustThresholds(params.trust_standard, params.trust_critical, params.trust_max)
    span = error_model.rotational_span
    report = EdgeStepReport()
    log = report.log

    obs, corr = [], []
    for g in grouped.groups:
        for e in g.members:
            obs.append(e)
            corr.append(max(1, len(g.members)))
    n = len(obs)
    consumed = np.zeros(n, dtype=bool)
    tree = cKDTree(np.array([[e.location.x, e.location.y] for e in obs])) if n else None

    def near(p: PixelPoint, radius: float) -> list:
        if tree is None or radius <= 0:
            return []
        return [j for j in tree.query_ball_point((p.x, p.y), radius) if not consumed[j]]

    def record(kind, entity, event, delta):
        log.append(LogEntry(frame_id, kind, entity.id, event, delta, entity.trust))

    kept_normals = []
    pending = []
    for e in sorted(state.normals, key=lambda e: (-e.trust, e.id)):
        p = predict_normal_edge(e, ego, frame)
        if not frame.contains(p.location):
            record("En", e, "Exit", None)
            continue
        if _in_regions(p.location, regions):
            # culled on purpose, so no evidence either way: dead-reckon at constant trust
            record("En", p, "Hold", 0)
            kept_normals.append(p)
            continue
        pending.append((e, p))

    # normal edges matched inside their boundary layer and error span
    unmatched = []
    for e, p in pending:
        best, best_d = None, math.inf
        for j in near(p.location, p.boundary_layer):
            o = obs[j].location
            d = o.distance_to(p.location)
            if d < p.boundary_layer and d < best_d and error_span_distance(o, p.location, frame) < span:
                best, best_d = j, d
        if best is None:
            unmatched.append((e, p))
            continue
        cls = classify(obs[best], p, e, error_model, frame, params.eps_beta, params.eps_v, ego)
        upd = update_normal_edge(e, obs[best], ego, corr[best], trust, frame, cls, params.bl_min)
        consumed[best] = True
        report.consumed += 1
        record("En", upd, cls.name, cls.trust_delta)
        kept_normals.append(upd)

    kept_rebels = []
    for r in sorted(state.rebels, key=lambda r: (-r.trust, r.id)):
        p = predict_rebel_edge(r, ego)
        if not frame.contains(p):
            record("Er", r, "Exit", None)
            continue
        cands = [j for j in near(p, r.boundary_layer) if obs[j].location.distance_to(p) < r.boundary_layer]
        if cands:
            j = min(cands, key=lambda j: (obs[j].location.distance_to(p), j))
            upd = update_rebel_edge(r, obs[j], ego, trust)
            consumed[j] = True
            report.consumed += 1
            record("Er", upd, "Match", REBEL_MATCH_DELTA)
            kept_rebels.append(upd)
        else:
            coasted = dataclasses.replace(r, location=p, trust=r.trust + COAST_DELTA)
            record("Er", coasted, "Coast", COAST_DELTA)
            kept_rebels.append(coasted)

    kept_chains = []
    for ch in state.chains:
        last, prev = ch.points[-1], ch.points[-2]
        expected = PixelPoint(2 * last.x - prev.x, 2 * last.y - prev.y)
        cands = [j for j in near(expected, params.bs0)
                 if chain_admits(ch, obs[j].location, params.rebel_max_deviation, span, params.bs0)]
        if not cands:
            continue
        j = min(cands, key=lambda j: (obs[j].location.distance_to(expected), j))
        consumed[j] = True
        report.chained += 1
        out = advance_rebel_chain(ch, obs[j], params.rebel_max_deviation, error_span=span,
                                  gate=params.bs0, frame_interval=ego.frame_interval,
                                  trust=trust, boundary_layer=params.bs0)
        if isinstance(out, RebelEdge):
            out.id = state.allocate_id()
            record("Er", out, "Create", None)
            report.promoted.append(out)
            report.new_rebels += 1
            kept_rebels.append(out)
        else:
            kept_chains.append(out)

    new_chains = []
    for e, p in unmatched:
        gate = 2.0 * p.boundary_layer
        idx = set(near(p.location, gate)) | set(near(e.location, e.boundary_layer))
        best = None
        for j in sorted(idx):
            cls = classify(obs[j], p, e, error_model, frame, params.eps_beta, params.eps_v, ego)
            if cls in (Classification.LAMBDA1, Classification.LAMBDA4) and obs[j].location.distance_to(p.location) >= gate:
                continue
            anchor = e.location if cls is Classification.LAMBDA5 else p.location
            key = (_PASS2_RANK[cls], obs[j].location.distance_to(anchor), j)
            if best is None or key < best[0]:
                best = (key, j, cls)
        if best is None:
            coasted = dataclasses.replace(p, trust=e.trust + COAST_DELTA)
            record("En", coasted, "Coast", COAST_DELTA)
            kept_normals.append(coasted)
            continue
        _, j, cls = best
        coasted = dataclasses.replace(p, trust=trust.clamp(e.trust + cls.trust_delta))
        record("En", coasted, cls.name, cls.trust_delta)
        kept_normals.append(coasted)
        if cls is Classification.LAMBDA5:
            consumed[j] = True
            report.chained += 1
            new_chains.append(RebelCandidateChain([e.location, obs[j].location], obs[j].source_id))

    c = frame.center
    for j in range(n):
        if consumed[j]:
            continue
        loc = obs[j].location
        if loc == c:
            report.rejected += 1
            continue
        ne = NormalEdge(
            id=state.allocate_id(),
            location=loc,
            boundary_layer=params.bs0,
            trust=trust.initial,
            angle=radial_angle(loc, c),
            speed=ego.speed,
            source_id=obs[j].source_id,
        )
        record("En", ne, "Create", None)
        kept_normals.append(ne)
        report.spawned += 1
        report.new_normals += 1

    state.normals = []
    for e in kept_normals:
        if trust.survives(e.trust):
            state.normals.append(e)
        else:
            record("En", e, "Delete", None)
    state.rebels = []
    for r in kept_rebels:
        if trust.survives(r.trust):
            state.rebels.append(r)
        else:
            record("Er", r, "Delete", None)
    state.normals.sort(key=lambda e: e.id)
    state.rebels.sort(key=lambda r: r.id)
    state.chains = kept_chains + new_chains
    return report


_PASS2_RANK = {
    Classification.LAMBDA1: 0,
    Classification.LAMBDA5: 1,
    Classification.LAMBDA4: 2,
    Classification.LAMBDA2: 3,
    Classification.LAMBDA3: 3,
}
