"""Randomized checks of the invariants each stage promises."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from lcfilter.circle_tracker import (
    Match,
    NormalCircle,
    emit_feedback,
    involvement,
    match_normal_circle,
    update_normal_circle,
)
from lcfilter.config import RunConfig
from lcfilter.edge_tracker import (
    EdgeTrackerState,
    NormalEdge,
    predict_normal_edge,
    step_edge_tracker,
    update_normal_edge,
)
from lcfilter.fast import detect_fast9
from lcfilter.geometry import (
    Collector,
    EdgePoint,
    EgoState,
    ErrorModel,
    FrameGeometry,
    IgnoreRegion,
    PixelPoint,
    RegionType,
    TrustThresholds,
    angle_difference,
    error_span_distance,
    inside_ignore_region,
    radial_angle,
    within_collector,
)
from lcfilter.line_expert import FRESH, group_edges, run_line_expert
from lcfilter.simulator import SimConfig, generate_sequence

FRAME = FrameGeometry()
TRUST = TrustThresholds()

xs = st.floats(0, 639.99, allow_nan=False)
ys = st.floats(0, 479.99, allow_nan=False)
points = st.builds(PixelPoint, xs, ys)
edges = st.lists(st.builds(lambda p: EdgePoint(p, 1, 0.0), points), max_size=60)
regions = st.lists(st.builds(
    lambda p, r, ry, t, exp: IgnoreRegion(p, r, t, exp, ry if t == RegionType.RECTANGLE else None),
    points, st.floats(1, 120), st.floats(1, 120), st.sampled_from(list(RegionType)), st.integers(0, 3)),
    max_size=5)
collectors = st.lists(st.builds(Collector, points, st.floats(1, 80)), max_size=8)


@given(points, points, st.floats(0.1, 200))
def test_collector_test_is_symmetric(a, b, bs):
    assert within_collector(a, Collector(b, bs)) == within_collector(b, Collector(a, bs))


@given(points, points, st.floats(0.1, 500))
def test_typeless_region_covers_nothing(p, q, r):
    assert not inside_ignore_region(p, IgnoreRegion(q, r, RegionType.NONE))


@given(points, points, st.floats(0.2, 5))
def test_error_span_invariant_to_radial_scaling(edge, tracked, k):
    c = FRAME.center
    if tracked.distance_to(c) < 1:
        return
    scaled = PixelPoint(c.x + k * (tracked.x - c.x), c.y + k * (tracked.y - c.y))
    a = error_span_distance(edge, tracked, FRAME)
    b = error_span_distance(edge, scaled, FRAME)
    assert math.isclose(a, b, rel_tol=1e-6, abs_tol=1e-6)


@given(points, points)
def test_reflection_turns_bearing_by_half_turn(p, o):
    if p == o:
        return
    q = PixelPoint(2 * o.x - p.x, 2 * o.y - p.y)
    assert math.isclose(abs(angle_difference(radial_angle(p, o), radial_angle(q, o))), 180.0, abs_tol=1e-7)


@given(edges, collectors, regions, st.integers(0, 3))
def test_line_expert_partitions_its_input(es, cs, rs, frame_id):
    grouped, culled = run_line_expert(es, cs, rs, frame_id, 25.0)
    members = grouped.edges()
    assert len(members) + len(culled) == len(es)
    assert {id(e) for e in members}.isdisjoint({id(e) for e in culled})
    active = [r for r in rs if r.is_active(frame_id)]
    for e in members:
        assert not any(inside_ignore_region(e.location, r) for r in active)
    for g in grouped.groups:
        for e in g.members:
            assert math.hypot(e.location.x - g.center[0], e.location.y - g.center[1]) < g.boundary_size


@given(edges, st.lists(points, max_size=6), st.randoms(use_true_random=False))
def test_disjoint_collector_order_does_not_matter(es, centers, rnd):
    cs = []
    for c in centers:
        if all(c.distance_to(o.location) >= 60 for o in cs):
            cs.append(Collector(c, 30))
    shuffled = cs[:]
    rnd.shuffle(shuffled)

    def membership(collector_list):
        g = group_edges(es, collector_list, 25)
        out = {}
        for grp in g.groups:
            key = tuple(collector_list[grp.collector].location) if grp.collector != FRESH else ("fresh", grp.center)
            out[key] = [id(e) for e in grp.members]
        return out

    assert membership(cs) == membership(shuffled)


@given(points, points, st.floats(2.0, 5.0), st.floats(0, 20), st.floats(0, 20))
def test_edge_update_lies_between_prediction_and_observation(loc, o, trust, speed, ego_speed):
    if loc.distance_to(FRAME.center) < 1:
        return
    e = NormalEdge(0, loc, 25.0, trust, radial_angle(loc, FRAME.center), speed)
    ego = EgoState(ego_speed, 1.0)
    out = update_normal_edge(e, EdgePoint(o, 1, 0.0), ego, 1, TRUST, FRAME)
    p = predict_normal_edge(e, ego, FRAME).location
    # collinear with and between the two end points
    d1, d2, d = p.distance_to(out.location), o.distance_to(out.location), p.distance_to(o)
    assert math.isclose(d1 + d2, d, rel_tol=1e-9, abs_tol=1e-6)
    assert out.trust <= TRUST.maximum


@given(st.lists(points, min_size=1, max_size=10), points, st.floats(2.0, 5.0), st.floats(5, 80))
def test_circle_center_update_is_convex(pts, center, trust, radius):
    group = [NormalEdge(i, p, 25.0, 2.5, 0.0, 1.0) for i, p in enumerate(pts)]
    c = NormalCircle(0, center, radius, trust, 0.0, 1.0)
    out = update_normal_circle(c, group, Match.ALIGNED, None, TRUST)
    cx = sum(p.x for p in pts) / len(pts)
    cy = sum(p.y for p in pts) / len(pts)
    w = trust - TRUST.critical
    assert math.isclose(out.center.x, (w * center.x + cx) / (w + 1), abs_tol=1e-9)
    assert math.isclose(out.center.y, (w * center.y + cy) / (w + 1), abs_tol=1e-9)
    assert min(center.x, cx) - 1e-9 <= out.center.x <= max(center.x, cx) + 1e-9
    assert out.trust <= TRUST.maximum


@given(st.lists(points, min_size=1, max_size=10), points, st.floats(1, 80), st.floats(0.05, 1.0))
def test_involvement_gate_is_enforced(pts, center, radius, pct):
    group = [NormalEdge(i, p, 25.0, 2.5, 0.0, 1.0) for i, p in enumerate(pts)]
    m = match_normal_circle(group, NormalCircle(0, center, radius, 3.0, 0.0, 1.0), 4, 100, pct)
    assert (m is Match.NONE) == (involvement(group, center, radius) < pct)


@given(st.lists(st.floats(2.0, 5.0), max_size=12))
def test_feedback_refresh(trusts):
    circles = [NormalCircle(i, PixelPoint(10 * i, 10), 20, t, 0, 1) for i, t in enumerate(trusts)]
    before = [c.trust for c in circles]
    fb = emit_feedback((circles, []), TRUST, 1, 3)
    assert len(fb.regions) == sum(t >= TRUST.maximum for t in before)
    for b, c in zip(before, circles):
        assert c.trust <= TRUST.standard or TRUST.standard < b < TRUST.maximum
    assert len(fb.collectors) == len(circles)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10_000), st.floats(0, 3))
def test_tracker_keeps_trust_in_bounds(seed, noise):
    cfg = RunConfig()
    frames = generate_sequence(SimConfig(landmark_count=60, frames=6, seed=seed, pixel_noise_sigma=noise))
    state = EdgeTrackerState()
    for f in frames:
        g, _ = run_line_expert(f.edges, [], [], f.frame_id, cfg.bs0)
        step_edge_tracker(g, state, f.ego, ErrorModel(cfg.delta), FRAME, cfg, f.frame_id)
        for e in state.normals + state.rebels:
            assert TRUST.critical <= e.trust <= TRUST.maximum
        assert all(c.frames_checked <= 2 for c in state.chains)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fast_is_inversion_symmetric(seed):
    img = np.random.default_rng(seed).integers(0, 256, (24, 24)).astype(np.uint8)
    a = [tuple(c.location) for c in detect_fast9(img)]
    b = [tuple(c.location) for c in detect_fast9(255 - img)]
    assert a == b


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(5, 60))
def test_fast_nms_spacing(seed, threshold):
    img = np.random.default_rng(seed).integers(0, 256, (24, 24)).astype(np.uint8)
    cs = [tuple(map(int, c.location)) for c in detect_fast9(img, threshold)]
    for i, a in enumerate(cs):
        for b in cs[i + 1:]:
            assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) > 1


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_static_scene_flows_outward(seed):
    frames = generate_sequence(SimConfig(landmark_count=40, frames=5, seed=seed, respawn=False))
    c = FRAME.center
    last = {}
    for f in frames:
        for e in f.edges:
            r = e.location.distance_to(c)
            assert r >= last.get(e.source_id, 0.0) - 1e-9
            last[e.source_id] = r
