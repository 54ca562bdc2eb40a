"""The per-frame Line -> Circle -> feedback loop and its persistent state."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .circle_tracker import CircleTrackerState, NormalCircle, RebelCircle, step_circle_tracker
from .config import RunConfig
from .edge_tracker import (
    EdgeTrackerState,
    NormalEdge,
    RebelCandidateChain,
    RebelEdge,
    step_edge_tracker,
)
from .geometry import Collector, EgoState, IgnoreRegion, PixelPoint, RegionType
from .line_expert import run_line_expert

log = logging.getLogger(__name__)

# stored scalars per entity
LAYOUT = {"En": 6, "Er": 9, "Cn": 6, "Cr": 7, "psi": 5, "lambda": 3}


@dataclass
class FilterState:
    edges: EdgeTrackerState = field(default_factory=EdgeTrackerState)
    circles: CircleTrackerState = field(default_factory=CircleTrackerState)
    collectors: list = field(default_factory=list)
    regions: list = field(default_factory=list)
    delta: float = 4.0
    frame_id: int = 0
    last_timestamp: float | None = None

    def to_dict(self) -> dict:
        def pts(obj):
            d = asdict(obj)
            return d
        return {
            "frame_id": self.frame_id,
            "last_timestamp": self.last_timestamp,
            "delta": self.delta,
            "edges": {
                "next_id": self.edges.next_id,
                "normals": [pts(e) for e in self.edges.normals],
                "rebels": [pts(e) for e in self.edges.rebels],
                "chains": [{"points": [list(p) for p in c.points], "source_id": c.source_id}
                           for c in self.edges.chains],
            },
            "circles": {
                "next_id": self.circles.next_id,
                "normals": [pts(c) for c in self.circles.normals],
                "rebels": [pts(c) for c in self.circles.rebels],
            },
            "collectors": [{"location": list(c.location), "boundary_size": c.boundary_size}
                           for c in self.collectors],
            "regions": [{"location": list(r.location), "radius": r.radius,
                         "region_type": int(r.region_type), "expires_at_frame": r.expires_at_frame,
                         "radius_y": r.radius_y, "source_circle": r.source_circle}
                        for r in self.regions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterState":
        def pt(v):
            return PixelPoint(float(v[0]), float(v[1]))

        def normal(e):
            return NormalEdge(**{**e, "location": pt(e["location"])})

        def rebel(e):
            return RebelEdge(**{**e, "location": pt(e["location"]), "origin": pt(e["origin"])})

        edges = EdgeTrackerState(
            normals=[normal(e) for e in d["edges"]["normals"]],
            rebels=[rebel(e) for e in d["edges"]["rebels"]],
            chains=[RebelCandidateChain([pt(p) for p in c["points"]], c["source_id"])
                    for c in d["edges"]["chains"]],
            next_id=d["edges"]["next_id"],
        )
        circles = CircleTrackerState(
            normals=[NormalCircle(**{**c, "center": pt(c["center"])}) for c in d["circles"]["normals"]],
            rebels=[RebelCircle(**{**c, "center": pt(c["center"])}) for c in d["circles"]["rebels"]],
            next_id=d["circles"]["next_id"],
        )
        return cls(
            edges=edges,
            circles=circles,
            collectors=[Collector(pt(c["location"]), c["boundary_size"]) for c in d["collectors"]],
            regions=[IgnoreRegion(pt(r["location"]), r["radius"], RegionType(r["region_type"]),
                                  r["expires_at_frame"], r["radius_y"], r["source_circle"])
                     for r in d["regions"]],
            delta=d["delta"],
            frame_id=d["frame_id"],
            last_timestamp=d["last_timestamp"],
        )

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True))

    @classmethod
    def load(cls, path) -> "FilterState":
        return cls.from_dict(json.loads(Path(path).read_text()))


def compute_dimensionality(state: FilterState) -> int:
    return (LAYOUT["En"] * len(state.edges.normals)
            + LAYOUT["Er"] * len(state.edges.rebels)
            + LAYOUT["Cn"] * len(state.circles.normals)
            + LAYOUT["Cr"] * len(state.circles.rebels)
            + LAYOUT["psi"] * len(state.regions)
            + LAYOUT["lambda"] * len(state.collectors))


@dataclass
class FrameResult:
    frame_id: int
    raw: list
    culled: list
    grouped: object
    edge_report: object
    circle_report: object
    metrics: dict

    @property
    def log(self) -> list:
        return self.edge_report.log + self.circle_report.log


class LCFilter:
    """Runs the filter frame by frame, owning its ``FilterState``."""

    def __init__(self, config: RunConfig | None = None, state: FilterState | None = None):
        self.config = config or RunConfig()
        self.state = state or FilterState(delta=self.config.delta)

    def ego_for(self, timestamp: float, speed: float, distance: float) -> EgoState:
        """Ego state in pixel units from physical speed/distance and the frame clock."""
        last = self.state.last_timestamp
        dt = timestamp - last if last is not None else self.config.frame_interval
        if dt <= 0:
            raise ValueError("frame timestamps must increase")
        ppu = self.config.pixels_per_unit
        return EgoState(speed * ppu, dt, distance * ppu)

    def step(self, frame_id: int, edges, ego: EgoState, timestamp: float | None = None) -> FrameResult:
        cfg = self.config
        st = self.state
        frame = cfg.frame
        active = [r for r in st.regions if r.is_active(frame_id)]
        n_lambda_before = len(st.collectors)

        grouped, culled = run_line_expert(edges, st.collectors, active, frame_id, cfg.bs0)
        er = step_edge_tracker(grouped, st.edges, ego, cfg.error_model, frame, cfg, frame_id, active)
        cr = step_circle_tracker(st.circles, st.edges.normals, st.edges.rebels, ego, cfg, frame_id,
                                 active)

        new_regions = cr.feedback.regions if cfg.feedback else []
        st.regions = [r for r in active if r.is_active(frame_id + 1)] + new_regions
        st.collectors = cr.feedback.collectors
        st.frame_id = frame_id
        if timestamp is not None:
            st.last_timestamp = timestamp

        allowance = (LAYOUT["En"] * er.new_normals + LAYOUT["Er"] * er.new_rebels
                     + LAYOUT["Cn"] * cr.new_normals + LAYOUT["Cr"] * cr.new_rebels
                     + LAYOUT["psi"] * len(new_regions)
                     + LAYOUT["lambda"] * max(0, len(st.collectors) - n_lambda_before))
        row = {
            "frame_id": frame_id,
            "raw_edges": len(edges),
            "culled": len(culled),
            "n_En": len(st.edges.normals),
            "n_Er": len(st.edges.rebels),
            "n_Cn": len(st.circles.normals),
            "n_Cr": len(st.circles.rebels),
            "n_psi": len(st.regions),
            "dimensionality": compute_dimensionality(st),
            "consumed": er.consumed,
            "spawned": er.spawned,
            "chained": er.chained,
            "rejected": er.rejected,
            "spawn_allowance": allowance,
        }
        log.debug("frame %d: %s", frame_id, row)
        return FrameResult(frame_id, list(edges), culled, grouped, er, cr, row)


def run_pipeline(frames, ego_records, config: RunConfig | None = None,
                 state: FilterState | None = None, on_frame=None):
    """Run over ``frames`` = [(frame_id, timestamp, edges)] with matching ego records.

    Returns ``(metrics_rows, trust_log, filter)``. Frames already processed by a
    reloaded ``state`` are skipped.
    """
    frames = list(frames)
    ego_records = list(ego_records)
    if len(frames) != len(ego_records):
        raise ValueError(f"frame count mismatch: {len(frames)} edge frames, {len(ego_records)} ego records")
    lc = LCFilter(config, state)
    rows, trust_log = [], []
    for (frame_id, ts, edges), rec in zip(frames, ego_records):
        if rec.frame_id != frame_id:
            raise ValueError(f"ego record {rec.frame_id} does not match frame {frame_id}")
        if frame_id <= lc.state.frame_id:
            continue
        ego = lc.ego_for(ts, rec.speed, rec.distance)
        res = lc.step(frame_id, edges, ego, ts)
        rows.append(res.metrics)
        trust_log.extend(res.log)
        if on_frame is not None:
            on_frame(res, lc)
    return rows, trust_log, lc
