"""Command line entry point: ``lcfilter {simulate,detect,run,metrics}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .config import RunConfig
from .fast import detect_fast9
from .pipeline import FilterState, run_pipeline
from .pnm import read_pgm, write_pgm
from .streams import (
    METRIC_COLUMNS,
    EgoRecord,
    read_edge_stream,
    read_ego_log,
    read_metrics,
    write_edge_stream,
    write_ego_log,
    write_labels,
    write_metrics,
)

log = logging.getLogger("lcfilter")


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("filter parameters (defaults shown; flags override --config)")
    for f in dataclasses.fields(RunConfig):
        if f.type in ("bool", bool):
            group.add_argument(_flag(f.name), dest=f.name, action=argparse.BooleanOptionalAction,
                               default=None, help=f"default {f.default}")
        else:
            kind = int if f.type in ("int", int) else float
            group.add_argument(_flag(f.name), dest=f.name, type=kind, default=None,
                               metavar="N", help=f"default {f.default}")


def config_from_args(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(RunConfig)
                 if getattr(args, f.name, None) is not None}
    return cfg.replace(**overrides) if overrides else cfg


def _image_paths(directory) -> list:
    paths = sorted(Path(directory).glob("*.pgm"))
    if not paths:
        raise FileNotFoundError(f"no .pgm images in {directory}")
    return paths


def _detect_dir(directory, threshold: int, nms: bool, fps: float) -> tuple:
    frames, images = [], {}
    for k, p in enumerate(_image_paths(directory)):
        img = read_pgm(p)
        frame_id, ts = k + 1, k / fps
        frames.append((frame_id, ts, detect_fast9(img, threshold, nms, frame_id, ts)))
        images[frame_id] = img
    return frames, images


def cmd_simulate(args) -> int:
    from .simulator import SimConfig, crossing_objects, generate_sequence, render_frame

    sim = SimConfig(landmark_count=args.landmarks, frames=args.frames, seed=args.seed,
                    pixel_noise_sigma=args.noise, rotational_error_sigma=args.rotational_noise,
                    ego_speed=args.ego_speed, pixels_per_unit=args.pixels_per_unit)
    frames = generate_sequence(sim, crossing_objects(args.movers, sim))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_stream(out / "edges.txt", [(f.frame_id, f.timestamp, f.edges) for f in frames])
    write_ego_log(out / "ego.txt", [EgoRecord(f.frame_id, f.speed, f.distance) for f in frames])
    write_labels(out / "labels.txt", [(f.frame_id, f.edges, f.labels) for f in frames])
    if args.images:
        (out / "frames").mkdir(exist_ok=True)
        for f in frames:
            write_pgm(out / "frames" / f"frame_{f.frame_id:04d}.pgm", render_frame(f.edges, sim.frame))
    print(f"wrote {len(frames)} frames to {out}")
    return 0


def cmd_detect(args) -> int:
    frames, _ = _detect_dir(args.images, args.threshold, args.nms, args.fps)
    write_edge_stream(args.out, frames)
    for frame_id, _, edges in frames:
        print(f"{frame_id},{len(edges)}")
    return 0


def cmd_run(args) -> int:
    cfg = config_from_args(args)
    images = {}
    if args.edges:
        frames = read_edge_stream(args.edges)
    else:
        frames, images = _detect_dir(args.images, cfg.fast_threshold, cfg.fast_nms, args.fps)
    ego = read_ego_log(args.ego)
    if args.until is not None:
        frames = [f for f in frames if f[0] <= args.until]
        ego = [r for r in ego if r.frame_id <= args.until]
    state = FilterState.load(args.load_state) if args.load_state else None

    on_frame = None
    if args.overlays:
        from .render import write_overlay

        odir = Path(args.overlays)
        odir.mkdir(parents=True, exist_ok=True)

        def on_frame(res, lc):
            write_overlay(odir / f"overlay_{res.frame_id:04d}.ppm", res, lc.state, cfg.frame,
                          images.get(res.frame_id))

    rows, trust_log, lc = run_pipeline(frames, ego, cfg, state, on_frame)
    if args.metrics:
        write_metrics(args.metrics, rows)
    else:
        print(",".join(METRIC_COLUMNS))
        for r in rows:
            print(",".join(str(r[c]) for c in METRIC_COLUMNS))
    if args.trust_log:
        with open(args.trust_log, "w") as fh:
            fh.write("frame_id,kind,entity_id,event,delta,trust\n")
            for e in trust_log:
                delta = "" if e.delta is None else repr(float(e.delta))
                fh.write(f"{e.frame_id},{e.kind},{e.entity_id},{e.event},{delta},{float(e.trust)!r}\n")
    if args.dump_state:
        lc.state.dump(args.dump_state)
    log.info("processed %d frames", len(rows))
    return 0


def cmd_metrics(args) -> int:
    from .report import plot_metrics, summarize, write_summary

    rows = read_metrics(args.metrics)
    summary = summarize(rows, (args.early_start, args.early_end), (args.late_start, args.late_end))
    if args.summary:
        write_summary(args.summary, summary)
    if args.figure:
        plot_metrics(rows, args.figure)
    print("key,value")
    for k, v in summary.items():
        print(f"{k},{v:.6g}" if isinstance(v, float) else f"{k},{v}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcfilter", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic edge stream and ego log")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--frames", type=int, default=30)
    s.add_argument("--landmarks", type=int, default=1000)
    s.add_argument("--movers", type=int, default=0, help="independently moving objects")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=0.0, help="pixel noise sigma")
    s.add_argument("--rotational-noise", type=float, default=0.0, help="per-frame image shift sigma")
    s.add_argument("--ego-speed", type=float, default=0.05, help="meters per second")
    s.add_argument("--pixels-per-unit", type=float, default=40.0)
    s.add_argument("--images", action="store_true", help="also write PGM frames")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("detect", help="FAST-9 corners from a directory of PGM images")
    d.add_argument("--images", required=True)
    d.add_argument("--out", required=True, help="edge stream to write")
    d.add_argument("--threshold", type=int, default=25)
    d.add_argument("--nms", action=argparse.BooleanOptionalAction, default=True)
    d.add_argument("--fps", type=float, default=1.0)
    d.set_defaults(func=cmd_detect)

    r = sub.add_parser("run", help="run the filter and write per-frame metrics")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--edges", help="edge stream file")
    src.add_argument("--images", help="directory of PGM images (detected with FAST-9)")
    r.add_argument("--ego", required=True, help="ego log file")
    r.add_argument("--config", help="JSON file of filter parameters")
    r.add_argument("--fps", type=float, default=1.0, help="frame rate for image input")
    r.add_argument("--metrics", help="metrics CSV (default: stdout)")
    r.add_argument("--trust-log", help="CSV of every trust event")
    r.add_argument("--overlays", help="directory for PPM overlays")
    r.add_argument("--dump-state", help="write the final filter state as JSON")
    r.add_argument("--load-state", help="resume from a dumped state")
    r.add_argument("--until", type=int, help="stop after this frame id")
    add_config_flags(r)
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("metrics", help="summarize a metrics CSV and plot it")
    m.add_argument("metrics")
    m.add_argument("--summary", help="summary CSV to write")
    m.add_argument("--figure", help="PNG figure to write")
    m.add_argument("--early-start", type=int, default=1)
    m.add_argument("--early-end", type=int, default=5)
    m.add_argument("--late-start", type=int, default=10)
    m.add_argument("--late-end", type=int, default=30)
    m.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"lcfilter: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
