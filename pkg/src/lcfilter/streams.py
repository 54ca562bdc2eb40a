"""Plain-text interchange formats.

edge stream   one line per frame: ``frame_id timestamp x1 y1 x2 y2 ...``
ego log       one line per frame: ``frame_id speed distance`` (physical units)
label file    one line per frame: ``frame_id label:source ...`` (simulator ground truth)
metrics       CSV with a header row

Blank lines and lines starting with ``#`` are ignored on read. Numbers are
written with ``repr`` so values round-trip exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .geometry import EdgePoint, PixelPoint


class StreamFormatError(ValueError):
    pass


@dataclass
class EgoRecord:
    frame_id: int
    speed: float
    distance: float


METRIC_COLUMNS = (
    "frame_id", "raw_edges", "culled", "n_En", "n_Er", "n_Cn", "n_Cr", "n_psi", "dimensionality",
    "consumed", "spawned", "chained", "rejected", "spawn_allowance",
)


def _lines(path):
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if s and not s.startswith("#"):
            yield lineno, s.split()


def write_edge_stream(path, frames) -> None:
    """``frames``: iterable of (frame_id, timestamp, edges)."""
    out = io.StringIO()
    for frame_id, timestamp, edges in frames:
        parts = [str(int(frame_id)), repr(float(timestamp))]
        for e in edges:
            parts += [repr(float(e.location.x)), repr(float(e.location.y))]
        out.write(" ".join(parts) + "\n")
    Path(path).write_text(out.getvalue())


def read_edge_stream(path) -> list:
    frames = []
    for lineno, tok in _lines(path):
        try:
            frame_id, ts = int(tok[0]), float(tok[1])
            coords = [float(v) for v in tok[2:]]
        except (ValueError, IndexError) as exc:
            raise StreamFormatError(f"{path}:{lineno}: malformed edge record") from exc
        if len(coords) % 2:
            raise StreamFormatError(f"{path}:{lineno}: odd number of coordinates")
        if frames and ts <= frames[-1][1]:
            raise StreamFormatError(f"{path}:{lineno}: timestamps must increase")
        edges = [EdgePoint(PixelPoint(coords[i], coords[i + 1]), frame_id, ts)
                 for i in range(0, len(coords), 2)]
        frames.append((frame_id, ts, edges))
    return frames


def write_ego_log(path, records) -> None:
    Path(path).write_text("".join(f"{int(r.frame_id)} {r.speed!r} {r.distance!r}\n" for r in records))


def read_ego_log(path) -> list:
    out = []
    for lineno, tok in _lines(path):
        if len(tok) != 3:
            raise StreamFormatError(f"{path}:{lineno}: expected 'frame_id speed distance'")
        try:
            out.append(EgoRecord(int(tok[0]), float(tok[1]), float(tok[2])))
        except ValueError as exc:
            raise StreamFormatError(f"{path}:{lineno}: malformed ego record") from exc
    return out


def write_labels(path, frames) -> None:
    """``frames``: iterable of (frame_id, edges, labels)."""
    lines = []
    for frame_id, edges, labels in frames:
        lines.append(" ".join([str(frame_id)] + [f"{lab}:{e.source_id}" for e, lab in zip(edges, labels)]))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_labels(path) -> dict:
    out = {}
    for lineno, tok in _lines(path):
        pairs = []
        for t in tok[1:]:
            lab, _, src = t.partition(":")
            pairs.append((lab, int(src)))
        out[int(tok[0])] = pairs
    return out


def write_metrics(path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for r in rows:
        w.writerow([r[c] for c in METRIC_COLUMNS])
    Path(path).write_text(buf.getvalue())


def read_metrics(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: int(v) for k, v in r.items()} for r in rows]
