"""Summaries and figures from a metrics table."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def processed(row) -> int:
    """Edges that got past the Line expert's culling."""
    return row["raw_edges"] - row["culled"]


def allowance_violations(rows, start: int = 10) -> list:
    """Frames from ``start`` on whose dimensionality grew by more than the logged allowance."""
    bad = []
    for prev, cur in zip(rows, rows[1:]):
        if cur["frame_id"] < start:
            continue
        if cur["dimensionality"] - prev["dimensionality"] > cur["spawn_allowance"]:
            bad.append(cur["frame_id"])
    return bad


def summarize(rows, early=(1, 5), late=(10, 30)) -> dict:
    """Headline numbers for a run; frame windows are inclusive."""
    def window(lo, hi):
        return [processed(r) for r in rows if lo <= r["frame_id"] <= hi]

    a, b = window(*early), window(*late)
    mean_a = float(np.mean(a)) if a else float("nan")
    mean_b = float(np.mean(b)) if b else float("nan")
    psi = [r["frame_id"] for r in rows if r["n_psi"] > 0]
    dims = [r["dimensionality"] for r in rows]
    return {
        "frames": len(rows),
        "mean_raw_edges": float(np.mean([r["raw_edges"] for r in rows])) if rows else float("nan"),
        "mean_processed_early": mean_a,
        "mean_processed_late": mean_b,
        "processed_reduction": 1.0 - mean_b / mean_a if a and b and mean_a > 0 else float("nan"),
        "first_psi_frame": psi[0] if psi else -1,
        "dimensionality_first": dims[0] if dims else 0,
        "dimensionality_peak": max(dims) if dims else 0,
        "dimensionality_last": dims[-1] if dims else 0,
        "allowance_violations": len(allowance_violations(rows, late[0])),
    }


def write_summary(path, summary: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in summary.items():
            w.writerow([k, f"{v:.6g}" if isinstance(v, float) else v])


def plot_metrics(rows, path) -> None:
    """Two stacked panels: edge counts per frame, and filter dimensionality."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    frames = [r["frame_id"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 5.6), sharex=True)
    ax1.plot(frames, [r["raw_edges"] for r in rows], color="0.5", label="raw")
    ax1.plot(frames, [processed(r) for r in rows], color="tab:blue", label="after culling")
    ax1.set_ylabel("edges")
    ax1.legend(frameon=False)
    ax2.plot(frames, [r["dimensionality"] for r in rows], color="tab:red")
    ax2.set_ylabel("stored parameters")
    ax2.set_xlabel("frame")
    for ax in (ax1, ax2):
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
