"""Report emission: delimited metrics, GeoJSON events, labeled exports,
and matplotlib figures rendered to files next to the delimited output.

All writers produce byte-stable output for a given input: fixed headers,
fixed float formatting, and "\n" line endings.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .geotime import cell_center  # noqa: E402
from .labeler import LabeledSet  # noqa: E402
from .pipeline import BenchResult, DetectedEvent, RunResult  # noqa: E402

BENCH_HEADER = ["window", "f1_static", "f1_adaptive", "precision_static",
                "recall_static", "precision_adaptive", "recall_adaptive",
                "events_static", "events_adaptive", "events_both",
                "centroid_shift"]

RUN_HEADER = ["window", "precision", "recall", "f1", "labeled", "positives",
              "negatives", "excluded", "relevant", "events", "registry_size",
              "centroid_shift"]

_FLOAT_FIELDS = {"f1_static", "f1_adaptive", "precision_static", "recall_static",
                 "precision_adaptive", "recall_adaptive", "centroid_shift",
                 "precision", "recall", "f1"}


def _format(field: str, value) -> str:
    if field in _FLOAT_FIELDS:
        return f"{value:.6f}"
    return str(value)


def write_bench_csv(path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        for row in rows:
            writer.writerow([_format(f, row[f]) for f in BENCH_HEADER])


def write_run_csv(path, result: RunResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUN_HEADER)
        for res in result.windows:
            m = res.metrics_labeled
            stats = res.labeled_stats
            row = {
                "window": res.index,
                "precision": m.precision if m else 0.0,
                "recall": m.recall if m else 0.0,
                "f1": m.f1 if m else 0.0,
                "labeled": stats["labeled"],
                "positives": stats["positives"],
                "negatives": stats["negatives"],
                "excluded": stats["excluded"],
                "relevant": res.n_relevant,
                "events": len(res.events),
                "registry_size": res.registry_size,
                "centroid_shift": result.shifts[res.index],
            }
            writer.writerow([_format(f, row[f]) for f in RUN_HEADER])


def events_geojson(events: list[DetectedEvent]) -> dict:
    """FeatureCollection of event center points with post counts."""
    features = []
    for ev in events:
        centers = [cell_center(c) for c in ev.cells]
        lat = sum(c[0] for c in centers) / len(centers)
        lon = sum(c[1] for c in centers) / len(centers)
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [lon, lat]},
            "properties": {
                "post_count": ev.post_count,
                "t_start": ev.t_start,
                "t_end": ev.t_end,
                "n_cells": len(ev.cells),
            },
        })
    return {"type": "FeatureCollection", "features": features}


def write_events_geojson(path, events: list[DetectedEvent]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(events_geojson(events), fh, indent=1)
        fh.write("\n")


def write_labeled_jsonl(path, labeled_sets: list[LabeledSet]) -> None:
    """Newline-delimited label export with a final stats summary line."""
    totals = {"total_posts": 0, "labeled": 0, "positives": 0, "negatives": 0,
              "excluded": 0}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for labeled in labeled_sets:
            for row in labeled.annotations:
                fh.write(json.dumps(row) + "\n")
            for key in totals:
                totals[key] += labeled.stats[key]
        fh.write(json.dumps({"stats": totals}) + "\n")


def write_predictions_jsonl(path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_bench_figures(rows: list[dict], out_dir) -> list[Path]:
    """Render the comparison figures for a benchmark run."""
    out = Path(out_dir)
    windows = [r["window"] for r in rows]
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(windows, [r["f1_adaptive"] for r in rows], marker="o",
            label="adaptive")
    ax.plot(windows, [r["f1_static"] for r in rows], marker="s",
            label="static")
    ax.set_xlabel("window")
    ax.set_ylabel("f1 vs ground truth")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    ax.grid(True, alpha=0.3)
    ax.set_title("Adaptive vs static f-score per window")
    paths.append(_save(fig, out / "f1_compare.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.28
    xs = list(range(len(windows)))
    ax.bar([x - width for x in xs], [r["events_adaptive"] for r in rows],
           width, label="adaptive")
    ax.bar(xs, [r["events_static"] for r in rows], width, label="static")
    ax.bar([x + width for x in xs], [r["events_both"] for r in rows],
           width, label="both")
    ax.set_xticks(xs)
    ax.set_xticklabels([str(w) for w in windows])
    ax.set_xlabel("window")
    ax.set_ylabel("detected events")
    ax.legend()
    ax.set_title("Detected events per window")
    paths.append(_save(fig, out / "events_compare.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(windows, [r["centroid_shift"] for r in rows], marker="o",
            color="tab:red")
    ax.set_xlabel("window")
    ax.set_ylabel("cosine distance to previous window")
    ax.set_ylim(bottom=0.0)
    ax.grid(True, alpha=0.3)
    ax.set_title("Positive-class centroid shift")
    paths.append(_save(fig, out / "centroid_shift.png"))
    return paths


def render_run_figures(result: RunResult, out_dir) -> list[Path]:
    """Render the per-window metric and event figures for a single run."""
    out = Path(out_dir)
    rows = result.windows
    windows = [r.index for r in rows]
    paths = []

    fig, ax = plt.subplots(figsize=(7, 4))
    for name in ("precision", "recall", "f1"):
        ys = [getattr(r.metrics_labeled, name) if r.metrics_labeled else 0.0
              for r in rows]
        ax.plot(windows, ys, marker="o", label=name)
    ax.set_xlabel("window")
    ax.set_ylabel("score vs generated labels")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    ax.grid(True, alpha=0.3)
    ax.set_title("Classification quality per window")
    paths.append(_save(fig, out / "metrics.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(windows, [len(r.events) for r in rows], color="tab:blue")
    ax.set_xlabel("window")
    ax.set_ylabel("detected events")
    ax.set_title("Detected events per window")
    paths.append(_save(fig, out / "events.png"))

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(windows, result.shifts, marker="o", color="tab:red")
    ax.set_xlabel("window")
    ax.set_ylabel("cosine distance to previous window")
    ax.set_ylim(bottom=0.0)
    ax.grid(True, alpha=0.3)
    ax.set_title("Positive-class centroid shift")
    paths.append(_save(fig, out / "centroid_shift.png"))
    return paths
