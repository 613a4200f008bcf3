"""Windowed orchestration: classify, label, train/update, group, benchmark.

Each window is classified against a frozen registry snapshot, then labeled
retroactively, and only then may the registry change: one new model per
configured learner kind plus a copy-update of every stored model. The bench
entry point runs the same generated stream through an adaptive arm and a
static arm (bootstrap training only) and reports both.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .config import PipelineConfig
from .drift import UPDATE_NOW, next_action
from .ensemble import ensemble_predict
from .errors import DataError
from .features import centroid, vectorize
from .geotime import GridCell, LocationMemory, chebyshev
from .ingest import GroundTruthEvent, SocialPost, generate_stream
from .labeler import LabeledSet, Window, centroid_shift_report, generate_training_data
from .learners import Metrics, holdout_split, prepare, train, update_with_prepared
from .registry import ClassifierStore
from .rng import derive_seed

# Salt separating per-window model seeds from the stream seed.
_MODEL_SEED_SALT = 7


@dataclass
class DetectedEvent:
    cells: list[GridCell]
    t_start: int
    t_end: int
    post_ids: list[str]

    @property
    def post_count(self) -> int:
        return len(self.post_ids)


@dataclass
class WindowResult:
    index: int
    start: int
    end: int
    n_posts: int
    n_relevant: int
    metrics_truth: Metrics | None
    metrics_labeled: Metrics | None
    events: list[DetectedEvent]
    labeled_stats: dict
    registry_size: int
    updated: bool
    detector_fired: bool


@dataclass
class RunResult:
    windows: list[WindowResult]
    shifts: list[float]
    stream_sha256: str
    store: ClassifierStore
    labeled_sets: list[LabeledSet] = field(default_factory=list)


@dataclass
class BenchResult:
    rows: list[dict]
    containment: bool
    stream_sha256: str
    adaptive: RunResult
    static: RunResult


def stream_checksum(posts: list[SocialPost]) -> str:
    """SHA-256 over the canonical serialization of a post sequence."""
    h = hashlib.sha256()
    for p in posts:
        h.update(json.dumps({"id": p.id, "text": p.text, "locations": p.locations,
                             "timestamp": p.timestamp, "links": p.links,
                             "author": p.author}).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def assign_windows(posts: list[SocialPost], events: list[GroundTruthEvent],
                   span: int, edge: int) -> list[Window]:
    """Partition a stream into span-aligned windows.

    Posts belong to exactly one window; events also join a neighboring window
    when they fall within the edge margin of its boundary, so posts near a
    boundary can still be matched.
    """
    if not posts:
        return []
    t_min = min(p.timestamp for p in posts)
    if events:
        t_min = min(t_min, min(e.timestamp for e in events))
    t0 = (t_min // span) * span
    n = max((p.timestamp - t0) // span for p in posts) + 1
    windows = [Window(w, t0 + w * span, t0 + (w + 1) * span) for w in range(n)]
    for p in posts:
        windows[(p.timestamp - t0) // span].posts.append(p)
    for e in events:
        w = (e.timestamp - t0) // span
        for cand in (w - 1, w, w + 1):
            if 0 <= cand < n:
                win = windows[cand]
                if win.start - edge <= e.timestamp < win.end + edge:
                    win.events.append(e)
    return windows


def _live_cells(posts: list[SocialPost], events: list[GroundTruthEvent],
                windows: list[Window], cfg: PipelineConfig,
                gazetteer: list[str]) -> dict[str, GridCell]:
    """Forward-only pass assigning grid cells to posts via location memory.

    Events announce their names as they arrive; a later post matching a
    remembered name inherits the most recent owning event's cell. Earlier
    posts never see later events.
    """
    from .geotime import cell_of

    memory = LocationMemory(ttl=cfg.location_ttl)
    name_cells: dict[str, GridCell] = {}
    items: list[tuple[int, int, int]] = []
    items.extend((e.timestamp, 0, i) for i, e in enumerate(events))
    items.extend((p.timestamp, 1, i) for i, p in enumerate(posts))
    boundaries = iter([w.start for w in windows] + [windows[-1].end]) if windows else iter([])
    next_boundary = next(boundaries, None)
    result: dict[str, GridCell] = {}
    for ts, kind, i in sorted(items):
        while next_boundary is not None and ts >= next_boundary:
            for name in gazetteer:
                memory.remember(name, next_boundary)
            next_boundary = next(boundaries, None)
        if kind == 0:
            ev = events[i]
            cell = cell_of(ev.lat, ev.lon)
            for name in ev.location_names:
                if memory.remember(name, ts):
                    name_cells[name.lower()] = cell
        else:
            post = posts[i]
            for name in memory.match_locations(post.text, ts):
                cell = name_cells.get(name)
                if cell is not None:
                    result[post.id] = cell
                    break
    return result


def detect_events(items: list[tuple[GridCell, int, str]], min_posts: int = 1,
                  group_radius: int = 1, group_span: int = 3 * 86400) -> list[DetectedEvent]:
    """Single-linkage grouping of located relevant posts into events.

    Two posts link when their cells are within group_radius (Chebyshev) and
    their timestamps within group_span. Connected components with at least
    min_posts become events. Output is canonical regardless of input order.
    """
    items = sorted(items, key=lambda it: (it[0].row, it[0].col, it[1], it[2]))
    n = len(items)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    buckets: dict[GridCell, list[int]] = {}
    for i, (cell, _, _) in enumerate(items):
        buckets.setdefault(cell, []).append(i)
    occupied = sorted(buckets, key=lambda c: (c.row, c.col))
    for ai, a in enumerate(occupied):
        for b in occupied[ai:]:
            if chebyshev(a, b) > group_radius:
                continue
            # Single-linkage over a 1-D timeline: consecutive links suffice.
            merged = sorted(buckets[a] + buckets[b], key=lambda i: items[i][1]) \
                if a != b else buckets[a]
            for i, j in zip(merged, merged[1:]):
                if items[j][1] - items[i][1] <= group_span:
                    union(i, j)

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(i)
    out: list[DetectedEvent] = []
    for member_ids in components.values():
        if len(member_ids) < min_posts:
            continue
        cells = sorted({items[i][0] for i in member_ids},
                       key=lambda c: (c.row, c.col))
        stamps = [items[i][1] for i in member_ids]
        post_ids = sorted(items[i][2] for i in member_ids)
        out.append(DetectedEvent(cells, min(stamps), max(stamps), post_ids))
    out.sort(key=lambda e: (e.t_start, e.cells[0].row, e.cells[0].col))
    return out


def _truth_metrics(posts, predictions, truth) -> Metrics:
    tp = fp = fn = tn = 0
    for p in posts:
        actual = truth.get(p.id)
        if actual is None:
            continue
        predicted = predictions[p.id].label
        if actual == 1:
            if predicted == 1:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == 1:
                fp += 1
            else:
                tn += 1
    return Metrics.from_counts(tp, fp, fn, tn)


def _labeled_metrics(labeled: LabeledSet, predictions) -> Metrics:
    tp = fp = fn = tn = 0
    for s in labeled.samples:
        pred = predictions.get(s.post_id)
        if pred is None:
            continue
        if s.label == 1:
            if pred.label == 1:
                tp += 1
            else:
                fn += 1
        else:
            if pred.label == 1:
                fp += 1
            else:
                tn += 1
    return Metrics.from_counts(tp, fp, fn, tn)


def _do_update(store: ClassifierStore, labeled: LabeledSet, window: Window,
               cfg: PipelineConfig) -> bool:
    """Copy-update every stored model and train one new model per kind.

    Returns False without touching the store when the window has no labeled
    samples. A single-class window still copy-updates but cannot train new
    models (at window 0 that is fatal, since nothing would exist to classify
    with).
    """
    samples = labeled.samples
    if not samples:
        return False
    fit_part, hold_part = holdout_split(samples)
    prepared = prepare(fit_part)
    key = centroid([s.features for s in samples])
    both_classes = {s.label for s in samples} == {0, 1}
    if not both_classes and len(store) == 0:
        raise DataError(
            f"window {window.index} has single-class labels; cannot train the "
            "bootstrap models (widen the window or supply more events)")
    for record in store.records:
        model = update_with_prepared(record.model, prepared, hold_part,
                                     window.index)
        store.put(model, key, window.index, window.end)
    if both_classes:
        for ki, kind in enumerate(cfg.learner_kinds):
            hyper = cfg.hyper(derive_seed(cfg.seed, _MODEL_SEED_SALT,
                                          window.index, ki))
            model = train(samples, kind, hyper, cfg.dim, window.index)
            store.put(model, key, window.index, window.end)
    return True


def run_windowed(cfg: PipelineConfig, posts: list[SocialPost],
                 events: list[GroundTruthEvent],
                 truth: dict[str, int] | None = None,
                 static: bool = False,
                 gazetteer: list[str] | None = None) -> RunResult:
    """Run the full windowed loop over a stream.

    Window 0 only labels and trains (bootstrap); later windows classify
    against the snapshot left by the previous window, then label, then
    consult the schedule. With static=True the registry is never touched
    after bootstrap, which is the non-adaptive comparison arm.
    """
    if cfg.dedup:
        seen: set[str] = set()
        unique = []
        for p in posts:
            if p.text not in seen:
                seen.add(p.text)
                unique.append(p)
        posts = unique
    windows = assign_windows(posts, events, cfg.window_span, cfg.dt_max)
    if not windows:
        raise DataError("stream contains no posts")
    sha = stream_checksum(posts)
    post_cells = _live_cells(posts, events, windows, cfg, gazetteer or [])

    store = ClassifierStore()
    detector = cfg.detector()
    schedule = cfg.schedule_obj()
    ens_cfg = cfg.ensemble_config()
    last_update = windows[0].start

    results: list[WindowResult] = []
    labeled_sets: list[LabeledSet] = []

    for window in windows:
        vectors = {p.id: vectorize(p.text, cfg.dim) for p in window.posts}
        predictions: dict[str, object] = {}
        located: list[tuple[GridCell, int, str]] = []
        metrics_truth = None

        if window.index > 0:
            if len(store) == 0:
                raise DataError("no classifier exists before the first "
                                "prediction window; run a training window first")
            members_fixed = None
            if ens_cfg.retrieval == "recency":
                members_fixed = store.recent(ens_cfg.size)
            elif cfg.relevancy_query == "batch" and window.posts:
                query = centroid(list(vectors.values()))
                members_fixed = store.relevant(query, ens_cfg.size)
            for p in window.posts:
                vec = vectors[p.id]
                members = members_fixed if members_fixed is not None \
                    else store.relevant(vec, ens_cfg.size)
                pred = ensemble_predict(vec, members, ens_cfg)
                predictions[p.id] = pred
                mean_margin = sum(m.margin for m in pred.members) / len(pred.members)
                detector.observe(pred.score, mean_margin)
                if pred.label == 1:
                    cell = post_cells.get(p.id)
                    if cell is not None:
                        located.append((cell, p.timestamp, p.id))
            if truth is not None:
                metrics_truth = _truth_metrics(window.posts, predictions, truth)

        detected = detect_events(located, cfg.min_posts, cfg.group_radius,
                                 cfg.group_span) if located else []

        labeled = generate_training_data(
            window, cfg.dt_max, cfg.radius, cfg.exclusion_max, cfg.exclusion,
            cfg.dim, vectors=vectors)
        labeled_sets.append(labeled)
        metrics_labeled = _labeled_metrics(labeled, predictions) \
            if predictions else None

        fired_before_update = detector.fired
        updated = False
        if window.index == 0:
            updated = _do_update(store, labeled, window, cfg)
            if not updated:
                raise DataError("window 0 contains no labeled posts; cannot "
                                "bootstrap")
            last_update = window.end
            detector.reset()
        elif not static:
            if next_action(schedule, window.end, last_update,
                           detector.fired) == UPDATE_NOW:
                updated = _do_update(store, labeled, window, cfg)
                if updated:
                    last_update = window.end
                    detector.reset()

        results.append(WindowResult(
            index=window.index, start=window.start, end=window.end,
            n_posts=len(window.posts),
            n_relevant=sum(1 for p in predictions.values() if p.label == 1),
            metrics_truth=metrics_truth, metrics_labeled=metrics_labeled,
            events=detected, labeled_stats=labeled.stats,
            registry_size=len(store), updated=updated,
            detector_fired=fired_before_update))

    shifts = centroid_shift_report(labeled_sets)
    return RunResult(results, shifts, sha, store, labeled_sets)


def _events_overlap(a: DetectedEvent, b: DetectedEvent) -> bool:
    return bool(set(a.post_ids) & set(b.post_ids))


def bench(cfg: PipelineConfig) -> BenchResult:
    """Run the adaptive (scheduled updates) and static (bootstrap only) arms
    on one identical generated stream and tabulate both."""
    synth = cfg.synth_config()
    posts, events, truth = generate_stream(synth)
    adaptive = run_windowed(cfg, posts, events, truth, static=False)
    static = run_windowed(cfg, posts, events, truth, static=True)
    if adaptive.stream_sha256 != static.stream_sha256:
        raise AssertionError("benchmark arms consumed different streams")

    rows: list[dict] = []
    containment = True
    for w, (res_a, res_s) in enumerate(zip(adaptive.windows, static.windows)):
        ma = res_a.metrics_truth
        ms = res_s.metrics_truth
        shared = 0
        for ev_s in res_s.events:
            if any(_events_overlap(ev_s, ev_a) for ev_a in res_a.events):
                shared += 1
            else:
                containment = False
        rows.append({
            "window": w,
            "f1_static": ms.f1 if ms else 0.0,
            "f1_adaptive": ma.f1 if ma else 0.0,
            "precision_static": ms.precision if ms else 0.0,
            "recall_static": ms.recall if ms else 0.0,
            "precision_adaptive": ma.precision if ma else 0.0,
            "recall_adaptive": ma.recall if ma else 0.0,
            "events_static": len(res_s.events),
            "events_adaptive": len(res_a.events),
            "events_both": shared,
            "centroid_shift": adaptive.shifts[w],
        })
    return BenchResult(rows, containment, adaptive.stream_sha256, adaptive,
                       static)
