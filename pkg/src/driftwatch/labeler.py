"""Automated training-data generation from closed stream windows.

A window is reprocessed retroactively: every ground-truth event name in the
window goes into a location memory, each post is matched against those names
by case-insensitive substring (plus the post's own locations field), matched
names resolve to the owning events' grid cells, and a post is labeled
relevant when any such cell sits within the space-time match rule of any
event. Posts that name an event but fall just outside the match window (more
than dt_max, at most exclusion_max away) are excluded as ambiguous. All other
posts are labeled irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .features import DEFAULT_DIM, SparseVector, centroid, cosine_distance, vectorize
from .geotime import DAY, DEFAULT_DT_MAX, MIN_NAME_LEN, cell_of, chebyshev
from .ingest import GroundTruthEvent, SocialPost
from .learners import LabeledSample

DEFAULT_BIN_SPAN = 6 * DAY
DEFAULT_EXCLUSION_MAX = 7 * DAY


@dataclass
class Window:
    index: int
    start: int
    end: int
    posts: list[SocialPost] = field(default_factory=list)
    events: list[GroundTruthEvent] = field(default_factory=list)


@dataclass
class LabeledSet:
    samples: list[LabeledSample]
    stats: dict
    # One export row per labeled post: post_id, label, window, cell,
    # matched_event_id.
    annotations: list[dict] = field(default_factory=list)


def bin_posts(window: Window, bin_span: int = DEFAULT_BIN_SPAN) -> list[list[SocialPost]]:
    """Partition a window's posts into half-open time bins from its start."""
    n_bins = max(1, math.ceil((window.end - window.start) / bin_span))
    bins: list[list[SocialPost]] = [[] for _ in range(n_bins)]
    for post in window.posts:
        b = (post.timestamp - window.start) // bin_span
        if 0 <= b < n_bins:
            bins[b].append(post)
    return bins


def generate_training_data(window: Window, dt_max: int = DEFAULT_DT_MAX,
                           radius: int = 0,
                           exclusion_max: int = DEFAULT_EXCLUSION_MAX,
                           exclude: bool = True, dim: int = DEFAULT_DIM,
                           vectors: dict | None = None,
                           now: int | None = None,
                           bin_span: int = DEFAULT_BIN_SPAN) -> LabeledSet:
    """Label every post of a closed window against its ground-truth events.

    vectors may supply precomputed feature vectors keyed by post id; missing
    posts are vectorized here. Passing now enforces that the window has
    closed. Name-matched posts farther than exclusion_max from every matched
    event are labeled irrelevant like posts with no location evidence.
    """
    if now is not None and window.end > now:
        raise ValueError(f"window {window.index} is not closed yet")

    owners: dict[str, list[int]] = {}
    for ei, ev in enumerate(window.events):
        for name in ev.location_names:
            key = name.lower()
            if len(key) < MIN_NAME_LEN:
                continue
            owners.setdefault(key, []).append(ei)
    names_sorted = sorted(owners)
    ev_cells = [cell_of(ev.lat, ev.lon) for ev in window.events]
    ev_ts = [ev.timestamp for ev in window.events]

    samples: list[LabeledSample] = []
    annotations: list[dict] = []
    positives = negatives = excluded = 0

    for post in window.posts:
        lowered = post.text.lower()
        matched = [n for n in names_sorted if n in lowered]
        for loc in post.locations:
            key = loc.lower()
            if key in owners and key not in matched:
                matched.append(key)

        label = 0
        cell = None
        matched_event_id = None
        if matched:
            cand = []
            seen = set()
            for n in matched:
                for ei in owners[n]:
                    if ei not in seen:
                        seen.add(ei)
                        cand.append(ei)
            ts = post.timestamp
            # Fast path: a matched event's own cell is distance 0 from itself,
            # so its time test alone settles those pairs.
            for ei in cand:
                if abs(ts - ev_ts[ei]) <= dt_max:
                    label = 1
                    cell = ev_cells[ei]
                    matched_event_id = window.events[ei].id
                    break
            if label == 0:
                # Full rule: any candidate cell against any event.
                for ei in cand:
                    c = ev_cells[ei]
                    for ej in range(len(window.events)):
                        if abs(ts - ev_ts[ej]) <= dt_max and \
                                chebyshev(c, ev_cells[ej]) <= radius:
                            label = 1
                            cell = c
                            matched_event_id = window.events[ej].id
                            break
                    if label:
                        break
            if label == 0 and exclude:
                if any(dt_max < abs(ts - ev_ts[ei]) <= exclusion_max
                       for ei in cand):
                    excluded += 1
                    continue
            if label == 0:
                cell = ev_cells[cand[0]]

        if label:
            positives += 1
        else:
            negatives += 1
        vec = vectors.get(post.id) if vectors else None
        if vec is None:
            vec = vectorize(post.text, dim)
        samples.append(LabeledSample(vec, label, post.timestamp, post.id))
        annotations.append({
            "post_id": post.id,
            "label": label,
            "window": window.index,
            "cell": [cell.row, cell.col] if cell else None,
            "matched_event_id": matched_event_id,
        })

    labeled = positives + negatives
    bins = bin_posts(window, bin_span)
    stats = {
        "total_posts": len(window.posts),
        "labeled": labeled,
        "positives": positives,
        "negatives": negatives,
        "excluded": excluded,
        "bin_counts": [len(b) for b in bins],
    }
    return LabeledSet(samples, stats, annotations)


def positive_centroid(labeled: LabeledSet) -> SparseVector | None:
    vecs = [s.features for s in labeled.samples if s.label == 1]
    if not vecs:
        return None
    return centroid(vecs)


def centroid_shift_report(labeled_sets: list[LabeledSet]) -> list[float]:
    """Cosine distance between consecutive windows' positive-class centroids.

    The first window reports 0.0; a window without positives on either side
    of a pair also reports 0.0.
    """
    shifts = [0.0]
    prev = positive_centroid(labeled_sets[0]) if labeled_sets else None
    for labeled in labeled_sets[1:]:
        cur = positive_centroid(labeled)
        if prev is None or cur is None:
            shifts.append(0.0)
        else:
            shifts.append(cosine_distance(prev, cur))
        prev = cur
    return shifts
