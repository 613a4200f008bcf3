"""Reading, writing, and synthesizing post and event streams.

File formats are newline-delimited JSON (one object per line). Malformed
lines are skipped and counted, never fatal. The synthetic generator produces
seeded, replay-identical streams with injected vocabulary drift for
benchmarking adaptive against static classifiers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import DataError
from .geotime import DAY, GridCell, cell_center
from .rng import Xoshiro256StarStar

EVENT_SOURCES = ("physical_sensor", "news", "report", "synthetic")

POST_KEYS = ("id", "text", "locations", "timestamp", "links", "author")
EVENT_KEYS = ("id", "lat", "lon", "timestamp", "location_names", "source")

# Every synthetic post mentions this word; class signal lives entirely in the
# co-occurring context vocabulary, which is what drifts.
KEYWORD = "landslide"

DEFAULT_WINDOW_SPAN = 30 * DAY


@dataclass
class SocialPost:
    id: str
    text: str
    locations: list[str]
    timestamp: int
    links: list[str]
    author: str


@dataclass
class GroundTruthEvent:
    id: str
    lat: float
    lon: float
    timestamp: int
    location_names: list[str]
    source: str


@dataclass
class SynthConfig:
    """Parameters of the synthetic drift stream generator."""

    n_windows: int = 8
    posts_per_window: int = 2000
    positive_fraction: float = 0.3
    vocab_relevant: int = 40
    vocab_irrelevant: int = 120
    drift_windows: list[int] = field(default_factory=lambda: [3, 6])
    swap_ratio: float = 0.5
    events_per_window: int = 6
    cells_universe: int = 500
    seed: int = 1
    # Extensions beyond the core stream shape.
    window_span: int = DEFAULT_WINDOW_SPAN
    words_min: int = 12
    words_max: int = 16
    surge_fraction: float = 0.0
    debut_fraction: float = 0.35

    def validate(self) -> None:
        if self.n_windows < 1 or self.posts_per_window < 1:
            raise ValueError("n_windows and posts_per_window must be positive")
        if not (0.0 < self.positive_fraction < 1.0):
            raise ValueError("positive_fraction must lie in (0, 1)")
        if not (0.0 <= self.swap_ratio <= 1.0):
            raise ValueError("swap_ratio must lie in [0, 1]")
        if self.vocab_relevant < 2 or self.vocab_irrelevant < 2:
            raise ValueError("vocabulary sizes must be at least 2")
        if any(w < 0 or w >= self.n_windows for w in self.drift_windows):
            raise ValueError("drift_windows must lie in [0, n_windows)")
        if self.events_per_window < 1 or self.cells_universe < 1:
            raise ValueError("events_per_window and cells_universe must be positive")
        if not (1 <= self.words_min <= self.words_max):
            raise ValueError("need 1 <= words_min <= words_max")
        if not (0.0 <= self.surge_fraction < 1.0):
            raise ValueError("surge_fraction must lie in [0, 1)")
        if not (0.0 <= self.debut_fraction <= 1.0):
            raise ValueError("debut_fraction must lie in [0, 1]")
        if self.window_span <= 8 * DAY:
            raise ValueError("window_span must exceed 8 days")


def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _is_str_list(value) -> bool:
    return isinstance(value, list) and all(isinstance(x, str) for x in value)


def _valid_ts(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def read_posts(path) -> tuple[list[SocialPost], int]:
    """Read a post file; returns (posts in file order, skipped line count)."""
    posts: list[SocialPost] = []
    skipped = 0
    for line in _read_lines(path):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            skipped += 1
            continue
        if not isinstance(obj, dict) or set(obj) != set(POST_KEYS):
            skipped += 1
            continue
        if (isinstance(obj["id"], str) and obj["id"]
                and isinstance(obj["text"], str) and obj["text"].strip()
                and _is_str_list(obj["locations"])
                and _valid_ts(obj["timestamp"])
                and _is_str_list(obj["links"])
                and isinstance(obj["author"], str)):
            posts.append(SocialPost(obj["id"], obj["text"], obj["locations"],
                                    obj["timestamp"], obj["links"], obj["author"]))
        else:
            skipped += 1
    return posts, skipped


def read_events(path) -> tuple[list[GroundTruthEvent], int]:
    """Read an event file; returns (events in file order, skipped line count)."""
    events: list[GroundTruthEvent] = []
    skipped = 0
    for line in _read_lines(path):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            skipped += 1
            continue
        if not isinstance(obj, dict) or set(obj) != set(EVENT_KEYS):
            skipped += 1
            continue
        lat, lon = obj["lat"], obj["lon"]
        if (isinstance(obj["id"], str) and obj["id"]
                and isinstance(lat, (int, float)) and not isinstance(lat, bool)
                and isinstance(lon, (int, float)) and not isinstance(lon, bool)
                and -90.0 <= lat <= 90.0 and -180.0 <= lon < 180.0
                and _valid_ts(obj["timestamp"])
                and _is_str_list(obj["location_names"])
                and len(obj["location_names"]) >= 1
                and all(n for n in obj["location_names"])
                and obj["source"] in EVENT_SOURCES):
            events.append(GroundTruthEvent(obj["id"], float(lat), float(lon),
                                           obj["timestamp"], obj["location_names"],
                                           obj["source"]))
        else:
            skipped += 1
    return events, skipped


def write_posts(path, posts: list[SocialPost]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in posts:
            fh.write(json.dumps({"id": p.id, "text": p.text, "locations": p.locations,
                                 "timestamp": p.timestamp, "links": p.links,
                                 "author": p.author}) + "\n")


def write_events(path, events: list[GroundTruthEvent]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in events:
            fh.write(json.dumps({"id": e.id, "lat": e.lat, "lon": e.lon,
                                 "timestamp": e.timestamp,
                                 "location_names": e.location_names,
                                 "source": e.source}) + "\n")


def cell_name(cell: GridCell) -> str:
    """Synthetic location name of a cell; zero-padded so no name is a
    substring of another."""
    return f"cell{cell.col:04d}_{cell.row:04d}"


def generate_stream(cfg: SynthConfig):
    """Generate a seeded synthetic stream with injected concept drift.

    Returns (posts, events, truth) where truth maps post id to its generating
    class. Positive posts combine the shared keyword with words from the
    current relevant vocabulary and the cell name of a ground-truth event
    within 3 days. Negative posts combine the keyword with irrelevant-
    vocabulary words. At each drift window, swap_ratio of the relevant
    vocabulary is retired into the irrelevant vocabulary and replaced with
    fresh words. Replacement words take only debut_fraction of positive
    draws during their first window and their full uniform share afterwards
    (new topics ramp up rather than step up). When surge_fraction > 0,
    negatives additionally oversample words retired at earlier windows (a
    topical surge, like election coverage adopting a disaster keyword).
    """
    cfg.validate()
    rng = Xoshiro256StarStar(cfg.seed)
    span = cfg.window_span

    word_counter = 0

    def fresh_words(n: int) -> list[str]:
        nonlocal word_counter
        words = [f"w{word_counter + i:05d}" for i in range(n)]
        word_counter += n
        return words

    relevant = fresh_words(cfg.vocab_relevant)
    irrelevant = [KEYWORD] + fresh_words(cfg.vocab_irrelevant - 1)
    # (retire_window, words) batches; hot once the stream moves past the
    # retirement window.
    retired: list[tuple[int, list[str]]] = []

    universe = [GridCell(rng.randrange(4320), rng.randrange(8640))
                for _ in range(cfg.cells_universe)]

    posts: list[SocialPost] = []
    events: list[GroundTruthEvent] = []
    truth: dict[str, int] = {}
    post_seq = 0
    event_seq = 0
    drift_at = set(cfg.drift_windows)

    for w in range(cfg.n_windows):
        start = w * span
        end = start + span

        n_fresh = 0
        if w in drift_at and cfg.swap_ratio > 0.0:
            n_retire = int(round(cfg.swap_ratio * len(relevant)))
            order = list(range(len(relevant)))
            rng.shuffle(order)
            chosen = sorted(order[:n_retire])
            batch = [relevant[i] for i in chosen]
            relevant = [x for i, x in enumerate(relevant) if i not in set(chosen)]
            relevant.extend(fresh_words(n_retire))
            irrelevant.extend(batch)
            retired.append((w, batch))
            n_fresh = n_retire

        hot = [word for rw, words in retired if rw < w for word in words]
        n_old = len(relevant) - n_fresh

        window_events = []
        for _ in range(cfg.events_per_window):
            cell = universe[rng.randrange(len(universe))]
            # Keep events 3 days inside both edges so every matching post
            # stays within the same window.
            ts = start + 3 * DAY + rng.randrange(span - 6 * DAY)
            lat, lon = cell_center(cell)
            ev = GroundTruthEvent(f"e{event_seq:05d}", lat, lon, ts,
                                  [cell_name(cell)], "synthetic")
            event_seq += 1
            window_events.append(ev)
            events.append(ev)

        for _ in range(cfg.posts_per_window):
            k = cfg.words_min + rng.randrange(cfg.words_max - cfg.words_min + 1)
            positive = rng.random() < cfg.positive_fraction
            if positive:
                ev = window_events[rng.randrange(len(window_events))]
                ts = ev.timestamp + rng.randrange(6 * DAY + 1) - 3 * DAY
                # Words introduced at this window's swap take only a debut
                # share of positive draws; they reach their uniform share
                # from the next window on (topics ramp up, not step up).
                words = []
                for _ in range(k):
                    if n_old == 0 or (n_fresh
                                      and rng.random() < cfg.debut_fraction):
                        words.append(relevant[n_old + rng.randrange(n_fresh)])
                    else:
                        words.append(relevant[rng.randrange(n_old)])
                words.append(ev.location_names[0])
            else:
                ts = start + rng.randrange(span)
                words = []
                for _ in range(k):
                    if hot and rng.random() < cfg.surge_fraction:
                        words.append(hot[rng.randrange(len(hot))])
                    else:
                        words.append(irrelevant[rng.randrange(len(irrelevant))])
            text = " ".join([KEYWORD] + words)
            post = SocialPost(f"p{post_seq:06d}", text, [], ts, [],
                              f"u{rng.randrange(1000):04d}")
            post_seq += 1
            posts.append(post)
            truth[post.id] = 1 if positive else 0

    return posts, events, truth
