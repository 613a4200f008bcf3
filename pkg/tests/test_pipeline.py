"""Windowed pipeline, event grouping, reports, and the CLI entry points."""

from __future__ import annotations

import dataclasses
import json

import pytest

from driftwatch.cli import main
from driftwatch.config import PipelineConfig
from driftwatch.errors import DataError
from driftwatch.geotime import DAY, GridCell, chebyshev
from driftwatch.ingest import generate_stream, write_events, write_posts
from driftwatch.pipeline import (
    BenchResult,
    DetectedEvent,
    assign_windows,
    bench,
    detect_events,
    run_windowed,
    stream_checksum,
)
from driftwatch.reports import (
    BENCH_HEADER,
    RUN_HEADER,
    events_geojson,
    write_bench_csv,
)
from driftwatch.rng import Xoshiro256StarStar

def small_cfg(**overrides) -> PipelineConfig:
    base = dict(n_windows=3, posts_per_window=300, events_per_window=3,
                drift_windows=[1], seed=5)
    base.update(overrides)
    return dataclasses.replace(PipelineConfig(), **base)


def small_stream(cfg: PipelineConfig):
    return generate_stream(cfg.synth_config())


# --------------------------------------------------------- assign_windows


def test_assign_windows_partitions_posts():
    cfg = small_cfg()
    posts, events, _ = small_stream(cfg)
    windows = assign_windows(posts, events, cfg.window_span, cfg.dt_max)
    assert len(windows) == 3
    assert sum(len(w.posts) for w in windows) == len(posts)
    for w in windows:
        assert w.end - w.start == cfg.window_span
        assert w.start % cfg.window_span == 0
        for p in w.posts:
            assert w.start <= p.timestamp < w.end


def test_assign_windows_duplicates_edge_events():
    cfg = small_cfg()
    posts, events, _ = small_stream(cfg)
    # Move one event to just past a boundary: it must appear in both windows.
    boundary = (min(p.timestamp for p in posts) // cfg.window_span + 1) \
        * cfg.window_span
    near = dataclasses.replace(events[0], timestamp=boundary + DAY)
    far = dataclasses.replace(events[1], timestamp=boundary + 10 * DAY)
    windows = assign_windows(posts, [near, far], cfg.window_span, cfg.dt_max)
    w0_ids = {e.id for e in windows[0].events}
    w1_ids = {e.id for e in windows[1].events}
    assert near.id in w0_ids and near.id in w1_ids
    assert far.id in w1_ids and far.id not in w0_ids


def test_assign_windows_empty():
    assert assign_windows([], [], 30 * DAY, 3 * DAY) == []


# -------------------------------------------------------- stream_checksum


def test_stream_checksum_sensitivity():
    cfg = small_cfg()
    posts, _, _ = small_stream(cfg)
    base = stream_checksum(posts)
    assert base == stream_checksum(list(posts))
    bumped = [dataclasses.replace(posts[0], text=posts[0].text + "!")] \
        + posts[1:]
    assert stream_checksum(bumped) != base
    assert stream_checksum(posts[1:]) != base


# ----------------------------------------------------------- detect_events


def located(cell: GridCell, ts: int, pid: str) -> tuple[GridCell, int, str]:
    return (cell, ts, pid)


def canonical(events: list[DetectedEvent]):
    return [(tuple(e.cells), e.t_start, e.t_end, tuple(e.post_ids))
            for e in events]


def brute_force_groups(items, min_posts=1, group_radius=1,
                       group_span=3 * DAY):
    """Independent all-pairs single-linkage reference."""
    n = len(items)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if (chebyshev(items[i][0], items[j][0]) <= group_radius
                    and abs(items[i][1] - items[j][1]) <= group_span):
                adj[i].append(j)
                adj[j].append(i)
    seen = [False] * n
    out = []
    for i in range(n):
        if seen[i]:
            continue
        stack, comp = [i], []
        seen[i] = True
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in adj[a]:
                if not seen[b]:
                    seen[b] = True
                    stack.append(b)
        if len(comp) < min_posts:
            continue
        cells = tuple(sorted({items[k][0] for k in comp},
                             key=lambda c: (c.row, c.col)))
        stamps = [items[k][1] for k in comp]
        out.append((cells, min(stamps), max(stamps),
                    tuple(sorted(items[k][2] for k in comp))))
    out.sort(key=lambda e: (e[1], e[0][0].row, e[0][0].col))
    return out


def test_detect_three_posts_one_event():
    cell = GridCell(100, 200)
    items = [located(cell, DAY, "a"), located(cell, 2 * DAY, "b"),
             located(cell, 3 * DAY, "c")]
    events = detect_events(items)
    assert len(events) == 1
    assert events[0].post_ids == ["a", "b", "c"]
    assert (events[0].t_start, events[0].t_end) == (DAY, 3 * DAY)
    assert events[0].cells == [cell]
    assert events[0].post_count == 3


def test_detect_min_posts_threshold():
    cell = GridCell(100, 200)
    items = [located(cell, i * 1000, f"p{i}") for i in range(9)]
    assert detect_events(items, min_posts=10) == []
    assert len(detect_events(items, min_posts=9)) == 1


def test_detect_two_far_clusters():
    a, b = GridCell(100, 200), GridCell(100, 300)
    items = [located(a, DAY, "a1"), located(a, DAY + 1, "a2"),
             located(b, DAY, "b1"), located(b, DAY + 2, "b2")]
    events = detect_events(items)
    assert len(events) == 2
    assert [e.post_ids for e in events] == [["a1", "a2"], ["b1", "b2"]]


def test_detect_chain_links_transitively():
    # a-b adjacent, b-c adjacent, a-c two apart: one component via b.
    a, b, c = GridCell(10, 10), GridCell(10, 11), GridCell(10, 12)
    items = [located(a, 0, "pa"), located(b, 100, "pb"), located(c, 200, "pc")]
    events = detect_events(items, group_radius=1)
    assert len(events) == 1
    assert events[0].cells == [a, b, c]


def test_detect_time_gap_splits():
    cell = GridCell(5, 5)
    items = [located(cell, 0, "a"), located(cell, 3 * DAY, "b"),
             located(cell, 7 * DAY, "c")]
    events = detect_events(items, group_span=3 * DAY)
    assert [e.post_ids for e in events] == [["a", "b"], ["c"]]


def test_detect_input_order_invariance():
    rng = Xoshiro256StarStar(7)
    items = [located(GridCell(50 + rng.randrange(4), 60 + rng.randrange(4)),
                     rng.randrange(10 * DAY), f"p{i:03d}")
             for i in range(60)]
    base = canonical(detect_events(items, group_span=DAY))
    for _ in range(5):
        shuffled = items[:]
        for i in range(len(shuffled) - 1, 0, -1):
            j = rng.randrange(i + 1)
            shuffled[i], shuffled[j] = shuffled[j], shuffled[i]
        assert canonical(detect_events(shuffled, group_span=DAY)) == base


@pytest.mark.parametrize("seed", range(1, 9))
def test_detect_matches_brute_force(seed):
    rng = Xoshiro256StarStar(seed)
    n = 40 + rng.randrange(60)
    radius = rng.randrange(3)
    span = (1 + rng.randrange(3)) * DAY
    min_posts = 1 + rng.randrange(3)
    items = [located(GridCell(100 + rng.randrange(6), 200 + rng.randrange(6)),
                     rng.randrange(12 * DAY), f"p{i:03d}")
             for i in range(n)]
    got = canonical(detect_events(items, min_posts, radius, span))
    want = brute_force_groups(items, min_posts, radius, span)
    assert got == want


def test_detect_empty():
    assert detect_events([]) == []


# ------------------------------------------------------------ run_windowed


def test_run_window_zero_bootstraps():
    cfg = small_cfg()
    posts, events, truth = small_stream(cfg)
    result = run_windowed(cfg, posts, events, truth)
    w0 = result.windows[0]
    assert w0.metrics_truth is None
    assert w0.n_relevant == 0
    assert w0.events == []
    assert w0.registry_size >= 1
    assert w0.updated is True
    for res in result.windows[1:]:
        assert res.metrics_truth is not None
        assert res.n_posts > 0


def test_registry_growth_doubles_plus_one():
    cfg = small_cfg(n_windows=4, posts_per_window=250, drift_windows=[2])
    posts, events, truth = small_stream(cfg)
    result = run_windowed(cfg, posts, events, truth)
    assert [r.registry_size for r in result.windows] == [1, 3, 7, 15]


def test_registry_growth_two_kinds():
    cfg = small_cfg(learner_kinds=["logreg", "svm"])
    posts, events, truth = small_stream(cfg)
    result = run_windowed(cfg, posts, events, truth)
    # 2, then 2*2+2, then 6*2+2.
    assert [r.registry_size for r in result.windows] == [2, 6, 14]


def test_static_arm_never_updates():
    cfg = small_cfg()
    posts, events, truth = small_stream(cfg)
    result = run_windowed(cfg, posts, events, truth, static=True)
    assert [r.registry_size for r in result.windows] == [1, 1, 1]
    assert [r.updated for r in result.windows] == [True, False, False]


def test_run_windowed_deterministic():
    cfg = small_cfg()
    posts, events, truth = small_stream(cfg)
    a = run_windowed(cfg, posts, events, truth)
    b = run_windowed(cfg, posts, events, truth)
    assert a.stream_sha256 == b.stream_sha256
    for ra, rb in zip(a.windows, b.windows):
        assert ra.metrics_truth == rb.metrics_truth
        assert ra.registry_size == rb.registry_size
        assert canonical(ra.events) == canonical(rb.events)
    assert a.shifts == b.shifts


def test_run_windowed_empty_stream_rejected():
    with pytest.raises(DataError, match="no posts"):
        run_windowed(small_cfg(), [], [], {})


def test_dedup_drops_repeated_text():
    cfg = small_cfg(dedup=True)
    posts, events, truth = small_stream(cfg)
    doubled = posts + [dataclasses.replace(p, id=p.id + "x") for p in posts]
    doubled.sort(key=lambda p: p.timestamp)
    result = run_windowed(cfg, doubled, events, truth)
    assert sum(r.n_posts for r in result.windows) == len(posts)


def test_relevance_retrieval_runs():
    cfg = small_cfg(retrieval="relevance")
    posts, events, truth = small_stream(cfg)
    result = run_windowed(cfg, posts, events, truth)
    assert result.windows[1].metrics_truth.f1 > 0.5


# ------------------------------------------------------------------ bench


@pytest.fixture(scope="module")
def small_bench() -> BenchResult:
    return bench(small_cfg())


def test_bench_rows_shape(small_bench):
    rows = small_bench.rows
    assert len(rows) == 3
    assert all(set(r) == set(BENCH_HEADER) for r in rows)
    assert rows[0]["f1_adaptive"] == 0.0 and rows[0]["f1_static"] == 0.0
    assert rows[0]["centroid_shift"] == 0.0
    assert isinstance(small_bench.containment, bool)
    assert small_bench.adaptive.stream_sha256 == small_bench.stream_sha256
    assert small_bench.static.stream_sha256 == small_bench.stream_sha256


def test_bench_adaptive_beats_static_after_drift(small_bench):
    rows = small_bench.rows
    assert rows[2]["f1_adaptive"] > rows[2]["f1_static"]


def test_bench_csv_byte_stable(small_bench, tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_bench_csv(p1, small_bench.rows)
    write_bench_csv(p2, small_bench.rows)
    data = p1.read_bytes()
    assert data == p2.read_bytes()
    header = data.decode("utf-8").splitlines()[0]
    assert header == ",".join(BENCH_HEADER)


# ---------------------------------------------------------------- reports


def test_events_geojson_structure():
    ev = DetectedEvent([GridCell(0, 0), GridCell(0, 1)], 100, 200, ["a", "b"])
    doc = events_geojson([ev])
    assert doc["type"] == "FeatureCollection"
    feat = doc["features"][0]
    assert feat["geometry"]["type"] == "Point"
    lon, lat = feat["geometry"]["coordinates"]
    assert -180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0
    assert feat["properties"]["post_count"] == 2
    assert feat["properties"]["n_cells"] == 2
    json.dumps(doc)  # serializable


# -------------------------------------------------------------------- CLI


def write_config(tmp_path, **pairs) -> str:
    path = tmp_path / "run.cfg"
    lines = []
    for key, value in pairs.items():
        if isinstance(value, bool):
            value = "on" if value else "off"
        elif isinstance(value, list):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{key} = {value}\n")
    path.write_text("".join(lines), encoding="utf-8")
    return str(path)


@pytest.fixture(scope="module")
def cli_chain(tmp_path_factory):
    """generate -> label -> train executed once for the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    cfg = write_config(root, n_windows=3, posts_per_window=300,
                       events_per_window=3, drift_windows=[1], seed=5)
    gen = root / "gen"
    assert main(["generate", "--config", cfg, "--out", str(gen)]) == 0
    posts = str(gen / "posts.jsonl")
    events = str(gen / "events.jsonl")
    lab = root / "lab"
    assert main(["label", "--config", cfg, "--posts", posts,
                 "--events", events, "--out", str(lab)]) == 0
    trn = root / "trn"
    assert main(["train", "--config", cfg, "--posts", posts,
                 "--labels", str(lab / "labeled.jsonl"),
                 "--out", str(trn)]) == 0
    return {"root": root, "cfg": cfg, "posts": posts, "events": events,
            "labeled": lab / "labeled.jsonl", "store": trn / "store"}


def test_cli_generate_outputs(cli_chain):
    gen = cli_chain["root"] / "gen"
    posts_lines = (gen / "posts.jsonl").read_text().splitlines()
    assert len(posts_lines) == 900
    truth_lines = (gen / "truth.jsonl").read_text().splitlines()
    assert len(truth_lines) == 900
    assert {"post_id", "label"} == set(json.loads(truth_lines[0]))


def test_cli_label_outputs(cli_chain):
    lines = cli_chain["labeled"].read_text().splitlines()
    rows = [json.loads(line) for line in lines]
    assert "stats" in rows[-1]
    assert rows[-1]["stats"]["labeled"] == len(rows) - 1
    assert {r["label"] for r in rows[:-1]} == {0, 1}


def test_cli_train_store_layout(cli_chain):
    store = cli_chain["store"]
    assert (store / "manifest.json").is_file()
    assert (store / "checksums.txt").is_file()
    assert list(store.glob("*.weights"))


def test_cli_detect_with_store(cli_chain, capsys):
    out = cli_chain["root"] / "det"
    code = main(["detect", "--config", cli_chain["cfg"],
                 "--posts", cli_chain["posts"],
                 "--events", cli_chain["events"],
                 "--store", str(cli_chain["store"]), "--out", str(out)])
    assert code == 0
    preds = [json.loads(line) for line
             in (out / "predictions.jsonl").read_text().splitlines()]
    assert len(preds) == 900
    assert all(set(p) == {"post_id", "label", "score"} for p in preds)
    doc = json.loads((out / "events.geojson").read_text())
    assert doc["type"] == "FeatureCollection"
    capsys.readouterr()


def test_cli_run_outputs(cli_chain):
    out = cli_chain["root"] / "run"
    code = main(["run", "--config", cli_chain["cfg"],
                 "--posts", cli_chain["posts"],
                 "--events", cli_chain["events"], "--out", str(out)])
    assert code == 0
    lines = (out / "run_metrics.csv").read_text().splitlines()
    assert lines[0] == ",".join(RUN_HEADER)
    assert len(lines) == 4  # header + 3 windows
    assert (out / "events.geojson").is_file()
    assert (out / "labeled.jsonl").is_file()
    for name in ("metrics.png", "events.png", "centroid_shift.png"):
        assert (out / name).stat().st_size > 0


def test_cli_bench_outputs(cli_chain, capsys):
    out = cli_chain["root"] / "bench"
    code = main(["bench", "--config", cli_chain["cfg"], "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "stream sha256:" in text
    lines = (out / "bench.csv").read_text().splitlines()
    assert lines[0] == ",".join(BENCH_HEADER)
    assert len(lines) == 4
    for name in ("f1_compare.png", "events_compare.png", "centroid_shift.png"):
        assert (out / name).stat().st_size > 0


def test_cli_usage_errors_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["detect"])  # missing required --store
    assert exc.value.code == 1


def test_cli_data_errors_exit_2(tmp_path, capsys):
    missing = str(tmp_path / "nope.jsonl")
    code = main(["label", "--posts", missing, "--events", missing,
                 "--out", str(tmp_path / "o")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_cli_bad_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("scheme = banana\n", encoding="utf-8")
    code = main(["bench", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "unknown scheme" in capsys.readouterr().err


def test_cli_missing_store_exit_2(tmp_path, cli_chain, capsys):
    code = main(["detect", "--posts", cli_chain["posts"],
                 "--store", str(tmp_path / "absent"),
                 "--out", str(tmp_path / "o")])
    assert code == 2
    capsys.readouterr()


def test_cli_seed_override_changes_stream(tmp_path, cli_chain):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["generate", "--config", cli_chain["cfg"], "--seed", "9",
                 "--out", str(out_a)]) == 0
    assert main(["generate", "--config", cli_chain["cfg"], "--seed", "10",
                 "--out", str(out_b)]) == 0
    assert (out_a / "posts.jsonl").read_text() \
        != (out_b / "posts.jsonl").read_text()


def test_write_posts_read_back_roundtrip(tmp_path):
    cfg = small_cfg()
    posts, events, _ = small_stream(cfg)
    write_posts(tmp_path / "p.jsonl", posts)
    write_events(tmp_path / "e.jsonl", events)
    from driftwatch.ingest import read_events, read_posts
    back_posts, skipped_p = read_posts(tmp_path / "p.jsonl")
    back_events, skipped_e = read_events(tmp_path / "e.jsonl")
    assert (skipped_p, skipped_e) == (0, 0)
    assert back_posts == posts
    assert back_events == events
