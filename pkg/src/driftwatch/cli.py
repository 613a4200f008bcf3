"""Command-line interface.

Subcommands: generate, label, train, run, bench, detect. Exit codes: 0 on
success, 1 on usage errors, 2 on data or configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import PipelineConfig, parse_config
from .ensemble import ensemble_predict
from .errors import DriftwatchError
from .features import vectorize
from .ingest import (SynthConfig, generate_stream, read_events, read_posts,
                     write_events, write_posts)
from .labeler import generate_training_data
from .learners import LabeledSample, train as train_model
from .pipeline import (assign_windows, bench as run_bench, detect_events,
                       run_windowed)
from .registry import load as load_store, save as save_store, ClassifierStore
from .reports import (render_bench_figures, render_run_figures,
                      write_bench_csv, write_events_geojson,
                      write_labeled_jsonl, write_predictions_jsonl,
                      write_run_csv)
from .features import centroid
from .rng import derive_seed


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_config(args) -> PipelineConfig:
    cfg = parse_config(args.config) if args.config else PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "out", None) is not None:
        cfg = replace(cfg, out=args.out)
    if getattr(args, "posts", None) is not None:
        cfg = replace(cfg, posts=args.posts)
    if getattr(args, "events", None) is not None:
        cfg = replace(cfg, events=args.events)
    cfg.validate()
    return cfg


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out if cfg.out else "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(value, flag: str):
    if value is None:
        raise DriftwatchError(f"missing required input: pass {flag} or set it "
                              "in the config file")
    return value


def _read_posts_logged(path):
    posts, skipped = read_posts(path)
    if skipped:
        print(f"skipped {skipped} malformed post line(s) in {path}")
    return posts


def _read_events_logged(path):
    events, skipped = read_events(path)
    if skipped:
        print(f"skipped {skipped} malformed event line(s) in {path}")
    return events


def _read_gazetteer(cfg: PipelineConfig) -> list[str]:
    if not cfg.gazetteer:
        return []
    try:
        with open(cfg.gazetteer, "r", encoding="utf-8") as fh:
            return [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise DriftwatchError(f"cannot read gazetteer {cfg.gazetteer}: {exc}")


def _synth_config(cfg: PipelineConfig) -> SynthConfig:
    synth = cfg.synth_config()
    try:
        synth.validate()
    except ValueError as exc:
        raise DriftwatchError(f"invalid synthetic stream settings: {exc}")
    return synth


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    posts, events, truth = generate_stream(_synth_config(cfg))
    write_posts(out / "posts.jsonl", posts)
    write_events(out / "events.jsonl", events)
    with open(out / "truth.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        import json
        for p in posts:
            fh.write(json.dumps({"post_id": p.id, "label": truth[p.id]}) + "\n")
    n_pos = sum(truth.values())
    print(f"wrote {len(posts)} posts ({n_pos} positive), {len(events)} events "
          f"to {out}")
    return 0


def cmd_label(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    posts = _read_posts_logged(_require(cfg.posts, "--posts"))
    events = _read_events_logged(_require(cfg.events, "--events"))
    windows = assign_windows(posts, events, cfg.window_span, cfg.dt_max)
    if not windows:
        raise DriftwatchError("no posts to label")
    labeled_sets = [
        generate_training_data(w, cfg.dt_max, cfg.radius, cfg.exclusion_max,
                               cfg.exclusion, cfg.dim)
        for w in windows
    ]
    path = out / "labeled.jsonl"
    write_labeled_jsonl(path, labeled_sets)
    total = sum(ls.stats["labeled"] for ls in labeled_sets)
    pos = sum(ls.stats["positives"] for ls in labeled_sets)
    exc = sum(ls.stats["excluded"] for ls in labeled_sets)
    print(f"labeled {total} posts ({pos} positive, {exc} excluded) across "
          f"{len(windows)} window(s) -> {path}")
    return 0


def cmd_train(args) -> int:
    import json

    cfg = _load_config(args)
    out = _out_dir(cfg)
    posts = _read_posts_logged(_require(cfg.posts, "--posts"))
    by_id = {p.id: p for p in posts}
    labels_path = _require(args.labels, "--labels")
    samples = []
    max_window = 0
    try:
        with open(labels_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                if "stats" in row:
                    continue
                post = by_id.get(row["post_id"])
                if post is None:
                    continue
                samples.append(LabeledSample(vectorize(post.text, cfg.dim),
                                             int(row["label"]),
                                             post.timestamp, post.id))
                max_window = max(max_window, int(row.get("window", 0)))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise DriftwatchError(f"cannot read labels {labels_path}: {exc}")
    if not samples:
        raise DriftwatchError("no labeled samples matched the post file")
    store = ClassifierStore()
    key = centroid([s.features for s in samples])
    for ki, kind in enumerate(cfg.learner_kinds):
        hyper = cfg.hyper(derive_seed(cfg.seed, 7, max_window, ki))
        try:
            model = train_model(samples, kind, hyper, cfg.dim, max_window)
        except ValueError as exc:
            raise DriftwatchError(str(exc))
        record = store.put(model, key, max_window)
        f = model.val_history[-1][1]
        print(f"trained {kind} on {len(samples)} samples "
              f"(held-out f1 {f:.3f}) as record {record.id}")
    store_dir = out / "store"
    save_store(store, store_dir)
    print(f"saved {len(store)} model(s) to {store_dir}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    posts = _read_posts_logged(_require(cfg.posts, "--posts"))
    events = _read_events_logged(_require(cfg.events, "--events"))
    result = run_windowed(cfg, posts, events, gazetteer=_read_gazetteer(cfg))
    write_run_csv(out / "run_metrics.csv", result)
    all_events = [ev for res in result.windows for ev in res.events]
    write_events_geojson(out / "events.geojson", all_events)
    write_labeled_jsonl(out / "labeled.jsonl", result.labeled_sets)
    figures = render_run_figures(result, out)
    if args.store:
        save_store(result.store, args.store)
        print(f"saved registry ({len(result.store)} models) to {args.store}")
    print(f"processed {len(result.windows)} windows, "
          f"{sum(r.n_posts for r in result.windows)} posts, "
          f"detected {len(all_events)} events")
    print(f"wrote {out / 'run_metrics.csv'}, {out / 'events.geojson'}, "
          f"{out / 'labeled.jsonl'} and {len(figures)} figure(s)")
    return 0


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    _synth_config(cfg)
    result = run_bench(cfg)
    write_bench_csv(out / "bench.csv", result.rows)
    figures = render_bench_figures(result.rows, out)
    print(f"stream sha256: {result.stream_sha256}")
    print("window  f1_static  f1_adaptive  ev_static  ev_adaptive  ev_both")
    for row in result.rows:
        print(f"{row['window']:>6}  {row['f1_static']:>9.4f}  "
              f"{row['f1_adaptive']:>11.4f}  {row['events_static']:>9}  "
              f"{row['events_adaptive']:>11}  {row['events_both']:>7}")
    pred_rows = [r for r in result.rows if r["window"] > 0]
    mean_s = sum(r["f1_static"] for r in pred_rows) / len(pred_rows)
    mean_a = sum(r["f1_adaptive"] for r in pred_rows) / len(pred_rows)
    print(f"mean f1 over prediction windows: static {mean_s:.4f}, "
          f"adaptive {mean_a:.4f}")
    print(f"static events contained in adaptive events: "
          f"{'yes' if result.containment else 'no'}")
    print(f"wrote {out / 'bench.csv'} and {len(figures)} figure(s)")
    return 0


def cmd_detect(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(cfg)
    store = load_store(args.store)
    if len(store) == 0:
        raise DriftwatchError(f"store {args.store} contains no models")
    posts = _read_posts_logged(_require(cfg.posts, "--posts"))
    ens_cfg = cfg.ensemble_config()
    rows = []
    labels = {}
    for p in posts:
        vec = vectorize(p.text, cfg.dim)
        if ens_cfg.retrieval == "recency":
            members = store.recent(ens_cfg.size)
        else:
            members = store.relevant(vec, ens_cfg.size)
        pred = ensemble_predict(vec, members, ens_cfg)
        labels[p.id] = pred.label
        rows.append({"post_id": p.id, "label": pred.label,
                     "score": round(pred.score, 6)})
    write_predictions_jsonl(out / "predictions.jsonl", rows)
    n_rel = sum(labels.values())
    print(f"classified {len(posts)} posts, {n_rel} relevant "
          f"-> {out / 'predictions.jsonl'}")
    if cfg.events:
        events = _read_events_logged(cfg.events)
        windows = assign_windows(posts, events, cfg.window_span, cfg.dt_max)
        from .pipeline import _live_cells
        cells = _live_cells(posts, events, windows, cfg, _read_gazetteer(cfg))
        located = [(cells[p.id], p.timestamp, p.id) for p in posts
                   if labels[p.id] == 1 and p.id in cells]
        detected = detect_events(located, cfg.min_posts, cfg.group_radius,
                                 cfg.group_span)
        write_events_geojson(out / "events.geojson", detected)
        print(f"grouped {len(located)} located posts into {len(detected)} "
              f"event(s) -> {out / 'events.geojson'}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="driftwatch",
                     description="Drift-adaptive event detection for "
                                 "social-sensor text streams")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, posts=False, events=False):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory (default ./out)")
        if posts:
            p.add_argument("--posts", help="post JSONL file")
        if events:
            p.add_argument("--events", help="event JSONL file")

    p = sub.add_parser("generate", help="write a synthetic drift stream")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("label", help="label windows against ground truth")
    common(p, posts=True, events=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train models from a labeled export")
    common(p, posts=True)
    p.add_argument("--labels", help="labeled JSONL produced by label")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="run the windowed pipeline on files")
    common(p, posts=True, events=True)
    p.add_argument("--store", help="also save the final registry here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="adaptive vs static benchmark")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("detect", help="classify a post file with a saved store")
    common(p, posts=True, events=True)
    p.add_argument("--store", required=True, help="saved registry directory")
    p.set_defaults(func=cmd_detect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DriftwatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
