"""Flat key/value configuration for the pipeline and its CLI.

Files hold one ``key = value`` pair per line; blank lines and ``#`` comments
are ignored. Unknown keys and duplicate keys are errors, so typos fail fast.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .drift import MODES, SCHEDULE_KINDS, DriftDetector, Schedule
from .ensemble import RETRIEVALS, SCHEMES, EnsembleConfig
from .errors import ConfigError
from .features import DEFAULT_DIM
from .geotime import DAY
from .ingest import DEFAULT_WINDOW_SPAN, SynthConfig
from .labeler import DEFAULT_EXCLUSION_MAX
from .learners import KINDS, Hyper


@dataclass
class PipelineConfig:
    # Windowing and features
    window_span: int = DEFAULT_WINDOW_SPAN
    dim: int = DEFAULT_DIM
    # Learners
    learner_kinds: list[str] = field(default_factory=lambda: ["logreg"])
    lr: float = 0.1
    l2: float = 1e-4
    epochs: int = 5
    update_lr: float = 0.05
    update_epochs: int = 2
    # Ensemble
    scheme: str = "unweighted"
    retrieval: str = "recency"
    ensemble_size: int = 5
    expert_weight_logreg: float | None = None
    expert_weight_svm: float | None = None
    relevancy_query: str = "post"  # post | batch
    # Schedule
    schedule: str = "user"
    schedule_interval: int = 30 * DAY
    min_gap: int = 7 * DAY
    max_gap: int = 60 * DAY
    # Detector
    detector_mode: str = "confidence"
    detector_window: int = 500
    low_band: float = 0.25
    high_band: float = 0.75
    margin_tau: float = 0.5
    fraction_theta: float = 0.3
    persistence: int = 200
    # Labeler and location memory
    dt_max: int = 3 * DAY
    radius: int = 0
    exclusion: bool = True
    exclusion_max: int = DEFAULT_EXCLUSION_MAX
    location_ttl: int = 7 * DAY
    # Event grouping
    min_posts: int = 1
    group_radius: int = 1
    group_span: int = 3 * DAY
    # Stream handling
    dedup: bool = False
    seed: int = 1
    # Synthetic stream
    n_windows: int = 8
    posts_per_window: int = 2000
    positive_fraction: float = 0.3
    vocab_relevant: int = 40
    vocab_irrelevant: int = 120
    drift_windows: list[int] = field(default_factory=lambda: [3, 6])
    swap_ratio: float = 0.5
    events_per_window: int = 6
    cells_universe: int = 500
    words_min: int = 12
    words_max: int = 16
    surge_fraction: float = 0.0
    debut_fraction: float = 0.35
    # IO paths (optional; CLI flags override)
    posts: str | None = None
    events: str | None = None
    out: str | None = None
    gazetteer: str | None = None

    def validate(self) -> None:
        try:
            if self.window_span <= 0 or self.dim < 2:
                raise ValueError("window_span must be positive and dim >= 2")
            if not self.learner_kinds:
                raise ValueError("learner_kinds must not be empty")
            for kind in self.learner_kinds:
                if kind not in KINDS:
                    raise ValueError(f"unknown learner kind: {kind}")
            if len(set(self.learner_kinds)) != len(self.learner_kinds):
                raise ValueError("learner_kinds contains duplicates")
            if self.scheme not in SCHEMES:
                raise ValueError(f"unknown scheme: {self.scheme}")
            if self.retrieval not in RETRIEVALS:
                raise ValueError(f"unknown retrieval: {self.retrieval}")
            if self.relevancy_query not in ("post", "batch"):
                raise ValueError("relevancy_query must be post or batch")
            if self.schedule not in SCHEDULE_KINDS:
                raise ValueError(f"unknown schedule: {self.schedule}")
            if self.detector_mode not in MODES:
                raise ValueError(f"unknown detector_mode: {self.detector_mode}")
            if self.scheme == "expert":
                for kind in self.learner_kinds:
                    if self._expert_weight(kind) is None:
                        raise ValueError(f"expert scheme needs expert_weight_{kind}")
            if self.dt_max <= 0 or self.exclusion_max < self.dt_max:
                raise ValueError("need 0 < dt_max <= exclusion_max")
            if self.location_ttl <= 0:
                raise ValueError("location_ttl must be positive")
            if self.radius < 0 or self.group_radius < 0 or self.group_span < 0:
                raise ValueError("radius parameters must be nonnegative")
            if self.min_posts < 1 or self.ensemble_size < 1:
                raise ValueError("min_posts and ensemble_size must be positive")
            if self.seed < 0 or self.seed >= 1 << 64:
                raise ValueError("seed must fit in 64 bits")
            # Constructor validation for the composite parts. The synthetic
            # stream parameters are validated where generation happens, so
            # file-replay configs may use window spans the generator rejects.
            self.hyper()
            self.ensemble_config().validate()
            self.schedule_obj().validate()
            self.detector()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _expert_weight(self, kind: str) -> float | None:
        return {"logreg": self.expert_weight_logreg,
                "svm": self.expert_weight_svm}[kind]

    def hyper(self, seed: int | None = None) -> Hyper:
        if self.lr <= 0 or self.update_lr <= 0 or self.l2 < 0:
            raise ValueError("learning rates must be positive, l2 nonnegative")
        if self.epochs < 1 or self.update_epochs < 0:
            raise ValueError("epochs must be >= 1 and update_epochs >= 0")
        return Hyper(self.lr, self.l2, self.epochs, self.update_lr,
                     self.update_epochs, self.seed if seed is None else seed)

    def ensemble_config(self) -> EnsembleConfig:
        weights = None
        if self.expert_weight_logreg is not None or self.expert_weight_svm is not None:
            weights = {k: w for k in KINDS
                       if (w := self._expert_weight(k)) is not None}
        return EnsembleConfig(self.scheme, self.retrieval, self.ensemble_size,
                              weights)

    def schedule_obj(self) -> Schedule:
        return Schedule(self.schedule, self.schedule_interval, self.min_gap,
                        self.max_gap)

    def detector(self) -> DriftDetector:
        return DriftDetector(self.detector_mode, self.detector_window,
                             self.low_band, self.high_band, self.margin_tau,
                             self.fraction_theta, self.persistence)

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            n_windows=self.n_windows,
            posts_per_window=self.posts_per_window,
            positive_fraction=self.positive_fraction,
            vocab_relevant=self.vocab_relevant,
            vocab_irrelevant=self.vocab_irrelevant,
            drift_windows=list(self.drift_windows),
            swap_ratio=self.swap_ratio,
            events_per_window=self.events_per_window,
            cells_universe=self.cells_universe,
            seed=self.seed,
            window_span=self.window_span,
            words_min=self.words_min,
            words_max=self.words_max,
            surge_fraction=self.surge_fraction,
            debut_fraction=self.debut_fraction,
        )


def _parse_bool(text: str) -> bool:
    if text in ("on", "true", "yes", "1"):
        return True
    if text in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(part.strip()) for part in text.split(",")]


def _parse_str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


_PARSERS = {
    int: int,
    float: float,
    str: str.strip,
    bool: _parse_bool,
}


def _field_parser(f) -> object:
    if f.name in ("drift_windows",):
        return _parse_int_list
    if f.name in ("learner_kinds",):
        return _parse_str_list
    if f.type in ("int", "int | None"):
        return int
    if f.type in ("float", "float | None"):
        return float
    if f.type == "bool":
        return _parse_bool
    return str.strip


def parse_config(path) -> PipelineConfig:
    """Read a config file into a validated PipelineConfig."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_lines(lines, source=str(path))


def parse_config_lines(lines, source: str = "<config>") -> PipelineConfig:
    parsers = {f.name: _field_parser(f) for f in fields(PipelineConfig)}
    cfg = PipelineConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in parsers:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            cfg = replace(cfg, **{key: parsers[key](value)})
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    cfg.validate()
    return cfg
