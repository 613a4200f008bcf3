"""Vote combination for classifier ensembles.

Members contribute hard 0/1 labels. Three weighting schemes: uniform,
expert-assigned per learner kind, and model-weighted by each member's
held-out f-score from the window it was last trained on. A combined score
of exactly 0.5 counts as relevant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .features import SparseVector
from .learners import Prediction, predict
from .registry import ClassifierRecord

SCHEMES = ("unweighted", "expert", "model_weighted")
RETRIEVALS = ("recency", "relevancy")


@dataclass
class EnsembleConfig:
    scheme: str = "unweighted"
    retrieval: str = "recency"
    size: int = 5
    expert_weights: Optional[dict[str, float]] = field(default=None)

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme: {self.scheme}")
        if self.retrieval not in RETRIEVALS:
            raise ValueError(f"unknown retrieval: {self.retrieval}")
        if self.size < 1:
            raise ValueError("ensemble size must be at least 1")
        if self.expert_weights is not None:
            if any(w < 0 for w in self.expert_weights.values()):
                raise ValueError("expert weights must be nonnegative")
            if sum(self.expert_weights.values()) <= 0:
                raise ValueError("expert weights must have positive sum")


class EnsemblePrediction(NamedTuple):
    score: float
    label: int
    members: list[Prediction]


def _last_trained_f(record: ClassifierRecord) -> float:
    model = record.model
    score = None
    for window, f in model.val_history:
        if window == model.trained_window:
            score = f
    if score is None:
        raise ValueError(
            f"record {record.id} has no validation score for its trained window")
    return score


def model_weights(records: list[ClassifierRecord]) -> list[float]:
    """w_i = f_i / sum(f); each f is the member's held-out f-score from its
    last trained window. An all-zero f vector falls back to uniform."""
    if not records:
        raise ValueError("model_weights of an empty record list")
    fs = [_last_trained_f(r) for r in records]
    total = sum(fs)
    if total == 0.0:
        return [1.0 / len(fs)] * len(fs)
    return [f / total for f in fs]


def _weights_for(records: list[ClassifierRecord], cfg: EnsembleConfig) -> list[float]:
    n = len(records)
    if cfg.scheme == "unweighted":
        return [1.0 / n] * n
    if cfg.scheme == "expert":
        if not cfg.expert_weights:
            raise ValueError("expert scheme requires expert_weights")
        try:
            raw = [cfg.expert_weights[r.model.kind] for r in records]
        except KeyError as exc:
            raise ValueError(f"no expert weight for kind {exc.args[0]}") from None
        total = sum(raw)
        if total <= 0:
            raise ValueError("expert weights for the members sum to zero")
        return [v / total for v in raw]
    return model_weights(records)


def ensemble_predict(x: SparseVector, records: list[ClassifierRecord],
                     cfg: EnsembleConfig) -> EnsemblePrediction:
    """Combine member votes on x; score >= 0.5 labels the post relevant."""
    if not records:
        raise ValueError("ensemble_predict with no members")
    weights = _weights_for(records, cfg)
    members = [predict(r.model, x) for r in records]
    score = 0.0
    for w, p in zip(weights, members):
        score += w * p.label
    return EnsemblePrediction(score, 1 if score >= 0.5 else 0, members)
