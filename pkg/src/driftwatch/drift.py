"""Drift detection from prediction statistics, and update scheduling.

The detector watches a ring buffer of the last W predictions. In confidence
mode an observation is flagged when the ensemble score falls strictly inside
the low-confidence band; in margin mode when the absolute margin is below a
threshold. Once the buffer has filled, every further observation whose
windowed flag fraction exceeds theta extends a run; the detector fires when
the run reaches the persistence length, so an always-flagged stream fires at
exactly observation W + T.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geotime import DAY

MODES = ("confidence", "margin")
SCHEDULE_KINDS = ("user", "detector", "hybrid")

UPDATE_NOW = "update_now"
NONE = "none"


class DriftDetector:
    def __init__(self, mode: str = "confidence", window: int = 500,
                 low: float = 0.25, high: float = 0.75,
                 margin_tau: float = 0.5, theta: float = 0.3,
                 persistence: int = 200):
        if mode not in MODES:
            raise ValueError(f"unknown detector mode: {mode}")
        if window < 1 or persistence < 1:
            raise ValueError("window and persistence must be positive")
        if not (0.0 <= low < high <= 1.0):
            raise ValueError("need 0 <= low < high <= 1")
        if not (0.0 < theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        self.mode = mode
        self.window = window
        self.low = low
        self.high = high
        self.margin_tau = margin_tau
        self.theta = theta
        self.persistence = persistence
        self.reset()

    def reset(self) -> None:
        """Clear all state, restoring the full warm-up requirement."""
        self._buf = [0] * self.window
        self._pos = 0
        self._count = 0
        self._seen = 0
        self.run_length = 0
        self.fired = False

    def observe(self, score: float, margin: float) -> None:
        """Feed one prediction (ensemble score and mean member margin)."""
        if self.mode == "confidence":
            flag = 1 if self.low < score < self.high else 0
        else:
            flag = 1 if abs(margin) < self.margin_tau else 0
        w = self.window
        if self._seen >= w:
            self._count -= self._buf[self._pos]
        self._buf[self._pos] = flag
        self._count += flag
        self._pos += 1
        if self._pos == w:
            self._pos = 0
        self._seen += 1
        # Checks start once the buffer has been full for one step, so the
        # earliest possible firing is observation W + T.
        if self._seen > w:
            if self._count / w > self.theta:
                self.run_length += 1
                if self.run_length >= self.persistence:
                    self.fired = True
            else:
                self.run_length = 0

    @property
    def observations(self) -> int:
        return self._seen


@dataclass(frozen=True)
class Schedule:
    kind: str = "user"
    interval: int = 30 * DAY
    min_gap: int = 7 * DAY
    max_gap: int = 60 * DAY

    def validate(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind: {self.kind}")
        if self.min_gap > self.max_gap:
            raise ValueError("min_gap must not exceed max_gap")
        if self.interval <= 0:
            raise ValueError("interval must be positive")


def next_action(schedule: Schedule, now: int, last_update_ts: int,
                detector_fired: bool) -> str:
    """Decide whether an update is due at time now.

    user: fixed interval. detector: whenever the detector has fired. hybrid:
    detector firing rate-limited by min_gap, with max_gap as a fallback cap.
    """
    elapsed = now - last_update_ts
    if schedule.kind == "user":
        due = elapsed >= schedule.interval
    elif schedule.kind == "detector":
        due = detector_fired
    else:
        due = (detector_fired and elapsed >= schedule.min_gap) or \
            elapsed >= schedule.max_gap
    return UPDATE_NOW if due else NONE
