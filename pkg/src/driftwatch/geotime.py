"""Global 2.5-arc-minute grid, short-term location memory, space-time matching.

The grid has 4320 rows by 8640 columns (1/24 degree per cell). Location
memory keeps recently seen place names for a limited time and matches them
case-insensitively as plain substrings of post text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

DAY = 86400

CELLS_PER_DEGREE = 24
N_ROWS = 180 * CELLS_PER_DEGREE
N_COLS = 360 * CELLS_PER_DEGREE

DEFAULT_TTL = 7 * DAY
MIN_NAME_LEN = 4
DEFAULT_DT_MAX = 3 * DAY


@dataclass(frozen=True, order=True)
class GridCell:
    row: int
    col: int


def cell_of(lat: float, lon: float) -> GridCell:
    """Map coordinates to a grid cell; lat in [-90, 90], lon in [-180, 180)."""
    if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon < 180.0):
        raise ValueError(f"coordinates out of range: ({lat}, {lon})")
    # lat = -90 lands on the virtual row 4320 and is clamped to the last row.
    row = min(int(math.floor((90.0 - lat) * CELLS_PER_DEGREE)), N_ROWS - 1)
    col = int(math.floor((lon + 180.0) * CELLS_PER_DEGREE))
    return GridCell(row, col)


def cell_center(cell: GridCell) -> tuple[float, float]:
    """(lat, lon) of the cell center; inverse of cell_of on cell centers."""
    lat = 90.0 - (cell.row + 0.5) / CELLS_PER_DEGREE
    lon = -180.0 + (cell.col + 0.5) / CELLS_PER_DEGREE
    return lat, lon


def chebyshev(a: GridCell, b: GridCell) -> int:
    """Chebyshev (8-neighborhood) cell distance, without longitude wraparound."""
    return max(abs(a.row - b.row), abs(a.col - b.col))


@dataclass
class LocationMemory:
    """Short-term memory of lowercased location names with an expiry time.

    Names shorter than MIN_NAME_LEN characters are rejected to limit false
    substring hits. Re-adding a name refreshes its timestamp.
    """

    ttl: int = DEFAULT_TTL
    min_len: int = MIN_NAME_LEN
    _entries: dict[str, int] = field(default_factory=dict)

    def remember(self, name: str, now: int) -> bool:
        """Store a name at time now; returns False for names that are too short."""
        key = name.lower()
        if len(key) < self.min_len:
            return False
        # Prune lazily so the map stays bounded on long streams.
        expired = [n for n, t0 in self._entries.items() if now - t0 > self.ttl]
        for n in expired:
            del self._entries[n]
        self._entries[key] = now
        return True

    def match_locations(self, text: str, now: int) -> list[str]:
        """All unexpired names occurring case-insensitively as substrings of
        text, in lexicographic order."""
        lowered = text.lower()
        return sorted(
            n for n, t0 in self._entries.items()
            if now - t0 <= self.ttl and n in lowered
        )

    def names(self, now: int) -> list[str]:
        return sorted(n for n, t0 in self._entries.items() if now - t0 <= self.ttl)

    def __len__(self) -> int:
        return len(self._entries)


def spatiotemporal_match(post_cell: GridCell, post_ts: int, event,
                         dt_max: int = DEFAULT_DT_MAX, radius: int = 0) -> bool:
    """True iff the post sits within dt_max seconds (inclusive) and radius
    cells (Chebyshev, inclusive) of the event."""
    if abs(post_ts - event.timestamp) > dt_max:
        return False
    return chebyshev(post_cell, cell_of(event.lat, event.lon)) <= radius
