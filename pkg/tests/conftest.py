"""Shared pytest wiring: records acceptance-criterion outcomes and prints
one pass/fail line per criterion after the run."""

from __future__ import annotations

from contextlib import contextmanager

CRITERIA = {
    1: "drift benchmark: adaptive f1 >= static + 0.10 post drift, >= 0.90 "
       "everywhere, static dips <= 0.80, under 60 s",
    2: "no-drift control: |f1 adaptive - f1 static| <= 0.05 every window",
    3: "labeler matches the all-pairs oracle on 100 instances under 30 s",
    4: "weight equation: sums to 1 +/- 1e-9, worked example, zero -> uniform",
    5: "ensemble boundary: weights (0.5, 0.3, 0.2), votes (1,0,0) -> relevant",
    6: "logreg gradient matches central differences (D=32, h=1e-5, <1e-4)",
    7: "grid round trip: cell_of(cell_center(c)) = c, corner cells",
    8: "detector fires at exactly W+T; high-confidence stream never fires",
    9: "persistence: bit-identical margins after reload; tamper -> clean error",
    10: "bench CLI: byte-identical CSV across two identical runs",
}

RESULTS: dict[int, bool] = {}


@contextmanager
def criterion(num: int):
    """Wrap one acceptance criterion's asserts; records pass or fail."""
    try:
        yield
    except BaseException:
        RESULTS[num] = False
        raise
    else:
        RESULTS[num] = True


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        status = "PASS" if RESULTS[num] else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {CRITERIA[num]}")
