"""Offline setup benchmark over an (n, m) grid of random instances.

Per run the timed region is gain synthesis (horizon search, gain solve and
the partial-compensation products) followed by both tightening chains with
``N = M``. Instance generation and reporting are outside the clock.
"""

from __future__ import annotations

import csv
import enum
import io
import os
import platform
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .deadbeat import synthesize_gains
from .errors import ConsistencyError, IllConditioned, NotControllable, RankDeficient
from .linsys import generate_instance
from .tightening import tighten

DESK_N = (10, 30, 60, 120)
DESK_M = (5, 10, 30, 60)
FULL_N = (10, 60, 120, 600, 900, 1200)
FULL_M = (5, 10, 30, 60, 120, 300)
WORKERS_ENV = "DRMPC_WORKERS"

GLYPH_NA = "○"  # white circle
GLYPH_ILL = "★"  # black star


class CellStatus(str, enum.Enum):
    OK = "Ok"
    NOT_APPLICABLE = "NotApplicable"
    ILL_CONDITIONED = "IllConditioned"


@dataclass
class BenchCell:
    n: int
    m: int
    status: CellStatus
    runs: int = 0
    setup_seconds: Optional[float] = None
    median_of_means: Optional[float] = None
    gain_seconds: Optional[float] = None
    tighten_seconds: Optional[float] = None
    M: Optional[int] = None
    lp_count: Optional[int] = None
    empty_runs: int = 0  # runs whose tightening emptied a set
    workers: int = 1
    message: str = ""


@dataclass
class BenchGrid:
    cells: List[BenchCell]
    environment: dict = field(default_factory=dict)

    def cell(self, n: int, m: int) -> BenchCell:
        for c in self.cells:
            if (c.n, c.m) == (n, m):
                return c
        raise KeyError((n, m))

    @property
    def ns(self) -> list:
        return sorted({c.n for c in self.cells})

    @property
    def ms(self) -> list:
        return sorted({c.m for c in self.cells})


def desk_grid() -> List[Tuple[int, int]]:
    return [(n, m) for m in DESK_M for n in DESK_N]


def full_grid() -> List[Tuple[int, int]]:
    return [(n, m) for m in FULL_M for n in FULL_N]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_seed(master_seed: int, n: int, m: int, run: int) -> int:
    """Instance seed for one run; depends only on the master seed and the run's coordinates."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(n, m, run))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def median_of_means(samples: Sequence[float], groups: int = 5) -> float:
    groups = max(1, min(groups, len(samples)))
    chunks = np.array_split(np.asarray(samples, dtype=float), groups)
    return float(statistics.median(float(c.mean()) for c in chunks))


def time_setup(n: int, m: int, seed: int):
    """One timed setup: ``(gain_seconds, tighten_seconds, M, lp_count, empty)``."""
    inst = generate_instance(n, m, seed)
    t0 = time.perf_counter()
    policy = synthesize_gains(inst.sys)
    t1 = time.perf_counter()
    tight = tighten(inst, policy, N=policy.M, strict=False)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1, policy.M, tight.lp_count, bool(tight.empty_stages)


def run_cell(n: int, m: int, runs: int, master_seed: int, workers: int = 1) -> BenchCell:
    if m > n:
        return BenchCell(n, m, CellStatus.NOT_APPLICABLE, workers=workers)
    gain, tight_t, Ms, lps = [], [], set(), set()
    empty = 0
    for r in range(runs):
        try:
            g, t, M, lp, was_empty = time_setup(n, m, run_seed(master_seed, n, m, r))
        except (IllConditioned, ConsistencyError, RankDeficient, NotControllable) as exc:
            # one ill-posed draw is enough to withhold the cell, as in the '*' entries
            return BenchCell(n, m, CellStatus.ILL_CONDITIONED, runs=r + 1, workers=workers,
                             message=f"run {r}: {type(exc).__name__}: {exc}")
        gain.append(g)
        tight_t.append(t)
        Ms.add(M)
        lps.add(lp)
        empty += was_empty
    total = [g + t for g, t in zip(gain, tight_t)]
    return BenchCell(
        n, m, CellStatus.OK, runs=runs,
        setup_seconds=float(np.mean(total)),
        median_of_means=median_of_means(total),
        gain_seconds=float(np.mean(gain)),
        tighten_seconds=float(np.mean(tight_t)),
        M=max(Ms), lp_count=max(lps), empty_runs=empty, workers=workers,
    )


def _cell_job(args):
    return run_cell(*args)


def environment(workers: int) -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
        "python": platform.python_version(),
        "numpy": np.__version__,
        "precision": "float64",
        "eps": float(np.finfo(float).eps),
        "cpus": os.cpu_count(),
        "workers": workers,
    }


def run_sweep(grid: Sequence[Tuple[int, int]], runs: int, master_seed: int, workers: int = 1) -> BenchGrid:
    """Time the setup of ``runs`` instances in every cell of ``grid``.

    Cells are spread over a process pool of ``workers``; runs inside a cell
    stay on one worker.
    """
    if runs < 1:
        raise ValueError("runs per cell must be at least 1")
    jobs = [(n, m, runs, master_seed, workers) for n, m in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_cell_job, jobs))
    else:
        cells = [_cell_job(j) for j in jobs]
    return BenchGrid(cells, environment(workers))


def trend_violations(result: BenchGrid, slack: float = 0.0) -> list:
    """Adjacent Ok-cell pairs that break the expected ordering.

    Setup time should not decrease with n at fixed m and should not increase
    with m at fixed n. ``slack`` is a relative tolerance on each comparison.
    """
    ok = {(c.n, c.m): c.setup_seconds for c in result.cells if c.status is CellStatus.OK}
    bad = []
    for m in result.ms:
        row = [(n, ok[n, m]) for n in result.ns if (n, m) in ok]
        for (n1, t1), (n2, t2) in zip(row, row[1:]):
            if t2 < t1 * (1.0 - slack):
                bad.append(("n", m, n1, n2, t1, t2))
    for n in result.ns:
        col = [(m, ok[n, m]) for m in result.ms if (n, m) in ok]
        for (m1, t1), (m2, t2) in zip(col, col[1:]):
            if t2 > t1 * (1.0 + slack):
                bad.append(("m", n, m1, m2, t1, t2))
    return bad


ROW_FIELDS = ["n", "m", "status", "mean_seconds", "median_of_means", "gain_seconds", "tighten_seconds",
              "runs", "M", "lp_count", "empty_runs", "workers"]
TIMING_FIELDS = {"mean_seconds", "median_of_means", "gain_seconds", "tighten_seconds"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_rows(result: BenchGrid, timing: bool = True) -> str:
    out = io.StringIO()
    fields = [f for f in ROW_FIELDS if timing or f not in TIMING_FIELDS]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(fields)
    for c in result.cells:
        rec = {
            "n": c.n, "m": c.m, "status": c.status.value,
            "mean_seconds": c.setup_seconds, "median_of_means": c.median_of_means,
            "gain_seconds": c.gain_seconds, "tighten_seconds": c.tighten_seconds,
            "runs": c.runs, "M": c.M, "lp_count": c.lp_count, "empty_runs": c.empty_runs, "workers": c.workers,
        }
        w.writerow([_fmt(rec[f]) for f in fields])
    return out.getvalue()


def _seconds(t: float) -> str:
    if t >= 100:
        return f"{t:.0f} s"
    if t >= 10:
        return f"{t:.1f} s"
    if t >= 0.01:
        return f"{t:.2f} s"
    return f"{t * 1e3:.2f} ms"


def report_table(result: BenchGrid, timing: bool = True) -> str:
    """Fixed-width table, n across and m down."""
    ns, ms = result.ns, result.ms
    width = 11
    lines = ["m \\ n".ljust(7) + "".join(str(n).rjust(width) for n in ns)]
    lines.append("-" * len(lines[0]))
    cells = {(c.n, c.m): c for c in result.cells}
    for m in ms:
        parts = [str(m).ljust(7)]
        for n in ns:
            c = cells.get((n, m))
            if c is None:
                s = ""
            elif c.status is CellStatus.NOT_APPLICABLE:
                s = GLYPH_NA
            elif c.status is CellStatus.ILL_CONDITIONED:
                s = GLYPH_ILL
            else:
                s = _seconds(c.setup_seconds) if timing else "ok"
            parts.append(s.rjust(width))
        lines.append("".join(parts))
    return "\n".join(lines) + "\n"


def report(result: BenchGrid, timing: bool = True) -> Tuple[str, str]:
    """``(table, rows)``: the rendered table and the delimited records."""
    return report_table(result, timing), report_rows(result, timing)
