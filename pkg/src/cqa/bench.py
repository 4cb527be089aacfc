"""Scaling benchmark for the incremental path.

Star-conflict workloads: a large consistent table, a fixed-length update
that introduces a hub tuple conflicting with every row, and a ground
certain-answer query. For a fixed update length the incremental answer
time should grow at most linearly with the instance size; the report
writes the raw timings as CSV and renders the measured points against a
least-squares linear fit.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

from .answer import GroundAtomic
from .denial import parse_constraint_file
from .incremental import IncrementalProblem, incremental_certain
from .model import DbTuple, Insert, Instance, Schema, UpdateSequence

STAR_CONSTRAINT = ":- R(x), S(y)."
DEFAULT_SIZES = (1_000, 10_000, 100_000)


@dataclass(frozen=True)
class BenchRow:
    n: int
    m: int
    seconds: float
    answer: bool


def star_problem(n: int, m: int = 3) -> IncrementalProblem:
    """Base of n R-rows; the update inserts the conflicting hub S(0) plus
    m-1 further R-rows, so every edge of the updated instance meets the
    hub. The query asks for the first row."""
    if m < 1:
        raise ValueError("need at least one update")
    schema = Schema.of(R=1, S=1)
    base = Instance(schema, frozenset(DbTuple.of("R", i) for i in range(1, n + 1)), {})
    ops = [Insert(DbTuple.of("S", 0))]
    ops += [Insert(DbTuple.of("R", n + 1 + i)) for i in range(m - 1)]
    return IncrementalProblem(
        base=base,
        seq=UpdateSequence(tuple(ops)),
        ics=parse_constraint_file(STAR_CONSTRAINT),
        query=GroundAtomic(DbTuple.of("R", 1)),
        semantics="C",
    )


def measure(n: int, m: int = 3, repeats: int = 3) -> BenchRow:
    """Median-of-repeats wall-clock time of one incremental certain call."""
    problem = star_problem(n, m)
    times = []
    answer = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = incremental_certain(problem)
        times.append(time.perf_counter() - start)
        answer = result.boolean
    times.sort()
    return BenchRow(n, m, times[len(times) // 2], bool(answer))


def run_benchmark(sizes=DEFAULT_SIZES, m: int = 3, repeats: int = 3) -> list[BenchRow]:
    return [measure(n, m, repeats) for n in sizes]


def linear_fit(rows: list[BenchRow]) -> tuple[float, float]:
    """Least-squares t = a + b*n over the measured rows."""
    xs = [float(r.n) for r in rows]
    ys = [r.seconds for r in rows]
    k = len(xs)
    mean_x = sum(xs) / k
    mean_y = sum(ys) / k
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0:
        return mean_y, 0.0
    b = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sxx
    return mean_y - b * mean_x, b


def max_fit_ratio(rows: list[BenchRow]) -> float:
    """Largest measured/fitted ratio; at most 2 counts as linear growth."""
    a, b = linear_fit(rows)
    worst = 0.0
    for r in rows:
        fitted = a + b * r.n
        if fitted <= 0:
            continue
        worst = max(worst, r.seconds / fitted)
    return worst


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n", "m", "seconds", "answer"])
    for r in rows:
        writer.writerow([r.n, r.m, f"{r.seconds:.6f}", "yes" if r.answer else "no"])
    return buf.getvalue()


def render_figure(rows: list[BenchRow], path: str) -> None:
    """Measured timings against the linear fit, written to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    a, b = linear_fit(rows)
    xs = [r.n for r in rows]
    ys = [r.seconds for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, "o-", label="measured")
    ax.plot(xs, [a + b * x for x in xs], "--", label=f"linear fit a+bn (b={b:.2e})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("instance size n")
    ax.set_ylabel("incremental certain-answer time [s]")
    ax.set_title(f"star workload, m={rows[0].m if rows else '?'}")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
