"""Social-compliance metrics over episode logs.

Definitions (normative for this artifact, so independent readers agree):
success is the % of episodes where every agent succeeds; partial success is
the mean % of agents succeeding; a collision event is a maximal run of
consecutive steps during which one entity pair stays in contact; stop time
counts steps below 0.05 m/s before an agent's success; max dV is the largest
per-step speed change, in cm/s.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .episode_log import EpisodeLog

STOP_SPEED = 0.05  # m/s

CSV_COLUMNS = [
    "scenario", "policy", "k", "trials", "success", "partial_success",
    "avg_length", "coll_rate", "stop_time", "max_dv",
]


@dataclass(frozen=True)
class MetricsRow:
    scenario: str
    policy: str
    k: int
    trials: int
    success: float  # percent
    partial_success: float  # percent
    avg_length: float  # steps
    coll_rate: float  # events / episode
    stop_time: float  # steps
    max_dv: float  # cm/s per step


def _episode_stats(log: EpisodeLog) -> dict:
    k = log.k
    steps = log.steps
    succeeded_at: dict[int, int] = {}
    pair_events = 0
    active_pairs: set[tuple[int, int]] = set()
    speeds: dict[int, list[float]] = {i: [] for i in range(k)}

    for t, step in enumerate(steps):
        current_pairs = set()
        for rec in step["agents"]:
            aid = rec["id"]
            speeds[aid].append(rec["v"])
            if rec["succ"] and aid not in succeeded_at:
                succeeded_at[aid] = t
            for partner in rec["coll"]:
                current_pairs.add((min(aid, partner), max(aid, partner)))
        pair_events += len(current_pairs - active_pairs)
        active_pairs = current_pairs

    stop_steps = []
    max_dv = 0.0
    for aid in range(k):
        v = speeds[aid]
        horizon = succeeded_at.get(aid, len(v))
        stop_steps.append(sum(1 for s in v[:horizon] if s < STOP_SPEED))
        for a, b in zip(v, v[1:]):
            max_dv = max(max_dv, abs(b - a) * 100.0)

    return {
        "all_succeeded": len(succeeded_at) == k,
        "frac_succeeded": len(succeeded_at) / k,
        "length": len(steps),
        "events": pair_events,
        "stop_time": sum(stop_steps) / k,
        "max_dv": max_dv,
    }


def compute_metrics(
    logs: list[EpisodeLog], scenario: str | None = None, policy: str = "unknown"
) -> MetricsRow:
    """Aggregate one (scenario, policy, k) cell. All logs must share k and
    scenario id."""
    if not logs:
        raise ValueError("compute_metrics needs at least one episode log")
    k = logs[0].k
    sid = scenario if scenario is not None else logs[0].scenario_id
    for log in logs:
        if log.k != k or (scenario is None and log.scenario_id != sid):
            raise ValueError("logs mix scenarios or agent counts")

    stats = [_episode_stats(log) for log in logs]
    n = len(stats)
    return MetricsRow(
        scenario=sid,
        policy=policy,
        k=k,
        trials=n,
        success=100.0 * sum(s["all_succeeded"] for s in stats) / n,
        partial_success=100.0 * math.fsum(s["frac_succeeded"] for s in stats) / n,
        avg_length=math.fsum(s["length"] for s in stats) / n,
        coll_rate=math.fsum(s["events"] for s in stats) / n,
        stop_time=math.fsum(s["stop_time"] for s in stats) / n,
        max_dv=math.fsum(s["max_dv"] for s in stats) / n,
    )


def to_csv(rows: list[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([getattr(row, c) for c in CSV_COLUMNS])
    return buf.getvalue()


def from_csv(text: str) -> list[MetricsRow]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for rec in reader:
        out.append(
            MetricsRow(
                scenario=rec["scenario"],
                policy=rec["policy"],
                k=int(rec["k"]),
                trials=int(rec["trials"]),
                success=float(rec["success"]),
                partial_success=float(rec["partial_success"]),
                avg_length=float(rec["avg_length"]),
                coll_rate=float(rec["coll_rate"]),
                stop_time=float(rec["stop_time"]),
                max_dv=float(rec["max_dv"]),
            )
        )
    return out


def to_text(rows: list[MetricsRow]) -> str:
    """Aligned text table with the CSV column order."""
    headers = CSV_COLUMNS
    table = [headers]
    for row in rows:
        rendered = []
        for c in headers:
            v = getattr(row, c)
            rendered.append(f"{v:.2f}" if isinstance(v, float) else str(v))
        table.append(rendered)
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = [
        "  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in table
    ]
    return "\n".join(lines) + "\n"


def report(rows: list[MetricsRow]) -> tuple[str, str]:
    """(aligned text, CSV) for a list of rows."""
    return to_text(rows), to_csv(rows)
