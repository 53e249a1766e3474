"""Metrics persistence: one CSV row per test episode, plus aggregation."""

import csv
import math
from dataclasses import dataclass

from aclab.errors import MetricsParseError

HEADER = ["run_id", "checkpoint_pct", "test_episode", "episode_return", "final_mass"]


@dataclass
class MetricsRecord:
    run_id: int
    checkpoint_pct: int
    test_episode: int
    episode_return: float
    final_mass: float = None  # None outside the pellet environment


def save_metrics(path, records):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(HEADER)
        for r in records:
            writer.writerow(
                [
                    r.run_id,
                    r.checkpoint_pct,
                    r.test_episode,
                    repr(float(r.episode_return)),
                    "" if r.final_mass is None else repr(float(r.final_mass)),
                ]
            )


def load_metrics(path):
    records = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise MetricsParseError("empty metrics file", 1) from None
        if header != HEADER:
            raise MetricsParseError(f"bad header {header!r}", 1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(HEADER):
                raise MetricsParseError(
                    f"expected {len(HEADER)} fields, got {len(row)}", lineno
                )
            try:
                records.append(
                    MetricsRecord(
                        run_id=int(row[0]),
                        checkpoint_pct=int(row[1]),
                        test_episode=int(row[2]),
                        episode_return=float(row[3]),
                        final_mass=float(row[4]) if row[4] != "" else None,
                    )
                )
            except ValueError as exc:
                raise MetricsParseError(str(exc), lineno) from None
    return records


def metric_value(record):
    """The plotted quantity: final mass when recorded, episode return otherwise."""
    return record.final_mass if record.final_mass is not None else record.episode_return


def aggregate(records):
    """Per-checkpoint curve statistics across runs.

    Returns (pcts, means, sds): for each checkpoint percentage, the mean over
    runs of the per-run test-episode mean, and the sample standard deviation
    of those per-run means (zero when there is a single run).
    """
    by_pct = {}
    for r in records:
        by_pct.setdefault(r.checkpoint_pct, {}).setdefault(r.run_id, []).append(
            metric_value(r)
        )
    pcts = sorted(by_pct)
    means, sds = [], []
    for pct in pcts:
        run_means = [sum(v) / len(v) for _, v in sorted(by_pct[pct].items())]
        n = len(run_means)
        mean = sum(run_means) / n
        if n > 1:
            var = sum((m - mean) ** 2 for m in run_means) / (n - 1)
            sd = math.sqrt(var)
        else:
            sd = 0.0
        means.append(mean)
        sds.append(sd)
    return pcts, means, sds
