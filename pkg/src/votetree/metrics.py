"""Evaluation metrics: success rate, goal condition recall, executability."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .executor import ExecutionTrace
from .world import StatePredicate

logger = logging.getLogger(__name__)


def compute_gcr(achieved: Iterable[StatePredicate], target: Iterable[StatePredicate]) -> float:
    """Fraction of target conditions achieved: 1 - |g \\ g'| / |g|."""
    g = frozenset(target)
    if not g:
        raise ValueError("GCR is undefined for an empty target condition set")
    g_prime = frozenset(achieved)
    return 1.0 - len(g - g_prime) / len(g)


def compute_sr(gcrs: Sequence[float]) -> float:
    """Fraction of episodes achieving every goal condition (GCR exactly 1)."""
    if not gcrs:
        raise ValueError("SR is undefined for an empty episode list")
    return sum(1 for g in gcrs if g == 1.0) / len(gcrs)


def compute_exec(trace: ExecutionTrace) -> float:
    """Fraction of attempted commands that executed successfully."""
    if trace.attempted == 0:
        logger.warning("empty trace: no commands were attempted, Exec defined as 0")
        return 0.0
    return trace.succeeded / trace.attempted


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std())


@dataclass(frozen=True)
class MetricsRow:
    """One table row: mean and std of each metric over repeated runs."""

    method_label: str
    sr_mean: float
    sr_std: float
    gcr_mean: float
    gcr_std: float
    exec_mean: float
    exec_std: float
    runs: int
    per_task: dict | None = None

    def as_dict(self) -> dict:
        return {
            "method": self.method_label,
            "sr_mean": self.sr_mean,
            "sr_std": self.sr_std,
            "gcr_mean": self.gcr_mean,
            "gcr_std": self.gcr_std,
            "exec_mean": self.exec_mean,
            "exec_std": self.exec_std,
            "runs": self.runs,
        }


def aggregate(method_label: str, per_rep: Sequence[dict], per_task: dict | None = None) -> MetricsRow:
    """Collapse per-repetition metrics into one mean +/- std row."""
    sr_m, sr_s = mean_std([r["sr"] for r in per_rep])
    gcr_m, gcr_s = mean_std([r["gcr"] for r in per_rep])
    ex_m, ex_s = mean_std([r["exec"] for r in per_rep])
    return MetricsRow(
        method_label=method_label,
        sr_mean=sr_m, sr_std=sr_s,
        gcr_mean=gcr_m, gcr_std=gcr_s,
        exec_mean=ex_m, exec_std=ex_s,
        runs=len(per_rep),
        per_task=per_task,
    )


def format_table(rows: Sequence[MetricsRow]) -> str:
    """Fixed-width summary table (deterministic formatting)."""
    header = f"{'method':40s}  {'SR':>13s}  {'GCR':>13s}  {'Exec':>13s}  {'runs':>4s}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row.method_label:40s}  "
            f"{row.sr_mean:.3f} ±{row.sr_std:.3f}  "
            f"{row.gcr_mean:.3f} ±{row.gcr_std:.3f}  "
            f"{row.exec_mean:.3f} ±{row.exec_std:.3f}  "
            f"{row.runs:4d}"
        )
    return "\n".join(lines) + "\n"
