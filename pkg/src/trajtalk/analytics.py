"""Post-hoc analytics over session event logs."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class StepCurve:
    """Right-continuous step function sampled at its breakpoints."""

    points: tuple[tuple[float, float], ...]  # (progress, value), progress ascending

    def at(self, p: float) -> float:
        if not self.points:
            raise ValueError("empty curve")
        xs = [x for x, _ in self.points]
        i = bisect_right(xs, p) - 1
        if i < 0:
            return self.points[0][1]
        return self.points[i][1]


def ccdf_remaining(progress_fractions: Sequence[float]) -> StepCurve:
    """Ratio of modifications still to come as a function of task progress.

    At progress ``p`` the value is ``count(fraction > p) / total``, a
    right-continuous step curve sampled at 0 and at each event fraction.
    An empty event list yields an empty curve.
    """
    fractions = list(progress_fractions)
    if not fractions:
        return StepCurve(())
    for f in fractions:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"progress fraction must be in [0, 1], got {f}")
    total = len(fractions)

    def remaining(p: float) -> float:
        return sum(1 for f in fractions if f > p) / total

    points = [(0.0, remaining(0.0))]
    for f in sorted(set(fractions)):
        if f > 0.0:
            points.append((f, remaining(f)))
    return StepCurve(tuple(points))


@dataclass(frozen=True)
class LatencyStats:
    """Arithmetic means over modification events' latency breakdowns, seconds."""

    count: int
    mean_interpret_s: float
    mean_apply_s: float
    mean_total_s: float


def latency_stats(events: Sequence) -> Optional[LatencyStats]:
    """Mean interpret/apply/total latency over modification events; None if none.

    Accepts session Event objects or plain event dicts (the exported form).
    """
    breakdowns = []
    for event in events:
        kind = event.kind if hasattr(event, "kind") else event["kind"]
        payload = event.payload if hasattr(event, "payload") else event["payload"]
        if kind == "modification":
            breakdowns.append((payload["interpret_s"], payload["apply_s"]))
    if not breakdowns:
        return None
    n = len(breakdowns)
    mean_interpret = sum(b[0] for b in breakdowns) / n
    mean_apply = sum(b[1] for b in breakdowns) / n
    return LatencyStats(
        count=n,
        mean_interpret_s=mean_interpret,
        mean_apply_s=mean_apply,
        mean_total_s=mean_interpret + mean_apply,
    )
