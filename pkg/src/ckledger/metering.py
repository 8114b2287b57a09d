"""Stage timing under two cost modes.

``measured`` times stages with the wall clock.  ``calibrated`` charges each
stage a configured constant and advances a virtual clock instead, so runs are
machine independent and finish fast.  A run uses exactly one mode.

Durations are milliseconds throughout; ledger timestamps are microseconds.
"""

from __future__ import annotations

import bisect
import math
import statistics
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Sequence

from ckledger.policy import PolicyForm

MIB = 1 << 20
# 2024-01-01T00:00:00Z; start of the logical clock in calibrated runs
VIRTUAL_EPOCH_US = 1_704_067_200_000_000

Shape = tuple[PolicyForm, int]


class Mode(str, Enum):
    MEASURED = "measured"
    CALIBRATED = "calibrated"


@dataclass
class CostProfile:
    """Per-stage charges for calibrated runs.

    A stage costs ``fixed[stage]`` plus a policy-shape term from
    ``by_shape[stage]`` plus ``per_mib[stage]`` times the payload size plus
    ``per_item[stage]`` times an item count.  Unlisted stages cost nothing.
    """

    fixed: dict[str, float] = field(default_factory=dict)
    by_shape: dict[str, dict[Shape, float]] = field(default_factory=dict)
    per_mib: dict[str, float] = field(default_factory=dict)
    per_item: dict[str, float] = field(default_factory=dict)

    def stage_ms(self, stage: str, shape: Shape | None = None, size: int = 0, items: int = 0) -> float:
        ms = self.fixed.get(stage, 0.0) + self.per_item.get(stage, 0.0) * items
        table = self.by_shape.get(stage)
        if table:
            if shape is None:
                raise ValueError(f"stage {stage} is priced by policy shape; none given")
            ms += _lookup(table, shape)
        ms += self.per_mib.get(stage, 0.0) * size / MIB
        return ms

    def override(self, **fixed: float) -> "CostProfile":
        """Copy with the named stages pinned to fixed charges."""
        by_shape = {k: v for k, v in self.by_shape.items() if k not in fixed}
        per_mib = {k: v for k, v in self.per_mib.items() if k not in fixed}
        per_item = {k: v for k, v in self.per_item.items() if k not in fixed}
        return CostProfile({**self.fixed, **fixed}, by_shape, per_mib, per_item)


def _lookup(table: Mapping[Shape, float], shape: Shape) -> float:
    if shape in table:
        return table[shape]
    form, k = shape
    known = sorted((kk, v) for (f, kk), v in table.items() if f == form)
    if not known:
        known = sorted((kk, v) for (_, kk), v in table.items())
        # average across forms at each k when this form has no entries
        merged: dict[int, list[float]] = {}
        for kk, v in known:
            merged.setdefault(kk, []).append(v)
        known = [(kk, statistics.fmean(vs)) for kk, vs in sorted(merged.items())]
    ks = [kk for kk, _ in known]
    i = bisect.bisect_left(ks, k)
    if 0 < i < len(ks):
        (k0, v0), (k1, v1) = known[i - 1], known[i]
        return v0 + (v1 - v0) * (k - k0) / (k1 - k0)
    if i == 0:
        k0, v0 = known[0]
        return v0 * k / k0
    if len(known) == 1:
        k0, v0 = known[0]
        return v0 * k / k0
    (k0, v0), (k1, v1) = known[-2], known[-1]
    return v1 + (v1 - v0) * (k - k1) / (k1 - k0)


class Meter:
    """Factory for per-operation spans plus the clock that stamps records."""

    def __init__(
        self,
        mode: Mode | str = Mode.MEASURED,
        profile: CostProfile | None = None,
        *,
        sleep: bool = False,
        start_us: int = VIRTUAL_EPOCH_US,
    ) -> None:
        self.mode = Mode(mode)
        if self.mode is Mode.CALIBRATED and profile is None:
            raise ValueError("calibrated mode needs a cost profile")
        self.profile = profile
        self.sleep = sleep
        self._virtual_us = float(start_us)

    @property
    def calibrated(self) -> bool:
        return self.mode is Mode.CALIBRATED

    def now_us(self) -> int:
        if self.calibrated:
            return int(self._virtual_us)
        return time.time_ns() // 1000

    def now_virtual_ms(self) -> float:
        return self._virtual_us / 1000.0

    def advance(self, ms: float) -> None:
        self._virtual_us += ms * 1000.0
        if self.sleep and ms > 0:
            time.sleep(ms / 1000.0)

    def span(self) -> "Span":
        return Span(self)


@dataclass
class StageInfo:
    shape: Shape | None = None
    size: int = 0
    items: int = 0


class Span:
    """Collects stage durations for one operation."""

    def __init__(self, meter: Meter) -> None:
        self.meter = meter
        self.stages: dict[str, float] = {}
        self._start = time.perf_counter()
        self._slowdown_extra = 0.0
        self._total: float | None = None

    @contextmanager
    def stage(
        self,
        name: str,
        *,
        shape: Shape | None = None,
        size: int = 0,
        items: int = 0,
        slowdown: float = 1.0,
    ) -> Iterator["StageInfo"]:
        """Time one stage.  Pricing inputs may be filled in on the yielded info."""
        if slowdown < 1:
            raise ValueError("slowdown factor must be >= 1")
        info = StageInfo(shape, size, items)
        t0 = time.perf_counter()
        failed = True
        # failed stages are still charged: an attempt costs time either way
        try:
            yield info
            failed = False
        finally:
            if self.meter.calibrated:
                assert self.meter.profile is not None
                try:
                    ms = self.meter.profile.stage_ms(name, info.shape, info.size, info.items) * slowdown
                except ValueError:
                    if not failed:
                        raise
                    ms = 0.0  # failed before the shape was known
                self.meter.advance(ms)
            else:
                raw = (time.perf_counter() - t0) * 1000.0
                ms = raw * slowdown
                self._slowdown_extra += ms - raw
            self.stages[name] = self.stages.get(name, 0.0) + ms

    def close(self) -> float:
        if self._total is None:
            if self.meter.calibrated:
                self._total = sum(self.stages.values())
            else:
                wall = (time.perf_counter() - self._start) * 1000.0
                self._total = max(wall + self._slowdown_extra, sum(self.stages.values()))
        return self._total

    @property
    def total_ms(self) -> float:
        return self.close()


def nearest_rank(samples: Sequence[float], pct: float) -> float:
    if not samples:
        raise ValueError("no samples")
    ordered = sorted(samples)
    rank = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return ordered[rank - 1]


def summarize(samples: Sequence[float]) -> dict[str, float]:
    return {
        "n": len(samples),
        "mean": statistics.fmean(samples),
        "p50": nearest_rank(samples, 50),
        "p99": nearest_rank(samples, 99),
    }
