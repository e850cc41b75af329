"""Weighted response-time statistics and pay-as-you-go cost accounting.

All durations are seconds here; reports convert to milliseconds on output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from geosim.datacenter import dc_servicing_time
from geosim.traffic import DAY_S, Request

__all__ = [
    "BYTES_PER_GB",
    "StatAccumulator",
    "HourlySeries",
    "Metrics",
    "hour_bucket",
    "vm_cost",
    "transfer_cost",
    "DataCenterCost",
    "CostReport",
]

BYTES_PER_GB = 2**30


class StatAccumulator:
    """Weighted count, sum, min and max of a stream of durations."""

    __slots__ = ("count", "sum", "min", "max")

    def __init__(self):
        self.count = 0
        self.sum = 0.0
        self.min = math.inf
        self.max = -math.inf

    def add(self, x: float, weight: int = 1) -> None:
        self.count += weight
        self.sum += x * weight
        if x < self.min:
            self.min = x
        if x > self.max:
            self.max = x

    def merge(self, other: StatAccumulator) -> None:
        self.count += other.count
        self.sum += other.sum
        self.min = min(self.min, other.min)
        self.max = max(self.max, other.max)

    @property
    def empty(self) -> bool:
        return self.count == 0

    @property
    def mean(self) -> float | None:
        if self.count == 0:
            return None
        # clamp rounding drift so min <= mean <= max holds exactly
        return min(max(self.sum / self.count, self.min), self.max)

    def as_dict(self, scale: float = 1.0) -> dict:
        if self.count == 0:
            return {"count": 0, "avg": None, "min": None, "max": None}
        return {"count": self.count, "avg": self.mean * scale, "min": self.min * scale, "max": self.max * scale}

    def __repr__(self):
        if self.count == 0:
            return "StatAccumulator(n/a)"
        return f"StatAccumulator(count={self.count}, avg={self.mean!r}, min={self.min!r}, max={self.max!r})"


def hour_bucket(t: float) -> int:
    """GMT hour-of-day (0-23) containing time ``t``."""
    return min(23, int((t % DAY_S) // 3600))


class HourlySeries:
    def __init__(self, names: Iterable[str]):
        self.buckets = {name: [StatAccumulator() for _ in range(24)] for name in names}

    def add(self, name: str, t_origin: float, value: float, weight: int) -> None:
        self.buckets[name][hour_bucket(t_origin)].add(value, weight)


class Metrics:
    """Online statistics for one run: overall, per user base, per data center, hourly."""

    def __init__(self, user_bases: Sequence[str], data_centers: Sequence[str]):
        self.response = StatAccumulator()
        self.processing = StatAccumulator()
        self.by_user_base = {name: StatAccumulator() for name in user_bases}
        self.by_data_center = {name: StatAccumulator() for name in data_centers}
        self.hourly = HourlySeries(user_bases)
        self.bytes_by_dc = {name: 0 for name in data_centers}
        self.requests_by_dc = {name: 0 for name in data_centers}

    def record_response(self, r: Request) -> None:
        if r.t_response is None or r.t_origin is None:
            raise ValueError(f"request {r.id} has no response timestamp")
        rt = r.t_response - r.t_origin
        st = dc_servicing_time(r)
        w = r.weight
        self.response.add(rt, w)
        self.by_user_base[r.user_base].add(rt, w)
        self.hourly.add(r.user_base, r.t_origin, rt, w)
        self.processing.add(st, w)
        self.by_data_center[r.dc].add(st, w)

    def record_transfer(self, dc: str, size_bytes: int, weight: int) -> None:
        """Charge one transfer leg of a grouped request to ``dc``."""
        self.bytes_by_dc[dc] += size_bytes * weight


def vm_cost(vm_lifetimes_s: Iterable[float], rate_per_hour: float) -> float:
    """Prorated VM charge: sum of lifetimes in hours times the hourly rate."""
    if rate_per_hour < 0:
        raise ValueError("rate must be nonnegative")
    return math.fsum(vm_lifetimes_s) / 3600.0 * rate_per_hour


def transfer_cost(bytes_total: int, rate_per_gb: float) -> float:
    if rate_per_gb < 0:
        raise ValueError("rate must be nonnegative")
    return bytes_total / BYTES_PER_GB * rate_per_gb


@dataclass(frozen=True)
class DataCenterCost:
    name: str
    vm_cost: float
    transfer_cost: float

    @property
    def total(self) -> float:
        return self.vm_cost + self.transfer_cost


@dataclass(frozen=True)
class CostReport:
    data_centers: tuple[DataCenterCost, ...] = field(default_factory=tuple)

    @property
    def vm_total(self) -> float:
        return math.fsum(d.vm_cost for d in self.data_centers)

    @property
    def transfer_total(self) -> float:
        return math.fsum(d.transfer_cost for d in self.data_centers)

    @property
    def grand_total(self) -> float:
        return self.vm_total + self.transfer_total
