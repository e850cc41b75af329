"""WAN delay model and service-broker routing."""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

from geosim.scenario import BrokerPolicy, DataCenterSpec, InternetCharacteristics

__all__ = ["LinkLoad", "ServicingProbe", "transfer_delay", "round_trip_latency", "route", "EWMA_ALPHA"]

EWMA_ALPHA = 0.1


class LinkLoad:
    """Count of in-progress transfers per ordered region pair."""

    def __init__(self):
        self._active: defaultdict[tuple[int, int], int] = defaultdict(int)
        self.peak: defaultdict[tuple[int, int], int] = defaultdict(int)

    def concurrent(self, src: int, dst: int) -> int:
        return self._active[src, dst]

    def start(self, src: int, dst: int) -> int:
        n = self._active[src, dst] + 1
        self._active[src, dst] = n
        if n > self.peak[src, dst]:
            self.peak[src, dst] = n
        return n

    def finish(self, src: int, dst: int) -> None:
        n = self._active[src, dst]
        if n <= 0:
            raise RuntimeError(f"transfer count for link {src}->{dst} would go negative")
        self._active[src, dst] = n - 1

    def total(self) -> int:
        return sum(self._active.values())


def transfer_delay(origin: int, dest: int, size_bytes: float, internet: InternetCharacteristics,
                   load: LinkLoad | None = None) -> float:
    """One-way delay in seconds: latency plus serialization on a fair share of the link.

    The share is fixed by the number of transfers on the pair when this one
    starts (the caller registers the transfer with ``load.start`` first).
    """
    if size_bytes <= 0:
        raise ValueError("size_bytes must be positive")
    n = max(1, load.concurrent(origin, dest)) if load is not None else 1
    bandwidth_bps = internet.bandwidth_mbps[origin][dest] * 1e6 / n
    return internet.latency_ms[origin][dest] / 1000.0 + size_bytes * 8.0 / bandwidth_bps


def round_trip_latency(origin: int, dest: int, internet: InternetCharacteristics) -> float:
    return (internet.latency_ms[origin][dest] + internet.latency_ms[dest][origin]) / 1000.0


class ServicingProbe:
    """Exponentially weighted moving average of a data center's servicing time."""

    def __init__(self, alpha: float = EWMA_ALPHA):
        self.alpha = alpha
        self.value = 0.0
        self.samples = 0

    def update(self, servicing_s: float) -> None:
        self.value += self.alpha * (servicing_s - self.value)
        self.samples += 1


def route(policy: BrokerPolicy, origin: int, dcs: Sequence[DataCenterSpec],
          internet: InternetCharacteristics, probes: Sequence[ServicingProbe] | None = None) -> int:
    """Index of the data center that should serve a request from ``origin``.

    ClosestDataCenter minimizes one-way latency; OptimizeResponseTime adds each
    data center's recent servicing estimate. Ties go to the earliest declared.
    """
    if not dcs:
        raise ValueError("no data centers to route to")
    latency = internet.latency_ms[origin]
    best, best_cost = 0, None
    for i, dc in enumerate(dcs):
        cost = latency[dc.region] / 1000.0
        if policy is BrokerPolicy.OPTIMIZE_RESPONSE_TIME and probes is not None:
            cost += probes[i].value
        if best_cost is None or cost < best_cost:
            best, best_cost = i, cost
    return best
