"""Diurnal request generation for user bases.

Simulated time is GMT-aligned: ``t = 0`` is 00:00 GMT of day 0 and the
profile repeats every 86400 s. A user base's online population is
``avg_off_peak_users`` outside its peak window and ``avg_peak_users`` inside
it. With ``ramp_s > 0`` each change is a linear transition that starts at the
window boundary and lasts ``ramp_s`` seconds.

Requests are grouped: one :class:`Request` stands for ``grouping_factor``
real requests that share its timestamps.
"""

from __future__ import annotations

import functools
import hashlib
import math
import random
from dataclasses import dataclass

from geosim.scenario import ArrivalProcess, InstructionDistribution, UserBaseSpec

__all__ = [
    "DAY_S",
    "Request",
    "users_online",
    "arrival_rate",
    "next_breakpoint",
    "next_arrival",
    "next_arrival_deterministic",
    "expected_requests",
    "stream_seed",
    "ArrivalStream",
]

DAY_S = 86400.0
INFINITY = math.inf


@dataclass(slots=True)
class Request:
    id: int
    user_base: str
    origin_region: int
    weight: int
    size_bytes: int
    instructions: float
    t_origin: float
    t_arrive_dc: float | None = None
    t_complete: float | None = None
    t_response: float | None = None
    dc: str | None = None
    vm: int | None = None


def _peak_fraction(ub: UserBaseSpec, t: float, ramp_s: float) -> float:
    start = ub.peak_start_hour * 3600.0
    window = (ub.peak_end_hour - ub.peak_start_hour) * 3600.0
    since_start = (t - start) % DAY_S
    if since_start < window:
        return min(1.0, since_start / ramp_s) if ramp_s > 0 else 1.0
    since_end = since_start - window
    return max(0.0, 1.0 - since_end / ramp_s) if ramp_s > 0 else 0.0


def users_online(ub: UserBaseSpec, t: float, ramp_s: float = 0) -> float:
    g = _peak_fraction(ub, t, ramp_s)
    if g == 1.0:
        return float(ub.avg_peak_users)
    if g == 0.0:
        return float(ub.avg_off_peak_users)
    return ub.avg_off_peak_users + (ub.avg_peak_users - ub.avg_off_peak_users) * g


def arrival_rate(ub: UserBaseSpec, t: float, ramp_s: float = 0) -> float:
    """Grouped requests per second at time ``t``."""
    return users_online(ub, t, ramp_s) * ub.requests_per_user_per_hour / 3600.0 / ub.grouping_factor


@functools.lru_cache(maxsize=256)
def _day_breakpoints(ub: UserBaseSpec, ramp_s: float) -> tuple[float, ...]:
    start = ub.peak_start_hour * 3600.0
    end = ub.peak_end_hour * 3600.0
    points = {0.0, DAY_S}
    for p in (start, start + ramp_s, end, end + ramp_s):
        points.add(p % DAY_S)
    return tuple(sorted(points))


def next_breakpoint(ub: UserBaseSpec, t: float, ramp_s: float = 0) -> float:
    """Smallest time > ``t`` at which the population profile changes formula."""
    day = math.floor(t / DAY_S)
    for p in _day_breakpoints(ub, ramp_s):
        cand = day * DAY_S + p
        if cand > t:
            return cand
    return (day + 1) * DAY_S + _day_breakpoints(ub, ramp_s)[1]


def _segment(ub, t, ramp_s):
    """Return ``(end, rate_at_t, rate_just_before_end)`` for the piece containing ``t``.

    Each piece is constant or linear, so the left limit at ``end`` is
    recovered from the midpoint without evaluating at a discontinuity.
    """
    end = next_breakpoint(ub, t, ramp_s)
    a = arrival_rate(ub, t, ramp_s)
    mid = arrival_rate(ub, 0.5 * (t + end), ramp_s)
    return end, a, max(0.0, 2.0 * mid - a)


def _never_active(ub: UserBaseSpec) -> bool:
    return ub.avg_peak_users == 0 and ub.avg_off_peak_users == 0


def next_arrival(ub: UserBaseSpec, t: float, rng: random.Random, ramp_s: float = 0,
                 until: float = INFINITY) -> float:
    """Next origination time after ``t`` of a nonhomogeneous Poisson process, by thinning.

    The thinning bound on each piece is the larger of the rates at its two
    ends; a candidate past the piece boundary is discarded and sampling
    restarts there, which memorylessness makes exact. Returns ``inf`` if no
    arrival occurs before ``until`` (or ever, for an empty user base).
    """
    if _never_active(ub):
        return INFINITY
    cur = t
    while cur < until:
        end, a, b = _segment(ub, cur, ramp_s)
        bound = max(a, b)
        if bound <= 0.0:
            cur = end
            continue
        cand = cur + rng.expovariate(bound)
        if cand >= end:
            cur = end
            continue
        if rng.random() * bound < arrival_rate(ub, cand, ramp_s) and cand > t:
            return cand if cand < until else INFINITY
        cur = cand
    return INFINITY


def _invert_integral(ub, t, amount, ramp_s, until):
    cur = t
    need = amount
    while cur < until:
        end, a, b = _segment(ub, cur, ramp_s)
        length = end - cur
        area = 0.5 * (a + b) * length
        if area >= need and area > 0.0:
            slope = (b - a) / length
            # root of a*x + slope*x^2/2 = need, in cancellation-free form
            x = 2.0 * need / (a + math.sqrt(max(0.0, a * a + 2.0 * slope * need)))
            hit = cur + min(x, length)
            return hit if hit < until else INFINITY
        need -= area
        cur = end
    return INFINITY


def next_arrival_deterministic(ub: UserBaseSpec, t: float, ramp_s: float = 0,
                               until: float = INFINITY) -> float:
    """Next origination when arrivals are spaced by one unit of integrated rate.

    Under a constant rate the gap is exactly ``1/rate``; across rate changes the
    spacing is carried over by integration.
    """
    if _never_active(ub):
        return INFINITY
    return _invert_integral(ub, t, 1.0, ramp_s, until)


def expected_requests(ub: UserBaseSpec, t0: float, t1: float, ramp_s: float = 0) -> float:
    """Expected number of real (ungrouped) requests originating in ``[t0, t1)``."""
    total = 0.0
    cur = t0
    while cur < t1:
        end, a, b = _segment(ub, cur, ramp_s)
        if end > t1:
            b = a + (b - a) * (t1 - cur) / (end - cur)
            end = t1
        total += 0.5 * (a + b) * (end - cur)
        cur = end
    return total * ub.grouping_factor


def stream_seed(seed: int, name: str, salt: str = "") -> int:
    """Per-user-base seed: run seed XOR a stable 64-bit hash of the user-base name."""
    h = hashlib.blake2b((name + salt).encode("utf-8"), digest_size=8).digest()
    return (seed ^ int.from_bytes(h, "big")) & 0xFFFFFFFFFFFFFFFF


class ArrivalStream:
    """Request origination for one user base.

    Arrival times and instruction draws use separate generators so that changing
    the instruction distribution leaves the arrival sequence untouched.
    """

    def __init__(self, ub: UserBaseSpec, seed: int, ramp_s: float = 0,
                 process: ArrivalProcess = ArrivalProcess.POISSON):
        self.ub = ub
        self.ramp_s = ramp_s
        self.process = ArrivalProcess(process)
        self.rng = random.Random(stream_seed(seed, ub.name))
        self.work_rng = random.Random(stream_seed(seed, ub.name, "/instructions"))

    def next_after(self, t: float, until: float = INFINITY) -> float:
        if self.process is ArrivalProcess.DETERMINISTIC:
            return next_arrival_deterministic(self.ub, t, self.ramp_s, until)
        return next_arrival(self.ub, t, self.rng, self.ramp_s, until)

    def instructions(self) -> float:
        if self.ub.instruction_distribution is InstructionDistribution.EXPONENTIAL:
            return self.work_rng.expovariate(1.0 / self.ub.instruction_length)
        return float(self.ub.instruction_length)

    def make_request(self, rid: int, t: float) -> Request:
        ub = self.ub
        return Request(rid, ub.name, ub.region, ub.grouping_factor, ub.data_size_per_request,
                       self.instructions(), t)
