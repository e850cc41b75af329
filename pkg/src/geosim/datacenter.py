"""Hosts, VM placement, processor-sharing VMs and in-datacenter load balancing.

Each VM serves its active requests under egalitarian processor sharing:
with ``n`` requests present, each progresses at ``mips / n`` instruction
units per second. Service time for a request alone on a VM is therefore
``instructions / mips``.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from geosim.events import Engine, Event, EventKind
from geosim.scenario import AllocationPolicy, DataCenterSpec, LoadBalancerPolicy
from geosim.traffic import Request

__all__ = [
    "PlacementError",
    "PSFault",
    "VmState",
    "plan_placement",
    "place_vms",
    "ps_advance",
    "ps_next_completion",
    "LoadBalancer",
    "dc_servicing_time",
    "DataCenter",
]

log = logging.getLogger(__name__)

REMAINING_TOL = 1e-9


class PlacementError(RuntimeError):
    pass


class PSFault(RuntimeError):
    """Internal processor-sharing bookkeeping went inconsistent."""


@dataclass
class VmState:
    id: int
    mips: float
    host: int = 0
    active: dict[int, float] = field(default_factory=dict)
    last_advance: float = 0.0
    work_done: float = 0.0
    busy_time: float = 0.0


def plan_placement(spec: DataCenterSpec) -> tuple[int, ...] | None:
    """Host index for every VM by first-fit-decreasing on memory, or None if infeasible.

    Without ``oversubscribe`` the VMs' MIPS on a host may not exceed
    ``processor_count * processor_speed``; SpaceShared hosts additionally cap
    the VMs' total cores at ``processor_count``.
    """
    if not spec.hosts:
        return None
    free_mem = [h.memory for h in spec.hosts]
    free_mips = [h.processor_count * h.processor_speed for h in spec.hosts]
    free_cores = [h.processor_count for h in spec.hosts]
    space_shared = spec.vm_allocation_policy is AllocationPolicy.SPACE_SHARED
    # homogeneous pool: the decreasing-memory order is the declaration order
    order = sorted(range(spec.vm_count), key=lambda v: -spec.vm_memory)
    placement = [0] * spec.vm_count
    for v in order:
        for h, host in enumerate(spec.hosts):
            mips = min(spec.vm_mips, host.processor_speed)
            if spec.vm_memory > free_mem[h]:
                continue
            if not spec.oversubscribe and mips > free_mips[h]:
                continue
            if space_shared and spec.vm_cores > free_cores[h]:
                continue
            free_mem[h] -= spec.vm_memory
            free_mips[h] -= mips
            free_cores[h] -= spec.vm_cores
            placement[v] = h
            break
        else:
            return None
    return tuple(placement)


def place_vms(spec: DataCenterSpec) -> list[VmState]:
    if not spec.hosts:
        raise PlacementError(f"data center {spec.name!r} has no hosts")
    placement = plan_placement(spec)
    if placement is None:
        raise PlacementError(f"cannot place {spec.vm_count} VMs in data center {spec.name!r}")
    return [VmState(v, float(min(spec.vm_mips, spec.hosts[h].processor_speed)), h)
            for v, h in enumerate(placement)]


def ps_advance(vm: VmState, t: float) -> None:
    """Bring every active request's remaining work forward to time ``t``."""
    dt = t - vm.last_advance
    if dt < 0:
        raise PSFault(f"VM {vm.id}: advance to {t!r} before last advance {vm.last_advance!r}")
    active = vm.active
    if active and dt > 0:
        n = len(active)
        share = vm.mips * dt / n
        # float clock resolution at t bounds how precisely a departure can be hit
        tol = REMAINING_TOL * max(1.0, share) + 8.0 * vm.mips * math.ulp(t)
        done = 0.0
        for rid, rem in active.items():
            left = rem - share
            if left < 0.0:
                if left < -tol:
                    raise PSFault(f"VM {vm.id}: request {rid} overran by {-left!r} instructions")
                left = 0.0
            done += rem - left
            active[rid] = left
        vm.work_done += done
        vm.busy_time += dt
    vm.last_advance = t


def ps_next_completion(vm: VmState) -> tuple[float, int] | None:
    """``(time, request id)`` of the next departure assuming no further arrivals."""
    if not vm.active:
        return None
    rem, rid = min((rem, rid) for rid, rem in vm.active.items())
    return vm.last_advance + rem * len(vm.active) / vm.mips, rid


class LoadBalancer:
    """Chooses a VM for each admitted request.

    Throttled returns None when every VM is at ``throttle_limit``; the caller
    queues the request until :meth:`release` frees a slot.
    """

    def __init__(self, policy: LoadBalancerPolicy, vm_count: int, throttle_limit: int = 1):
        if vm_count <= 0:
            raise ValueError("a load balancer needs at least one VM")
        self.policy = LoadBalancerPolicy(policy)
        self.rr_cursor = 0
        self.in_flight = [0] * vm_count
        self.assigned = [0] * vm_count
        self.throttle_limit = throttle_limit

    def assign(self) -> int | None:
        flights = self.in_flight
        if self.policy is LoadBalancerPolicy.ROUND_ROBIN:
            vm = self.rr_cursor
            self.rr_cursor = (vm + 1) % len(flights)
        elif self.policy is LoadBalancerPolicy.THROTTLED:
            vm = next((i for i, n in enumerate(flights) if n < self.throttle_limit), None)
            if vm is None:
                return None
        else:
            vm = min(range(len(flights)), key=flights.__getitem__)
        flights[vm] += 1
        self.assigned[vm] += 1
        return vm

    def release(self, vm: int) -> None:
        if self.in_flight[vm] <= 0:
            raise RuntimeError(f"VM {vm} released with nothing in flight")
        self.in_flight[vm] -= 1


def dc_servicing_time(r: Request) -> float:
    if r.t_arrive_dc is None or r.t_complete is None:
        raise ValueError(f"request {r.id} has not completed service")
    return r.t_complete - r.t_arrive_dc


class DataCenter:
    """Runtime state of one data center attached to an :class:`Engine`.

    ServiceCompletion events carry ``(dc_index, vm_index, request_id)``; the
    owner must route them to :meth:`complete`. ``on_complete`` receives each
    finished request.
    """

    def __init__(self, spec: DataCenterSpec, index: int, engine: Engine,
                 balancer_policy: LoadBalancerPolicy = LoadBalancerPolicy.ROUND_ROBIN,
                 throttle_limit: int = 1,
                 on_complete: Callable[[Request], None] | None = None):
        self.spec = spec
        self.index = index
        self.engine = engine
        self.vms = place_vms(spec)
        for vm in self.vms:
            vm.last_advance = engine.now
        self.balancer = LoadBalancer(balancer_policy, len(self.vms), throttle_limit)
        self.on_complete = on_complete
        self.waiting: deque[Request] = deque()
        self.max_waiting = 0
        self._pending: list[Event | None] = [None] * len(self.vms)
        self._requests: list[dict[int, Request]] = [{} for _ in self.vms]

    def arrive(self, req: Request) -> None:
        req.t_arrive_dc = self.engine.now
        req.dc = self.spec.name
        vm = self.balancer.assign()
        if vm is None:
            self.waiting.append(req)
            self.max_waiting = max(self.max_waiting, len(self.waiting))
        else:
            self._start(req, vm)

    def _start(self, req: Request, v: int) -> None:
        vm = self.vms[v]
        ps_advance(vm, self.engine.now)
        req.vm = v
        vm.active[req.id] = req.instructions
        self._requests[v][req.id] = req
        self._reschedule(v)

    def _reschedule(self, v: int) -> None:
        pending = self._pending[v]
        if pending is not None:
            self.engine.cancel(pending)
        nxt = ps_next_completion(self.vms[v])
        if nxt is None:
            self._pending[v] = None
        else:
            t, rid = nxt
            self._pending[v] = self.engine.schedule(max(t, self.engine.now), EventKind.SERVICE_COMPLETION,
                                                   (self.index, v, rid))

    def complete(self, v: int, rid: int) -> Request:
        vm = self.vms[v]
        now = self.engine.now
        ps_advance(vm, now)
        rem = vm.active.pop(rid)
        if rem > REMAINING_TOL * max(1.0, vm.mips) + 8.0 * vm.mips * math.ulp(now):
            raise PSFault(f"VM {v}: request {rid} completed with {rem!r} instructions left")
        self._pending[v] = None
        req = self._requests[v].pop(rid)
        req.t_complete = now
        self.balancer.release(v)
        while self.waiting:
            nxt = self.balancer.assign()
            if nxt is None:
                break
            self._start(self.waiting.popleft(), nxt)
        self._reschedule(v)
        if self.on_complete is not None:
            self.on_complete(req)
        return req

    @property
    def in_service(self) -> int:
        return sum(len(vm.active) for vm in self.vms) + len(self.waiting)
