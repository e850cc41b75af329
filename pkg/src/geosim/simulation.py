"""End-to-end run of a validated scenario.

Each grouped request makes four hops, one event each: origination at its user
base, arrival at the data center chosen by the broker, service completion on
the VM chosen by the load balancer, and arrival of the response back at the
user base. Origination stops at ``start + duration_s``; requests still in
flight drain for at most another :data:`DRAIN_CAP_S` seconds.
"""

from __future__ import annotations

import logging
from typing import TextIO

from geosim.datacenter import DataCenter, dc_servicing_time
from geosim.events import Engine, EventKind
from geosim.internet import LinkLoad, ServicingProbe, route, transfer_delay
from geosim.metrics import CostReport, DataCenterCost, Metrics, transfer_cost, vm_cost
from geosim.report import DataCenterRow, SimulationReport, UserBaseRow
from geosim.scenario import ValidatedScenario
from geosim.traffic import ArrivalStream, Request

__all__ = ["DRAIN_CAP_S", "Simulation", "simulate"]

log = logging.getLogger(__name__)

DRAIN_CAP_S = 3600.0


class Simulation:
    """One single-threaded run. Build it, call :meth:`run` once.

    ``seed`` and ``start_hour`` override the scenario's values. With
    ``keep_requests`` every finished :class:`Request` is kept in
    :attr:`finished` for inspection.
    """

    def __init__(self, scenario: ValidatedScenario, *, seed: int | None = None, start_hour: int | None = None,
                 trace: TextIO | None = None, keep_requests: bool = False):
        if not isinstance(scenario, ValidatedScenario):
            raise TypeError("Simulation needs a ValidatedScenario; call validate_scenario first")
        cfg = scenario.config
        self.scenario = scenario
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.start_hour = cfg.start_hour if start_hour is None else start_hour
        self.start = self.start_hour * 3600.0
        self.end = self.start + cfg.duration_s
        self.internet = cfg.internet

        self.engine = Engine(self.start, trace)
        self.link = LinkLoad()
        self.metrics = Metrics([u.name for u in cfg.user_bases], [d.name for d in cfg.data_centers])
        self.streams = [ArrivalStream(ub, self.seed, cfg.ramp_s, cfg.arrival_process) for ub in cfg.user_bases]
        self.dcs = [
            DataCenter(spec, i, self.engine, cfg.load_balancer, cfg.throttle_limit, self._on_serviced)
            for i, spec in enumerate(cfg.data_centers)
        ]
        self.probes = [ServicingProbe() for _ in cfg.data_centers]
        self._dc_index = {dc.spec.name: i for i, dc in enumerate(self.dcs)}

        self.originated = 0
        self.weighted_originated = 0
        self.responses = 0
        self.keep_requests = keep_requests
        self.finished: list[Request] = []
        self._next_id = 0
        self._ran = False

        on = self.engine.on
        on(EventKind.REQUEST_ORIGINATION, self._on_origination)
        on(EventKind.ARRIVE_AT_DATA_CENTER, self._on_arrival)
        on(EventKind.SERVICE_COMPLETION, self._on_completion)
        on(EventKind.RESPONSE_ARRIVAL, self._on_response)

    # -- event handlers ---------------------------------------------------

    def _schedule_origination(self, i: int, after: float) -> None:
        t = self.streams[i].next_after(after, until=self.end)
        if t < self.end:
            self.engine.schedule(t, EventKind.REQUEST_ORIGINATION, i)

    def _on_origination(self, ev) -> None:
        i = ev.payload
        now = self.engine.now
        req = self.streams[i].make_request(self._next_id, now)
        self._next_id += 1
        self.originated += 1
        self.weighted_originated += req.weight

        d = route(self.cfg.broker_policy, req.origin_region, self.cfg.data_centers, self.internet, self.probes)
        dc = self.dcs[d]
        self.metrics.record_transfer(dc.spec.name, req.size_bytes, req.weight)
        self.metrics.requests_by_dc[dc.spec.name] += req.weight
        self.link.start(req.origin_region, dc.spec.region)
        delay = transfer_delay(req.origin_region, dc.spec.region, req.size_bytes, self.internet, self.link)
        self.engine.schedule(now + delay, EventKind.ARRIVE_AT_DATA_CENTER, (req, d))
        self._schedule_origination(i, now)

    def _on_arrival(self, ev) -> None:
        req, d = ev.payload
        dc = self.dcs[d]
        self.link.finish(req.origin_region, dc.spec.region)
        dc.arrive(req)

    def _on_completion(self, ev) -> None:
        d, v, rid = ev.payload
        self.dcs[d].complete(v, rid)

    def _on_serviced(self, req: Request) -> None:
        now = self.engine.now
        d = self._dc_index[req.dc]
        dc = self.dcs[d]
        self.probes[d].update(dc_servicing_time(req))
        self.metrics.record_transfer(dc.spec.name, req.size_bytes, req.weight)
        self.link.start(dc.spec.region, req.origin_region)
        delay = transfer_delay(dc.spec.region, req.origin_region, req.size_bytes, self.internet, self.link)
        self.engine.schedule(now + delay, EventKind.RESPONSE_ARRIVAL, (req, d))

    def _on_response(self, ev) -> None:
        req, d = ev.payload
        self.link.finish(self.dcs[d].spec.region, req.origin_region)
        req.t_response = self.engine.now
        self.metrics.record_response(req)
        self.responses += 1
        if self.keep_requests:
            self.finished.append(req)

    # -- driver -------------------------------------------------------------

    def run(self) -> SimulationReport:
        if self._ran:
            raise RuntimeError("a Simulation can only be run once")
        self._ran = True
        for i in range(len(self.streams)):
            self._schedule_origination(i, self.start)
        self.engine.schedule(self.end, EventKind.SIMULATION_END)
        drained = self.engine.run(until=self.end + DRAIN_CAP_S)
        warnings = []
        in_flight = self.originated - self.responses
        if not drained or in_flight:
            warnings.append(f"drain cap reached at t={self.end + DRAIN_CAP_S:g} s with {in_flight} requests in flight")
            log.warning(warnings[-1])
        return self._report(drained, in_flight, warnings)

    def _report(self, drained: bool, in_flight: int, warnings: list[str]) -> SimulationReport:
        cfg = self.cfg
        m = self.metrics
        costs = []
        dc_rows = []
        for dc in self.dcs:
            spec = dc.spec
            costs.append(DataCenterCost(
                spec.name,
                vm_cost([float(cfg.duration_s)] * len(dc.vms), spec.cost_per_vm_hour),
                transfer_cost(m.bytes_by_dc[spec.name], spec.cost_per_gb_transfer),
            ))
            dc_rows.append(DataCenterRow(spec.name, spec.region, len(dc.vms), m.by_data_center[spec.name],
                                         m.requests_by_dc[spec.name], m.bytes_by_dc[spec.name],
                                         list(dc.balancer.assigned)))
        counts = self.engine.counts
        run = {
            "events_processed": self.engine.processed,
            "events_by_kind": {k.value: counts[k] for k in EventKind},
            "requests_originated": self.originated,
            "weighted_requests_originated": self.weighted_originated,
            "responses_recorded": self.responses,
            "in_flight_at_cap": in_flight,
            "drained": drained,
            "end_time_s": self.engine.now,
            "max_dc_queue": {dc.spec.name: dc.max_waiting for dc in self.dcs},
            "warnings": warnings,
        }
        return SimulationReport(
            scenario_name=cfg.name,
            scenario_digest=self.scenario.digest,
            seed=self.seed,
            start_hour=self.start_hour,
            duration_s=cfg.duration_s,
            load_balancer=cfg.load_balancer.value,
            broker_policy=cfg.broker_policy.value,
            overall=m.response,
            processing=m.processing,
            user_bases=[UserBaseRow(u.name, u.region, m.by_user_base[u.name]) for u in cfg.user_bases],
            data_centers=dc_rows,
            hourly=m.hourly.buckets,
            cost=CostReport(tuple(costs)),
            run=run,
        )


def simulate(scenario: ValidatedScenario, **kwargs) -> SimulationReport:
    """Run ``scenario`` to completion and return its report (keyword args go to :class:`Simulation`)."""
    return Simulation(scenario, **kwargs).run()
