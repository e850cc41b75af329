"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line; the lines are printed in the
terminal summary (and immediately with ``-s``).
"""

import json
import math
import random
import time

import pytest

from geosim.cli import compare_rows
from geosim.datacenter import LoadBalancer
from geosim.internet import round_trip_latency
from geosim.scenario import (
    ArrivalProcess,
    BrokerPolicy,
    InstructionDistribution,
    InternetCharacteristics,
    LoadBalancerPolicy,
    bundled_scenario_path,
    load_scenario_file,
)
from geosim.simulation import Simulation, simulate

from conftest import ACCEPTANCE_LINES, data_center, run_jobs, scenario, user_base, validated, zero_network
from oracles import mm1_ps_mean_sojourn, ps_fixed_step

SHIPPED = ("reference_scenario.json", "reference_scenario_day.json")


def record(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def shipped_runs():
    runs = {}
    for name in SHIPPED:
        sim = Simulation(validated(load_scenario_file(bundled_scenario_path(name))), keep_requests=True)
        report = sim.run()
        runs[name] = (sim, report, report.to_dict())
    return runs


def test_1_reference_scenario_structure():
    cfg = load_scenario_file(bundled_scenario_path())
    t0 = time.perf_counter()
    report = simulate(validated(cfg))
    elapsed = time.perf_counter() - t0
    d = report.to_dict()
    cost = d["cost"]
    vm = [c["vm_cost"] for c in cost["data_centers"]]
    expected = [dc.vm_count * dc.cost_per_vm_hour * (cfg.duration_s / 3600) for dc in cfg.data_centers]
    symmetric = len({(dc.vm_count, dc.cost_per_vm_hour, dc.hosts) for dc in cfg.data_centers}) == 1
    checks = {
        "runtime < 60 s": elapsed < 60,
        "round robin, 60 min, grouping 1000": (cfg.load_balancer is LoadBalancerPolicy.ROUND_ROBIN
                                               and cfg.duration_s == 3600
                                               and all(u.grouping_factor == 1000 for u in cfg.user_bases)),
        "symmetric DCs": symmetric,
        "VM costs equal": vm[0] == vm[1],
        "VM cost = count x rate x duration": vm == expected,
        "grand = VM + transfer": cost["grand_total"] == cost["vm_total"] + cost["transfer_total"],
        "6 UB rows, 2 DC rows": len(d["user_bases"]) == 6 and len(d["data_centers"]) == 2,
    }
    failed = [k for k, ok in checks.items() if not ok]
    record(1, not failed, f"reference scenario in {elapsed:.2f} s, VM cost {vm}, grand total "
                          f"{cost['grand_total']:.4f}" + (f"; failed: {failed}" if failed else ""))


def test_2_mm1_processor_sharing_oracle():
    lam, mu = 8.0, 10.0
    mips = 1000
    ub = user_base(users=int(lam * 3600), rph=1.0, grouping=1, instructions=int(mips / mu),
                   instruction_distribution=InstructionDistribution.EXPONENTIAL)
    cfg = scenario([ub], [data_center(vm_count=1, vm_mips=mips)], duration_s=13_200,
                   internet=zero_network(), arrival_process=ArrivalProcess.POISSON, seed=2)
    t0 = time.perf_counter()
    d = simulate(validated(cfg)).to_dict()
    elapsed = time.perf_counter() - t0
    n = d["dc_processing"]["count"]
    mean = d["dc_processing"]["avg_ms"] / 1000
    target = mm1_ps_mean_sojourn(lam, mu)
    rel = abs(mean - target) / target
    ok = n >= 100_000 and rel <= 0.05 and elapsed < 60
    record(2, ok, f"{n} completions, mean servicing {mean:.4f} s vs {target} s "
                  f"(rel err {rel:.4f} <= 0.05), {elapsed:.1f} s")


def test_3_ps_against_fixed_step_integration():
    rng = random.Random(3)
    worst = 0.0
    for _ in range(20):
        k = rng.randint(1, 10)
        # arrivals on a 1 ms grid so every arrival falls on an integration step
        jobs = [(rng.randrange(0, 2000) / 1000, rng.uniform(50, 1500)) for _ in range(k)]
        mips = rng.choice([500.0, 1000.0, 2500.0])
        done, _ = run_jobs(jobs, mips=mips)
        ref = ps_fixed_step(jobs, mips)
        for i, (a, _) in enumerate(jobs):
            got = done[i].t_complete
            worst = max(worst, abs(got - ref[i]) / ref[i])
    record(3, worst <= 1e-3, f"20 instances, worst relative error {worst:.2e} <= 1e-3")


def test_4_conservation_and_bucketing(shipped_runs):
    details, ok = [], True
    for name, (_, _, d) in shipped_runs.items():
        run = d["run"]
        total = d["overall_response"]["count"]
        hourly = sum(h["count"] for h in d["hourly"])
        rows = [u for u in d["user_bases"] if u["count"]]
        weighted = math.fsum(u["count"] * u["avg_ms"] for u in rows) / math.fsum(u["count"] for u in rows)
        rel = abs(weighted - d["overall_response"]["avg_ms"]) / d["overall_response"]["avg_ms"]
        this = (run["requests_originated"] == run["responses_recorded"]
                and hourly == total
                and sum(u["count"] for u in d["user_bases"]) == total
                and rel <= 1e-9)
        ok &= this
        details.append(f"{name}: {run['requests_originated']} originated / {run['responses_recorded']} "
                       f"responded, hourly sum {hourly} = {total}, avg rel diff {rel:.1e}")
    record(4, ok, "; ".join(details))


def test_5_latency_floor(shipped_runs):
    worst_request, worst_min, ok = math.inf, math.inf, True
    for sim, report, d in shipped_runs.values():
        net = sim.cfg.internet
        regions = {dc.name: dc.region for dc in sim.cfg.data_centers}
        floor_by_ub = {}
        for r in sim.finished:
            rtt = round_trip_latency(r.origin_region, regions[r.dc], net)
            slack = (r.t_response - r.t_origin) - rtt
            worst_request = min(worst_request, slack)
            ok &= slack >= 0
            floor_by_ub[r.user_base] = min(floor_by_ub.get(r.user_base, math.inf), rtt)
        for row in d["user_bases"]:
            if row["count"]:
                gap = row["min_ms"] - floor_by_ub[row["name"]] * 1000
                worst_min = min(worst_min, gap)
                ok &= gap >= 0
    record(5, ok, f"smallest per-request slack over RTT {worst_request * 1000:.3f} ms, "
                  f"smallest per-UB min slack {worst_min:.3f} ms")


def test_6_round_robin_fairness():
    lb = LoadBalancer(LoadBalancerPolicy.ROUND_ROBIN, 7)
    for _ in range(10_000):
        lb.release(lb.assign())
    unit_spread = max(lb.assigned) - min(lb.assigned)
    # and end to end: exactly 10^4 deterministic arrivals (t = 1 .. 10^4 s) into one 7-VM data center
    cfg = scenario([user_base(users=3600, rph=1.0)], [data_center(vm_count=7)], duration_s=10_001,
                   arrival_process=ArrivalProcess.DETERMINISTIC)
    report = simulate(validated(cfg))
    counts = report.data_centers[0].vm_assignments
    sim_spread = max(counts) - min(counts)
    ok = sum(counts) == 10_000 and sim_spread <= 1 and unit_spread <= 1
    record(6, ok, f"assignments per VM {counts}, spread {sim_spread} (balancer alone {unit_spread})")


def test_7_determinism():
    v = validated(load_scenario_file(bundled_scenario_path()))
    a, b = simulate(v).to_json(), simulate(v).to_json()
    rows = compare_rows(v, [LoadBalancerPolicy.ROUND_ROBIN, LoadBalancerPolicy.ROUND_ROBIN])
    same_cols = json.dumps(rows[0], sort_keys=True) == json.dumps(rows[1], sort_keys=True)
    ok = a.encode() == b.encode() and same_cols
    record(7, ok, f"two runs byte-identical ({len(a)} bytes), self-compare columns identical: {same_cols}")


def test_8_closest_data_center_broker():
    lat = [[40.0 + 37 * ((i * 6 + j) % 11) for j in range(6)] for i in range(6)]
    net = InternetCharacteristics(latency_ms=tuple(tuple(r) for r in lat),
                                  bandwidth_mbps=tuple(tuple(1000.0 for _ in range(6)) for _ in range(6)))
    dc_regions = (1, 4)
    ubs = [user_base(f"UB{r}", region=r, users=7200, rph=1.0) for r in range(6)]
    dcs = [data_center(f"DC{i}", region=g, vm_count=3) for i, g in enumerate(dc_regions)]
    cfg = scenario(ubs, dcs, duration_s=600, internet=net, broker_policy=BrokerPolicy.CLOSEST_DATA_CENTER)
    sim = Simulation(validated(cfg), keep_requests=True)
    sim.run()
    # independent argmin over the configured matrix; no ties in this matrix
    expected = {f"UB{r}": f"DC{min(range(2), key=lambda i: lat[r][dc_regions[i]])}" for r in range(6)}
    assert all(lat[r][1] != lat[r][4] for r in range(6))
    routed = {}
    for req in sim.finished:
        routed.setdefault(req.user_base, set()).add(req.dc)
    ok = all(routed.get(ub) == {dc} for ub, dc in expected.items())
    record(8, ok, f"routes {dict(sorted((k, sorted(v)) for k, v in routed.items()))} vs argmin {expected}")
