import pytest

from geosim.datacenter import DataCenter
from geosim.events import Engine, EventKind
from geosim.scenario import (
    DataCenterSpec,
    HostSpec,
    InternetCharacteristics,
    LoadBalancerPolicy,
    ScenarioConfig,
    UserBaseSpec,
    reference_scenario,
    validate_scenario,
)
from geosim.traffic import Request

REFERENCE_HOST = HostSpec(memory=20480, storage=128000, processor_count=4, processor_speed=10000)


def uniform_internet(latency_ms=25.0, bandwidth_mbps=1000.0, diagonal_ms=None):
    lat = [[latency_ms] * 6 for _ in range(6)]
    if diagonal_ms is not None:
        for i in range(6):
            lat[i][i] = diagonal_ms
    return InternetCharacteristics(
        latency_ms=tuple(tuple(float(x) for x in row) for row in lat),
        bandwidth_mbps=tuple(tuple(float(bandwidth_mbps) for _ in range(6)) for _ in range(6)),
    )


def zero_network():
    return uniform_internet(0.0, 1e12)


def user_base(name="UB", region=0, users=3600, rph=1.0, grouping=1, size=100, instructions=250, **kw):
    """A user base with a constant population (peak equals off-peak)."""
    return UserBaseSpec(
        name=name, region=region, requests_per_user_per_hour=rph, data_size_per_request=size,
        peak_start_hour=kw.pop("peak_start_hour", 0), peak_end_hour=kw.pop("peak_end_hour", 12),
        avg_peak_users=kw.pop("avg_peak_users", users), avg_off_peak_users=kw.pop("avg_off_peak_users", users),
        instruction_length=instructions, grouping_factor=grouping, **kw,
    )


def data_center(name="DC", region=0, vm_count=1, vm_mips=1000, hosts=(REFERENCE_HOST,), **kw):
    return DataCenterSpec(name=name, region=region, hosts=tuple(hosts), vm_count=vm_count, vm_mips=vm_mips, **kw)


def scenario(user_bases, data_centers, duration_s=3600, internet=None, **kw):
    return ScenarioConfig(
        user_bases=tuple(user_bases), data_centers=tuple(data_centers), duration_s=duration_s,
        internet=internet if internet is not None else uniform_internet(), **kw,
    )


def validated(cfg):
    v = validate_scenario(cfg)
    assert not isinstance(v, list), v
    return v


def run_jobs(jobs, mips=1000.0, vm_count=1, policy=LoadBalancerPolicy.ROUND_ROBIN, throttle=1):
    """Push ``(arrival, instructions)`` jobs through a live DataCenter; return finished requests by id."""
    eng = Engine()
    spec = data_center(vm_count=vm_count, vm_mips=int(mips))
    done = {}
    dc = DataCenter(spec, 0, eng, policy, throttle, on_complete=lambda r: done.__setitem__(r.id, r))
    eng.on(EventKind.ARRIVE_AT_DATA_CENTER, lambda ev: dc.arrive(ev.payload))
    eng.on(EventKind.SERVICE_COMPLETION, lambda ev: dc.complete(*ev.payload[1:]))
    for i, (a, w) in enumerate(jobs):
        eng.schedule(a, EventKind.ARRIVE_AT_DATA_CENTER, Request(i, "u", 0, 1, 1, float(w), a))
    eng.run()
    return done, dc


@pytest.fixture(scope="session")
def reference_validated():
    return validated(reference_scenario())


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
