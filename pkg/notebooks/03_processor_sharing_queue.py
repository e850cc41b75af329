"""
A single VM as an M/M/1 processor-sharing queue
===============================================

Poisson arrivals at 8 per second, exponential work with mean 100 instruction
units on a 1000 MIPS VM (so 10 per second), no network. Mean time in system
for processor sharing is 1 / (mu - lambda) whatever the work distribution.
"""

# %%
from geosim import ScenarioConfig, simulate, validate_scenario
from geosim.scenario import (
    ArrivalProcess,
    DataCenterSpec,
    HostSpec,
    InstructionDistribution,
    InternetCharacteristics,
    UserBaseSpec,
)

flat = InternetCharacteristics(latency_ms=tuple((0.0,) * 6 for _ in range(6)),
                               bandwidth_mbps=tuple((1e12,) * 6 for _ in range(6)))
host = HostSpec(memory=2048, storage=10000, processor_count=1, processor_speed=1000)


def run(lam, mu=10.0, distribution=InstructionDistribution.EXPONENTIAL, duration_s=20000, seed=1):
    ub = UserBaseSpec("Q", 0, 1.0, 100, 0, 12, int(lam * 3600), int(lam * 3600),
                      instruction_length=int(1000 / mu), grouping_factor=1, instruction_distribution=distribution)
    dc = DataCenterSpec("VM", 0, (host,), vm_count=1, vm_mips=1000)
    cfg = ScenarioConfig((ub,), (dc,), duration_s, internet=flat, arrival_process=ArrivalProcess.POISSON, seed=seed)
    return simulate(validate_scenario(cfg)).to_dict()["dc_processing"]


# %%
# near saturation the queue forgets its past slowly, so long runs are needed
for lam in (2.0, 5.0, 8.0, 9.0):
    s = run(lam)
    print(f"lambda {lam:>4}: mean {s['avg_ms'] / 1000:.3f} s  theory {1 / (10 - lam):.3f} s  ({s['count']} jobs)")

# %%
# insensitivity: fixed work gives the same mean at the same load
s = run(8.0, distribution=InstructionDistribution.FIXED)
print(f"fixed work, lambda 8: mean {s['avg_ms'] / 1000:.3f} s")
