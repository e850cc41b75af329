"""
A day of traffic
================

Count requests per GMT hour over a full day and compare with the peak and
off-peak populations each user base was given.
"""

# %%
from geosim import load_scenario_file, simulate, validate_scenario
from geosim.scenario import bundled_scenario_path
from geosim.traffic import expected_requests

cfg = load_scenario_file(bundled_scenario_path("reference_scenario_day.json"))
d = simulate(validate_scenario(cfg)).to_dict()

# %%
by_ub = {}
for row in d["hourly"]:
    by_ub.setdefault(row["user_base"], []).append(row)

for ub in cfg.user_bases:
    got = [r["count"] for r in by_ub[ub.name]]
    want = [expected_requests(ub, h * 3600, (h + 1) * 3600, cfg.ramp_s) for h in range(24)]
    print(ub.name, f"peak {ub.peak_start_hour:02d}-{ub.peak_end_hour:02d}")
    print("  simulated", " ".join(f"{c / 1000:5.0f}" for c in got))
    print("  expected ", " ".join(f"{c / 1000:5.0f}" for c in want))

# %%
# response time by hour for the furthest user base
rows = by_ub["UB4"]
print(" ".join(f"{r['hour']:02d}:{(r['avg_ms'] or 0):.0f}" for r in rows))
