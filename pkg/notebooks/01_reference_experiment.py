"""
Two data centers, six user bases, one hour
==========================================

Run the bundled scenario and look at the same tables the text report prints,
then poke at a couple of them directly from the machine report.
"""

# %%
from geosim import reference_scenario, render_text, simulate, validate_scenario

cfg = reference_scenario()
scenario = validate_scenario(cfg)
print(f"{len(cfg.user_bases)} user bases, {len(cfg.data_centers)} data centers, "
      f"start {cfg.start_hour}:00 GMT, {cfg.duration_s} s")

# %%
report = simulate(scenario)
d = report.to_dict()
print(render_text(d))

# %%
# UB6 shares a region with DC2, so it should see the smallest minimum response
rows = sorted(d["user_bases"], key=lambda r: r["min_ms"])
for r in rows:
    print(f"{r['name']}  region {r['region']}  min {r['min_ms']:8.3f} ms  avg {r['avg_ms']:8.3f} ms")

# %%
# VM cost only depends on how many VMs exist and for how long
for c in d["cost"]["data_centers"]:
    print(c["name"], "vm", c["vm_cost"], "transfer", round(c["transfer_cost"], 4))
print("grand total", d["cost"]["grand_total"])

# %%
# a different seed moves the statistics a little but not the structure
other = simulate(scenario, seed=7).to_dict()
print("avg ms, seed", cfg.seed, d["overall_response"]["avg_ms"], "| seed 7", other["overall_response"]["avg_ms"])
