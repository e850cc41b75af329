"""
Comparing load balancers
========================

Same scenario, same seed, three ways of picking a VM inside a data center.
"""

# %%
from dataclasses import replace

from geosim import reference_scenario, validate_scenario
from geosim.cli import compare_rows, render_compare
from geosim.scenario import LoadBalancerPolicy

scenario = validate_scenario(reference_scenario())
rows = compare_rows(scenario, list(LoadBalancerPolicy))
print(render_compare(rows))

# %%
# The bundled scenario is lightly loaded, so the policies barely differ.
# Squeeze DC1 down to 3 slower VMs and the differences show up.
tight = reference_scenario()
dc1 = tight.data_centers[0]
tight = tight.replace(data_centers=(replace(dc1, vm_count=3, vm_mips=500), tight.data_centers[1]))
rows = compare_rows(validate_scenario(tight), list(LoadBalancerPolicy))
print(render_compare(rows))

# %%
# Throttled with limit 1 runs one request per VM and queues the rest at the
# data center, so its servicing time includes queueing; time sharing spreads it instead.
for r in rows:
    print(f"{r['policy']:>16}: dc processing {r['dc_processing_avg_ms']:.1f} ms, max response {r['max_ms']:.1f} ms")
