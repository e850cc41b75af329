"""Simulation report: canonical JSON, CSV tables and a plain-text summary.

:meth:`SimulationReport.to_dict` is the machine report. The CSV and text
renderers read only that dictionary, so every number they print is a
rendering of the JSON form.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from geosim.metrics import CostReport, StatAccumulator

__all__ = ["SimulationReport", "DataCenterRow", "UserBaseRow", "render_text", "write_csv", "CSV_TABLES"]

MS = 1000.0


def _stat(acc: StatAccumulator) -> dict:
    d = acc.as_dict(MS)
    return {"count": d["count"], "avg_ms": d["avg"], "min_ms": d["min"], "max_ms": d["max"]}


@dataclass
class UserBaseRow:
    name: str
    region: int
    response: StatAccumulator


@dataclass
class DataCenterRow:
    name: str
    region: int
    vm_count: int
    servicing: StatAccumulator
    requests: int = 0
    bytes_transferred: int = 0
    vm_assignments: list[int] = field(default_factory=list)


@dataclass
class SimulationReport:
    scenario_name: str
    scenario_digest: str
    seed: int
    start_hour: int
    duration_s: int
    load_balancer: str
    broker_policy: str
    overall: StatAccumulator
    processing: StatAccumulator
    user_bases: list[UserBaseRow]
    data_centers: list[DataCenterRow]
    hourly: dict[str, list[StatAccumulator]]
    cost: CostReport
    run: dict

    def to_dict(self) -> dict:
        hourly = []
        for name, buckets in self.hourly.items():
            for hour, acc in enumerate(buckets):
                hourly.append({"user_base": name, "hour": hour, **_stat(acc)})
        return {
            "scenario": {
                "name": self.scenario_name,
                "digest": self.scenario_digest,
                "seed": self.seed,
                "start_hour": self.start_hour,
                "duration_s": self.duration_s,
                "load_balancer": self.load_balancer,
                "broker_policy": self.broker_policy,
            },
            "overall_response": _stat(self.overall),
            "dc_processing": _stat(self.processing),
            "user_bases": [{"name": u.name, "region": u.region, **_stat(u.response)} for u in self.user_bases],
            "data_centers": [
                {
                    "name": d.name,
                    "region": d.region,
                    "vm_count": d.vm_count,
                    "requests": d.requests,
                    "bytes_transferred": d.bytes_transferred,
                    "vm_assignments": list(d.vm_assignments),
                    **_stat(d.servicing),
                }
                for d in self.data_centers
            ],
            "hourly": hourly,
            "cost": {
                "data_centers": [
                    {"name": c.name, "vm_cost": c.vm_cost, "transfer_cost": c.transfer_cost, "total": c.total}
                    for c in self.cost.data_centers
                ],
                "vm_total": self.cost.vm_total,
                "transfer_total": self.cost.transfer_total,
                "grand_total": self.cost.grand_total,
            },
            "run": dict(self.run),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# text


def _ms(v) -> str:
    return "n/a" if v is None else f"{v:.3f}"


def _table(headers, rows) -> list[str]:
    cells = [headers] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
    return [fmt(cells[0])] + [fmt(r) for r in cells[1:]]


def render_text(d: dict) -> str:
    """Human-readable tables built from a machine report dictionary."""
    sc = d["scenario"]
    lines = [
        f"Scenario: {sc['name'] or '(unnamed)'}  seed={sc['seed']}  start={sc['start_hour']:02d}:00 GMT  "
        f"duration={sc['duration_s']} s  balancer={sc['load_balancer']}  broker={sc['broker_policy']}",
        "",
        "Overall Response Time",
    ]
    ov, pr = d["overall_response"], d["dc_processing"]
    lines += _table(
        ["", "Avg (ms)", "Min (ms)", "Max (ms)"],
        [
            ["Overall Response Time:", _ms(ov["avg_ms"]), _ms(ov["min_ms"]), _ms(ov["max_ms"])],
            ["Data Center Processing Time:", _ms(pr["avg_ms"]), _ms(pr["min_ms"]), _ms(pr["max_ms"])],
        ],
    )
    lines += ["", "Response time by the Region"]
    lines += _table(
        ["Userbase", "Avg (ms)", "Min (ms)", "Max (ms)"],
        [[u["name"], _ms(u["avg_ms"]), _ms(u["min_ms"]), _ms(u["max_ms"])] for u in d["user_bases"]],
    )
    lines += ["", "Data Center Request Servicing Times"]
    lines += _table(
        ["Data Center", "Avg (ms)", "Min (ms)", "Max (ms)"],
        [[c["name"], _ms(c["avg_ms"]), _ms(c["min_ms"]), _ms(c["max_ms"])] for c in d["data_centers"]],
    )
    cost = d["cost"]
    lines += [
        "",
        "Cost",
        f"Total Virtual Machine Cost: ${cost['vm_total']:.2f}",
        f"Total Data Transfer Cost: ${cost['transfer_total']:.2f}",
        f"Grand Total: ${cost['grand_total']:.2f}",
        "",
    ]
    lines += _table(
        ["Data Center", "VM Cost", "Data Transfer Cost", "Total"],
        [[c["name"], f"{c['vm_cost']:.3f}", f"{c['transfer_cost']:.3f}", f"{c['total']:.3f}"]
         for c in cost["data_centers"]],
    )
    run = d["run"]
    lines += ["", f"Events processed: {run['events_processed']}  requests: {run['requests_originated']}  "
                  f"in flight at cap: {run['in_flight_at_cap']}"]
    for w in run["warnings"]:
        lines.append(f"WARNING: {w}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# csv


def _csv_text(headers, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    w.writerows(["" if c is None else c for c in r] for r in rows)
    return buf.getvalue()


def _stat_cells(s):
    return [s["count"], s["avg_ms"], s["min_ms"], s["max_ms"]]


def csv_tables(d: dict) -> dict[str, str]:
    stat_h = ["count", "avg_ms", "min_ms", "max_ms"]
    cost = d["cost"]
    return {
        "overall.csv": _csv_text(
            ["metric"] + stat_h,
            [["overall_response"] + _stat_cells(d["overall_response"]),
             ["dc_processing"] + _stat_cells(d["dc_processing"])],
        ),
        "user_bases.csv": _csv_text(
            ["user_base", "region"] + stat_h, [[u["name"], u["region"]] + _stat_cells(u) for u in d["user_bases"]]
        ),
        "data_centers.csv": _csv_text(
            ["data_center", "region", "vm_count", "requests", "bytes_transferred"] + stat_h,
            [[c["name"], c["region"], c["vm_count"], c["requests"], c["bytes_transferred"]] + _stat_cells(c)
             for c in d["data_centers"]],
        ),
        "hourly.csv": _csv_text(
            ["hour", "user_base"] + stat_h, [[h["hour"], h["user_base"]] + _stat_cells(h) for h in d["hourly"]]
        ),
        "cost.csv": _csv_text(
            ["data_center", "vm_cost", "transfer_cost", "total"],
            [[c["name"], c["vm_cost"], c["transfer_cost"], c["total"]] for c in cost["data_centers"]]
            + [["TOTAL", cost["vm_total"], cost["transfer_total"], cost["grand_total"]]],
        ),
    }


CSV_TABLES = ("overall.csv", "user_bases.csv", "data_centers.csv", "hourly.csv", "cost.csv")


def write_csv(d: dict, directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in csv_tables(d).items():
        p = out / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths
