"""``sim`` command line: validate, run and compare scenarios.

Exit status: 0 success, 1 invalid scenario or arguments, 2 I/O failure.
Set ``SIM_LOG`` (e.g. ``DEBUG``, ``INFO``) to change log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from geosim.report import render_text, write_csv
from geosim.scenario import LoadBalancerPolicy, ScenarioError, load_scenario_file, validate_scenario
from geosim.simulation import simulate

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

log = logging.getLogger("geosim")


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_validated(path):
    try:
        cfg = load_scenario_file(path)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None
    except ScenarioError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: {exc}") from None
    result = validate_scenario(cfg)
    if isinstance(result, list):
        lines = [f"{path}: {len(result)} violation(s)"] + [f"  {v}" for v in result]
        raise _Fail(EXIT_INVALID, "\n".join(lines))
    return result


def cmd_validate(args) -> int:
    _load_validated(args.scenario)
    print("valid")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _load_validated(args.scenario)
    overrides = {"seed": args.seed, "start_hour": args.start_hour}
    if args.start_hour is not None and not 0 <= args.start_hour <= 23:
        raise _Fail(EXIT_INVALID, "--start-hour must be within 0-23")
    trace = None
    try:
        if args.trace:
            trace = open(args.trace, "w", encoding="utf-8")
        report = simulate(scenario, trace=trace, **overrides)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write trace {args.trace}: {exc.strerror or exc}") from None
    finally:
        if trace is not None:
            trace.close()

    machine = report.to_dict()
    out = args.out or ("report.json" if args.format == "json" else "report")
    try:
        if args.format == "json":
            Path(out).write_text(report.to_json(), encoding="utf-8")
        else:
            write_csv(machine, out)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write report to {out}: {exc.strerror or exc}") from None
    sys.stdout.write(render_text(machine))
    log.info("report written to %s", out)
    return EXIT_OK


def _parse_policies(text):
    names = [p.strip() for p in text.split(",") if p.strip()]
    known = {p.value.lower(): p for p in LoadBalancerPolicy}
    policies = []
    for name in names:
        if name.lower() not in known:
            raise _Fail(EXIT_INVALID, f"unknown policy {name!r}; choose from "
                                      + ", ".join(p.value for p in LoadBalancerPolicy))
        policies.append(known[name.lower()])
    if len(policies) < 2:
        raise _Fail(EXIT_INVALID, "--policies needs at least two entries")
    return policies


def compare_rows(scenario, policies, seed=None, start_hour=None) -> list[dict]:
    """Run ``scenario`` once per load-balancing policy; one summary row each."""
    rows = []
    for policy in policies:
        variant = validate_scenario(scenario.config.replace(load_balancer=policy))
        d = simulate(variant, seed=seed, start_hour=start_hour).to_dict()
        ov = d["overall_response"]
        rows.append({
            "policy": policy.value,
            "avg_ms": ov["avg_ms"],
            "min_ms": ov["min_ms"],
            "max_ms": ov["max_ms"],
            "dc_processing_avg_ms": d["dc_processing"]["avg_ms"],
            "vm_cost": {c["name"]: c["vm_cost"] for c in d["cost"]["data_centers"]},
            "grand_total": d["cost"]["grand_total"],
        })
    return rows


def render_compare(rows) -> str:
    def ms(v):
        return "n/a" if v is None else f"{v:.3f}"

    dc_names = list(rows[0]["vm_cost"]) if rows else []
    headers = ["", *[r["policy"] for r in rows]]
    body = [
        ["Overall avg (ms)", *[ms(r["avg_ms"]) for r in rows]],
        ["Overall min (ms)", *[ms(r["min_ms"]) for r in rows]],
        ["Overall max (ms)", *[ms(r["max_ms"]) for r in rows]],
        ["DC processing avg (ms)", *[ms(r["dc_processing_avg_ms"]) for r in rows]],
        *[[f"{name} VM cost", *[f"{r['vm_cost'][name]:.3f}" for r in rows]] for name in dc_names],
        ["Grand total ($)", *[f"{r['grand_total']:.2f}" for r in rows]],
    ]
    cells = [headers] + body
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in cells]
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    policies = _parse_policies(args.policies)
    scenario = _load_validated(args.scenario)
    rows = compare_rows(scenario, policies, seed=args.seed, start_hour=args.start_hour)
    if args.out:
        try:
            Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as exc:
            raise _Fail(EXIT_IO, f"cannot write {args.out}: {exc.strerror or exc}") from None
    sys.stdout.write(render_compare(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="Geo-distributed cloud deployment simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write its report")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out", help="report path (a directory for --format csv)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--start-hour", type=int, help="GMT hour at which the run starts (overrides the scenario)")
    p.add_argument("--trace", help="write one line per processed event to this file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run one scenario under several load balancers")
    p.add_argument("scenario")
    p.add_argument("--policies", required=True, help="comma-separated, e.g. RoundRobin,Throttled,ActiveMonitoring")
    p.add_argument("--seed", type=int)
    p.add_argument("--start-hour", type=int)
    p.add_argument("--out", help="also write the comparison rows as JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
