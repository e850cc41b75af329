"""Discrete-event simulation of geo-distributed cloud deployments.

Typical use::

    from geosim import reference_scenario, validate_scenario, simulate

    report = simulate(validate_scenario(reference_scenario()))
    print(report.to_json())
"""

from geosim.scenario import (
    ScenarioConfig,
    ScenarioError,
    ValidatedScenario,
    Violation,
    emit_scenario,
    load_scenario,
    load_scenario_file,
    reference_scenario,
    validate_scenario,
)
from geosim.simulation import Simulation, simulate
from geosim.report import SimulationReport, render_text

__all__ = [
    "ScenarioConfig",
    "ScenarioError",
    "ValidatedScenario",
    "Violation",
    "emit_scenario",
    "load_scenario",
    "load_scenario_file",
    "reference_scenario",
    "validate_scenario",
    "Simulation",
    "simulate",
    "SimulationReport",
    "render_text",
]

__version__ = "0.1.0"
