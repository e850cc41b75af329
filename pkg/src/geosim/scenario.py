"""Experiment description: user bases, data centers, internet, policies.

A scenario is a UTF-8 JSON document. :func:`load_scenario` parses it into
frozen dataclasses (applying defaults for optional fields), and
:func:`validate_scenario` checks every invariant at once, returning either a
:class:`ValidatedScenario` or the complete list of :class:`Violation` records.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import typing
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

NUM_REGIONS = 6

__all__ = [
    "NUM_REGIONS",
    "BrokerPolicy",
    "LoadBalancerPolicy",
    "AllocationPolicy",
    "ArrivalProcess",
    "InstructionDistribution",
    "UserBaseSpec",
    "HostSpec",
    "DataCenterSpec",
    "InternetCharacteristics",
    "ScenarioConfig",
    "ValidatedScenario",
    "Violation",
    "ScenarioError",
    "load_scenario",
    "load_scenario_file",
    "emit_scenario",
    "validate_scenario",
    "scenario_digest",
    "default_internet",
    "bundled_scenario_path",
    "reference_scenario",
]


class BrokerPolicy(str, enum.Enum):
    CLOSEST_DATA_CENTER = "ClosestDataCenter"
    OPTIMIZE_RESPONSE_TIME = "OptimizeResponseTime"


class LoadBalancerPolicy(str, enum.Enum):
    ROUND_ROBIN = "RoundRobin"
    THROTTLED = "Throttled"
    ACTIVE_MONITORING = "ActiveMonitoring"


class AllocationPolicy(str, enum.Enum):
    TIME_SHARED = "TimeShared"
    SPACE_SHARED = "SpaceShared"


class ArrivalProcess(str, enum.Enum):
    POISSON = "poisson"
    DETERMINISTIC = "deterministic"


class InstructionDistribution(str, enum.Enum):
    FIXED = "fixed"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class UserBaseSpec:
    """One row of the user-base table plus the per-request workload size.

    Peak hours form the half-open GMT window ``[peak_start_hour,
    peak_end_hour)``; 24 denotes end of day.
    """

    name: str
    region: int
    requests_per_user_per_hour: float
    data_size_per_request: int
    peak_start_hour: int
    peak_end_hour: int
    avg_peak_users: int
    avg_off_peak_users: int
    instruction_length: int = 250
    grouping_factor: int = 1000
    instruction_distribution: InstructionDistribution = InstructionDistribution.FIXED


@dataclass(frozen=True)
class HostSpec:
    memory: int
    storage: int
    processor_count: int
    processor_speed: int


@dataclass(frozen=True)
class DataCenterSpec:
    """A data center: physical hosts, a homogeneous VM pool and its prices.

    ``os`` and ``vmm`` are descriptive only.
    """

    name: str
    region: int
    hosts: tuple[HostSpec, ...]
    vm_count: int
    vm_image_size: int = 10000
    vm_memory: int = 512
    vm_mips: int = 1000
    vm_cores: int = 1
    vm_allocation_policy: AllocationPolicy = AllocationPolicy.TIME_SHARED
    cost_per_vm_hour: float = 0.10
    cost_per_gb_transfer: float = 0.10
    oversubscribe: bool = False
    os: str = "Linux"
    vmm: str = "Xen"


@dataclass(frozen=True)
class InternetCharacteristics:
    """Region-to-region one-way latency (ms) and aggregate bandwidth (Mbps)."""

    latency_ms: tuple[tuple[float, ...], ...]
    bandwidth_mbps: tuple[tuple[float, ...], ...]


def default_internet() -> InternetCharacteristics:
    """The bundled default matrices (``data/default_internet.json``)."""
    raw = json.loads(resources.files("geosim").joinpath("data/default_internet.json").read_text("utf-8"))
    return _build(InternetCharacteristics, {k: raw[k] for k in ("latency_ms", "bandwidth_mbps")}, "internet")


@dataclass(frozen=True)
class ScenarioConfig:
    user_bases: tuple[UserBaseSpec, ...]
    data_centers: tuple[DataCenterSpec, ...]
    duration_s: int
    internet: InternetCharacteristics = field(default_factory=default_internet)
    broker_policy: BrokerPolicy = BrokerPolicy.CLOSEST_DATA_CENTER
    load_balancer: LoadBalancerPolicy = LoadBalancerPolicy.ROUND_ROBIN
    throttle_limit: int = 1
    arrival_process: ArrivalProcess = ArrivalProcess.POISSON
    seed: int = 0
    ramp_s: int = 0
    start_hour: int = 0
    name: str = ""

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)


class ScenarioError(ValueError):
    """A scenario document could not be parsed into a :class:`ScenarioConfig`.

    ``locus`` is a field path such as ``user_bases[2].region`` or a
    ``line L column C`` position for JSON syntax errors.
    """

    def __init__(self, message: str, locus: str = ""):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}" if self.path else self.message


@dataclass(frozen=True)
class ValidatedScenario:
    """A scenario known to satisfy every invariant.

    ``placement[d][v]`` is the host index of VM ``v`` in data center ``d``.
    Construct it through :func:`validate_scenario` only.
    """

    config: ScenarioConfig
    placement: tuple[tuple[int, ...], ...]

    @property
    def digest(self) -> str:
        return scenario_digest(self.config)


# ---------------------------------------------------------------------------
# parsing

_HINTS: dict[type, dict[str, typing.Any]] = {}


def _hints(cls):
    if cls not in _HINTS:
        _HINTS[cls] = typing.get_type_hints(cls)
    return _HINTS[cls]


def _type_name(tp) -> str:
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        return "one of " + ", ".join(repr(m.value) for m in tp)
    return getattr(tp, "__name__", str(tp))


def _convert(tp, value, path):
    origin = typing.get_origin(tp)
    if origin is tuple:
        if not isinstance(value, list):
            raise ScenarioError(f"expected a list, got {type(value).__name__}", path)
        item_tp = typing.get_args(tp)[0]
        return tuple(_convert(item_tp, v, f"{path}[{i}]") for i, v in enumerate(value))
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ScenarioError(f"expected an object, got {type(value).__name__}", path)
        return _build(tp, value, path)
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(value)
        except ValueError:
            raise ScenarioError(f"expected {_type_name(tp)}, got {value!r}", path) from None
    if tp is bool:
        if isinstance(value, bool):
            return value
    elif tp is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif tp is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif tp is str:
        if isinstance(value, str):
            return value
    else:  # pragma: no cover - schema programming error
        raise TypeError(f"unsupported field type {tp!r}")
    raise ScenarioError(f"expected {_type_name(tp)}, got {type(value).__name__} {value!r}", path)


def _build(cls, obj: dict, path: str):
    hints = _hints(cls)
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(obj) - set(known))
    if unknown:
        raise ScenarioError(f"unknown field {unknown[0]!r}", _join(path, unknown[0]))
    kwargs = {}
    for name, f in known.items():
        sub = _join(path, name)
        if name not in obj:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                raise ScenarioError("missing required field", sub)
            continue
        kwargs[name] = _convert(hints[name], obj[name], sub)
    return cls(**kwargs)


def _join(path, name):
    return f"{path}.{name}" if path else name


def load_scenario(text: str) -> ScenarioConfig:
    """Parse a scenario JSON document.

    Raises :class:`ScenarioError` on malformed JSON, unknown fields, type
    mismatches, missing required fields, or an empty ``user_bases`` list.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(obj, dict):
        raise ScenarioError("top level must be an object", "line 1 column 1")
    if obj.get("user_bases") == []:
        raise ScenarioError("empty user_bases", "user_bases")
    return _build(ScenarioConfig, obj, "")


def load_scenario_file(path) -> ScenarioConfig:
    return load_scenario(Path(path).read_text(encoding="utf-8"))


def _plain(value):
    if isinstance(value, enum.Enum):
        return value.value
    if dataclasses.is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def emit_scenario(cfg: ScenarioConfig | ValidatedScenario, *, indent: int | None = 2) -> str:
    """Serialize a scenario with every field explicit (defaults included)."""
    if isinstance(cfg, ValidatedScenario):
        cfg = cfg.config
    return json.dumps(_plain(cfg), indent=indent, sort_keys=indent is None)


def scenario_digest(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(emit_scenario(cfg, indent=None).encode("utf-8")).hexdigest()


def bundled_scenario_path(name: str = "reference_scenario.json") -> Path:
    return Path(str(resources.files("geosim").joinpath("data", name)))


def reference_scenario() -> ScenarioConfig:
    """The shipped reproduction of the two-data-center, six-user-base experiment."""
    return load_scenario_file(bundled_scenario_path())


# ---------------------------------------------------------------------------
# validation


def _check_user_base(ub: UserBaseSpec, path: str, ramp_s: int, out: list):
    def bad(sub, msg):
        out.append(Violation(_join(path, sub), msg))

    if not 0 <= ub.region < NUM_REGIONS:
        bad("region", "region out of range")
    if ub.requests_per_user_per_hour <= 0:
        bad("requests_per_user_per_hour", "must be positive")
    if ub.data_size_per_request <= 0:
        bad("data_size_per_request", "must be positive")
    for name in ("peak_start_hour", "peak_end_hour"):
        if not 0 <= getattr(ub, name) <= 24:
            bad(name, "hour outside 0-24")
    if ub.peak_start_hour == ub.peak_end_hour:
        bad("peak_end_hour", "empty peak window")
    elif ub.peak_start_hour > ub.peak_end_hour:
        bad("peak_end_hour", "peak window ends before it starts")
    for name in ("avg_peak_users", "avg_off_peak_users"):
        if getattr(ub, name) < 0:
            bad(name, "must be nonnegative")
    if ub.instruction_length <= 0:
        bad("instruction_length", "must be positive")
    if ub.grouping_factor <= 0:
        bad("grouping_factor", "must be positive")
    else:
        nonzero = [n for n in (ub.avg_peak_users, ub.avg_off_peak_users) if n > 0]
        if nonzero and ub.grouping_factor > min(nonzero):
            bad("grouping_factor", "grouping factor exceeds the population it represents")
    window_s = (ub.peak_end_hour - ub.peak_start_hour) * 3600
    if window_s > 0 and ramp_s > min(window_s, 86400 - window_s):
        bad("peak_end_hour", "ramp_s longer than the peak or off-peak window")


def _check_data_center(dc: DataCenterSpec, path: str, out: list) -> tuple[int, ...] | None:
    from geosim.datacenter import plan_placement

    def bad(sub, msg):
        out.append(Violation(_join(path, sub), msg))

    if not 0 <= dc.region < NUM_REGIONS:
        bad("region", "region out of range")
    if not dc.hosts:
        bad("hosts", "no hosts")
    hosts_ok = True
    for i, host in enumerate(dc.hosts):
        for f in dataclasses.fields(HostSpec):
            if getattr(host, f.name) <= 0:
                bad(f"hosts[{i}].{f.name}", "must be positive")
                hosts_ok = False
    vm_ok = True
    for name in ("vm_count", "vm_memory", "vm_mips", "vm_cores"):
        if getattr(dc, name) <= 0:
            bad(name, "must be positive")
            vm_ok = False
    if dc.vm_image_size < 0:
        bad("vm_image_size", "must be nonnegative")
    for name in ("cost_per_vm_hour", "cost_per_gb_transfer"):
        if getattr(dc, name) < 0:
            bad(name, "must be nonnegative")
    if dc.hosts and hosts_ok and vm_ok:
        placement = plan_placement(dc)
        if placement is None:
            bad("vm_count", "placement infeasible")
        return placement
    return None


def _check_matrix(matrix, path, positive, out):
    if len(matrix) != NUM_REGIONS or any(len(row) != NUM_REGIONS for row in matrix):
        out.append(Violation(path, f"internet matrix incomplete (need {NUM_REGIONS}x{NUM_REGIONS})"))
        return
    for i, row in enumerate(matrix):
        for j, v in enumerate(row):
            if (positive and v <= 0) or v < 0:
                out.append(Violation(f"{path}[{i}][{j}]", "must be positive" if positive else "must be nonnegative"))


def validate_scenario(cfg: ScenarioConfig) -> ValidatedScenario | list[Violation]:
    """Check every scenario invariant, reporting all violations in a stable order."""
    out: list[Violation] = []
    if not cfg.user_bases:
        out.append(Violation("user_bases", "empty user_bases"))
    if not cfg.data_centers:
        out.append(Violation("data_centers", "empty data_centers"))
    if cfg.duration_s <= 0:
        out.append(Violation("duration_s", "must be positive"))
    if cfg.ramp_s < 0:
        out.append(Violation("ramp_s", "must be nonnegative"))
    if not 0 <= cfg.start_hour <= 23:
        out.append(Violation("start_hour", "hour outside 0-23"))
    if cfg.throttle_limit < 1:
        out.append(Violation("throttle_limit", "must be at least 1"))
    if not 0 <= cfg.seed < 2**64:
        out.append(Violation("seed", "must be a 64-bit unsigned integer"))

    for kind, items in (("user_bases", cfg.user_bases), ("data_centers", cfg.data_centers)):
        seen = set()
        for i, item in enumerate(items):
            if item.name in seen:
                out.append(Violation(f"{kind}[{i}].name", f"duplicate name {item.name!r}"))
            seen.add(item.name)

    for i, ub in enumerate(cfg.user_bases):
        _check_user_base(ub, f"user_bases[{i}]", max(cfg.ramp_s, 0), out)
    placements = []
    for i, dc in enumerate(cfg.data_centers):
        placements.append(_check_data_center(dc, f"data_centers[{i}]", out))

    _check_matrix(cfg.internet.latency_ms, "internet.latency_ms", False, out)
    _check_matrix(cfg.internet.bandwidth_mbps, "internet.bandwidth_mbps", True, out)

    if out:
        return out
    return ValidatedScenario(cfg, tuple(placements))
