"""Analytic and event-driven evaluation of a grouping scenario."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from .grouping import GroupedRates, apply_grouping, load_rules, paper_rules
from .model import (
    ModelError, PathClass, Placement, Protocol, get_interface, interface_path_class,
    load_placement, read_json, validate_placement, declaration_index,
)
from .profile import (
    PAPER_CALIBRATION, Calibration, ProfileError, RateMode, TrafficProfile,
    derive_baseline_rates, load_profile, table_calibrated_rates,
)

REPORT_VERSION = 1
RNG_NAME = "PCG64 (numpy SeedSequence, spawn_key=(crc32(interface), share))"
PROCESS_NAME = "poisson"
UINT64_MAX = 2**64 - 1


class ScenarioError(ModelError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class EngineKind(str, Enum):
    ANALYTIC = "analytic"
    EVENT_DRIVEN = "event_driven"


class Units(str, Enum):
    RATE = "transactions_per_sec"
    EVENTS = "events"


@dataclass(frozen=True)
class Scenario:
    name: str
    profile: TrafficProfile
    placement: Placement
    rules: tuple
    rate_mode: RateMode = RateMode.TABLE_CALIBRATED
    engine: EngineKind = EngineKind.ANALYTIC
    duration: float | None = None
    seed: int | None = None
    thinning: float = 1.0
    calibration: Calibration = PAPER_CALIBRATION

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        errors = scenario_errors(self)
        if errors:
            raise ScenarioError(errors)


def scenario_errors(s: Scenario) -> list:
    errors = [f"placement: {v}" for v in validate_placement(s.placement)]
    if s.engine is EngineKind.EVENT_DRIVEN:
        if s.duration is None or not s.duration > 0:
            errors.append("duration: event-driven runs need a duration > 0")
        if s.seed is None:
            errors.append("seed: event-driven runs need a seed")
    if s.seed is not None and not (isinstance(s.seed, int) and 0 <= s.seed <= UINT64_MAX):
        errors.append("seed: must be an unsigned 64-bit integer")
    if not (isinstance(s.thinning, (int, float)) and s.thinning >= 1):
        errors.append("thinning: must be a number >= 1")
    return errors


def load_scenario(source, **overrides) -> Scenario:
    """Load a scenario file; relative paths inside it resolve against its directory.

    ``overrides`` replace top-level scenario fields (``seed``, ``duration``,
    ``thinning``, ``engine``) before validation.
    """
    base = Path(".")
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        base = Path(source).parent
    data = read_json(source)
    if not isinstance(data, Mapping):
        raise ScenarioError(["scenario must be a JSON object"])
    data = {**data, **{k: v for k, v in overrides.items() if v is not None}}

    def resolve(ref):
        if isinstance(ref, str):
            return base / ref
        return ref

    errors = []
    known = {"name", "profile", "placement", "rules", "rate_mode", "engine", "duration",
             "seed", "thinning", "calibration"}
    errors += [f"{k}: unknown field" for k in sorted(set(data) - known)]
    parsed = {}
    try:
        parsed["rate_mode"] = RateMode(data.get("rate_mode", RateMode.TABLE_CALIBRATED.value))
    except ValueError:
        errors.append(f"rate_mode: unknown mode {data.get('rate_mode')!r}")
    try:
        parsed["engine"] = EngineKind(data.get("engine", EngineKind.ANALYTIC.value))
    except ValueError:
        errors.append(f"engine: unknown engine {data.get('engine')!r}")
    for key, loader in (("profile", load_profile), ("placement", load_placement)):
        if key not in data:
            errors.append(f"{key}: missing field")
            continue
        try:
            parsed[key] = loader(resolve(data[key]))
        except ProfileError as exc:
            errors += [f"profile: {e}" for e in exc.errors]
        except ModelError as exc:
            errors.append(f"{key}: {exc}")
    rules = data.get("rules", "paper")
    try:
        if rules == "paper":
            parsed["rules"] = paper_rules(parsed.get("rate_mode", RateMode.TABLE_CALIBRATED))
        else:
            parsed["rules"] = load_rules(resolve(rules))
    except ModelError as exc:
        errors.append(f"rules: {exc}")
    if "calibration" in data:
        try:
            parsed["calibration"] = Calibration.from_dict(data["calibration"])
        except ProfileError as exc:
            errors += [f"calibration: {e}" for e in exc.errors]
        except TypeError as exc:
            errors.append(f"calibration: {exc}")
    for key in ("duration", "thinning"):
        if data.get(key) is not None:
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                errors.append(f"{key}: non-numeric value {value!r}")
            else:
                parsed[key] = float(value)
    if data.get("seed") is not None:
        seed = data["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            errors.append(f"seed: must be an unsigned 64-bit integer, got {seed!r}")
        else:
            parsed["seed"] = seed
    if errors:
        raise ScenarioError(errors)
    return Scenario(name=str(data.get("name", Path(str(source)).stem)), **parsed)


@dataclass(frozen=True)
class InterfaceStat:
    network: float
    internal: float
    path_class: PathClass
    protocol: Protocol
    generated: bool = False

    def to_dict(self) -> dict:
        return {"network": self.network, "internal": self.internal,
                "path_class": self.path_class.value, "protocol": self.protocol.value,
                "generated": self.generated}

    @classmethod
    def from_dict(cls, d) -> "InterfaceStat":
        return cls(d["network"], d["internal"], PathClass(d["path_class"]),
                   Protocol(d["protocol"]), d["generated"])


def _total(values):
    values = list(values)
    if all(isinstance(v, int) for v in values):
        return sum(values)
    return math.fsum(values)


@dataclass(frozen=True)
class SimReport:
    per_interface: dict
    network_total: float
    internal_total: float
    placement_name: str
    rate_mode: RateMode
    engine: EngineKind
    units: Units = Units.RATE
    seeds: tuple = ()
    duration: float | None = None
    thinning: float = 1.0
    process: str | None = None
    rng: str | None = None
    flags: tuple = ()
    version: int = REPORT_VERSION

    @classmethod
    def build(cls, per_interface: Mapping, **tags) -> "SimReport":
        ordered = dict(sorted(per_interface.items(), key=lambda kv: (declaration_index(kv[0]), kv[0])))
        return cls(
            per_interface=ordered,
            network_total=_total(s.network for s in ordered.values()),
            internal_total=_total(s.internal for s in ordered.values()),
            **tags,
        )

    def tags(self) -> dict:
        return {k: getattr(self, k) for k in (
            "placement_name", "rate_mode", "engine", "units", "seeds", "duration", "thinning",
            "process", "rng", "flags", "version")}

    def as_rates(self) -> "SimReport":
        """Counts normalised to full-scale transactions per second."""
        if self.units is Units.RATE:
            return self
        scale = self.thinning / self.duration
        per = {k: replace(s, network=s.network * scale, internal=s.internal * scale)
               for k, s in self.per_interface.items()}
        return SimReport.build(per, **{**self.tags(), "units": Units.RATE})

    def network_rates(self) -> dict:
        return {k: s.network for k, s in self.per_interface.items()}

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "placement_name": self.placement_name,
            "rate_mode": self.rate_mode.value,
            "engine": self.engine.value,
            "units": self.units.value,
            "seeds": list(self.seeds),
            "duration": self.duration,
            "thinning": self.thinning,
            "process": self.process,
            "rng": self.rng,
            "flags": list(self.flags),
            "per_interface": {k: s.to_dict() for k, s in self.per_interface.items()},
            "network_total": self.network_total,
            "internal_total": self.internal_total,
        }

    @classmethod
    def from_dict(cls, d) -> "SimReport":
        return cls(
            per_interface={k: InterfaceStat.from_dict(v) for k, v in d["per_interface"].items()},
            network_total=d["network_total"],
            internal_total=d["internal_total"],
            placement_name=d["placement_name"],
            rate_mode=RateMode(d["rate_mode"]),
            engine=EngineKind(d["engine"]),
            units=Units(d["units"]),
            seeds=tuple(d["seeds"]),
            duration=d["duration"],
            thinning=d["thinning"],
            process=d["process"],
            rng=d["rng"],
            flags=tuple(d["flags"]),
            version=d["version"],
        )


def baseline_rates(scenario: Scenario):
    if scenario.rate_mode is RateMode.TABLE_CALIBRATED:
        return table_calibrated_rates()
    return derive_baseline_rates(scenario.profile, scenario.calibration)


def group(scenario: Scenario) -> GroupedRates:
    return apply_grouping(baseline_rates(scenario), scenario.placement, scenario.rules,
                          scenario.profile)


def _stats(scenario: Scenario, grouped: GroupedRates, network: Mapping, internal: Mapping) -> dict:
    out = {}
    for iface_id in set(grouped.network) | set(grouped.internal):
        iface = get_interface(iface_id)
        out[iface_id] = InterfaceStat(
            network=network.get(iface_id, 0),
            internal=internal.get(iface_id, 0),
            path_class=interface_path_class(scenario.placement, iface),
            protocol=iface.protocol,
            generated=iface_id in grouped.added,
        )
    return out


def run_analytic(scenario: Scenario) -> SimReport:
    grouped = group(scenario)
    network = {k: float(v) for k, v in grouped.network.items()}
    internal = {k: float(v) for k, v in grouped.internal.items()}
    return SimReport.build(
        _stats(scenario, grouped, network, internal),
        placement_name=scenario.placement.name,
        rate_mode=scenario.rate_mode,
        engine=EngineKind.ANALYTIC,
        units=Units.RATE,
        flags=grouped.flags,
    )


class PoissonSource:
    """Arrival stream of a homogeneous Poisson process on [0, inf).

    Inter-arrival gaps are drawn in blocks from a private generator, so the
    realised arrival times depend only on the generator and the rate.
    """

    def __init__(self, rate: float, rng: np.random.Generator, block: int = 1 << 16):
        self.rate = rate
        self._rng = rng
        self._block = block
        self._clock = 0.0
        self._pending = np.empty(0)

    def count_before(self, t: float) -> int:
        """Consume and count the arrivals strictly before simulated time ``t``."""
        if self.rate <= 0:
            return 0
        n = 0
        while True:
            if self._pending.size == 0:
                gaps = self._rng.exponential(1.0 / self.rate, size=self._block)
                self._pending = self._clock + np.cumsum(gaps)
                self._clock = float(self._pending[-1])
            k = int(np.searchsorted(self._pending, t, side="left"))
            n += k
            self._pending = self._pending[k:]
            if self._pending.size:
                return n


def substream(seed: int, interface_id: str, share: int) -> np.random.Generator:
    key = (zlib.crc32(interface_id.encode("utf-8")), share)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def run_simulation(scenario: Scenario, window: float = 1.0) -> SimReport:
    """Count Poisson transaction events for every interface share.

    Rates are divided by ``scenario.thinning`` before sampling; the report
    keeps raw event counts and records the thinning factor.
    """
    if scenario.engine is not EngineKind.EVENT_DRIVEN:
        scenario = replace(scenario, engine=EngineKind.EVENT_DRIVEN)
    grouped = group(scenario)
    duration = float(scenario.duration)
    sources = {}
    for share, rates in enumerate((grouped.network, grouped.internal)):
        for iface_id, rate in rates.items():
            block = max(1024, min(1 << 20, int(rate / scenario.thinning * window) + 64))
            sources[(iface_id, share)] = PoissonSource(
                rate / scenario.thinning, substream(scenario.seed, iface_id, share), block)
    counts = dict.fromkeys(sources, 0)

    now = 0.0
    while now < duration:
        now = min(now + window, duration)
        for key, src in sources.items():
            counts[key] += src.count_before(now)

    network = {k: c for (k, share), c in counts.items() if share == 0}
    internal = {k: c for (k, share), c in counts.items() if share == 1}
    return SimReport.build(
        _stats(scenario, grouped, network, internal),
        placement_name=scenario.placement.name,
        rate_mode=scenario.rate_mode,
        engine=EngineKind.EVENT_DRIVEN,
        units=Units.EVENTS,
        seeds=(scenario.seed,),
        duration=duration,
        thinning=float(scenario.thinning),
        process=PROCESS_NAME,
        rng=RNG_NAME,
        flags=grouped.flags,
    )


def run(scenario: Scenario) -> SimReport:
    if scenario.engine is EngineKind.EVENT_DRIVEN:
        return run_simulation(scenario)
    return run_analytic(scenario)


@dataclass(frozen=True)
class Comparison:
    before: SimReport
    after: SimReport
    absolute_reduction: float
    relative_reduction: float | None
    flags: tuple = field(default=())
    version: int = REPORT_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "absolute_reduction": self.absolute_reduction,
            "relative_reduction": self.relative_reduction,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d) -> "Comparison":
        return cls(SimReport.from_dict(d["before"]), SimReport.from_dict(d["after"]),
                   d["absolute_reduction"], d["relative_reduction"], tuple(d["flags"]),
                   d["version"])


def compare(before: SimReport, after: SimReport) -> Comparison:
    """Network-load reduction from ``before`` to ``after``.

    Event-count reports are first normalised to transactions per second so
    that reports of different durations or thinning compare on one scale.
    """
    before, after = before.as_rates(), after.as_rates()
    absolute = before.network_total - after.network_total
    flags = []
    if before.network_total > 0:
        relative = round(1 - after.network_total / before.network_total, 4)
    else:
        relative = None
        flags.append("relative-reduction-undefined: baseline network total is 0")
    return Comparison(before, after, absolute, relative, tuple(flags))
