"""Traffic profile ingestion and baseline per-interface signaling rates."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from decimal import Decimal
from enum import Enum
from types import MappingProxyType
from typing import Mapping

from .model import INTERFACES, ModelError, read_json


class ProfileError(ModelError):
    """Carries every field-level problem found while loading a profile."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class RateMode(str, Enum):
    TABLE_CALIBRATED = "table_calibrated"
    PARAMETRIC = "parametric"


_COUNTS = ("registered_subscribers", "attached_subscribers", "busy_hour_session_attempts",
           "simultaneous_bearers")
_DURATIONS = ("mean_session_time", "avg_epsb_session_duration")
_FRACTIONS = ("handover_ratio", "dense_area_attached_ratio", "busy_hour_traffic_ratio",
              "prepaid_ratio")


@dataclass(frozen=True)
class TrafficProfile:
    registered_subscribers: int
    attached_subscribers: int
    busy_hour_session_attempts: int
    simultaneous_bearers: int
    mean_session_time: float
    handover_ratio: float
    dense_area_attached_ratio: float
    avg_epsb_session_duration: float
    busy_hour_traffic_ratio: float
    retransmission_factor: float
    prepaid_ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


TABLE3_PROFILE = TrafficProfile(
    registered_subscribers=167_650,
    attached_subscribers=150_878,
    busy_hour_session_attempts=64_940_898,
    simultaneous_bearers=18_853,
    mean_session_time=180.0,
    handover_ratio=0.4,
    dense_area_attached_ratio=0.9,
    avg_epsb_session_duration=900.0,
    busy_hour_traffic_ratio=0.15,
    retransmission_factor=0.25,
    prepaid_ratio=0.8,
)

# Ingested for round-tripping but feed no rate formula.
UNUSED_PROFILE_FIELDS = (
    "attached_subscribers", "busy_hour_session_attempts", "mean_session_time",
    "handover_ratio", "dense_area_attached_ratio", "avg_epsb_session_duration",
    "busy_hour_traffic_ratio", "retransmission_factor",
)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def profile_errors(data) -> list:
    """Field-level validation messages for a raw profile mapping."""
    if not isinstance(data, Mapping):
        return ["profile must be a JSON object"]
    names = [f.name for f in fields(TrafficProfile)]
    errors = []
    for name in names:
        if name not in data:
            errors.append(f"{name}: missing field")
            continue
        value = data[name]
        if not _is_number(value):
            errors.append(f"{name}: non-numeric value {value!r}")
        elif name in _COUNTS and (value < 0 or value != int(value)):
            errors.append(f"{name}: must be a non-negative integer count, got {value!r}")
        elif name in _FRACTIONS and not 0 <= value <= 1:
            errors.append(f"{name}: fraction out of range [0, 1], got {value!r}")
        elif value < 0:
            errors.append(f"{name}: must be >= 0, got {value!r}")
    for name in data:
        if name not in names:
            errors.append(f"{name}: unknown field")
    if not errors and data["attached_subscribers"] > data["registered_subscribers"]:
        errors.append(
            f"attached_subscribers: {data['attached_subscribers']} exceeds "
            f"registered_subscribers {data['registered_subscribers']}")
    return errors


def load_profile(source) -> TrafficProfile:
    """Parse and validate a profile; raises :class:`ProfileError` listing all problems."""
    data = read_json(source)
    errors = profile_errors(data)
    if errors:
        raise ProfileError(errors)
    kwargs = {}
    for f in fields(TrafficProfile):
        value = data[f.name]
        kwargs[f.name] = int(value) if f.name in _COUNTS else float(value)
    return TrafficProfile(**kwargs)


@dataclass(frozen=True)
class Calibration:
    ran_core_rate: float
    sgw_pgw_rate: float
    mme_hss_per_subscriber: float
    pcrf_per_bearer: float
    grouped_udr_rate_published: float

    def __post_init__(self):
        bad = [f.name for f in fields(self) if not _is_number(getattr(self, f.name))
               or getattr(self, f.name) < 0]
        if bad:
            raise ProfileError([f"{name}: calibration values must be numbers >= 0" for name in bad])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data) -> "Calibration":
        data = read_json(data)
        names = {f.name for f in fields(cls)}
        errors = [f"{n}: missing field" for n in sorted(names - set(data))]
        errors += [f"{n}: unknown field" for n in sorted(set(data) - names)]
        if errors:
            raise ProfileError(errors)
        return cls(**data)


# Rates given as constants, without a derivation from the profile.
PAPER_CALIBRATION = Calibration(
    ran_core_rate=175_332,
    sgw_pgw_rate=56_559,
    mme_hss_per_subscriber=6.2,
    pcrf_per_bearer=2,
    grouped_udr_rate_published=173_239,
)

_TABLE_RATES = {
    "RAN_CORE": 175_332.0,
    "S5_S8": 56_559.0,
    "S6a": 1_039_430.0,
    "Gx": 37_706.0,
    "Ud_pcrf": 18_853.0,
    "Gy": 30_164.0,
}


@dataclass(frozen=True)
class RateTable:
    rates: Mapping
    mode: RateMode

    def __post_init__(self):
        for key, value in self.rates.items():
            if key not in INTERFACES:
                raise ModelError(f"rate table: undeclared interface {key!r}")
            if not _is_number(value) or value < 0:
                raise ModelError(f"rate table: {key}: rate must be a number >= 0")
        object.__setattr__(self, "rates", MappingProxyType(dict(self.rates)))

    def __eq__(self, other):
        if not isinstance(other, RateTable):
            return NotImplemented
        return self.mode == other.mode and dict(self.rates) == dict(other.rates)

    __hash__ = None

    @property
    def total(self) -> float:
        return math.fsum(self.rates.values())


def _mul(a, b) -> Decimal:
    # decimal product of the printed values, so 167650 * 6.2 is exactly 1039430
    return Decimal(repr(a)) * Decimal(repr(b))


def derive_baseline_rates(profile: TrafficProfile, cal: Calibration = PAPER_CALIBRATION) -> RateTable:
    gx = _mul(profile.simultaneous_bearers, cal.pcrf_per_bearer)
    rates = {
        "RAN_CORE": float(cal.ran_core_rate),
        "S5_S8": float(cal.sgw_pgw_rate),
        "S6a": float(_mul(profile.registered_subscribers, cal.mme_hss_per_subscriber)),
        "Gx": float(gx),
        "Ud_pcrf": float(profile.simultaneous_bearers),
        "Gy": float(math.floor(gx * Decimal(repr(profile.prepaid_ratio)))),
    }
    return RateTable(rates, RateMode.PARAMETRIC)


def table_calibrated_rates() -> RateTable:
    return RateTable(dict(_TABLE_RATES), RateMode.TABLE_CALIBRATED)
