"""Built-in placements and co-location rewrite rules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .model import (
    PLACEABLE, EntityKind, ModelError, Placement, get_interface, placement_from_segments,
    read_json,
)
from .profile import RateMode, RateTable, TrafficProfile

E = EntityKind


class GroupingError(ModelError):
    pass


class AddMode(str, Enum):
    PUBLISHED = "published"
    PER_SUBSCRIBER = "per_subscriber"


@dataclass(frozen=True)
class AddSpec:
    """An interface a rule puts on the network once it fires.

    ``reference`` is an optional published value for the same quantity; when
    the computed rate disagrees with it the grouping result is flagged.
    """

    interface: str
    mode: AddMode
    value: float
    reference: float | None = None

    def rate(self, profile: TrafficProfile | None) -> float:
        if self.mode is AddMode.PUBLISHED:
            return float(self.value)
        if profile is None:
            raise GroupingError(f"profile required: {self.interface} is per-subscriber")
        return float(Decimal(repr(profile.registered_subscribers)) * Decimal(repr(self.value)))


@dataclass(frozen=True)
class RewriteRule:
    id: str
    trigger: frozenset
    removes: str
    adds: AddSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "trigger", frozenset(self.trigger))
        if len(self.trigger) < 2:
            raise GroupingError(f"rule {self.id}: trigger needs at least two entities")
        if any(e.external for e in self.trigger):
            raise GroupingError(f"rule {self.id}: trigger cannot contain external entities")
        removed = get_interface(self.removes)
        if removed.aggregate:
            raise GroupingError(f"rule {self.id}: aggregate interface {self.removes} cannot be removed")
        if not removed.endpoints & self.trigger:
            raise GroupingError(f"rule {self.id}: {self.removes} does not touch the trigger set")
        if self.adds is not None:
            added = get_interface(self.adds.interface)
            if added.endpoints <= self.trigger:
                raise GroupingError(
                    f"rule {self.id}: added interface {added.id} would be internal to the trigger")

    def triggered(self, placement: Placement) -> bool:
        return placement.co_segmented(self.trigger)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "trigger": sorted(e.value for e in self.trigger),
            "removes": self.removes,
        }
        if self.adds is not None:
            out["adds"] = {"interface": self.adds.interface, "mode": self.adds.mode.value,
                           "value": self.adds.value}
            if self.adds.reference is not None:
                out["adds"]["reference"] = self.adds.reference
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "RewriteRule":
        try:
            adds = data.get("adds")
            spec = None
            if adds is not None:
                spec = AddSpec(adds["interface"], AddMode(adds["mode"]), float(adds["value"]),
                               None if adds.get("reference") is None else float(adds["reference"]))
            return cls(str(data["id"]), frozenset(E.parse(n) for n in data["trigger"]),
                       data["removes"], spec)
        except KeyError as exc:
            raise GroupingError(f"rule {data.get('id', '?')}: missing {exc.args[0]!r}") from None
        except (TypeError, ValueError, AttributeError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise GroupingError(f"rule {data.get('id', '?')}: {exc}") from None


def load_rules(source) -> list:
    data = read_json(source)
    if not isinstance(data, list):
        raise GroupingError("rules file must be a JSON array")
    rules = [RewriteRule.from_dict(item) for item in data]
    ids = [r.id for r in rules]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise GroupingError(f"duplicate rule ids: {', '.join(dupes)}")
    return rules


PROPOSED_SEGMENTS = {
    "segment-1": (E.MME, E.HSS_FE),
    "segment-2": (E.SGSN, E.HLR_FE),
    "segment-3": (E.PGW, E.PCEF, E.SGW),
    "segment-4": (E.UDR, E.OCS, E.OFCS, E.PCRF),
}


def isolated_placement() -> Placement:
    segments = {e.value.lower(): (e,) for e in sorted(PLACEABLE, key=lambda e: e.value)}
    return placement_from_segments("isolated", segments)


def proposed_placement() -> Placement:
    return placement_from_segments("proposed", PROPOSED_SEGMENTS)


def single_segment_placement() -> Placement:
    return placement_from_segments("all-in-one", {"segment-all": tuple(PLACEABLE)})


PUBLISHED_UD_HSS = 173_239.0


def paper_rules(mode: RateMode = RateMode.TABLE_CALIBRATED) -> list:
    if RateMode(mode) is RateMode.TABLE_CALIBRATED:
        ud_hss = AddSpec("Ud_hss", AddMode.PUBLISHED, PUBLISHED_UD_HSS)
    else:
        ud_hss = AddSpec("Ud_hss", AddMode.PER_SUBSCRIBER, 1.0, reference=PUBLISHED_UD_HSS)
    return [
        RewriteRule("R1", frozenset({E.MME, E.HSS_FE}), "S6a", ud_hss),
        RewriteRule("R2", frozenset({E.SGW, E.PGW}), "S5_S8"),
        RewriteRule("R3a", frozenset({E.PCRF, E.UDR}), "Ud_pcrf"),
        RewriteRule("R3b", frozenset({E.PCRF, E.OCS}), "Gy"),
    ]


@dataclass(frozen=True)
class GroupedRates:
    """Network and internal shares after applying a placement.

    ``added`` records how much of each entry was inserted by rules rather
    than carried over from the baseline, so that
    ``baseline = network + internal - added`` holds per interface.
    """

    network: Mapping
    internal: Mapping
    placement_name: str
    added: Mapping = field(default_factory=dict)
    flags: tuple = ()

    def __post_init__(self):
        for name in ("network", "internal", "added"):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))

    def __eq__(self, other):
        if not isinstance(other, GroupedRates):
            return NotImplemented
        return (dict(self.network), dict(self.internal), self.placement_name,
                dict(self.added), self.flags) == (
            dict(other.network), dict(other.internal), other.placement_name,
            dict(other.added), other.flags)

    __hash__ = None

    @property
    def network_total(self) -> float:
        return math.fsum(self.network.values())

    @property
    def internal_total(self) -> float:
        return math.fsum(self.internal.values())


def divergence_flag(interface: str, computed: float, reference: float) -> str:
    pct = (reference - computed) / computed * 100 if computed else float("inf")
    return (f"calibration-divergence: {interface} computed {computed:.2f} vs published "
            f"{reference:.2f} ({pct:+.2f}%)")


def apply_grouping(rates: RateTable, placement: Placement, rules: Sequence[RewriteRule],
                   profile: TrafficProfile | None = None) -> GroupedRates:
    network: dict = {}
    internal: dict = {}
    added: dict = {}
    flags = []
    fired = [r for r in rules if r.triggered(placement)]
    removed = {r.removes for r in fired}

    for iface_id, rate in rates.rates.items():
        iface = get_interface(iface_id)
        if not iface.aggregate and (iface_id in removed or placement.co_segmented(iface.endpoints)):
            internal[iface_id] = internal.get(iface_id, 0.0) + rate
        else:
            network[iface_id] = network.get(iface_id, 0.0) + rate

    for rule in fired:
        if rule.adds is None:
            continue
        spec = rule.adds
        value = spec.rate(profile)
        iface = get_interface(spec.interface)
        # co-segmented endpoints make the added traffic internal as well
        target = internal if placement.co_segmented(iface.endpoints) else network
        target[spec.interface] = target.get(spec.interface, 0.0) + value
        added[spec.interface] = added.get(spec.interface, 0.0) + value
        if spec.reference is not None and value != spec.reference:
            flags.append(divergence_flag(spec.interface, value, spec.reference))

    return GroupedRates(network, internal, placement.name, added, tuple(flags))


def merge_segments(placement: Placement, groups: Iterable[Iterable[str]], name: str | None = None) -> Placement:
    """Coarsen ``placement`` by fusing each group of segment ids into one segment.

    A fused segment takes the host of its first listed member; LANs are kept.
    """
    remap = {}
    for group in groups:
        group = list(group)
        for seg in group:
            remap[seg] = group[0]
    host_of = {}
    for e, site in placement.assignments.items():
        if site.segment == remap.get(site.segment, site.segment):
            host_of[site.segment] = site.host
    assignments = {}
    for e, site in placement.assignments.items():
        seg = remap.get(site.segment, site.segment)
        host = host_of.get(seg, site.host)
        lan = site.lan if host == site.host else f"lan-{host}"
        assignments[e] = type(site)(seg, host, lan)
    return Placement(name or placement.name, assignments)
