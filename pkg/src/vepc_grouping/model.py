"""EPC entities, signaling interfaces, placements and path classification."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping


class ModelError(ValueError):
    """Raised for malformed model input (unknown names, bad shapes)."""


class EntityKind(str, Enum):
    MME = "MME"
    HSS_FE = "HSS_FE"
    UDR = "UDR"
    SGW = "SGW"
    PGW = "PGW"
    PCEF = "PCEF"
    PCRF = "PCRF"
    OCS = "OCS"
    OFCS = "OFCS"
    SGSN = "SGSN"
    HLR_FE = "HLR_FE"
    ENB = "ENB"
    OSS_BSS = "OSS_BSS"

    @property
    def external(self) -> bool:
        return self in _EXTERNAL

    @classmethod
    def parse(cls, name: str) -> "EntityKind":
        try:
            return cls(name)
        except ValueError:
            raise ModelError(f"unknown entity {name!r}") from None


# OSS/BSS is deployed centrally outside the segments, like the radio nodes.
_EXTERNAL = frozenset({EntityKind.ENB, EntityKind.OSS_BSS})

PLACEABLE = frozenset(e for e in EntityKind if not e.external)


class Protocol(str, Enum):
    GTP_C = "GTP_C"
    DIAMETER = "DIAMETER"
    LDAP = "LDAP"
    S1AP = "S1AP"

    @property
    def transport(self) -> str:
        return _TRANSPORT[self]


_TRANSPORT = {
    Protocol.GTP_C: "UDP",
    Protocol.DIAMETER: "SCTP/TCP+IPsec",
    Protocol.LDAP: "TCP+TLS/SSL",
    Protocol.S1AP: "SCTP",
}


class PathClass(str, Enum):
    INTERNAL = "INTERNAL"
    INTRA_HOST_INTRA_LAN = "INTRA_HOST_INTRA_LAN"
    INTRA_HOST_INTER_LAN = "INTRA_HOST_INTER_LAN"
    INTER_HOST = "INTER_HOST"
    EXTERNAL = "EXTERNAL"

    @property
    def network_load(self) -> bool:
        return self is not PathClass.INTERNAL


@dataclass(frozen=True)
class Interface:
    """A named reference point between two entities.

    Aggregate interfaces bundle several reference points into one rate row.
    ``members`` lists every entity that may appear on a step carried by the
    aggregate; for ordinary interfaces it equals the endpoints.
    """

    id: str
    endpoints: frozenset
    protocol: Protocol
    aggregate: bool = False
    members: frozenset = frozenset()
    label: str = ""

    def __post_init__(self):
        if len(self.endpoints) != 2:
            raise ModelError(f"interface {self.id}: endpoints must be two distinct entities")
        if self.aggregate and EntityKind.ENB not in self.endpoints:
            raise ModelError(f"interface {self.id}: aggregate interfaces are anchored at ENB")
        if not self.members:
            object.__setattr__(self, "members", self.endpoints)
        elif not self.endpoints <= self.members:
            raise ModelError(f"interface {self.id}: members must include the endpoints")

    @property
    def pair(self) -> tuple:
        a, b = sorted(self.endpoints, key=lambda e: e.value)
        return a, b

    def carries(self, src: EntityKind, dst: EntityKind) -> bool:
        if src == dst:
            return False
        if self.aggregate:
            return src in self.members and dst in self.members
        return frozenset((src, dst)) == self.endpoints


def _iface(id, a, b, protocol, label, aggregate=False, members=()):
    return Interface(id, frozenset((a, b)), protocol, aggregate, frozenset(members), label)


E = EntityKind

# Declaration order follows the rows of the before/after signaling table.
_DECLARED = (
    _iface("RAN_CORE", E.ENB, E.MME, Protocol.S1AP, "MME, eNBs and S-GW",
           aggregate=True, members=(E.ENB, E.MME, E.SGW)),
    _iface("S5_S8", E.SGW, E.PGW, Protocol.GTP_C, "S-GW and P-GW"),
    _iface("S6a", E.MME, E.HSS_FE, Protocol.DIAMETER, "MME and HSS"),
    _iface("Ud_hss", E.HSS_FE, E.UDR, Protocol.LDAP, "HSS FE and UDR"),
    _iface("Gx", E.PCRF, E.PGW, Protocol.DIAMETER, "PCRF and P-GW"),
    _iface("Ud_pcrf", E.PCRF, E.UDR, Protocol.LDAP, "PCRF and UDR"),
    _iface("Gy", E.PCRF, E.OCS, Protocol.DIAMETER, "PCRF and OCS"),
    _iface("S11", E.MME, E.SGW, Protocol.GTP_C, "MME and S-GW"),
    _iface("Gz", E.PGW, E.OFCS, Protocol.GTP_C, "P-GW and OFCS"),
    _iface("Gn", E.SGSN, E.PGW, Protocol.GTP_C, "SGSN and P-GW"),
    _iface("S6d", E.SGSN, E.HLR_FE, Protocol.DIAMETER, "SGSN and HLR FE"),
)


def _build_registry(interfaces: Iterable[Interface]) -> Mapping[str, Interface]:
    registry = {}
    for iface in interfaces:
        if iface.id in registry:
            raise ModelError(f"duplicate interface id {iface.id!r}")
        registry[iface.id] = iface
    return MappingProxyType(registry)


INTERFACES: Mapping[str, Interface] = _build_registry(_DECLARED)
INTERFACE_ORDER = tuple(INTERFACES)


def get_interface(interface_id: str) -> Interface:
    try:
        return INTERFACES[interface_id]
    except KeyError:
        raise ModelError(f"undeclared interface {interface_id!r}") from None


def declaration_index(interface_id: str) -> int:
    try:
        return INTERFACE_ORDER.index(interface_id)
    except ValueError:
        return len(INTERFACE_ORDER)


@dataclass(frozen=True)
class Site:
    segment: str
    host: str
    lan: str


@dataclass(frozen=True)
class Placement:
    """Assignment of entities to (segment, host, LAN).

    Construction does not enforce the placement invariants; use
    :func:`validate_placement` to list violations.
    """

    name: str
    assignments: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", MappingProxyType(dict(self.assignments)))

    def __hash__(self):
        return hash((self.name, frozenset(self.assignments.items())))

    def __eq__(self, other):
        if not isinstance(other, Placement):
            return NotImplemented
        return self.name == other.name and dict(self.assignments) == dict(other.assignments)

    def site(self, entity: EntityKind) -> Site | None:
        return self.assignments.get(entity)

    def segments(self) -> dict:
        """Map segment id -> frozenset of entities, in first-seen order."""
        out: dict = {}
        for entity, site in self.assignments.items():
            out.setdefault(site.segment, set()).add(entity)
        return {k: frozenset(v) for k, v in out.items()}

    def co_segmented(self, entities: Iterable[EntityKind]) -> bool:
        segs = set()
        for e in entities:
            site = self.assignments.get(e)
            if site is None:
                return False
            segs.add(site.segment)
        return len(segs) == 1

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "assignments": {
                e.value: {"segment": s.segment, "host": s.host, "lan": s.lan}
                for e, s in sorted(self.assignments.items(), key=lambda kv: kv[0].value)
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Placement":
        if not isinstance(data, Mapping):
            raise ModelError("placement must be a JSON object")
        raw = data.get("assignments")
        if not isinstance(raw, Mapping):
            raise ModelError("placement: 'assignments' must be an object")
        assignments = {}
        for name, site in raw.items():
            entity = EntityKind.parse(name)
            if not isinstance(site, Mapping):
                raise ModelError(f"placement: {name}: site must be an object")
            try:
                assignments[entity] = Site(str(site["segment"]), str(site["host"]), str(site["lan"]))
            except KeyError as exc:
                raise ModelError(f"placement: {name}: missing {exc.args[0]!r}") from None
        return cls(str(data.get("name", "unnamed")), assignments)


def placement_from_segments(name: str, segments: Mapping, hosts: Mapping | None = None,
                            lans: Mapping | None = None) -> Placement:
    """Build a placement from ``{segment_id: entities}``.

    Each segment defaults to its own host (``h-<segment>``) with one LAN per
    host; ``hosts`` overrides segment -> host, ``lans`` overrides entity -> LAN.
    """
    hosts = hosts or {}
    lans = lans or {}
    assignments = {}
    for seg, members in segments.items():
        host = hosts.get(seg, f"h-{seg}")
        for e in members:
            assignments[e] = Site(seg, host, lans.get(e, f"lan-{host}"))
    return Placement(name, assignments)


def load_placement(source) -> Placement:
    """Load a placement from a path, JSON text, or already-parsed mapping."""
    return Placement.from_dict(read_json(source))


def read_json(source):
    if isinstance(source, Mapping) or isinstance(source, list):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ModelError(f"{path}: cannot read ({exc.strerror})") from None
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON ({exc})") from None
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON ({exc})") from None


@dataclass(frozen=True)
class Violation:
    entity: EntityKind | None
    rule: str
    message: str

    def __str__(self):
        return self.message


def validate_placement(placement: Placement, universe: Iterable[EntityKind] = PLACEABLE,
                       require_pcef_with_pgw: bool = False) -> list:
    """Return the list of invariant violations (empty when valid)."""
    universe = frozenset(universe)
    out = []
    for entity in sorted(universe - set(placement.assignments), key=lambda e: e.value):
        if not entity.external:
            out.append(Violation(entity, "missing", f"{entity.value}: not placed"))
    for entity in sorted(placement.assignments, key=lambda e: e.value):
        if entity.external:
            out.append(Violation(entity, "external-placed",
                                 f"{entity.value}: external entity cannot be placed in a segment"))
        elif entity not in universe:
            out.append(Violation(entity, "outside-universe", f"{entity.value}: not in the model universe"))

    seg_host: dict = {}
    for entity in sorted(placement.assignments, key=lambda e: e.value):
        site = placement.assignments[entity]
        seg_host.setdefault(site.segment, []).append((entity, site.host))
    for seg, members in seg_host.items():
        hosts = {h for _, h in members}
        if len(hosts) > 1:
            names = ", ".join(f"{e.value}@{h}" for e, h in members)
            out.append(Violation(members[0][0], "segment-spans-hosts",
                                 f"segment {seg!r} spans hosts: {names}"))

    if require_pcef_with_pgw:
        pcef, pgw = placement.site(EntityKind.PCEF), placement.site(EntityKind.PGW)
        if pcef and pgw and pcef.segment != pgw.segment:
            out.append(Violation(EntityKind.PCEF, "pcef-separated",
                                 "PCEF: must share a segment with PGW"))
    return out


def classify_path(placement: Placement, a: EntityKind, b: EntityKind) -> PathClass:
    if a == b:
        raise ModelError(f"self-path: {a.value}")
    for e in (a, b):
        if not e.external and placement.site(e) is None:
            raise ModelError(f"unplaced entity: {e.value}")
    if a.external or b.external:
        return PathClass.EXTERNAL
    sa, sb = placement.site(a), placement.site(b)
    if sa.segment == sb.segment:
        return PathClass.INTERNAL
    if sa.host != sb.host:
        return PathClass.INTER_HOST
    if sa.lan == sb.lan:
        return PathClass.INTRA_HOST_INTRA_LAN
    return PathClass.INTRA_HOST_INTER_LAN


def interface_path_class(placement: Placement, interface: Interface) -> PathClass:
    return classify_path(placement, *interface.pair)


def path_matrix(placement: Placement, entities: Iterable[EntityKind] | None = None) -> dict:
    """Classify every unordered pair of ``entities`` (placed ones by default)."""
    if entities is None:
        entities = sorted(placement.assignments, key=lambda e: e.value)
    entities = list(entities)
    out = {}
    for i, a in enumerate(entities):
        for b in entities[i + 1:]:
            out[(a, b)] = classify_path(placement, a, b)
    return out
