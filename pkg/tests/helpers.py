"""Shared test helpers: random placements, relabeling and a reference grouping oracle."""
import random
from pathlib import Path

from vepc_grouping.model import PLACEABLE, EntityKind as E, Placement, Site

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

ENTITIES = sorted(PLACEABLE, key=lambda e: e.value)


def random_placement(rng: random.Random, name="random") -> Placement:
    """Random valid placement: entities -> segments, segments -> hosts, entities -> LANs."""
    n_seg = rng.randint(1, len(ENTITIES))
    n_host = rng.randint(1, n_seg)
    n_lan = rng.randint(1, 3)
    seg_host = {s: f"h{rng.randrange(n_host)}" for s in range(n_seg)}
    assignments = {}
    for e in ENTITIES:
        s = rng.randrange(n_seg)
        assignments[e] = Site(f"s{s}", seg_host[s], f"l{rng.randrange(n_lan)}")
    return Placement(name, assignments)


def relabel(placement: Placement, rng: random.Random) -> Placement:
    """Apply random bijections to segment, host and LAN ids."""
    def bijection(values, prefix):
        values = sorted(set(values))
        targets = [f"{prefix}{i}" for i in range(len(values))]
        rng.shuffle(targets)
        return dict(zip(values, targets))

    sites = placement.assignments.values()
    seg = bijection((s.segment for s in sites), "seg-")
    host = bijection((s.host for s in sites), "host-")
    lan = bijection((s.lan for s in sites), "lan-")
    return Placement(placement.name, {
        e: Site(seg[s.segment], host[s.host], lan[s.lan]) for e, s in placement.assignments.items()
    })


def set_partitions(items):
    """All set partitions of ``items`` (brute-force enumeration)."""
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[head]] + part
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]


TABLE4 = {
    "RAN_CORE": 175_332, "S5_S8": 56_559, "S6a": 1_039_430,
    "Gx": 37_706, "Ud_pcrf": 18_853, "Gy": 30_164,
}


def reference_network(placement: Placement) -> dict:
    """Grouping semantics written out row by row, independent of the rewrite engine."""
    seg = {e: s.segment for e, s in placement.assignments.items()}
    net = {"RAN_CORE": TABLE4["RAN_CORE"]}
    if seg[E.SGW] != seg[E.PGW]:
        net["S5_S8"] = TABLE4["S5_S8"]
    if seg[E.MME] != seg[E.HSS_FE]:
        net["S6a"] = TABLE4["S6a"]
    elif seg[E.HSS_FE] != seg[E.UDR]:
        net["Ud_hss"] = 173_239
    if seg[E.PCRF] != seg[E.PGW]:
        net["Gx"] = TABLE4["Gx"]
    if seg[E.PCRF] != seg[E.UDR]:
        net["Ud_pcrf"] = TABLE4["Ud_pcrf"]
    if seg[E.PCRF] != seg[E.OCS]:
        net["Gy"] = TABLE4["Gy"]
    return net
