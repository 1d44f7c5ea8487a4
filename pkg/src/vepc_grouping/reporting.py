"""Rendering, parsing and merging of reports."""
from __future__ import annotations

import csv
import io
import json
from enum import Enum
from typing import Sequence

from .engine import Comparison, InterfaceStat, SimReport, Units, _total
from .model import ModelError, declaration_index, get_interface


class RenderFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT_TABLE = "table"


def render(obj, fmt: RenderFormat = RenderFormat.JSON) -> bytes:
    fmt = RenderFormat(fmt)
    if fmt is RenderFormat.JSON:
        text = json.dumps(obj.to_dict(), sort_keys=True, indent=2) + "\n"
    elif isinstance(obj, Comparison):
        text = _comparison_csv(obj) if fmt is RenderFormat.CSV else _comparison_table(obj)
    else:
        text = _report_csv(obj) if fmt is RenderFormat.CSV else _report_table(obj)
    return text.encode("utf-8")


def parse(data):
    """Inverse of JSON :func:`render` for both reports and comparisons."""
    d = json.loads(data)
    if "before" in d:
        return Comparison.from_dict(d)
    return SimReport.from_dict(d)


def _num(value, units: Units) -> str:
    if units is Units.EVENTS:
        return str(int(value))
    return f"{value:.2f}"


def _csv_num(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _report_csv(report: SimReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["interface", "endpoints", "protocol", "path_class", "network", "internal",
                "generated", "units", "flags"])
    for iface_id, s in report.per_interface.items():
        w.writerow([iface_id, get_interface(iface_id).label, s.protocol.value, s.path_class.value,
                    _csv_num(s.network), _csv_num(s.internal), int(s.generated),
                    report.units.value, ""])
    w.writerow(["TOTAL", "", "", "", _csv_num(report.network_total),
                _csv_num(report.internal_total), "", report.units.value, "; ".join(report.flags)])
    return buf.getvalue()


def _align(rows: list, header: list) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    def line(r):
        cells = []
        for i, cell in enumerate(r):
            cells.append(str(cell).ljust(widths[i]) if i < 2 else str(cell).rjust(widths[i]))
        return "  ".join(cells).rstrip()
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), rule] + [line(r) for r in rows[:-1]] + [rule, line(rows[-1])])


def _header_lines(report: SimReport) -> list:
    lines = [f"placement: {report.placement_name}",
             f"rate mode: {report.rate_mode.value}   engine: {report.engine.value}   "
             f"units: {report.units.value}"]
    if report.seeds:
        lines.append(f"seeds: {', '.join(map(str, report.seeds))}   duration: {report.duration:g} s   "
                     f"thinning: {report.thinning:g}   process: {report.process}")
        lines.append(f"rng: {report.rng}")
    return lines


def _flag_lines(flags) -> list:
    return [f"FLAG {f}" for f in flags]


def _report_table(report: SimReport) -> str:
    u = report.units
    rows = [[iface_id + ("*" if s.generated else ""), get_interface(iface_id).label,
             s.protocol.value, s.path_class.value, _num(s.network, u), _num(s.internal, u)]
            for iface_id, s in report.per_interface.items()]
    rows.append(["Total", "", "", "", _num(report.network_total, u), _num(report.internal_total, u)])
    table = _align(rows, ["Interface", "Core elements", "Protocol", "Path class", "Network", "Internal"])
    out = _header_lines(report) + ["", table]
    if any(s.generated for s in report.per_interface.values()):
        out.append("* inserted by a grouping rule")
    out += _flag_lines(report.flags)
    return "\n".join(out) + "\n"


def _union_ids(*reports) -> list:
    ids = set()
    for r in reports:
        ids |= set(r.per_interface)
    return sorted(ids, key=lambda k: (declaration_index(k), k))


def _comparison_flags(c: Comparison) -> list:
    return sorted(set(c.before.flags) | set(c.after.flags) | set(c.flags))


def _comparison_csv(c: Comparison) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["interface", "endpoints", "before_network", "after_network", "after_internal",
                "relative_reduction", "flags"])
    empty = InterfaceStat(0, 0, None, None)
    for iface_id in _union_ids(c.before, c.after):
        b = c.before.per_interface.get(iface_id, empty)
        a = c.after.per_interface.get(iface_id, empty)
        w.writerow([iface_id, get_interface(iface_id).label, _csv_num(b.network),
                    _csv_num(a.network), _csv_num(a.internal), "", ""])
    rel = "" if c.relative_reduction is None else f"{c.relative_reduction:.4f}"
    w.writerow(["TOTAL", "", _csv_num(c.before.network_total), _csv_num(c.after.network_total),
                _csv_num(c.after.internal_total), rel, "; ".join(_comparison_flags(c))])
    return buf.getvalue()


def _comparison_table(c: Comparison) -> str:
    empty = InterfaceStat(0, 0, None, None)
    rows = []
    for iface_id in _union_ids(c.before, c.after):
        b = c.before.per_interface.get(iface_id, empty)
        a = c.after.per_interface.get(iface_id, empty)
        rows.append([iface_id, get_interface(iface_id).label, f"{b.network:.2f}",
                     f"{a.network:.2f}", f"{a.internal:.2f}"])
    rows.append(["Total", "", f"{c.before.network_total:.2f}", f"{c.after.network_total:.2f}",
                 f"{c.after.internal_total:.2f}"])
    header = ["Interface", "Core elements", f"Before ({c.before.placement_name})",
              f"After ({c.after.placement_name}) network", "After internal"]
    rel = "undefined" if c.relative_reduction is None else f"{c.relative_reduction:.4f}"
    out = [f"units: {Units.RATE.value}", "", _align(rows, header), "",
           f"absolute reduction: {c.absolute_reduction:.2f}",
           f"relative reduction: {rel}"]
    out += _flag_lines(_comparison_flags(c))
    return "\n".join(out) + "\n"


def merge(reports: Sequence[SimReport]) -> SimReport:
    """Sum per-interface values of reports from the same placement and modes.

    Event-driven durations add up, so two half-length runs merge into the
    equivalent of one full-length run.
    """
    reports = list(reports)
    if not reports:
        raise ModelError("merge: no reports")
    first = reports[0]
    for r in reports[1:]:
        for tag in ("rate_mode", "engine", "placement_name", "units", "thinning", "process", "rng",
                    "version"):
            if getattr(r, tag) != getattr(first, tag):
                raise ModelError(f"merge: mixed {tag}: {getattr(first, tag)!r} vs {getattr(r, tag)!r}")
    if len(reports) == 1:
        return first

    per = {}
    for iface_id in _union_ids(*reports):
        entries = [r.per_interface[iface_id] for r in reports if iface_id in r.per_interface]
        base = entries[0]
        for s in entries[1:]:
            if (s.path_class, s.protocol) != (base.path_class, base.protocol):
                raise ModelError(f"merge: {iface_id} differs in path class or protocol")
        per[iface_id] = InterfaceStat(
            network=_total(s.network for s in entries),
            internal=_total(s.internal for s in entries),
            path_class=base.path_class,
            protocol=base.protocol,
            generated=any(s.generated for s in entries),
        )
    durations = [r.duration for r in reports]
    duration = None if any(d is None for d in durations) else _total(durations)
    tags = first.tags()
    tags.update(
        seeds=tuple(sorted(s for r in reports for s in r.seeds)),
        duration=duration,
        flags=tuple(sorted({f for r in reports for f in r.flags})),
    )
    return SimReport.build(per, **tags)
