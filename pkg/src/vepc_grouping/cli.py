"""Command-line front end: calc, sim, compare, show-grouping, validate."""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from pathlib import Path

from . import __version__
from .engine import EngineKind, ScenarioError, compare, load_scenario, run_analytic, run_simulation
from .grouping import isolated_placement, load_rules, proposed_placement, single_segment_placement
from .model import ModelError, PathClass, load_placement, path_matrix, validate_placement
from .procedures import load_catalog
from .profile import ProfileError, load_profile
from .reporting import RenderFormat, render


class Command(str, Enum):
    CALC = "calc"
    SIM = "sim"
    COMPARE = "compare"
    SHOW_GROUPING = "show-grouping"
    VALIDATE = "validate"


BUILTIN_PLACEMENTS = {
    "isolated": isolated_placement,
    "proposed": proposed_placement,
    "all-in-one": single_segment_placement,
}

_FORMATS = {"json": RenderFormat.JSON, "csv": RenderFormat.CSV, "table": RenderFormat.TEXT_TABLE}
_EXT = {RenderFormat.JSON: "json", RenderFormat.CSV: "csv", RenderFormat.TEXT_TABLE: "txt"}


class UserError(Exception):
    """Validation or input failure; each message goes to stderr on its own line."""

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("\n".join(self.messages))


def _add_output(p):
    p.add_argument("--format", choices=sorted(_FORMATS), default="json",
                   help="output format (default: json)")
    p.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")


def _add_overrides(p, sim: bool):
    p.add_argument("--seed", type=int, help="override the scenario seed (unsigned 64-bit)")
    p.add_argument("--duration", type=float, help="override the simulated duration in seconds")
    if sim:
        p.add_argument("--thinning", type=float,
                       help="divide every rate by this factor before sampling (default: scenario value or 1)")
        p.add_argument("--window", type=float, default=1.0,
                       help="simulated-time step of the event loop in seconds (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vepc-grouping",
        description="Signaling load of a virtualized EPC under VNF co-location.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    for name, sim in ((Command.CALC, False), (Command.SIM, True)):
        verb = "analytic rates" if not sim else "a seeded Poisson event simulation"
        p = sub.add_parser(name.value, help=f"run {verb} for one or more scenarios")
        p.add_argument("--scenario", nargs="+", required=True, metavar="FILE",
                       help="scenario file(s); several files form a batch sweep")
        p.add_argument("--out-dir", metavar="DIR",
                       help="batch output directory; files are named <scenario>.<ext>")
        p.add_argument("--jobs", type=int, default=1, metavar="N",
                       help="run up to N batch scenarios concurrently (default: 1)")
        _add_overrides(p, sim)
        _add_output(p)

    p = sub.add_parser(Command.COMPARE.value, help="compare the network load of two scenarios")
    p.add_argument("--baseline", required=True, metavar="FILE", help="scenario before grouping")
    p.add_argument("--candidate", required=True, metavar="FILE", help="scenario after grouping")
    _add_overrides(p, sim=True)
    _add_output(p)

    p = sub.add_parser(Command.SHOW_GROUPING.value, help="print a placement and its path-class matrix")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--placement", metavar="FILE", help="placement file")
    src.add_argument("--scenario", metavar="FILE", help="take the placement from a scenario file")
    src.add_argument("--builtin", choices=sorted(BUILTIN_PLACEMENTS), help="a built-in placement")
    p.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")

    p = sub.add_parser(Command.VALIDATE.value, help="lint scenario, profile, placement, rule or procedure files")
    p.add_argument("--scenario", action="append", default=[], metavar="FILE")
    p.add_argument("--profile", action="append", default=[], metavar="FILE")
    p.add_argument("--placement", action="append", default=[], metavar="FILE")
    p.add_argument("--rules", action="append", default=[], metavar="FILE")
    p.add_argument("--procedures", action="append", default=[], metavar="FILE")
    return parser


def _emit(data: bytes, out: str | None):
    if out:
        try:
            Path(out).write_bytes(data)
        except OSError as exc:
            raise UserError([f"{out}: cannot write ({exc.strerror})"]) from None
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _scenario(path, args, event_driven: bool):
    overrides = {"seed": args.seed, "duration": args.duration,
                 "thinning": getattr(args, "thinning", None)}
    if event_driven:
        overrides["engine"] = EngineKind.EVENT_DRIVEN.value
    try:
        return load_scenario(path, **overrides)
    except ScenarioError as exc:
        raise UserError([f"{path}: {e}" for e in exc.errors]) from None
    except ModelError as exc:
        raise UserError([f"{path}: {exc}"]) from None


def _run_one(path, args, sim: bool) -> bytes:
    scenario = _scenario(path, args, sim)
    report = run_simulation(scenario, args.window) if sim else run_analytic(scenario)
    return render(report, _FORMATS[args.format])


def _run(args, sim: bool) -> int:
    paths = args.scenario
    if len(paths) == 1:
        _emit(_run_one(paths[0], args, sim), args.out)
        return 0
    if not args.out_dir:
        raise UserError(["several scenarios need --out-dir"])
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = {}
    for p in paths:
        name = _scenario(p, args, sim).name
        if name in names:
            raise UserError([f"{p}: scenario name {name!r} already used by {names[name]}"])
        names[name] = p
    ext = _EXT[_FORMATS[args.format]]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outputs = list(pool.map(_run_one, paths, [args] * len(paths), [sim] * len(paths)))
    else:
        outputs = [_run_one(p, args, sim) for p in paths]
    for name, data in zip(names, outputs):
        (out_dir / f"{name}.{ext}").write_bytes(data)
    return 0


def _compare(args) -> int:
    # any simulation flag switches both sides to the event-driven engine
    force_sim = any(v is not None for v in (args.seed, args.duration, args.thinning))
    reports = []
    for path in (args.baseline, args.candidate):
        scenario = _scenario(path, args, event_driven=force_sim)
        if scenario.engine is EngineKind.EVENT_DRIVEN:
            reports.append(run_simulation(scenario, args.window))
        else:
            reports.append(run_analytic(scenario))
    _emit(render(compare(*reports), _FORMATS[args.format]), args.out)
    return 0


def _abbrev(cls: PathClass) -> str:
    return {
        PathClass.INTERNAL: "INT",
        PathClass.INTRA_HOST_INTRA_LAN: "VSW",
        PathClass.INTRA_HOST_INTER_LAN: "NIC",
        PathClass.INTER_HOST: "HOST",
        PathClass.EXTERNAL: "EXT",
    }[cls]


def show_grouping_text(placement) -> str:
    violations = validate_placement(placement)
    if violations:
        raise UserError([f"placement: {v}" for v in violations])
    lines = [f"placement: {placement.name}", ""]
    for seg, members in sorted(placement.segments().items()):
        site = placement.site(next(iter(members)))
        names = ", ".join(sorted(e.value for e in members))
        lines.append(f"{seg} (host {site.host}): {names}")
    entities = sorted(placement.assignments, key=lambda e: e.value)
    matrix = path_matrix(placement, entities)
    width = max(len(e.value) for e in entities)
    col = max(width, 4)
    lines += ["", " " * width + "  " + "  ".join(e.value.rjust(col) for e in entities)]
    for a in entities:
        cells = []
        for b in entities:
            if a == b:
                cells.append("-".rjust(col))
            else:
                cls = matrix.get((a, b)) or matrix[(b, a)]
                cells.append(_abbrev(cls).rjust(col))
        lines.append(a.value.ljust(width) + "  " + "  ".join(cells))
    lines += ["", "INT internal (same segment)  VSW same host, same LAN  "
                  "NIC same host, different LAN  HOST different hosts  EXT external"]
    return "\n".join(lines) + "\n"


def _show(args) -> int:
    if args.builtin:
        placement = BUILTIN_PLACEMENTS[args.builtin]()
    elif args.placement:
        try:
            placement = load_placement(args.placement)
        except ModelError as exc:
            raise UserError([f"{args.placement}: {exc}"]) from None
    else:
        placement = _scenario(args.scenario, argparse.Namespace(seed=None, duration=None), False).placement
    _emit(show_grouping_text(placement).encode("utf-8"), args.out)
    return 0


def _validate(args) -> int:
    checks = [(p, "scenario") for p in args.scenario] + [(p, "profile") for p in args.profile]
    checks += [(p, "placement") for p in args.placement] + [(p, "rules") for p in args.rules]
    checks += [(p, "procedures") for p in args.procedures]
    if not checks:
        raise UserError(["validate: give at least one file to check"])
    errors = []
    for path, kind in checks:
        try:
            if kind == "scenario":
                load_scenario(path)
            elif kind == "profile":
                load_profile(path)
            elif kind == "placement":
                errors += [f"{path}: {v}" for v in validate_placement(load_placement(path))]
            elif kind == "rules":
                load_rules(path)
            else:
                load_catalog(path)
        except (ScenarioError, ProfileError) as exc:
            errors += [f"{path}: {e}" for e in exc.errors]
        except ModelError as exc:
            errors.append(f"{path}: {exc}")
    if errors:
        raise UserError(errors)
    for path, kind in checks:
        print(f"{path}: ok ({kind})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command == Command.CALC.value:
            return _run(args, sim=False)
        if args.command == Command.SIM.value:
            return _run(args, sim=True)
        if args.command == Command.COMPARE.value:
            return _compare(args)
        if args.command == Command.SHOW_GROUPING.value:
            return _show(args)
        return _validate(args)
    except UserError as exc:
        for msg in exc.messages:
            print(msg, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
