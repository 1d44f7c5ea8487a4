import json
import subprocess
import sys

import pytest

from vepc_grouping.cli import Command, build_parser, main
from vepc_grouping.grouping import proposed_placement

from helpers import SCENARIOS

ISOLATED = str(SCENARIOS / "table4_isolated.json")
PROPOSED = str(SCENARIOS / "table4_proposed.json")
PARAMETRIC = str(SCENARIOS / "table4_proposed_parametric.json")
SIM = str(SCENARIOS / "table4_proposed_sim.json")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_calc_table(capsys):
    code, out, _ = run_cli(capsys, "calc", "--scenario", PROPOSED, "--format", "table")
    assert code == 0
    total = next(line for line in out.splitlines() if line.startswith("Total"))
    assert total.split()[1] == "386277.00"


def test_calc_json(capsys):
    code, out, _ = run_cli(capsys, "calc", "--scenario", ISOLATED)
    assert code == 0
    assert json.loads(out)["network_total"] == 1_358_044


def test_compare_headline(capsys):
    code, out, _ = run_cli(capsys, "compare", "--baseline", ISOLATED, "--candidate", PROPOSED)
    assert code == 0
    assert json.loads(out)["relative_reduction"] == 0.7156


def test_compare_with_sim_flags(capsys):
    code, out, _ = run_cli(capsys, "compare", "--baseline", ISOLATED, "--candidate", PROPOSED,
                           "--seed", "3", "--duration", "600", "--thinning", "1000")
    doc = json.loads(out)
    assert code == 0 and doc["after"]["engine"] == "event_driven"
    assert doc["relative_reduction"] == pytest.approx(0.7156, abs=0.003)


def test_validate_missing_pgw(tmp_path, capsys):
    placement = proposed_placement().to_dict()
    del placement["assignments"]["PGW"]
    (tmp_path / "placement.json").write_text(json.dumps(placement))
    scenario = json.loads((SCENARIOS / "table4_proposed.json").read_text())
    scenario.update(profile=str(SCENARIOS / "table3_profile.json"), placement="placement.json",
                    rules=str(SCENARIOS / "paper_rules_table.json"))
    (tmp_path / "broken.json").write_text(json.dumps(scenario))
    code, out, err = run_cli(capsys, "validate", "--scenario", str(tmp_path / "broken.json"))
    assert code == 1
    assert "PGW" in err and out == ""
    assert len(err.strip().splitlines()) == 1


def test_validate_ok(capsys):
    code, out, _ = run_cli(capsys, "validate", "--scenario", PROPOSED, "--profile",
                           str(SCENARIOS / "table3_profile.json"), "--rules",
                           str(SCENARIOS / "paper_rules_table.json"))
    assert code == 0 and out.count(": ok") == 3


def test_validate_reports_each_error_on_own_line(tmp_path, capsys):
    bad = tmp_path / "p.json"
    bad.write_text(json.dumps({"registered_subscribers": "many"}))
    code, _, err = run_cli(capsys, "validate", "--profile", str(bad))
    assert code == 1
    assert len(err.strip().splitlines()) == 11


def test_unreadable_file(capsys):
    code, _, err = run_cli(capsys, "calc", "--scenario", "/nonexistent/scenario.json")
    assert code == 1
    assert "/nonexistent/scenario.json" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "calc", "--scenario", PROPOSED, "--frobnicate")
    assert code == 2
    assert "usage:" in err


def test_missing_command_is_usage_error(capsys):
    code, _, err = run_cli(capsys)
    assert code == 2 and "usage:" in err


def test_help_lists_every_flag():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == {c.value for c in Command}
    for name, p in sub.choices.items():
        help_text = p.format_help()
        for action in p._actions:
            for opt in action.option_strings:
                assert opt in help_text, (name, opt)
    for flag in ("--format", "--seed", "--duration", "--out", "--jobs", "--thinning"):
        assert flag in sub.choices["sim"].format_help()
    assert "--baseline" in sub.choices["compare"].format_help()


def test_out_flag_and_byte_identical_runs(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["sim", "--scenario", SIM, "--duration", "120", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert capsys.readouterr().out == ""
    main(["sim", "--scenario", SIM, "--duration", "120", "--seed", "99", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_parametric_flag_visible(capsys):
    for fmt in ("json", "csv", "table"):
        code, out, _ = run_cli(capsys, "calc", "--scenario", PARAMETRIC, "--format", fmt)
        assert code == 0 and "calibration-divergence" in out


def test_batch_sweep(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "calc", "--scenario", ISOLATED, PROPOSED, "--out-dir", str(tmp_path),
                         "--jobs", "2", "--format", "csv")
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["table4_isolated.csv", "table4_proposed.csv"]
    code, _, err = run_cli(capsys, "calc", "--scenario", ISOLATED, PROPOSED)
    assert code == 1 and "--out-dir" in err


def test_batch_jobs_do_not_change_output(tmp_path, capsys):
    for jobs, sub in (("1", "serial"), ("2", "parallel")):
        assert main(["sim", "--scenario", SIM, PROPOSED, "--duration", "30", "--seed", "4",
                     "--out-dir", str(tmp_path / sub), "--jobs", jobs]) == 0
    for name in ("table4_proposed.json", "table4_proposed_sim.json"):
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()


def test_show_grouping(capsys):
    code, out, _ = run_cli(capsys, "show-grouping", "--builtin", "proposed")
    assert code == 0
    assert "segment-1 (host h-segment-1): HSS_FE, MME" in out
    line = next(l for l in out.splitlines() if l.startswith("MME "))
    assert "INT" in line and "HOST" in line
    code2, out2, _ = run_cli(capsys, "show-grouping", "--scenario", PROPOSED)
    assert code2 == 0 and out2 == out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vepc_grouping", "compare", "--baseline", ISOLATED,
                           "--candidate", PROPOSED, "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().splitlines()[-1].split(",")[5] == "0.7156"
