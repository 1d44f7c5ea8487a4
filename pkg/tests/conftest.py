import pytest

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and (rep.when == "call" or rep.failed):
        title = (item.function.__doc__ or item.name).strip().splitlines()[0]
        details = [str(v) for k, v in item.user_properties if k == "detail"]
        _ACCEPTANCE.append(("PASS" if rep.passed else "FAIL", title, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, title, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {title}" + (f" -- {detail}" if detail else ""))
