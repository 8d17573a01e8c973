import pytest

_results = {}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _results.get(crit, (None, "passed"))
        outcome = report.outcome if prev[1] == "passed" else prev[1]
        _results[crit] = (report.criterion_title, outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args[0]
        rep.criterion_title = mark.args[1] if len(mark.args) > 1 else ""


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_results):
        title, outcome = _results[crit]
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.line(f"criterion {crit:>2}: {word}  {title}")
