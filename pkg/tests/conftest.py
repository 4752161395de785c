"""Prints one PASS/FAIL line per acceptance criterion after the run.

The per-test output of ``pytest -v`` already lists them, but that gets
captured in CI logs together with everything else; this summary block
gives reviewers the ten verdicts in one place.
"""

_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance):
        name = nodeid.split("::")[-1]
        label = name.replace("test_criterion_", "criterion ").replace("_", " ")
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(
            _acceptance[nodeid], _acceptance[nodeid].upper())
        terminalreporter.write_line(f"{label}: {verdict}")
