import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; its PASS/FAIL line appears in the terminal summary."""

    def record(key: str, title: str):
        ACCEPTANCE[key] = {"title": title, "nodeid": request.node.nodeid, "passed": False}

    return record


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for entry in ACCEPTANCE.values():
        if entry["nodeid"] == report.nodeid:
            entry["passed"] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        entry = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if entry['passed'] else 'FAIL'}  {entry['title']}")
