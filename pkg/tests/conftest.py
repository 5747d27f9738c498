import pytest

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.fixture
def detail(request):
    """Mutable note shown next to the criterion's pass/fail line."""
    marker = request.node.get_closest_marker("criterion")
    note = {"text": ""}
    if marker is not None:
        _CRITERIA.setdefault(marker.args[0], {"title": marker.args[1], "note": note, "outcome": None})
        _CRITERIA[marker.args[0]]["note"] = note
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    entry = _CRITERIA.setdefault(marker.args[0], {"title": marker.args[1], "note": {"text": ""}, "outcome": None})
    if rep.when == "setup" and rep.failed:
        entry["outcome"] = "FAIL"
        entry["note"]["text"] = "setup error"
    elif rep.when == "call":
        entry["outcome"] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = e["outcome"] or "NOT RUN"
        note = f"  ({e['note']['text']})" if e["note"]["text"] else ""
        terminalreporter.write_line(f"criterion {number:>2} {status:<4} {e['title']}{note}")
