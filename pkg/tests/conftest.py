import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "ran": False, "notes": []})
    if report.failed:
        entry["passed"] = False
        entry["ran"] = True
    elif report.when == "call":
        entry["ran"] = True
    entry["notes"].extend(v for k, v in item.user_properties if k == "detail" and v not in entry["notes"])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["passed"] and entry["ran"] else ("FAIL" if entry["ran"] else "NOT RUN")
        line = f"criterion {number} [{status}] {entry['title']}"
        if entry["notes"]:
            line += " :: " + "; ".join(entry["notes"])
        terminalreporter.write_line(line)
