import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "notes": []})
    failed = report.failed or (report.skipped and hasattr(report, "wasxfail"))
    if report.when == "call" or failed:
        if failed:
            entry["ok"] = False
            reason = getattr(report, "wasxfail", "") or report.longreprtext.splitlines()[-1:]
            entry["notes"].append(f"{item.name}: {reason if isinstance(reason, str) else ' '.join(reason)}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if entry['ok'] else 'FAIL'}  {entry['title']}")
        for note in entry["notes"]:
            terminalreporter.write_line(f"             {note}")
