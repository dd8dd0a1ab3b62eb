import pytest

_ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    entry = _ACCEPTANCE.setdefault(num, {"title": title, "passed": True, "ran": False, "notes": []})
    if rep.when == "call":
        entry["ran"] = True
        entry["notes"] = [v for k, v in item.user_properties if k == "measured"]
    if rep.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[num]
        status = "PASS" if e["passed"] and e["ran"] else ("FAIL" if e["ran"] or not e["passed"] else "SKIP")
        line = f"criterion {num:>2} {status}: {e['title']}"
        if e["notes"]:
            line += " | " + "; ".join(e["notes"])
        tr.write_line(line)
