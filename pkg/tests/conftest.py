"""Collects acceptance-criterion outcomes and prints one verdict line per criterion."""

from collections import OrderedDict

import pytest

_RESULTS = OrderedDict()   # id -> {"title", "outcomes", "notes"}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid, title = marker.args
    entry = _RESULTS.setdefault(cid, {"title": title, "outcomes": [], "notes": []})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["outcomes"].append(report.outcome)
        entry["notes"] += [v for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: int(c[1:])):
        entry = _RESULTS[cid]
        verdict = "PASS" if entry["outcomes"] and all(o == "passed" for o in entry["outcomes"]) else "FAIL"
        line = f"{cid} {verdict}  {entry['title']}"
        if entry["notes"]:
            line += "  [" + "; ".join(entry["notes"]) + "]"
        tr.write_line(line)
