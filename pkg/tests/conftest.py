"""Collects outcomes of tests tagged ``@pytest.mark.criterion`` and prints one
PASS/FAIL line per acceptance criterion at the end of the run."""

from collections import OrderedDict

import pytest

_RESULTS = OrderedDict()


def _key(cid):
    head = str(cid).split("(")[0].rstrip("abcdefghijklmnopqrstuvwxyz")
    return (int(head) if head.isdigit() else 99, str(cid))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        cid, text = marker.args[0], marker.args[1] if len(marker.args) > 1 else ""
        entry = _RESULTS.setdefault(cid, {"text": text, "tests": []})
        entry["tests"].append((item.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=_key):
        entry = _RESULTS[cid]
        ok = all(passed for _, passed in entry["tests"])
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {cid}: {entry['text']}")
        if not ok:
            for nodeid, passed in entry["tests"]:
                if not passed:
                    tr.write_line(f"        failed: {nodeid}")
