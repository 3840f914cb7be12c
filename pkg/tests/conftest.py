"""Collects the outcome of every acceptance check and prints one line per criterion."""

import pytest

_results = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _results.setdefault(number, {"title": title, "outcomes": []})
    if call.when == "setup" and call.excinfo is not None:
        skipped = call.excinfo.errisinstance(pytest.skip.Exception)
        entry["outcomes"].append(("SKIP" if skipped else "FAIL", item.name,
                                  _short(call.excinfo)))
    elif call.when == "call":
        if call.excinfo is None:
            entry["outcomes"].append(("PASS", item.name, ""))
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            entry["outcomes"].append(("SKIP", item.name, _short(call.excinfo)))
        else:
            entry["outcomes"].append(("FAIL", item.name, _short(call.excinfo)))


def _short(excinfo):
    text = str(excinfo.value).strip().splitlines()
    return text[0] if text else excinfo.typename


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        states = [o[0] for o in entry["outcomes"]]
        verdict = "FAIL" if "FAIL" in states else ("PASS" if "PASS" in states else "SKIP")
        tr.write_line(f"criterion {number}: {verdict}  {entry['title']}")
        for state, name, note in entry["outcomes"]:
            if state != "PASS":
                tr.write_line(f"    {state} {name}: {note}")
