import re

import numpy as np
import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_acceptance: dict[int, dict] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    match = _CRITERION.match(item.name)
    if not match or not hasattr(item.module, "CRITERIA"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        num = int(match.group(1))
        entry = _acceptance.setdefault(num, {"title": item.module.CRITERIA[num], "parts": []})
        entry["parts"].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance):
        entry = _acceptance[num]
        ok = all(o == "passed" for _, o in entry["parts"])
        failed = [name for name, o in entry["parts"] if o != "passed"]
        line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {entry['title']}"
        if failed:
            line += "  (failing: " + ", ".join(failed) + ")"
        terminalreporter.write_line(line)
