"""Shared pytest configuration.

Acceptance tests are named ``test_criterion_NN_*``; the terminal summary
prints one PASS/FAIL line per criterion number (a criterion with several
parametrized cases passes only if all of them pass).
"""

import re
from collections import OrderedDict

CRITERION = re.compile(r"test_criterion_(\d+)_(\w+?)(\[|$)")
_outcomes = OrderedDict()


def pytest_runtest_logreport(report):
    m = CRITERION.search(report.nodeid.split("::")[-1])
    if not m:
        return
    if report.when == "call" or report.failed or report.skipped:
        key = int(m.group(1))
        name, ok = _outcomes.get(key, (m.group(2), True))
        _outcomes[key] = (name, ok and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes):
        name, ok = _outcomes[key]
        terminalreporter.write_line(f"criterion {key:2d} {'PASS' if ok else 'FAIL'}  {name}")
