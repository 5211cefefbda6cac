from collections import defaultdict

import pytest

from fdcache.core import ScenarioConfig

# criterion number -> list of (passed, detail); filled by test_acceptance.py
ACCEPTANCE = defaultdict(list)


def record(criterion, ok, detail):
    ACCEPTANCE[criterion].append((bool(ok), detail))
    return ok


@pytest.fixture
def table1():
    return ScenarioConfig.table1()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[key]
        ok = all(p[0] for p in parts)
        tr.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  " + "; ".join(p[1] for p in parts))
