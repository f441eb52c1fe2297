import functools
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import pytest

from dgbv.fixtures import parse_fixture
from dgbv.mc import solve_mc_universal


@functools.lru_cache(maxsize=None)
def structure(expr):
    return parse_fixture(expr)


@functools.lru_cache(maxsize=None)
def universal(expr, order):
    return solve_mc_universal(structure(expr), order=order)


@pytest.fixture(scope="session")
def pd4():
    return structure("pd4()")


@pytest.fixture(scope="session")
def pd4_sol():
    return universal("pd4()", 6)


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, read from the recorded test properties."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], "PASS" if outcome == "passed" else "FAIL",
                              props.get("title", ""), props.get("detail", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n, verdict, title, detail in sorted(lines):
        tail = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {title}{tail}")
