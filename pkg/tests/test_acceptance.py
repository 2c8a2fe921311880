"""Exit criteria of the library, one test per criterion.

Each test prints a ``[PASS]`` or ``[FAIL]`` line (also collected into the
terminal summary).  Tolerances live in :mod:`fracdiffeq.selftest` so this file
and ``fracdiffeq selftest`` judge identically.
"""

import os

import pytest

from fracdiffeq.selftest import CRITERIA, TIME_LIMIT, run_selftest

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

NUMBERS = [number for number, _, _ in CRITERIA] + [15]


@pytest.fixture(scope="module")
def results():
    seed = int(os.environ.get("FRACDIFF_SEED", "0"))
    return {c.number: c for c in run_selftest(seed)}


@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(results, number):
    crit = results[number]
    line = crit.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    failed = [c.line() for c in crit.checks if not c.passed]
    assert crit.passed, "\n".join(failed)


def test_suite_time_limit(results):
    assert sum(c.elapsed for n, c in results.items() if n != 15) < TIME_LIMIT
