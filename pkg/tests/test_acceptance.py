"""The acceptance suite: every criterion at its stated tolerance.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are also collected
into the terminal summary.
"""

import pytest

from paraproducts.config import RunConfig
from paraproducts.selfcheck import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid):
    res = run_criterion(cid, RunConfig())
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line


def test_all_eleven_present():
    assert sorted(CRITERIA) == list(range(1, 12))
