"""Acceptance criteria at their stated tolerances, one test per criterion.

Each test prints a single pass/fail line; the lines are repeated in the
terminal summary.  Monte Carlo criteria run at full size.
"""

import pytest

from dudenet import acceptance

from conftest import ACCEPTANCE_LINES


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    res = acceptance.CRITERIA[number]()
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, res.summary
