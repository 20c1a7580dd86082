"""The verification suite: one test per criterion, each printing its
pass/fail line. Every criterion is deterministic (fixed Philox seeds).
"""

import pytest

from hamext.acceptance import ALL_CRITERIA


@pytest.mark.parametrize("runner", ALL_CRITERIA,
                         ids=[f.__name__.replace("crit_", "") for f in ALL_CRITERIA])
def test_criterion(runner):
    result = runner()
    verdict = "PASS" if result.passed else "FAIL"
    print(f"[{verdict}] criterion {result.number}: {result.name} "
          f"({result.elapsed:.2f}s) - {result.detail}")
    assert result.passed, f"criterion {result.number} failed: {result.detail}"
