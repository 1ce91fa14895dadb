"""One test per acceptance criterion; each prints its own pass/fail line.

The slow entries are the cross-oracle fixed-point solves (A1, minutes) and
the 100k-episode simulation (A8); everything else is seconds.
"""

import pytest

from beliefgames import acceptance


@pytest.mark.parametrize("name", list(acceptance.CRITERIA))
def test_criterion(name):
    res = acceptance.run_criteria([name])[0]
    print(f"{res.name} {'PASS' if res.passed else 'FAIL'} "
          f"({res.seconds:.1f}s) {res.detail}")
    assert res.passed, f"{res.name} failed: {res.detail}"
