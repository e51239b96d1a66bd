"""Acceptance criteria at their stated tolerances, one pass/fail line each."""
import pytest

from partialtheta.acceptance import CRITERIA, run_criterion

UNATTAINABLE = {
    8: "no A2 p=2 input satisfies the positive-region hypotheses (the set N is empty: "
       "k1, k2, k1 + k2 cannot all be odd), so the A2 p=2 closed-form comparison cannot be run",
}


def _param(n):
    if n in UNATTAINABLE:
        return pytest.param(n, marks=pytest.mark.xfail(strict=True, reason=UNATTAINABLE[n]))
    return n


@pytest.mark.parametrize("number", [_param(n) for n in sorted(CRITERIA)])
def test_criterion(number, capsys):
    result = run_criterion(number, seed=0)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
