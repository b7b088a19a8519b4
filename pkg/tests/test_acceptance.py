"""The nine acceptance criteria at full size, one pass/fail line each.

Run alone with ``pytest tests/test_acceptance.py -v`` or as a script.
"""

import pytest

from carlitz_coleman import checks


@pytest.mark.acceptance
@pytest.mark.parametrize("check", checks.ALL_CHECKS, ids=lambda c: c.__name__.removeprefix("check_"))
def test_acceptance(check, capsys):
    res = check(seed=checks.ALL_CHECKS.index(check))
    with capsys.disabled():
        print(f"\n{res.line()}")
    assert res.passed, res.detail


if __name__ == "__main__":
    for i, chk in enumerate(checks.ALL_CHECKS):
        print(chk(seed=i).line(), flush=True)
