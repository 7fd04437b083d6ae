"""Every acceptance criterion at its committed tolerance; one PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""

import pytest

from vrrw.acceptance import CRITERIA, Context


@pytest.fixture(scope="module")
def ctx(tmp_path_factory):
    return Context(output=str(tmp_path_factory.mktemp("acceptance")))


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, len(CRITERIA) + 1)])
def test_criterion(criterion, ctx, capsys):
    res = criterion(ctx)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
