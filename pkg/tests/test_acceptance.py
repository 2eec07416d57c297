"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The shared context (ground state, default sweep) is built once per session.
Run with ``pytest tests/test_acceptance.py -s`` to see the lines live; they
are also gathered into a summary block at the end of the session.
"""

import json

import pytest

from planarsp.verify import CHECKS, check_groundstate

from .conftest import ACCEPTANCE_LINES as _LINES

_CTX: dict = {"workers": 1, "fracs": None}


@pytest.fixture(scope="module")
def ctx():
    if "profile" not in _CTX:
        _LINES[1] = check_groundstate(_CTX).line()
    return _CTX


@pytest.mark.parametrize("cid", sorted(CHECKS))
def test_criterion(ctx, cid):
    c = CHECKS[cid](ctx)
    _LINES[cid] = c.line()
    print(c.line())
    print("    measured:", json.dumps(c.measured, default=float))
    assert c.passed, f"{c.line()}\n{c.note}"

