"""Acceptance gate: every numbered criterion must pass.

One parametrized test per criterion gives exactly one pass/fail line each
under -v. The criterion functions live in nelsonlab.validate so this gate
asserts the same facts as `nelson-lab validate`; expensive shared artifacts
(the shipped cascade report, the shipped dispersion lab) are cached inside
that module, so the whole gate costs roughly one cascade run, one dispersion
lab, and the determinism double-run.
"""

import pytest

from nelsonlab import validate

CRITERIA = validate.list_criteria()


@pytest.mark.parametrize(
    "cid,name", CRITERIA, ids=[f"{c:02d}-{n}" for c, n in CRITERIA])
def test_criterion(cid, name):
    res = validate.run_criterion(cid)
    line = f"[{res.cid:2d}] {'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}"
    print(line)
    assert res.passed, line
