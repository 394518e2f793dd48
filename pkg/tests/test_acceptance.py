"""The 11 acceptance criteria at their stated tolerances.

Each test prints one ``criterion k [PASS|FAIL]`` line plus its sub-checks,
and the lines are repeated in the terminal summary. Criteria 7 and 9 each
contain a clause that does not hold for the quantities as defined, so they
are expected to fail (see the README).
"""

import pytest

from fracoverdet.acceptance import CRITERIA

from conftest import CRITERION_LINES

KNOWN_FAILURES = {
    7: "closed-set lambda_star of the square on an axis direction is the end of the flat face "
       "of G, so the symmetric-case clause lhs ~ 0 fails there",
    9: "with Phi_1 normalised as the Steiner coefficient (Phi_1(disk) = pi) the tube bound "
       "gamma (1 + 2 gamma / r) Phi_1 is below the half-tube measure 2 pi gamma - pi gamma^2 "
       "for small gamma",
}


def _params():
    for k in sorted(CRITERIA):
        marks = ()
        if k in KNOWN_FAILURES:
            marks = (pytest.mark.xfail(strict=True, reason=KNOWN_FAILURES[k]),)
        yield pytest.param(k, id=f"criterion_{k}", marks=marks)


@pytest.mark.parametrize("k", list(_params()))
def test_criterion(k):
    c = CRITERIA[k]()
    CRITERION_LINES.extend(c.lines())
    print()
    print("\n".join(c.lines()), flush=True)
    assert c.passed, c.line()
