import random
from fractions import Fraction

import pytest

# criterion id -> (passed, description), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return random.Random(1234)


def rational_triple(rng, lo=6, hi=24, den=12):
    return tuple(Fraction(rng.randint(lo, hi), den) for _ in range(3))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        ok, desc = ACCEPTANCE[cid]
        terminalreporter.write_line(f"criterion {cid:2d}: {'PASS' if ok else 'FAIL'}  {desc}")
