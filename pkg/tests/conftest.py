from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from projholes.exact_geom import Point, PointSet, assert_general_position

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

coords = st.integers(min_value=-40, max_value=40)
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
points = st.builds(lambda x, y: Point(Fraction(x), Fraction(y)), coords, coords)


@st.composite
def general_sets(draw, min_n=3, max_n=8):
    """Integer point sets in general position, grown one point at a time."""
    n = draw(st.integers(min_n, max_n))
    chosen: list[Point] = []
    attempts = 0
    while len(chosen) < n:
        attempts += 1
        if attempts > 400:
            break
        p = draw(points)
        if p in chosen:
            continue
        if len(chosen) >= 2 and not assert_general_position(chosen + [p]):
            continue
        chosen.append(p)
    if len(chosen) < min_n:
        from hypothesis import reject

        reject()
    return PointSet(chosen)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
