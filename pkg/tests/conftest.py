import os
from fractions import Fraction

import pytest

from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from starmorita.ring import Scalar  # noqa: E402

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def real_polys(draw, max_degree=6):
    return draw(st.lists(rationals, max_size=max_degree + 1))


@st.composite
def lam_scalars(draw, max_degree=4):
    re = draw(real_polys(max_degree))
    im = draw(real_polys(max_degree))
    return Scalar(re, im, lam=True)


@st.composite
def rational_scalars(draw):
    return Scalar(draw(rationals), draw(rationals))


def as_fractions(coeffs):
    return [Fraction(int(c.numerator), int(c.denominator)) for c in coeffs]


# -- acceptance summary: one line per criterion ------------------------------------------------

_criteria: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, label, limit = mark.args
    elapsed = dict(item.user_properties).get("elapsed", rep.duration)
    _criteria[number] = (rep.passed, elapsed, limit, label)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        ok, elapsed, limit, label = _criteria[number]
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  ({elapsed:6.2f} s / {limit} s)  {label}")
