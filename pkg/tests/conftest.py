import math

import pytest
from hypothesis import strategies as st

from disclosure.env import Environment

SET_A = dict(mu=0.2, r=0.1, r_p=0.2, lambda_h=1.0, lambda_l=1.0, c=1.0, H=2.0, L=0.5)
SET_B = dict(mu=0.5, r=0.1, r_p=0.2, lambda_h=2.0, lambda_l=1.0, c=1.0, H=2.0, L=0.5)


@pytest.fixture
def set_a():
    return Environment(**SET_A)


@pytest.fixture
def set_b():
    return Environment(**SET_B)


def env_a(**kw):
    return Environment(**{**SET_A, **kw})


def env_b(**kw):
    return Environment(**{**SET_B, **kw})


@st.composite
def environments(draw, kind="stationary", mu=None):
    """Random valid environments.

    Ranges: r, r_p in [0.02, 0.5]; lambda_l in [0.3, 3]; c in [0.3, 3];
    L in (0.05, 0.9) * c/lambda_l and H chosen so that lambda_h * H > c.
    """
    r = draw(st.floats(0.02, 0.5))
    r_p = draw(st.floats(0.02, 0.5))
    lam_l = draw(st.floats(0.3, 3.0))
    c = draw(st.floats(0.3, 3.0))
    if kind == "stationary":
        lam_h = lam_l
    elif kind == "pessimistic":
        lam_h = lam_l * draw(st.floats(1.1, 4.0))
    else:
        lam_h = lam_l * draw(st.floats(0.3, 0.9))
    L = c / lam_l * draw(st.floats(0.05, 0.9))
    H = max(c / lam_h * draw(st.floats(1.1, 5.0)), 1.2 * L)
    m = draw(st.floats(0.02, 0.98)) if mu is None else mu
    return Environment(mu=m, r=r, r_p=r_p, lambda_h=lam_h, lambda_l=lam_l, c=c, H=H, L=L)


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = rep.nodeid.split("::")[-1]
            if rep.when == "call" and name.startswith("test_criterion_"):
                tag = name[len("test_criterion_"):]
                lines.append((tag, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for tag, verdict in sorted(lines):
            num, _, what = tag.partition("_")
            terminalreporter.write_line(f"criterion {num.lstrip('0')}: {verdict} ({what})")


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


__all__ = ["SET_A", "SET_B", "env_a", "env_b", "environments", "rel", "math"]
