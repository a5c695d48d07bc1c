from pathlib import Path

import pytest

from shmlmon.formula import check_wellformed
from shmlmon.parser import parse_formula, parse_trace

DATA = Path(__file__).resolve().parent.parent / "data"

PREDECESSOR = (DATA / "predecessor.shml").read_text()
GOOD_TRACE = (DATA / "good.trace").read_text()
BAD_TRACE = (DATA / "bad.trace").read_text()


def wf(text: str):
    return check_wellformed(parse_formula(text))


@pytest.fixture(scope="session")
def predecessor():
    return wf(PREDECESSOR)


@pytest.fixture(scope="session")
def good_trace():
    return parse_trace(GOOD_TRACE)


@pytest.fixture(scope="session")
def bad_trace():
    return parse_trace(BAD_TRACE)
