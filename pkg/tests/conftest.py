import pytest
from hypothesis import strategies as st

from landmark_sampling.panel import EventType, IndividualHistory, MonthDate, validate_panel
from landmark_sampling.synth import SynthConfig, illustration_panel, synthetic_panel

START = MonthDate(2015, 1)


@st.composite
def panels(draw, max_individuals=12, max_months=18, common_entry=False):
    months = draw(st.integers(1, max_months))
    n = draw(st.integers(1, max_individuals))
    people = []
    for k in range(n):
        entry = 0 if common_entry else draw(st.integers(0, months - 1))
        length = draw(st.integers(1, months - entry))
        terminal = draw(st.sampled_from(list(EventType)))
        people.append(IndividualHistory(f"i{k:03d}", START + entry, START + entry + length - 1, terminal))
    return validate_panel(people, START + months - 1)


@pytest.fixture
def illustration():
    return illustration_panel()


@pytest.fixture(scope="session")
def staggered():
    """Small panel with staggered entry, used where exact enumeration is cheap."""
    return synthetic_panel(SynthConfig.spread(40, 8, n_months=20, seed=5))


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
