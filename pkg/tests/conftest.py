import pytest

from bayes_rasp.censoring import Design
from bayes_rasp.numerics import RngStream
from bayes_rasp.scenario import bundled_scenario


@pytest.fixture(scope="session")
def example1():
    return bundled_scenario("example1")


@pytest.fixture(scope="session")
def example2():
    return bundled_scenario("example2_rdsp")


@pytest.fixture(scope="session")
def application():
    return bundled_scenario("application")


@pytest.fixture
def table1_design():
    return Design(5, 2, 5.75)


@pytest.fixture
def rng():
    return RngStream(20240601)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
