import pytest

from iotdefense.network import build_network
from iotdefense.optimizer import DeploymentProblem, exhaustive_search
from iotdefense.scenarios import pacs_case_study

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def pacs():
    return build_network(pacs_case_study())


@pytest.fixture(scope="session")
def pacs_front(pacs):
    return exhaustive_search(DeploymentProblem(pacs))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
