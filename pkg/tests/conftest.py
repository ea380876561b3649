import pytest

from nsqkd.simulator import ProtocolConfig, run

SEED = 1


@pytest.fixture(scope="session")
def honest_chsh():
    config = ProtocolConfig(N=2, p=1.0, rounds=100_000, q=0.9, qprime=0.9, seed=SEED)
    return run(config)


@pytest.fixture(scope="session")
def honest_chain3():
    config = ProtocolConfig(N=3, p=0.9, rounds=100_000, q=0.9, qprime=0.9, seed=SEED)
    return run(config)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
