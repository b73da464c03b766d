import numpy as np
import pytest

from taxlattice.lattice import SpinGrid
from taxlattice.population import AgentType, Society

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def uniform_society(width, height, agent_type=AgentType.COPYING, temperature=5.0, field=0.0, step=0.0):
    n = width * height
    return Society(
        width,
        height,
        np.full(n, int(agent_type), dtype=np.int8),
        np.full(n, float(temperature)),
        np.full(n, float(field)),
        np.full(n, float(step)),
    )


def grid_from_rows(rows):
    return SpinGrid.from_text("\n".join(" ".join(str(v) for v in r) for r in rows))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
