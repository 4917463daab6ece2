import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from anglerec.instances import ProblemInstance, KIND_MAXCUT, KIND_QUBO


def make_graph(n, edges, inst_id="test-graph"):
    return ProblemInstance(id=inst_id, kind=KIND_MAXCUT, n=n,
                           edges=tuple((i, j, float(w)) for i, j, w in edges),
                           meta={"seed": 0})


def make_qubo(q, inst_id="test-qubo"):
    q = np.asarray(q, dtype=float)
    return ProblemInstance(id=inst_id, kind=KIND_QUBO, n=q.shape[0],
                           qubo=np.triu(q), meta={"seed": 0})


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def k2():
    return make_graph(2, [(0, 1, 1.0)], "k2")


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], "k3")
