import json

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_instance_jsonl(path, graphs):
    """Emit the shared instance JSONL format (schema_version 1, unit weights)."""
    with open(path, "w") as fh:
        for inst_id, n, edges in graphs:
            rec = {"id": inst_id, "kind": "MaxCutGraph", "n": n,
                   "edges": [[i, j, 1.0] for i, j in edges],
                   "meta": {}, "schema_version": 1}
            fh.write(json.dumps(rec) + "\n")


def random_graph(n, prob, rng):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < prob]
    return edges


@pytest.fixture
def graph_file(tmp_path):
    rng = np.random.default_rng(7)
    graphs = [(f"g{k}", 10, random_graph(10, 0.5, rng)) for k in range(8)]
    path = tmp_path / "graphs.jsonl"
    write_instance_jsonl(path, graphs)
    return path, graphs
