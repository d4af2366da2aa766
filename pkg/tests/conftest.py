import pytest

from hubwalk import load_graph, load_labels, load_zachary


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def build(edge_text: str, label_text: str | None = None):
    """Small labeled graph from inline text; labels optional."""
    graph = load_graph(edge_text)
    if label_text is None:
        from hubwalk import LabelMap

        return graph, LabelMap.empty(graph.node_count)
    return graph, load_labels(label_text, graph)


@pytest.fixture(scope="session")
def zachary():
    return load_zachary()
