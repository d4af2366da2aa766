"""Bundled example data.

Only the karate-club graph ships with the package (34 nodes, 78 edges, two
factions). Larger real graphs are user-supplied as edge/label files in the
formats documented in the README; synthetic instances come from
:mod:`hubwalk.synth`.
"""

from __future__ import annotations

from importlib import resources

from .graph import Graph, LabelMap, load_graph, load_labels


def load_zachary() -> tuple[Graph, LabelMap]:
    """The karate-club graph with its two-faction ground truth."""
    data = resources.files(__package__) / "data"
    graph = load_graph((data / "zachary.edges").read_text())
    labels = load_labels((data / "zachary.labels").read_text(), graph)
    return graph, labels
