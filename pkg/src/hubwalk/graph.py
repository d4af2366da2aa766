"""Labeled undirected graphs: loading, preprocessing, statistics and hub tests.

Graphs are stored in CSR form (``indptr``/``indices``) over contiguous
internal indices with sorted neighbor lists. External node identifiers are
arbitrary whitespace-free tokens kept in a bijective id map. Both ``Graph``
and ``LabelMap`` are immutable after construction and safe to share across
worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

UNLABELED = -1


def _iter_records(source: Iterable[str] | str, n_fields: int, what: str):
    """Yield (line_number, fields) from an edge/label stream.

    Blank lines and lines starting with '#' are skipped. Any other line must
    contain exactly ``n_fields`` whitespace-separated tokens.
    """
    if isinstance(source, str):
        source = source.splitlines()
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != n_fields:
            raise ValueError(
                f"{what}: line {lineno}: expected {n_fields} tokens, "
                f"got {len(fields)}: {line!r}"
            )
        yield lineno, fields


class Graph:
    """Immutable undirected graph with an external-ID/internal-index bijection.

    Parameters
    ----------
    ids : sequence of str
        External identifier of every node; position defines the internal index.
    edges : iterable of (int, int)
        Undirected edges as internal index pairs. Duplicates (including
        reversed duplicates) collapse to a single edge. A pair (i, i) is a
        self-loop and contributes one adjacency entry.
    """

    __slots__ = ("indptr", "indices", "ids", "_index_of", "n_edges", "_degrees")

    def __init__(self, ids: Sequence[str], edges: Iterable[tuple[int, int]]):
        ids = list(ids)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate external node IDs")
        n = len(ids)
        unique = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} nodes")
            unique.add((u, v) if u <= v else (v, u))
        counts = np.zeros(n, dtype=np.int64)
        for u, v in unique:
            counts[u] += 1
            if u != v:
                counts[v] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = np.empty(indptr[-1], dtype=np.int32)
        cursor = indptr[:-1].copy()
        for u, v in unique:
            indices[cursor[u]] = v
            cursor[u] += 1
            if u != v:
                indices[cursor[v]] = u
                cursor[v] += 1
        for i in range(n):
            indices[indptr[i]:indptr[i + 1]].sort()
        self.indptr = indptr
        self.indices = indices
        self.ids = ids
        self._index_of = {ext: i for i, ext in enumerate(ids)}
        self.n_edges = len(unique)
        self._degrees = np.diff(indptr)

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def degrees(self) -> np.ndarray:
        """Degree per node; a self-loop counts once."""
        return self._degrees

    def neighbors(self, node: int) -> np.ndarray:
        """Sorted neighbor indices of ``node`` (read-only view)."""
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def degree(self, node: int) -> int:
        return int(self._degrees[node])

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        pos = np.searchsorted(nbrs, v)
        return pos < len(nbrs) and nbrs[pos] == v

    def index_of(self, external_id: str) -> int:
        try:
            return self._index_of[external_id]
        except KeyError:
            raise KeyError(f"unknown node ID {external_id!r}") from None

    def id_of(self, node: int) -> str:
        return self.ids[node]

    def edge_pairs(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as (u, v) with u <= v, in index order."""
        for u in range(self.node_count):
            for v in self.neighbors(u):
                if v >= u:
                    yield u, int(v)

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.n_edges})"


class LabelMap:
    """Partial node -> class assignment over a graph's internal indices.

    Labels are dense integers in [0, class_count); unlabeled nodes carry
    ``UNLABELED`` (-1). ``tokens[k]`` is the original token of class ``k``.
    """

    __slots__ = ("labels", "class_count", "tokens")

    def __init__(self, labels: np.ndarray, tokens: Sequence[str]):
        labels = np.asarray(labels, dtype=np.int32)
        tokens = list(tokens)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-d array")
        if len(labels) and labels.max(initial=UNLABELED) >= len(tokens):
            raise ValueError("label value out of range of token table")
        if len(labels) and labels.min(initial=0) < UNLABELED:
            raise ValueError("label values must be >= -1")
        labels.setflags(write=False)
        self.labels = labels
        self.tokens = tokens
        self.class_count = len(tokens)

    @classmethod
    def empty(cls, n_nodes: int) -> "LabelMap":
        return cls(np.full(n_nodes, UNLABELED, dtype=np.int32), [])

    def is_labeled(self, node: int) -> bool:
        return self.labels[node] != UNLABELED

    def label_of(self, node: int) -> int:
        """Dense label of ``node``; raises if unlabeled."""
        lab = int(self.labels[node])
        if lab == UNLABELED:
            raise ValueError(f"node {node} is unlabeled")
        return lab

    @property
    def labeled_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.labels != UNLABELED)

    def masked(self, nodes: np.ndarray) -> "LabelMap":
        """Copy with the labels of ``nodes`` hidden (set to unlabeled)."""
        labels = self.labels.copy()
        labels[nodes] = UNLABELED
        return LabelMap(labels, self.tokens)

    def __repr__(self) -> str:
        n_lab = int(np.count_nonzero(self.labels != UNLABELED))
        return f"LabelMap(labeled={n_lab}, classes={self.class_count})"


@dataclass(frozen=True)
class GraphStats:
    """Structural summary row: node/edge/component counts and degree moments."""

    n_nodes: int
    n_edges: int
    n_components: int
    avg_degree: float
    std_degree: float
    max_degree: int
    n_labels: int


def load_graph(edge_text: Iterable[str] | str, directed_input: bool = False) -> Graph:
    """Parse a whitespace-separated edge list into an undirected graph.

    One edge per line ("u v"), '#' starts a comment line. External IDs are
    interned in first-seen order. With ``directed_input`` each arc is
    projected onto one undirected edge (reciprocal arcs collapse); duplicate
    edges always collapse. Raises ``ValueError`` on malformed lines (with the
    line number) and on input containing no edges.
    """
    index_of: dict[str, int] = {}
    ids: list[str] = []
    edges: list[tuple[int, int]] = []

    def intern(token: str) -> int:
        idx = index_of.get(token)
        if idx is None:
            idx = len(ids)
            index_of[token] = idx
            ids.append(token)
        return idx

    for _, (a, b) in _iter_records(edge_text, 2, "edge list"):
        edges.append((intern(a), intern(b)))
    if not edges:
        raise ValueError("edge list is empty")
    return Graph(ids, edges)


def load_labels(label_text: Iterable[str] | str, graph: Graph) -> LabelMap:
    """Parse "node_token label_token" lines into a LabelMap over ``graph``.

    Label tokens are interned to dense integers in first-seen order. Nodes
    absent from the stream stay unlabeled. Raises ``ValueError`` for labels
    on unknown nodes (naming the token) and for conflicting duplicates.
    """
    labels = np.full(graph.node_count, UNLABELED, dtype=np.int32)
    tokens: list[str] = []
    token_index: dict[str, int] = {}
    for lineno, (node_tok, label_tok) in _iter_records(label_text, 2, "label file"):
        try:
            node = graph.index_of(node_tok)
        except KeyError:
            raise ValueError(
                f"label file: line {lineno}: unknown node {node_tok!r}"
            ) from None
        lab = token_index.get(label_tok)
        if lab is None:
            lab = len(tokens)
            token_index[label_tok] = lab
            tokens.append(label_tok)
        if labels[node] != UNLABELED and labels[node] != lab:
            raise ValueError(
                f"label file: line {lineno}: conflicting label for node "
                f"{node_tok!r}: {tokens[labels[node]]!r} vs {label_tok!r}"
            )
        labels[node] = lab
    return LabelMap(labels, tokens)


def add_self_loops_to_isolated(graph: Graph) -> Graph:
    """Return a graph where every degree-0 node gained one self-loop.

    Graphs without isolated nodes are returned unchanged (same object).
    """
    isolated = np.flatnonzero(graph.degrees == 0)
    if len(isolated) == 0:
        return graph
    edges = list(graph.edge_pairs())
    edges.extend((int(i), int(i)) for i in isolated)
    return Graph(graph.ids, edges)


def _count_components(graph: Graph) -> int:
    n = graph.node_count
    seen = np.zeros(n, dtype=bool)
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
    return count


def graph_stats(graph: Graph, labels: LabelMap | None = None) -> GraphStats:
    """Compute the structural summary of a graph and its label set.

    Degree moments are taken over all nodes, with a self-loop counting once
    toward its node's degree. ``std_degree`` uses the n-1 (sample) normalizer;
    it is 0 for a single-node graph.
    """
    deg = graph.degrees.astype(np.float64)
    n = graph.node_count
    std = float(deg.std(ddof=1)) if n > 1 else 0.0
    return GraphStats(
        n_nodes=n,
        n_edges=graph.n_edges,
        n_components=_count_components(graph),
        avg_degree=float(deg.mean()) if n else 0.0,
        std_degree=std,
        max_degree=int(deg.max()) if n else 0,
        n_labels=labels.class_count if labels is not None else 0,
    )


def is_good_hub(graph: Graph, labels: LabelMap, node: int) -> bool:
    """Strict-majority label test over the labeled neighborhood of ``node``.

    True iff strictly more labeled neighbors share the node's label than
    disagree with it; unlabeled neighbors are ignored, so a node whose
    neighbors are all unlabeled is not a good hub. Raises ``ValueError`` for
    an unlabeled node, where the test is undefined.
    """
    own = labels.label_of(node)
    nbr_labels = labels.labels[graph.neighbors(node)]
    labeled = nbr_labels[nbr_labels != UNLABELED]
    same = int(np.count_nonzero(labeled == own))
    return same > len(labeled) - same


def hub_report(
    graph: Graph, labels: LabelMap, degree_percentile: float = 90.0
) -> list[tuple[int, int, bool]]:
    """(node, degree, good) for labeled nodes at or above a degree percentile.

    The majority test itself needs no degree threshold; this helper exists
    for reporting on high-degree nodes only.
    """
    if graph.node_count == 0:
        return []
    threshold = float(np.percentile(graph.degrees, degree_percentile))
    out = []
    for node in range(graph.node_count):
        if graph.degree(node) >= threshold and labels.is_labeled(node):
            out.append((node, graph.degree(node), is_good_hub(graph, labels, node)))
    return out


def write_edge_lines(graph: Graph) -> Iterator[str]:
    """Serialize the edge set, one "u v" line per undirected edge."""
    for u, v in graph.edge_pairs():
        yield f"{graph.id_of(u)} {graph.id_of(v)}"


def write_label_lines(labels: LabelMap, graph: Graph) -> Iterator[str]:
    """Serialize labeled nodes as "node_token label_token" lines."""
    for node in labels.labeled_nodes:
        yield f"{graph.id_of(int(node))} {labels.tokens[labels.labels[node]]}"
