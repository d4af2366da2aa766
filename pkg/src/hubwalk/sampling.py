"""Random-walk corpus generation under four pluggable sampling strategies.

The walk loop is the usual one: for every node, ``walks_per_node`` walks of
exactly ``walk_length`` nodes, appending the current node before each step.
Strategies differ only in how the next neighbor is drawn:

* ``uniform``: every neighbor equally likely.
* ``node2vec``: second-order weights 1/return_param (back to the previous
  node), 1 (neighbor of the previous node), 1/inout_param (otherwise).
* ``scwalk``: with probability p, uniform over the same-label subset of the
  neighborhood (falling back to the rest when that subset is empty);
  otherwise uniform.
* ``hubwalkdist``: with probability p, neighbors weighted by the fraction of
  THEIR neighbors sharing the walk's start label; otherwise uniform.

Label comparisons treat an unknown label as matching nothing, so unlabeled
neighbors count as different-label and walks started at unlabeled nodes
degrade to uniform behavior.

The step functions here are straightforward reference implementations; bulk
generation runs through the compiled kernel with one RNG stream per walk,
which keeps the corpus independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Optional

import numpy as np

from . import _kernels
from .graph import Graph, LabelMap

STRATEGIES = ("uniform", "node2vec", "scwalk", "hubwalkdist")

_STRATEGY_CODES = {
    "uniform": _kernels.STRAT_UNIFORM,
    "node2vec": _kernels.STRAT_NODE2VEC,
    "scwalk": _kernels.STRAT_SCWALK,
    "hubwalkdist": _kernels.STRAT_HUBWALKDIST,
}


@dataclass(frozen=True)
class WalkConfig:
    """Parameters for corpus generation."""

    walks_per_node: int = 10
    walk_length: int = 80
    strategy: str = "uniform"
    bias_probability: float = 0.5
    return_param: float = 1.0
    inout_param: float = 1.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be >= 1")
        if self.walk_length < 1:
            raise ValueError("walk_length must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        if not 0.0 <= self.bias_probability <= 1.0:
            raise ValueError("bias_probability must lie in [0, 1]")
        if self.return_param <= 0 or self.inout_param <= 0:
            raise ValueError("return_param and inout_param must be positive")

    def with_seed(self, rng_seed: int) -> "WalkConfig":
        return replace(self, rng_seed=rng_seed)


@dataclass(frozen=True)
class WalkState:
    """Position of a walk in progress.

    ``previous_node`` is None on the first step; otherwise it must be
    adjacent to ``current_node`` for the node2vec weights to make sense.
    """

    start_node: int
    current_node: int
    previous_node: Optional[int] = None


@dataclass(frozen=True)
class Corpus:
    """A stack of fixed-length walks, row order (start node, walk index)."""

    walks: np.ndarray  # (n_walks, walk_length) int32

    @property
    def n_walks(self) -> int:
        return self.walks.shape[0]

    @property
    def walk_length(self) -> int:
        return self.walks.shape[1]

    def __repr__(self) -> str:
        return f"Corpus(n_walks={self.n_walks}, walk_length={self.walk_length})"


def _same_label(labels: LabelMap, x: int, v: int) -> bool:
    # unknown labels match nothing, including each other
    lv = labels.labels[v]
    return lv >= 0 and labels.labels[x] == lv


def _uniform_choice(nodes: np.ndarray, rng: np.random.Generator) -> int:
    if len(nodes) == 0:
        raise ValueError("cannot sample from an empty neighborhood")
    return int(nodes[rng.integers(len(nodes))])


def _weighted_choice(
    nodes: np.ndarray, weights: np.ndarray, rng: np.random.Generator
) -> int:
    total = float(weights.sum())
    r = rng.random() * total
    acc = 0.0
    for node, w in zip(nodes, weights):
        acc += w
        if r < acc:
            return int(node)
    return int(nodes[-1])


def uniform_step(graph: Graph, state: WalkState, rng: np.random.Generator) -> int:
    """Draw the next node uniformly from the current neighborhood."""
    return _uniform_choice(graph.neighbors(state.current_node), rng)


def node2vec_step(
    graph: Graph,
    state: WalkState,
    return_param: float,
    inout_param: float,
    rng: np.random.Generator,
) -> int:
    """Second-order biased step; uniform when there is no previous node."""
    nbrs = graph.neighbors(state.current_node)
    if len(nbrs) == 0:
        raise ValueError("cannot sample from an empty neighborhood")
    prev = state.previous_node
    if prev is None:
        return _uniform_choice(nbrs, rng)
    weights = np.empty(len(nbrs), dtype=np.float64)
    for i, x in enumerate(nbrs):
        if x == prev:
            weights[i] = 1.0 / return_param
        elif graph.has_edge(int(x), prev):
            weights[i] = 1.0
        else:
            weights[i] = 1.0 / inout_param
    return _weighted_choice(nbrs, weights, rng)


def scwalk_step(
    graph: Graph,
    labels: LabelMap,
    state: WalkState,
    bias_probability: float,
    rng: np.random.Generator,
) -> int:
    """Same-label biased step toward the walk's start label."""
    nbrs = graph.neighbors(state.current_node)
    if len(nbrs) == 0:
        raise ValueError("cannot sample from an empty neighborhood")
    if rng.random() < bias_probability:
        v = state.start_node
        same = [int(x) for x in nbrs if _same_label(labels, int(x), v)]
        diff = [int(x) for x in nbrs if not _same_label(labels, int(x), v)]
        if same:
            return same[rng.integers(len(same))]
        return diff[rng.integers(len(diff))]
    return _uniform_choice(nbrs, rng)


def hubwalkdist_step(
    graph: Graph,
    labels: LabelMap,
    state: WalkState,
    bias_probability: float,
    rng: np.random.Generator,
) -> int:
    """Step weighted by each neighbor's same-label neighborhood fraction.

    When every weight is zero (no neighbor-of-neighbor carries the start
    label) the draw falls back to uniform.
    """
    nbrs = graph.neighbors(state.current_node)
    if len(nbrs) == 0:
        raise ValueError("cannot sample from an empty neighborhood")
    if rng.random() < bias_probability:
        v = state.start_node
        h = np.empty(len(nbrs), dtype=np.float64)
        for i, x in enumerate(nbrs):
            xn = graph.neighbors(int(x))
            matches = sum(1 for y in xn if _same_label(labels, int(y), v))
            h[i] = matches / len(xn)
        if h.sum() > 0.0:
            return _weighted_choice(nbrs, h, rng)
    return _uniform_choice(nbrs, rng)


def transition_distribution(
    graph: Graph, labels: LabelMap, config: WalkConfig, state: WalkState
) -> np.ndarray:
    """Exact next-step distribution over ``graph.neighbors(current_node)``.

    Computed analytically, independent of the samplers, so it can serve as
    the oracle when checking their empirical frequencies.
    """
    nbrs = graph.neighbors(state.current_node)
    deg = len(nbrs)
    if deg == 0:
        raise ValueError("cannot sample from an empty neighborhood")
    uniform = np.full(deg, 1.0 / deg)

    if config.strategy == "uniform":
        return uniform

    if config.strategy == "node2vec":
        prev = state.previous_node
        if prev is None:
            return uniform
        weights = np.empty(deg, dtype=np.float64)
        for i, x in enumerate(nbrs):
            if x == prev:
                weights[i] = 1.0 / config.return_param
            elif graph.has_edge(int(x), prev):
                weights[i] = 1.0
            else:
                weights[i] = 1.0 / config.inout_param
        return weights / weights.sum()

    p = config.bias_probability
    v = state.start_node

    if config.strategy == "scwalk":
        same = np.array(
            [_same_label(labels, int(x), v) for x in nbrs], dtype=bool
        )
        biased = np.zeros(deg)
        if same.any():
            biased[same] = 1.0 / same.sum()
        else:
            biased = uniform.copy()  # D is the whole neighborhood
        return p * biased + (1.0 - p) * uniform

    # hubwalkdist
    h = np.empty(deg, dtype=np.float64)
    for i, x in enumerate(nbrs):
        xn = graph.neighbors(int(x))
        matches = sum(1 for y in xn if _same_label(labels, int(y), v))
        h[i] = matches / len(xn)
    total = h.sum()
    biased = h / total if total > 0.0 else uniform.copy()
    return p * biased + (1.0 - p) * uniform


def neighbor_label_counts(graph: Graph, labels: LabelMap) -> np.ndarray:
    """Per-node count of neighbors carrying each label, (n x class_count)."""
    n = graph.node_count
    counts = np.zeros((n, labels.class_count), dtype=np.int64)
    if labels.class_count == 0:
        return counts
    owners = np.repeat(np.arange(n), np.diff(graph.indptr))
    neighbor_labels = labels.labels[graph.indices]
    labeled = neighbor_labels >= 0
    np.add.at(counts, (owners[labeled], neighbor_labels[labeled]), 1)
    return counts


def generate_corpus(graph: Graph, labels: LabelMap, config: WalkConfig) -> Corpus:
    """Run ``walks_per_node`` walks of ``walk_length`` nodes from every node.

    Deterministic for a fixed ``config.rng_seed``: each walk owns an RNG
    stream derived from the seed and the walk's row index.
    """
    degrees = graph.degrees
    if graph.node_count == 0:
        raise ValueError("graph has no nodes")
    if (degrees == 0).any():
        isolated = int(np.flatnonzero(degrees == 0)[0])
        raise ValueError(
            f"node {graph.id_of(isolated)!r} is isolated; apply "
            "add_self_loops_to_isolated before generating walks"
        )
    code = _STRATEGY_CODES[config.strategy]
    if code >= _kernels.STRAT_SCWALK:
        label_counts = neighbor_label_counts(graph, labels)
    else:
        label_counts = np.zeros((graph.node_count, 0), dtype=np.int64)
    out = np.empty(
        (graph.node_count * config.walks_per_node, config.walk_length),
        dtype=np.int32,
    )
    _kernels.walk_corpus(
        graph.indptr,
        graph.indices,
        labels.labels,
        label_counts,
        code,
        float(config.bias_probability),
        1.0 / float(config.return_param),
        1.0 / float(config.inout_param),
        config.walks_per_node,
        config.walk_length,
        np.uint64(config.rng_seed & _kernels.U64_MASK),
        out,
    )
    return Corpus(walks=out)


def write_corpus_lines(corpus: Corpus, graph: Graph) -> Iterator[str]:
    """One walk per line, space-separated external node IDs."""
    for row in corpus.walks:
        yield " ".join(graph.id_of(int(i)) for i in row)


def read_corpus_lines(source: str | Iterable[str], graph: Graph) -> Corpus:
    """Parse the plain-text corpus format back into index walks."""
    lines = source.splitlines() if isinstance(source, str) else source
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ValueError(
                f"line {lineno}: walk has {len(tokens)} nodes, expected {width}"
            )
        rows.append([graph.index_of(tok) for tok in tokens])
    if not rows:
        raise ValueError("corpus is empty")
    return Corpus(walks=np.asarray(rows, dtype=np.int32))
