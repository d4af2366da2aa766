"""Skip-gram negative-sampling embeddings over walk corpora.

The trainer treats each walk as a sentence of node IDs: every (center,
context) pair within the window gets one positive update and
``negatives_per_pair`` negative updates, with negatives drawn from the
corpus unigram distribution raised to ``noise_exponent``. The input
(center) matrix is the embedding; the context matrix is discarded.

Nodes are never frequency-subsampled: the corpus already starts the same
number of walks at every node.

Also here: word2vec-text persistence, a degree-matched nearest-neighbor
reconstruction error for picking node2vec hyper-parameters, and the grid
search built on it.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from typing import IO, Iterable, Sequence

import numpy as np

from . import _kernels
from .graph import Graph, LabelMap
from .sampling import Corpus, WalkConfig, generate_corpus

logger = logging.getLogger(__name__)

_SEED_SALT = 0x53474E53  # keeps SGNS streams apart from walk streams


@dataclass(frozen=True)
class SgnsParams:
    """Skip-gram training hyper-parameters."""

    window: int = 10
    negatives_per_pair: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    final_lr: float = 0.0001
    noise_exponent: float = 0.75
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives_per_pair < 1:
            raise ValueError("negatives_per_pair must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")
        if not 0 <= self.final_lr <= self.initial_lr:
            raise ValueError("final_lr must lie in [0, initial_lr]")

    def with_seed(self, rng_seed: int) -> "SgnsParams":
        return replace(self, rng_seed=rng_seed)


@dataclass(frozen=True)
class Embedding:
    """One vector per graph node, aligned with the graph's node indices."""

    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, dimension) float32

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if len(self.ids) != self.vectors.shape[0]:
            raise ValueError("one vector per node id required")
        if not np.isfinite(self.vectors).all():
            raise ValueError("embedding contains non-finite components")

    @property
    def node_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __repr__(self) -> str:
        return f"Embedding(node_count={self.node_count}, dimension={self.dimension})"


def _sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-x))


def _softplus(x: np.ndarray) -> np.ndarray:
    # numerically stable -log(sigmoid(-x))
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sgns_pair_objective(
    center_vec: np.ndarray,
    context_vec: np.ndarray,
    negative_vecs: Sequence[np.ndarray] | np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and exact gradients for one positive pair plus its negatives.

    loss = -log sigmoid(context . center) - sum_k log sigmoid(-neg_k . center)

    Returns (loss, grad_center, grad_context, grad_negatives); the negative
    gradients come back stacked (k x dimension), empty when no negatives.
    """
    v = np.asarray(center_vec, dtype=np.float64)
    u = np.asarray(context_vec, dtype=np.float64)
    if v.shape != u.shape or v.ndim != 1:
        raise ValueError("center and context vectors must share one dimension")
    negs = np.asarray(negative_vecs, dtype=np.float64)
    if negs.size == 0:
        negs = negs.reshape(0, v.shape[0])
    if negs.ndim != 2 or negs.shape[1] != v.shape[0]:
        raise ValueError("negative vectors must match the pair's dimension")

    pos_dot = float(u @ v)
    neg_dots = negs @ v
    loss = float(_softplus(-pos_dot) + _softplus(neg_dots).sum())

    pos_sig = _sigmoid(pos_dot)
    neg_sigs = _sigmoid(neg_dots)
    grad_context = (pos_sig - 1.0) * v
    grad_center = (pos_sig - 1.0) * u + negs.T @ neg_sigs
    grad_negatives = neg_sigs[:, None] * v[None, :]
    return loss, grad_center, grad_context, grad_negatives


def train_sgns(
    corpus: Corpus,
    graph: Graph,
    dimension: int,
    params: SgnsParams | None = None,
    threads: int = 1,
) -> Embedding:
    """Train node vectors from a walk corpus.

    ``threads=1`` is bitwise deterministic for a fixed seed. ``threads>1``
    updates the shared matrices from several workers without locks, which
    is fast and statistically fine but not reproducible run to run.
    """
    if params is None:
        params = SgnsParams()
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    if corpus.n_walks == 0 or corpus.walks.size == 0:
        raise ValueError("corpus is empty")
    n = graph.node_count
    walks = np.ascontiguousarray(corpus.walks, dtype=np.int32)
    lo, hi = int(walks.min()), int(walks.max())
    if lo < 0 or hi >= n:
        raise ValueError(f"corpus mentions node index {hi if hi >= n else lo}, "
                         f"which is not in the graph (0..{n - 1})")

    counts = np.bincount(walks.ravel(), minlength=n).astype(np.float64)
    noise = counts ** params.noise_exponent
    prob, alias = _kernels.build_alias(noise)

    rng = np.random.default_rng(params.rng_seed)
    w_in = rng.uniform(-0.5 / dimension, 0.5 / dimension, (n, dimension))
    w_in = w_in.astype(np.float32)
    w_out = np.zeros((n, dimension), dtype=np.float32)

    seed = np.uint64(_kernels.mix64(params.rng_seed ^ _SEED_SALT))
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1:
        step = _kernels.sgns_epoch
    else:
        from numba import config as numba_config, set_num_threads

        # more workers than the runtime offers is a request, not an error
        set_num_threads(min(threads, numba_config.NUMBA_NUM_THREADS))
        step = _kernels.sgns_epoch_parallel

    lr_span = params.initial_lr - params.final_lr
    for epoch in range(params.epochs):
        mean_loss = step(
            walks,
            params.window,
            params.negatives_per_pair,
            epoch,
            params.epochs,
            params.initial_lr,
            params.final_lr,
            prob,
            alias,
            w_in,
            w_out,
            seed,
        )
        lr_now = params.initial_lr - lr_span * (epoch + 1) / params.epochs
        logger.info(
            "sgns epoch=%d mean_loss=%.6f lr=%.6f", epoch, mean_loss, lr_now
        )
    return Embedding(ids=tuple(graph.ids), vectors=w_in)


def save_embedding(embedding: Embedding, sink: str | os.PathLike | IO[str]) -> None:
    """Write word2vec text format: a count/dimension header, then one node
    per line as "<id> <v1> ... <vdim>". Values round-trip float32 exactly."""
    own = isinstance(sink, (str, os.PathLike))
    out = open(sink, "w", encoding="utf-8") if own else sink
    try:
        out.write(f"{embedding.node_count} {embedding.dimension}\n")
        for node_id, row in zip(embedding.ids, embedding.vectors):
            values = " ".join("%.9g" % float(x) for x in row)
            out.write(f"{node_id} {values}\n")
    finally:
        if own:
            out.close()


def load_embedding(
    source: str | os.PathLike | IO[str] | Iterable[str], graph: Graph
) -> Embedding:
    """Parse word2vec text back into an embedding aligned with ``graph``."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    elif hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = [line.rstrip("\n") for line in source]
    lines = [line for line in lines if line.strip()]
    if not lines:
        raise ValueError("embedding file is empty")

    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("header must be '<node_count> <dimension>'")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise ValueError("header must hold two integers") from None
    if count != graph.node_count:
        raise ValueError(
            f"header says {count} nodes, graph has {graph.node_count}"
        )
    if len(lines) - 1 != count:
        raise ValueError(
            f"header says {count} rows, body has {len(lines) - 1}"
        )

    vectors = np.zeros((count, dim), dtype=np.float32)
    seen = np.zeros(count, dtype=bool)
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if len(tokens) != dim + 1:
            raise ValueError(
                f"line {lineno}: expected id plus {dim} values, got "
                f"{len(tokens)} tokens"
            )
        idx = graph.index_of(tokens[0])
        if seen[idx]:
            raise ValueError(f"line {lineno}: duplicate vector for {tokens[0]!r}")
        seen[idx] = True
        try:
            vectors[idx] = [float(t) for t in tokens[1:]]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric component") from None
    return Embedding(ids=tuple(graph.ids), vectors=vectors)


def reconstruction_error(
    graph: Graph, embedding: Embedding, chunk_size: int = 512
) -> float:
    """Degree-matched nearest-neighbor miss rate, in [0, 1].

    For each node u with degree d_u > 0, rank all other nodes by cosine
    similarity and take the top d_u; the node's error is the fraction of
    those that are not actual neighbors. Zero vectors rank below
    everything (their similarities are pinned to -inf). Scale-invariant
    by construction.
    """
    if embedding.node_count != graph.node_count:
        raise ValueError("embedding does not cover the graph's nodes")
    vectors = embedding.vectors.astype(np.float64)
    norms = np.linalg.norm(vectors, axis=1)
    zero = norms == 0.0
    unit = vectors / np.where(zero, 1.0, norms)[:, None]

    degrees = graph.degrees
    total = 0.0
    counted = 0
    n = graph.node_count
    for start in range(0, n, chunk_size):
        stop = min(start + chunk_size, n)
        sims = unit[start:stop] @ unit.T
        sims[:, zero] = -np.inf
        sims[zero[start:stop], :] = -np.inf
        for u in range(start, stop):
            d_u = int(degrees[u])
            if d_u == 0:
                continue
            row = sims[u - start]
            row[u] = -np.inf  # self is not a candidate
            top = np.argpartition(row, n - 1 - d_u)[n - d_u:]
            nbrs = graph.neighbors(u)
            pos = np.searchsorted(nbrs, top)
            pos = np.minimum(pos, len(nbrs) - 1)
            hits = int((nbrs[pos] == top).sum())
            total += 1.0 - hits / d_u
            counted += 1
    if counted == 0:
        raise ValueError("graph has no nodes with positive degree")
    return total / counted


def tune_node2vec(
    graph: Graph,
    grid: Sequence[tuple[float, float]],
    walk_config: WalkConfig,
    dimension: int,
    params: SgnsParams | None = None,
    threads: int = 1,
) -> tuple[tuple[float, float], list[tuple[float, float, float]]]:
    """Pick the (return_param, inout_param) cell with the lowest
    reconstruction error; ties go to the smaller return_param, then the
    smaller inout_param. Returns the winner and the full error table."""
    if len(grid) == 0:
        raise ValueError("grid is empty")
    labels = LabelMap.empty(graph.node_count)
    table: list[tuple[float, float, float]] = []
    for return_param, inout_param in grid:
        config = replace(
            walk_config,
            strategy="node2vec",
            return_param=return_param,
            inout_param=inout_param,
        )
        corpus = generate_corpus(graph, labels, config)
        emb = train_sgns(corpus, graph, dimension, params, threads=threads)
        error = reconstruction_error(graph, emb)
        logger.info(
            "tune return=%g inout=%g error=%.4f", return_param, inout_param, error
        )
        table.append((float(return_param), float(inout_param), error))
    best = min(table, key=lambda row: (row[2], row[0], row[1]))
    return (best[0], best[1]), table
