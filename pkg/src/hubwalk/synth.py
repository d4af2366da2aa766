"""Synthetic labeled graphs with planted communities and controllable hubs.

Nodes are split evenly into classes (contiguous blocks); same-class pairs
connect with probability p_in, cross-class pairs with p_out. A fraction of
nodes become hubs by multiplying their edge probabilities by a boost
(capped at 1). Good hubs boost their same-class pairs; bad hubs boost
cross-class pairs instead, which manufactures high-degree nodes whose
neighborhoods vote against their own label. Isolated nodes receive
self-loops so the result is always walkable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, LabelMap


@dataclass(frozen=True)
class PlantedConfig:
    n_nodes: int = 200
    n_classes: int = 4
    p_in: float = 0.1
    p_out: float = 0.01
    hub_fraction: float = 0.05
    hub_degree_boost: float = 5.0
    bad_hub_fraction: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_nodes < 1 or self.n_classes < 1:
            raise ValueError("n_nodes and n_classes must be positive")
        if self.n_nodes < self.n_classes:
            raise ValueError("need at least one node per class")
        for name in ("p_in", "p_out", "hub_fraction", "bad_hub_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.hub_degree_boost <= 0:
            raise ValueError("hub_degree_boost must be positive")


def generate_planted(config: PlantedConfig) -> tuple[Graph, LabelMap]:
    """Sample one labeled instance; deterministic per rng_seed.

    Node IDs are "0".."n-1"; label tokens are "c0".."c{k-1}". Class sizes
    differ by at most one (remainder spread over the first classes).
    """
    rng = np.random.default_rng(config.rng_seed)
    n = config.n_nodes
    k = config.n_classes

    base, extra = divmod(n, k)
    sizes = [base + (1 if c < extra else 0) for c in range(k)]
    node_class = np.repeat(np.arange(k), sizes)

    n_hubs = int(round(config.hub_fraction * n))
    hubs = rng.choice(n, size=n_hubs, replace=False) if n_hubs else np.empty(0, int)
    n_bad = int(round(config.bad_hub_fraction * n_hubs))
    bad_hubs = hubs[:n_bad]
    good_hubs = hubs[n_bad:]

    same = node_class[:, None] == node_class[None, :]
    prob = np.where(same, config.p_in, config.p_out)

    # hubs multiply the probability of the pairs they want more of
    good_mask = np.zeros(n, dtype=bool)
    good_mask[good_hubs] = True
    bad_mask = np.zeros(n, dtype=bool)
    bad_mask[bad_hubs] = True
    for mask, wanted in ((good_mask, same), (bad_mask, ~same)):
        if not mask.any():
            continue
        endpoint = mask[:, None] | mask[None, :]
        prob = np.where(endpoint & wanted, prob * config.hub_degree_boost, prob)
    prob = np.minimum(prob, 1.0)

    draw = rng.random((n, n))
    upper = np.triu(draw < prob, k=1)
    rows, cols = np.nonzero(upper)

    ids = [str(i) for i in range(n)]
    edges = list(zip(rows.tolist(), cols.tolist()))

    degree = np.zeros(n, dtype=np.int64)
    np.add.at(degree, rows, 1)
    np.add.at(degree, cols, 1)
    for node in np.flatnonzero(degree == 0):
        edges.append((int(node), int(node)))

    graph = Graph(ids=ids, edges=edges)
    tokens = [f"c{c}" for c in range(k)]
    labels = LabelMap(node_class.astype(np.int32), tokens)
    return graph, labels
