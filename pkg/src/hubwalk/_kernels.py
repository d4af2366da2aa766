"""Numba kernels for the hot loops: walk sampling, SGNS training, tree building.

Randomness here is a splitmix64 stream seeded per logical work item (per
walk, per tree) through a fixed 64-bit mixer, so results do not depend on
scheduling and stay bitwise reproducible in single-threaded mode.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

U64_MASK = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0
_INV_2_32 = 1.0 / 4294967296.0

STRAT_UNIFORM = 0
STRAT_NODE2VEC = 1
STRAT_SCWALK = 2
STRAT_HUBWALKDIST = 3


def mix64(x: int) -> int:
    """Python mirror of the splitmix64 finalizer (stream seeding)."""
    x &= U64_MASK
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & U64_MASK
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & U64_MASK
    return (x ^ (x >> 31)) & U64_MASK


def stream_seed(*parts: int) -> int:
    """Fold integers into one 64-bit stream seed."""
    acc = 0
    for p in parts:
        acc = mix64(acc ^ mix64(p & U64_MASK))
    return acc


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _next(state):
    state = state + _GAMMA
    return state, _mix(state)


@njit(inline="always")
def _u01(z):
    return (z >> np.uint64(11)) * _INV_2_53


@njit(inline="always")
def _walk_state(seed, walk_id):
    return _mix(np.uint64(seed) ^ _mix(np.uint64(walk_id) + np.uint64(1)))


@njit(inline="always")
def _binary_contains(arr, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def walk_corpus(
    indptr,
    indices,
    labels,
    label_counts,
    strategy,
    p_bias,
    inv_return,
    inv_inout,
    walks_per_node,
    walk_length,
    seed,
    out,
):
    """Fill ``out`` (t*n x l int32) with walks, row order (node, walk index)."""
    n = indptr.shape[0] - 1
    n_classes = label_counts.shape[1]
    max_deg = 0
    for i in range(n):
        deg = indptr[i + 1] - indptr[i]
        if deg > max_deg:
            max_deg = deg
    wbuf = np.empty(max_deg, dtype=np.float64)

    for v in range(n):
        lv = labels[v]
        for k in range(walks_per_node):
            row = v * walks_per_node + k
            state = _walk_state(seed, row)
            c = v
            prev = -1
            for j in range(walk_length):
                out[row, j] = c
                if j == walk_length - 1:
                    break
                start = indptr[c]
                deg = indptr[c + 1] - start
                nxt = -1

                if strategy == STRAT_UNIFORM:
                    # burn a branch draw so the biased strategies at p=0
                    # replay uniform walks draw for draw
                    state, z = _next(state)
                    state, z = _next(state)
                    pick = int(_u01(z) * deg)
                    if pick >= deg:
                        pick = deg - 1
                    nxt = indices[start + pick]

                elif strategy == STRAT_NODE2VEC:
                    if prev < 0:
                        state, z = _next(state)
                        pick = int(_u01(z) * deg)
                        if pick >= deg:
                            pick = deg - 1
                        nxt = indices[start + pick]
                    else:
                        plo = indptr[prev]
                        phi = indptr[prev + 1]
                        total = 0.0
                        for q in range(deg):
                            x = indices[start + q]
                            if x == prev:
                                w = inv_return
                            else:
                                pos = _binary_contains(indices, plo, phi, x)
                                if pos < phi and indices[pos] == x:
                                    w = 1.0
                                else:
                                    w = inv_inout
                            wbuf[q] = w
                            total += w
                        state, z = _next(state)
                        r = _u01(z) * total
                        acc = 0.0
                        nxt = indices[start + deg - 1]
                        for q in range(deg):
                            acc += wbuf[q]
                            if r < acc:
                                nxt = indices[start + q]
                                break

                elif strategy == STRAT_SCWALK:
                    state, z = _next(state)
                    biased = _u01(z) < p_bias
                    same = 0
                    if biased and lv >= 0 and n_classes > 0:
                        same = label_counts[c, lv]
                    state, z = _next(state)
                    u = _u01(z)
                    if biased and same > 0:
                        # uniform over the same-label subset of the neighborhood
                        pick = int(u * same)
                        if pick >= same:
                            pick = same - 1
                        seen = 0
                        for q in range(deg):
                            x = indices[start + q]
                            if labels[x] == lv:
                                if seen == pick:
                                    nxt = x
                                    break
                                seen += 1
                    else:
                        # unbiased branch, or empty same-label set: the
                        # different-label set is then the whole neighborhood
                        pick = int(u * deg)
                        if pick >= deg:
                            pick = deg - 1
                        nxt = indices[start + pick]

                else:  # STRAT_HUBWALKDIST
                    state, z = _next(state)
                    biased = _u01(z) < p_bias
                    total = 0.0
                    if biased and lv >= 0 and n_classes > 0:
                        for q in range(deg):
                            x = indices[start + q]
                            xdeg = indptr[x + 1] - indptr[x]
                            h = label_counts[x, lv] / xdeg
                            wbuf[q] = h
                            total += h
                    state, z = _next(state)
                    u = _u01(z)
                    if biased and total > 0.0:
                        r = u * total
                        acc = 0.0
                        nxt = indices[start + deg - 1]
                        for q in range(deg):
                            acc += wbuf[q]
                            if r < acc:
                                nxt = indices[start + q]
                                break
                    else:
                        pick = int(u * deg)
                        if pick >= deg:
                            pick = deg - 1
                        nxt = indices[start + pick]

                prev = c
                c = nxt
    return out


@njit(inline="always")
def _softplus(x):
    if x > 0.0:
        return x + np.log1p(np.exp(-x))
    return np.log1p(np.exp(x))


@njit(inline="always")
def _alias_draw(prob, alias, z):
    hi = np.float64(z >> np.uint64(32)) * _INV_2_32
    lo = np.float64(z & np.uint64(0xFFFFFFFF)) * _INV_2_32
    k = int(hi * prob.shape[0])
    if k >= prob.shape[0]:
        k = prob.shape[0] - 1
    if lo < prob[k]:
        return k
    return alias[k]


@njit(inline="always", fastmath=True)
def _sgns_walk(
    walks, w, win, k_neg, w_in, w_out, prob, alias, state,
    lr0, lr_span, base_pairs, inv_total_pairs, neu,
):
    """One skip-gram pass over walk ``w``; returns summed pair loss."""
    length = walks.shape[1]
    d = w_in.shape[1]
    loss = 0.0
    pair = base_pairs
    for i in range(length):
        center = walks[w, i]
        vi = w_in[center]
        lo = i - win
        if lo < 0:
            lo = 0
        hi = i + win
        if hi > length - 1:
            hi = length - 1
        for j in range(lo, hi + 1):
            if j == i:
                continue
            ctx = walks[w, j]
            lr = lr0 - lr_span * (pair * inv_total_pairs)
            pair += 1

            uo = w_out[ctx]
            dot = 0.0
            for q in range(d):
                dot += vi[q] * uo[q]
            s = 1.0 / (1.0 + np.exp(-dot))
            loss += _softplus(-dot)
            g = (s - 1.0) * lr
            for q in range(d):
                neu[q] = (s - 1.0) * uo[q]
                uo[q] -= g * vi[q]

            for m in range(k_neg):
                state, z = _next(state)
                neg = _alias_draw(prob, alias, z)
                if neg == ctx:
                    continue
                un = w_out[neg]
                dot = 0.0
                for q in range(d):
                    dot += vi[q] * un[q]
                s = 1.0 / (1.0 + np.exp(-dot))
                loss += _softplus(dot)
                g = s * lr
                for q in range(d):
                    neu[q] += s * un[q]
                    un[q] -= g * vi[q]

            for q in range(d):
                vi[q] -= lr * neu[q]
    return loss


@njit(inline="always")
def _pairs_per_walk(length, win):
    ppw = 0
    for i in range(length):
        lo = i - win
        if lo < 0:
            lo = 0
        hi = i + win
        if hi > length - 1:
            hi = length - 1
        ppw += hi - lo
    return ppw


@njit(cache=True, fastmath=True)
def sgns_epoch(
    walks, win, k_neg, epoch, n_epochs, lr0, lr1, prob, alias, w_in, w_out, seed
):
    """One deterministic single-threaded SGNS epoch; returns mean pair loss.

    The learning rate decays linearly across ALL epochs, driven by a pair
    counter computed from (epoch, walk, position), so per-epoch calls see
    the same schedule as one fused run would.
    """
    n_walks, length = walks.shape
    ppw = _pairs_per_walk(length, win)
    total_pairs = n_epochs * n_walks * ppw
    inv_total = 1.0 / total_pairs if total_pairs > 0 else 0.0
    lr_span = lr0 - lr1
    d = w_in.shape[1]
    neu = np.empty(d, dtype=w_in.dtype)

    loss_sum = 0.0
    for w in range(n_walks):
        state = _walk_state(seed, epoch * n_walks + w)
        base = (epoch * n_walks + w) * ppw
        loss_sum += _sgns_walk(
            walks, w, win, k_neg, w_in, w_out, prob, alias, state,
            lr0, lr_span, base, inv_total, neu,
        )
    return loss_sum / (n_walks * ppw) if ppw > 0 else 0.0


@njit(cache=True, parallel=True, fastmath=True)
def sgns_epoch_parallel(
    walks, win, k_neg, epoch, n_epochs, lr0, lr1, prob, alias, w_in, w_out, seed
):
    """Hogwild-style epoch: unsynchronized updates, non-deterministic."""
    n_walks, length = walks.shape
    ppw = _pairs_per_walk(length, win)
    total_pairs = n_epochs * n_walks * ppw
    inv_total = 1.0 / total_pairs if total_pairs > 0 else 0.0
    lr_span = lr0 - lr1
    d = w_in.shape[1]

    loss_sum = 0.0
    for w in prange(n_walks):
        neu = np.empty(d, dtype=w_in.dtype)
        state = _walk_state(seed, epoch * n_walks + w)
        base = (epoch * n_walks + w) * ppw
        loss_sum += _sgns_walk(
            walks, w, win, k_neg, w_in, w_out, prob, alias, state,
            lr0, lr_span, base, inv_total, neu,
        )
    return loss_sum / (n_walks * ppw) if ppw > 0 else 0.0


def build_alias(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias table for O(1) draws from a finite distribution."""
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if total <= 0:
        raise ValueError("alias table needs positive total weight")
    n = len(weights)
    prob = np.zeros(n, dtype=np.float64)
    alias = np.zeros(n, dtype=np.int64)
    scaled = weights * (n / total)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = scaled[l] - (1.0 - scaled[s])
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    for i in large:
        prob[i] = 1.0
    for i in small:
        prob[i] = 1.0
    return prob, alias


@njit(cache=True)
def svm_train(X, y, n_classes, epochs, reg, lr0, seed):
    """One-vs-rest hinge-loss SGD with L2 weight decay (bias unregularized).

    Visits samples in a freshly shuffled order each epoch; the step size
    follows eta_t = lr0 / (1 + lr0 * reg * t) over the global step counter.
    """
    m, d = X.shape
    W = np.zeros((n_classes, d), dtype=np.float64)
    b = np.zeros(n_classes, dtype=np.float64)
    order = np.arange(m)
    state = _mix(np.uint64(seed) + np.uint64(1))
    t = 0
    for _ in range(epochs):
        for i in range(m - 1, 0, -1):
            state, z = _next(state)
            j = int(_u01(z) * (i + 1))
            if j > i:
                j = i
            order[i], order[j] = order[j], order[i]
        for s in range(m):
            i = order[s]
            eta = lr0 / (1.0 + lr0 * reg * t)
            t += 1
            shrink = 1.0 - eta * reg
            for c in range(n_classes):
                yc = 1.0 if y[i] == c else -1.0
                dot = b[c]
                for q in range(d):
                    dot += W[c, q] * X[i, q]
                if yc * dot < 1.0:
                    for q in range(d):
                        W[c, q] = W[c, q] * shrink + eta * yc * X[i, q]
                    b[c] += eta * yc
                else:
                    for q in range(d):
                        W[c, q] = W[c, q] * shrink
    return W, b


# ---------------------------------------------------------------------------
# Decision tree kernels (Gini splits over a random feature subset per node)
# ---------------------------------------------------------------------------

_NO_FEATURE = -1


@njit(cache=True)
def tree_build(X, y, n_classes, max_depth, max_features, seed):
    """Grow one classification tree; returns flat node arrays.

    Nodes: ``feature[i] < 0`` marks a leaf predicting ``label[i]``; otherwise
    samples with ``x[feature] <= threshold`` descend to ``left[i]``.
    Splitting stops at purity, ``max_depth``, fewer than 2 samples, or when
    the sampled feature subset admits no separating threshold.
    """
    m, d = X.shape
    max_nodes = 2 * m + 1
    feature = np.full(max_nodes, _NO_FEATURE, dtype=np.int32)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int32)
    right = np.full(max_nodes, -1, dtype=np.int32)
    label = np.zeros(max_nodes, dtype=np.int32)

    idx = np.arange(m, dtype=np.int64)
    perm = np.arange(d, dtype=np.int64)
    vals = np.empty(m, dtype=np.float64)
    counts = np.zeros(n_classes, dtype=np.int64)
    left_counts = np.zeros(n_classes, dtype=np.int64)

    # stack rows: (start, end, depth, node_id)
    stack = np.empty((max_nodes, 4), dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = m
    stack[top, 2] = 0
    stack[top, 3] = 0
    top = 1
    n_nodes = 1
    state = _mix(np.uint64(seed) + np.uint64(1))

    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        node = stack[top, 3]
        size = end - start

        for c in range(n_classes):
            counts[c] = 0
        for i in range(start, end):
            counts[y[idx[i]]] += 1
        best_class = 0
        best_count = -1
        for c in range(n_classes):
            if counts[c] > best_count:
                best_count = counts[c]
                best_class = c
        label[node] = best_class

        if size < 2 or best_count == size or depth >= max_depth:
            continue

        # random feature subset via partial Fisher-Yates on a persistent perm
        for q in range(max_features):
            state, z = _next(state)
            j = q + int(_u01(z) * (d - q))
            if j > d - 1:
                j = d - 1
            perm[q], perm[j] = perm[j], perm[q]

        best_cost = np.inf
        best_feat = _NO_FEATURE
        best_thr = 0.0
        for q in range(max_features):
            f = perm[q]
            for i in range(size):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals[:size], kind="mergesort")
            for c in range(n_classes):
                left_counts[c] = 0
            left_sq = 0.0
            right_sq = 0.0
            for c in range(n_classes):
                right_sq += counts[c] * counts[c]
            for s in range(size - 1):
                c = y[idx[start + order[s]]]
                left_sq += 2.0 * left_counts[c] + 1.0
                right_sq -= 2.0 * (counts[c] - left_counts[c]) - 1.0
                left_counts[c] += 1
                a = vals[order[s]]
                b = vals[order[s + 1]]
                if a == b:
                    continue
                nl = s + 1.0
                nr = size - nl
                cost = (nl - left_sq / nl) + (nr - right_sq / nr)
                if cost < best_cost:
                    best_cost = cost
                    best_feat = f
                    thr = a + (b - a) * 0.5
                    if thr >= b:
                        thr = a
                    best_thr = thr

        if best_feat == _NO_FEATURE:
            continue

        # two-pointer partition of idx[start:end] on the chosen split
        lo = start
        hi = end - 1
        while lo <= hi:
            if X[idx[lo], best_feat] <= best_thr:
                lo += 1
            else:
                idx[lo], idx[hi] = idx[hi], idx[lo]
                hi -= 1
        mid = lo
        if mid == start or mid == end:
            continue

        feature[node] = best_feat
        threshold[node] = best_thr
        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        left[node] = left_id
        right[node] = right_id
        stack[top, 0] = start
        stack[top, 1] = mid
        stack[top, 2] = depth + 1
        stack[top, 3] = left_id
        top += 1
        stack[top, 0] = mid
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = right_id
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        label[:n_nodes].copy(),
    )


@njit(cache=True)
def tree_predict(feature, threshold, left, right, label, X, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = label[node]
    return out
