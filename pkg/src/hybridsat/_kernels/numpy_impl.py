"""Vectorised numpy versions of the loop kernels.

Same signatures and results as :mod:`numba_impl`; batches are processed
row-parallel with fancy indexing instead of per-row loops.
"""

import numpy as np

_CHUNK = 1 << 16


def _violated_matrix(var, neg, X):
    # (B, L) True where clause j is violated by row b
    lit_true = X[:, var] ^ neg[None, :, :]
    return ~lit_true.any(axis=2)


def _first_from_violated(viol):
    first = viol.argmax(axis=1).astype(np.int64)
    first[~viol.any(axis=1)] = -1
    return first


def first_violated_batch(var, neg, X):
    X = np.asarray(X, dtype=np.uint8)
    if var.shape[0] == 0:
        return np.full(X.shape[0], -1, dtype=np.int64)
    return _first_from_violated(_violated_matrix(var, neg, X.astype(bool)))


def _packed_bits(states, n):
    shifts = np.arange(n, dtype=np.int64)
    return ((states[:, None] >> shifts[None, :]) & 1).astype(bool)


def _first_violated_packed(var, neg, states, n):
    if var.shape[0] == 0:
        return np.full(states.shape[0], -1, dtype=np.int64)
    X = _packed_bits(states, n)
    return _first_from_violated(_violated_matrix(var, neg.astype(bool), X))


def count_models(var, neg, n, stop_after):
    total = 0
    for start in range(0, 1 << n, _CHUNK):
        states = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.int64)
        sat = _first_violated_packed(var, neg, states, n) < 0
        if stop_after > 0 and total + int(sat.sum()) >= stop_after:
            return stop_after
        total += int(sat.sum())
    return total


def _walk(var, neg, X0, tape_at):
    X = np.array(X0, dtype=np.uint8, copy=True)
    B = X.shape[0]
    m = tape_at.m
    hit = np.full(B, -1, dtype=np.int64)
    rows = np.arange(B)
    negb = neg.astype(bool)
    for j in range(m + 1):
        active = rows[hit < 0]
        if active.size == 0:
            break
        if var.shape[0] == 0:
            hit[active] = j
            break
        first = _first_from_violated(_violated_matrix(var, negb, X[active].astype(bool)))
        done = first < 0
        hit[active[done]] = j
        if j == m:
            break
        moving = active[~done]
        k = first[~done]
        v = var[k, tape_at(moving, j)]
        X[moving, v] ^= 1
    return X, hit


class _Tape:
    def __init__(self, W, shared):
        self.W = W
        self.shared = shared
        self.m = W.shape[0] if shared else W.shape[1]

    def __call__(self, rows, j):
        if self.shared:
            return np.full(rows.shape[0], self.W[j], dtype=np.int64)
        return self.W[rows, j].astype(np.int64)


def walk_batch(var, neg, X0, W):
    return _walk(var, neg, X0, _Tape(np.asarray(W), shared=False))


def walk_batch_shared(var, neg, X0, w):
    return _walk(var, neg, X0, _Tape(np.asarray(w), shared=True))


def transition_table(var, neg, n):
    size = 1 << n
    nxt = np.empty((size, 3), dtype=np.int64)
    for start in range(0, size, _CHUNK):
        states = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        first = _first_violated_packed(var, neg, states, n)
        block = np.repeat(states[:, None], 3, axis=1)
        unsat = first >= 0
        if unsat.any():
            flips = np.left_shift(1, var[first[unsat]].astype(np.int64))
            block[unsat] ^= flips
        nxt[start:start + states.shape[0]] = block
    return nxt


def table_walk_shared(nxt, S0, w):
    S = np.array(S0, dtype=np.int64, copy=True)
    for c in np.asarray(w):
        S = nxt[S, int(c)]
    return S


def suffix_counts(nxt, w, free):
    m = len(w)
    size = nxt.shape[0]
    g = np.zeros((m + 1, size), dtype=np.int64)
    g[m] = nxt[:, 0] == np.arange(size)
    for d in range(m - 1, -1, -1):
        if free[d]:
            g[d] = g[d + 1][nxt].sum(axis=1)
        else:
            g[d] = g[d + 1][nxt[:, int(w[d])]]
    return g


def coupled_batch(var, neg, r, xstar, X0, W):
    X = np.array(X0, dtype=np.uint8, copy=True)
    B, n = X.shape
    m = W.shape[1]
    xstar = np.asarray(xstar, dtype=np.uint8)
    rows = np.arange(B)
    dh = (X != xstar[None, :]).sum(axis=1).astype(np.int64)
    dt = dh.copy()
    viol = np.zeros(B, dtype=np.int64)
    for j in range(m):
        first = first_violated_batch(var, neg, X)
        unsat = first >= 0
        f = np.zeros(B, dtype=np.int64)
        use_r = unsat & (dh != 0)
        f[use_r] = r[first[use_r]]
        c = W[:, j].astype(np.int64)
        live = dt != 0
        dt = np.where(live, np.where(c == f, dt - 1, dt + 1), dt)
        moving = rows[unsat]
        v = var[first[unsat], c[unsat]]
        X[moving, v] ^= 1
        now_equal = X[moving, v] == xstar[v]
        dh[moving] += np.where(now_equal, -1, 1)
        viol += dh > dt
    return viol, dt, dh
