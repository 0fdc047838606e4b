"""Loop kernels compiled with numba.

Conventions shared with :mod:`numpy_impl`:

* ``var`` is an ``(L, 3)`` int array of variable indices, ``neg`` an
  ``(L, 3)`` uint8 array of negation flags. A literal is true under ``x`` iff
  ``x[var] ^ neg == 1``.
* Dense assignments are uint8 rows; packed states are integers whose bit
  ``v`` is the value of variable ``v``.
* ``hit`` is the index of the first satisfying state of a walk trace, or -1.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _first_violated(var, neg, x):
    for j in range(var.shape[0]):
        if x[var[j, 0]] ^ neg[j, 0]:
            continue
        if x[var[j, 1]] ^ neg[j, 1]:
            continue
        if x[var[j, 2]] ^ neg[j, 2]:
            continue
        return j
    return -1


@njit(cache=True)
def _first_violated_packed(var, neg, s):
    for j in range(var.shape[0]):
        if ((s >> var[j, 0]) & 1) ^ neg[j, 0]:
            continue
        if ((s >> var[j, 1]) & 1) ^ neg[j, 1]:
            continue
        if ((s >> var[j, 2]) & 1) ^ neg[j, 2]:
            continue
        return j
    return -1


@njit(cache=True)
def first_violated_batch(var, neg, X):
    out = np.empty(X.shape[0], dtype=np.int64)
    for b in range(X.shape[0]):
        out[b] = _first_violated(var, neg, X[b])
    return out


@njit(cache=True)
def count_models(var, neg, n, stop_after):
    total = 0
    for s in range(1 << n):
        if _first_violated_packed(var, neg, s) < 0:
            total += 1
            if stop_after > 0 and total >= stop_after:
                break
    return total


@njit(cache=True)
def walk_batch(var, neg, X0, W):
    B, n = X0.shape
    m = W.shape[1]
    X = X0.copy()
    hit = np.full(B, -1, dtype=np.int64)
    for b in range(B):
        x = X[b]
        for j in range(m + 1):
            k = _first_violated(var, neg, x)
            if k < 0:
                hit[b] = j
                break
            if j == m:
                break
            x[var[k, W[b, j]]] ^= 1
    return X, hit


@njit(cache=True)
def walk_batch_shared(var, neg, X0, w):
    """Like :func:`walk_batch` but every row uses the same tape ``w``."""
    B, n = X0.shape
    m = w.shape[0]
    X = X0.copy()
    hit = np.full(B, -1, dtype=np.int64)
    for b in range(B):
        x = X[b]
        for j in range(m + 1):
            k = _first_violated(var, neg, x)
            if k < 0:
                hit[b] = j
                break
            if j == m:
                break
            x[var[k, w[j]]] ^= 1
    return X, hit


@njit(cache=True)
def transition_table(var, neg, n):
    size = 1 << n
    nxt = np.empty((size, 3), dtype=np.int64)
    for s in range(size):
        k = _first_violated_packed(var, neg, s)
        if k < 0:
            nxt[s, 0] = s
            nxt[s, 1] = s
            nxt[s, 2] = s
        else:
            nxt[s, 0] = s ^ (1 << var[k, 0])
            nxt[s, 1] = s ^ (1 << var[k, 1])
            nxt[s, 2] = s ^ (1 << var[k, 2])
    return nxt


@njit(cache=True)
def table_walk_shared(nxt, S0, w):
    S = S0.copy()
    for i in range(S.shape[0]):
        s = S[i]
        for j in range(w.shape[0]):
            s = nxt[s, w[j]]
        S[i] = s
    return S


@njit(cache=True)
def suffix_counts(nxt, w, free):
    """``g[d, s]``: tape completions from step ``d`` in state ``s`` that end satisfied.

    Positions with ``free[d]`` range over all three symbols, the others are
    pinned to ``w[d]``. Satisfying states map to themselves in ``nxt``.
    """
    m = w.shape[0]
    size = nxt.shape[0]
    g = np.zeros((m + 1, size), dtype=np.int64)
    for s in range(size):
        if nxt[s, 0] == s:
            g[m, s] = 1
    for d in range(m - 1, -1, -1):
        nxt_row = g[d + 1]
        row = g[d]
        if free[d]:
            for s in range(size):
                row[s] = nxt_row[nxt[s, 0]] + nxt_row[nxt[s, 1]] + nxt_row[nxt[s, 2]]
        else:
            c = w[d]
            for s in range(size):
                row[s] = nxt_row[nxt[s, c]]
    return g


@njit(cache=True)
def coupled_batch(var, neg, r, xstar, X0, W):
    """Run walks alongside the coupled absorbing distance process.

    Returns per-run (number of steps with d_H > d_tilde, final d_tilde,
    final d_H).
    """
    B, n = X0.shape
    m = W.shape[1]
    viol = np.zeros(B, dtype=np.int64)
    dt_final = np.empty(B, dtype=np.int64)
    dh_final = np.empty(B, dtype=np.int64)
    for b in range(B):
        x = X0[b].copy()
        dh = 0
        for i in range(n):
            if x[i] != xstar[i]:
                dh += 1
        dt = dh
        for j in range(m):
            k = _first_violated(var, neg, x)
            if dh == 0 or k < 0:
                f = 0
            else:
                f = r[k]
            c = W[b, j]
            if dt != 0:
                if c == f:
                    dt -= 1
                else:
                    dt += 1
            if k >= 0:
                v = var[k, c]
                x[v] ^= 1
                if x[v] == xstar[v]:
                    dh -= 1
                else:
                    dh += 1
            if dh > dt:
                viol[b] += 1
        dt_final[b] = dt
        dh_final[b] = dh
    return viol, dt_final, dh_final
