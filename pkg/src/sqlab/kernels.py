"""Numerical kernels with a numba fast path and a pure-numpy/python fallback.

The backend is selected once, at import time, by the environment variable
``SQLAB_BACKEND``:

* ``numba`` -- require the jitted kernels (raises if numba is unavailable),
* ``numpy`` -- force the fallback implementations,
* unset/``auto`` -- use numba when importable, fallback otherwise.

Both implementations of every kernel are importable directly (``gram_numpy``,
``gram_numba``, ...) so tests and the benchmark can compare them.
"""

import os

import numpy as np

_REQUESTED = os.environ.get("SQLAB_BACKEND", "auto").lower()
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(f"SQLAB_BACKEND must be 'numba' or 'numpy', got {_REQUESTED!r}")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    if _REQUESTED == "numba":
        raise

BACKEND = "numpy" if (_REQUESTED == "numpy" or not HAS_NUMBA) else "numba"


# ---------------------------------------------------------------------------
# pure-numpy / pure-python implementations


def weighted_dot_numpy(a, b, w):
    """Sum of w*a*b -- the distribution-weighted inner product."""
    return float(np.dot(a * w, b))


def weighted_many_numpy(mat, phi, w):
    """Weighted inner product of each row of `mat` with `phi`."""
    return mat @ (phi * w)


def gram_numpy(mat, w):
    """All pairwise weighted inner products of the rows of `mat`."""
    return (mat * w) @ mat.T


def max_clique_python(adj):
    """Maximum clique of an undirected graph via branch and bound.

    `adj` is a boolean adjacency matrix (symmetric, hollow), at most 64
    vertices.  Returns (size, sorted vertex tuple).
    """
    n = adj.shape[0]
    if n == 0:
        return 0, ()
    if n > 64:
        raise ValueError("max_clique supports at most 64 vertices")
    masks = [0] * n
    for i in range(n):
        m = 0
        for j in range(n):
            if i != j and adj[i, j]:
                m |= 1 << j
        masks[i] = m
    best_size = 0
    best_mask = 0
    full = (1 << n) - 1
    # stack of (clique_mask, clique_size, candidate_mask); binary branching on
    # the lowest candidate vertex
    stack = [(0, 0, full)]
    while stack:
        r_mask, r_size, p_mask = stack.pop()
        if r_size + p_mask.bit_count() <= best_size:
            continue
        if p_mask == 0:
            best_size, best_mask = r_size, r_mask
            continue
        low = p_mask & -p_mask
        v = low.bit_length() - 1
        rest = p_mask ^ low
        stack.append((r_mask, r_size, rest))
        stack.append((r_mask | low, r_size + 1, rest & masks[v]))
    verts = tuple(i for i in range(n) if best_mask >> i & 1)
    return best_size, verts


# ---------------------------------------------------------------------------
# numba implementations

if HAS_NUMBA:

    @njit(cache=True)
    def _weighted_dot_jit(a, b, w):
        acc = 0.0
        for i in range(a.shape[0]):
            acc += w[i] * a[i] * b[i]
        return acc

    @njit(cache=True)
    def _weighted_many_jit(mat, phi, w):
        k, m = mat.shape
        out = np.empty(k)
        for j in range(k):
            acc = 0.0
            for i in range(m):
                acc += mat[j, i] * phi[i] * w[i]
            out[j] = acc
        return out

    @njit(cache=True)
    def _gram_jit(mat, w):
        k, m = mat.shape
        out = np.empty((k, k))
        for a in range(k):
            for b in range(a, k):
                acc = 0.0
                for i in range(m):
                    acc += w[i] * mat[a, i] * mat[b, i]
                out[a, b] = acc
                out[b, a] = acc
        return out

    @njit(cache=True)
    def _popcount(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + (
            (x >> np.uint64(2)) & np.uint64(0x3333333333333333)
        )
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @njit(cache=True)
    def _max_clique_jit(masks, n):
        best_size = np.uint64(0)
        best_mask = np.uint64(0)
        cap = 4 * n + 8
        st_r = np.zeros(cap, np.uint64)
        st_s = np.zeros(cap, np.uint64)
        st_p = np.zeros(cap, np.uint64)
        if n >= 64:
            full = ~np.uint64(0)
        else:
            full = (np.uint64(1) << np.uint64(n)) - np.uint64(1)
        st_p[0] = full
        top = 1
        while top > 0:
            top -= 1
            r_mask = st_r[top]
            r_size = st_s[top]
            p_mask = st_p[top]
            if r_size + _popcount(p_mask) <= best_size:
                continue
            if p_mask == np.uint64(0):
                best_size = r_size
                best_mask = r_mask
                continue
            low = p_mask & (~p_mask + np.uint64(1))
            v = _popcount(low - np.uint64(1))
            rest = p_mask ^ low
            st_r[top] = r_mask
            st_s[top] = r_size
            st_p[top] = rest
            top += 1
            st_r[top] = r_mask | low
            st_s[top] = r_size + np.uint64(1)
            st_p[top] = rest & masks[v]
            top += 1
        return best_size, best_mask

    def weighted_dot_numba(a, b, w):
        return float(_weighted_dot_jit(a, b, w))

    def weighted_many_numba(mat, phi, w):
        return _weighted_many_jit(np.ascontiguousarray(mat), phi, w)

    def gram_numba(mat, w):
        return _gram_jit(np.ascontiguousarray(mat), w)

    def max_clique_numba(adj):
        n = adj.shape[0]
        if n == 0:
            return 0, ()
        if n > 64:
            raise ValueError("max_clique supports at most 64 vertices")
        masks = np.zeros(n, np.uint64)
        for i in range(n):
            m = np.uint64(0)
            for j in range(n):
                if i != j and adj[i, j]:
                    m |= np.uint64(1) << np.uint64(j)
            masks[i] = m
        size, mask = _max_clique_jit(masks, n)
        mask = int(mask)
        verts = tuple(i for i in range(n) if mask >> i & 1)
        return int(size), verts


if BACKEND == "numba":
    weighted_dot = weighted_dot_numba
    weighted_many = weighted_many_numba
    gram = gram_numba
    max_clique = max_clique_numba
else:
    weighted_dot = weighted_dot_numpy
    weighted_many = weighted_many_numpy
    gram = gram_numpy
    max_clique = max_clique_python
