"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public wrappers dispatch on :func:`weatdebias._accel.use_numba`.  Both
paths take and return plain float64/int64 arrays so they can be compared
directly in tests and in ``benchmarks/bench_kernels.py``.
"""

import numpy as np

from ._accel import njit, use_numba

# ---------------------------------------------------------------------------
# permutation test: sums of h over the X' side of each partition
# ---------------------------------------------------------------------------


@njit(cache=True)
def _partition_sums_nb(h, members):
    n_rows, n_cols = members.shape
    out = np.empty(n_rows)
    for r in range(n_rows):
        acc = 0.0
        for j in range(n_cols):
            acc += h[members[r, j]]
        out[r] = acc
    return out


def _partition_sums_np(h, members):
    # left-to-right accumulation, same order as the compiled loop
    out = np.zeros(members.shape[0])
    for j in range(members.shape[1]):
        out += h[members[:, j]]
    return out


def partition_sums(h, members):
    """Sum of ``h`` over each row of index matrix ``members``."""
    h = np.ascontiguousarray(h, dtype=np.float64)
    members = np.ascontiguousarray(members, dtype=np.int64)
    if use_numba():
        return _partition_sums_nb(h, members)
    return _partition_sums_np(h, members)


# ---------------------------------------------------------------------------
# top-k selection over precomputed scores
# ---------------------------------------------------------------------------


@njit(cache=True)
def _topk_nb(scores, eligible, k):
    # insertion into a sorted buffer; ties keep the lower index first
    best_idx = np.full(k, -1, dtype=np.int64)
    best_val = np.full(k, -np.inf)
    filled = 0
    for i in range(scores.shape[0]):
        if not eligible[i]:
            continue
        s = scores[i]
        if filled == k and s <= best_val[k - 1]:
            continue
        pos = filled if filled < k else k - 1
        while pos > 0 and best_val[pos - 1] < s:
            if pos < k:
                best_val[pos] = best_val[pos - 1]
                best_idx[pos] = best_idx[pos - 1]
            pos -= 1
        best_val[pos] = s
        best_idx[pos] = i
        if filled < k:
            filled += 1
    return best_idx[:filled]


def _topk_np(scores, eligible, k):
    idx = np.flatnonzero(eligible)
    if idx.size == 0:
        return idx.astype(np.int64)
    # lexsort: last key is primary -> descending score, then ascending index
    order = np.lexsort((idx, -scores[idx]))
    return idx[order[:k]].astype(np.int64)


def topk(scores, eligible, k):
    """Indices of the ``k`` largest eligible scores, ties to the lower index."""
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    eligible = np.ascontiguousarray(eligible, dtype=np.bool_)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if use_numba():
        return _topk_nb(scores, eligible, int(k))
    return _topk_np(scores, eligible, int(k))


# ---------------------------------------------------------------------------
# angle guard: largest cosine from each query row to any reference row
# ---------------------------------------------------------------------------


@njit(cache=True)
def _max_cosine_nb(queries, refs, chunk=4096):
    # BLAS does the products block by block; the row max is a compiled loop
    nq = queries.shape[0]
    out = np.empty(nq)
    rt = np.ascontiguousarray(refs.T)
    for start in range(0, nq, chunk):
        block = queries[start:start + chunk] @ rt
        for i in range(block.shape[0]):
            best = -np.inf
            for r in range(block.shape[1]):
                if block[i, r] > best:
                    best = block[i, r]
            out[start + i] = best
    return out


def _max_cosine_np(queries, refs, chunk=65536):
    out = np.empty(queries.shape[0])
    for start in range(0, queries.shape[0], chunk):
        block = queries[start:start + chunk] @ refs.T
        out[start:start + chunk] = block.max(axis=1)
    return out


def max_cosine(queries, refs):
    """Row-wise max of ``queries @ refs.T``; both inputs must be unit rows."""
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    refs = np.ascontiguousarray(refs, dtype=np.float64)
    if refs.shape[0] == 0:
        return np.full(queries.shape[0], -np.inf)
    if use_numba():
        return _max_cosine_nb(queries, refs)
    return _max_cosine_np(queries, refs)


# ---------------------------------------------------------------------------
# SoftWEAT candidate scoring: effect sizes after shifting some rows
# ---------------------------------------------------------------------------
#
# Word sets are passed as padded index matrices into ``rows`` with a length
# vector, e.g. xi[t, :xl[t]] are the X rows of test t.


@njit(cache=True)
def _effect_sizes_nb(rows, moved, shifts, xi, xl, yi, yl, ai, al, bi, bl):
    n_cand = shifts.shape[0]
    n_rows, dim = rows.shape
    n_tests = xi.shape[0]
    out = np.empty((n_cand, n_tests))
    unit = np.empty((n_rows, dim))
    for c in range(n_cand):
        for r in range(n_rows):
            sq = 0.0
            for j in range(dim):
                v = rows[r, j]
                if moved[r]:
                    v += shifts[c, j]
                unit[r, j] = v
                sq += v * v
            nrm = np.sqrt(sq)
            for j in range(dim):
                unit[r, j] /= nrm
        for t in range(n_tests):
            nx = xl[t]
            ny = yl[t]
            hs = np.empty(nx + ny)
            for k in range(nx + ny):
                w = xi[t, k] if k < nx else yi[t, k - nx]
                sa = 0.0
                for q in range(al[t]):
                    a = ai[t, q]
                    acc = 0.0
                    for j in range(dim):
                        acc += unit[w, j] * unit[a, j]
                    sa += acc
                sb = 0.0
                for q in range(bl[t]):
                    b = bi[t, q]
                    acc = 0.0
                    for j in range(dim):
                        acc += unit[w, j] * unit[b, j]
                    sb += acc
                hs[k] = sa / al[t] - sb / bl[t]
            mx = 0.0
            for k in range(nx):
                mx += hs[k]
            my = 0.0
            for k in range(nx, nx + ny):
                my += hs[k]
            mall = (mx + my) / (nx + ny)
            var = 0.0
            for k in range(nx + ny):
                var += (hs[k] - mall) ** 2
            sd = np.sqrt(var / (nx + ny))
            if sd <= 1e-12:
                out[c, t] = np.nan
            else:
                out[c, t] = (mx / nx - my / ny) / sd
    return out


def _effect_sizes_np(rows, moved, shifts, xi, xl, yi, yl, ai, al, bi, bl):
    n_cand = shifts.shape[0]
    n_tests = xi.shape[0]
    out = np.empty((n_cand, n_tests))
    for c in range(n_cand):
        cur = rows + moved[:, None] * shifts[c][None, :]
        unit = cur / np.linalg.norm(cur, axis=1, keepdims=True)
        for t in range(n_tests):
            x = unit[xi[t, :xl[t]]]
            y = unit[yi[t, :yl[t]]]
            a = unit[ai[t, :al[t]]]
            b = unit[bi[t, :bl[t]]]
            xy = np.vstack([x, y])
            hs = (xy @ a.T).mean(axis=1) - (xy @ b.T).mean(axis=1)
            sd = hs.std()
            if sd <= 1e-12:
                out[c, t] = np.nan
            else:
                out[c, t] = (hs[:xl[t]].mean() - hs[xl[t]:].mean()) / sd
    return out


def shifted_effect_sizes(rows, moved, shifts, tests):
    """Effect size of each test after adding ``shifts[c]`` to the moved rows.

    Parameters
    ----------
    rows : (n, d) array
        Raw vectors of every word touched by ``tests``.
    moved : (n,) bool array
        Rows that receive the shift.
    shifts : (c, d) array
        One candidate translation per row.
    tests : tuple
        ``(xi, xl, yi, yl, ai, al, bi, bl)`` padded index matrices and lengths.

    Returns
    -------
    (c, t) array of effect sizes; NaN marks a degenerate (zero-spread) test.
    """
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    moved = np.ascontiguousarray(moved, dtype=np.bool_)
    shifts = np.ascontiguousarray(np.atleast_2d(shifts), dtype=np.float64)
    tests = tuple(np.ascontiguousarray(t, dtype=np.int64) for t in tests)
    if use_numba():
        return _effect_sizes_nb(rows, moved, shifts, *tests)
    return _effect_sizes_np(rows, moved, shifts, *tests)


def pad_index_sets(sets):
    """Pack a list of index lists into a padded (n, max_len) matrix + lengths."""
    lengths = np.array([len(s) for s in sets], dtype=np.int64)
    width = max(1, int(lengths.max()) if len(sets) else 1)
    mat = np.zeros((len(sets), width), dtype=np.int64)
    for i, s in enumerate(sets):
        mat[i, :len(s)] = s
    return mat, lengths
