"""Slow, independent reference implementations used as test oracles.

Pure Python loops over plain lists; nothing here calls into weatdebias
except to read raw vectors out of an Embedding.
"""

import itertools
import math
import statistics


def _cos(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    return dot / (nu * nv)


def naive_h(vec, a_vecs, b_vecs):
    sa = 0.0
    for a in a_vecs:
        sa += _cos(vec, a)
    sb = 0.0
    for b in b_vecs:
        sb += _cos(vec, b)
    return sa / len(a_vecs) - sb / len(b_vecs)


def _vecs(e, words):
    return [list(map(float, e.vectors[e.index[w]])) for w in words]


def naive_weat(e, x, y, a, b):
    """(s, d) by double loops; population std."""
    av, bv = _vecs(e, a), _vecs(e, b)
    hx = [naive_h(v, av, bv) for v in _vecs(e, x)]
    hy = [naive_h(v, av, bv) for v in _vecs(e, y)]
    s = sum(hx) - sum(hy)
    sd = statistics.pstdev(hx + hy)
    d = (statistics.fmean(hx) - statistics.fmean(hy)) / sd
    return s, d


def exhaustive_p(e, x, y, a, b, tol=1e-12):
    """Fraction of equal-size re-partitions whose s is >= the observed s."""
    av, bv = _vecs(e, a), _vecs(e, b)
    words = list(x) + list(y)
    h = {w: naive_h(v, av, bv) for w, v in zip(words, _vecs(e, words))}
    total = sum(h.values())
    obs = 2 * sum(h[w] for w in x) - total
    hits = n = 0
    for xs in itertools.combinations(words, len(x)):
        s = 2 * sum(h[w] for w in xs) - total
        n += 1
        hits += s >= obs - tol * max(1.0, sum(abs(v) for v in h.values()))
    return hits / n, n


def average_ranks(values):
    """1-based ranks, ties get the mean of the positions they span."""
    ranks = []
    for v in values:
        below = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        ranks.append(below + (equal + 1) / 2)
    return ranks


def brute_force_analogy(e, questions):
    """3CosAdd by a full scan; ties to the earlier (more frequent) word."""
    unit = {}
    for w in e.words:
        v = list(map(float, e.vectors[e.index[w]]))
        n = math.sqrt(sum(c * c for c in v))
        unit[w] = [c / n for c in v]
    correct = used = 0
    for a, b, c, d in questions:
        if any(w not in e.index for w in (a, b, c, d)):
            continue
        target = [ub - ua + uc for ua, ub, uc in zip(unit[a], unit[b], unit[c])]
        tn = math.sqrt(sum(t * t for t in target))
        best, best_w = -math.inf, None
        for w in sorted(e.words, key=lambda w: e.rank[e.index[w]]):
            if w in (a, b, c):
                continue
            score = sum(p * q for p, q in zip(unit[w], target)) / tn
            if score > best:
                best, best_w = score, w
        used += 1
        correct += best_w == d
    return correct, used


def brute_force_neighbors(e, word, k, max_rank=None):
    q = list(map(float, e.vectors[e.index[word]]))
    scored = []
    for w in e.words:
        if w == word:
            continue
        r = int(e.rank[e.index[w]])
        if max_rank is not None and r >= max_rank:
            continue
        scored.append((-_cos(q, list(map(float, e.vectors[e.index[w]]))), r, w))
    scored.sort()
    return [w for _, _, w in scored[:k]]
