"""Word Embedding Association Test: association, statistic, effect size,
permutation p-value, and per-class bias levels.

All sums over word sets go through :func:`math.fsum`, which is exactly
rounded and therefore independent of summation order.  That is what makes
the X<->Y and A<->B antisymmetries hold bit-for-bit.
"""

import itertools
import logging
import math
import warnings
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .vecspace import WordSet

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 10_000
STD_FLOOR = 1e-12


class WeatWarning(UserWarning):
    pass


class UnequalTargetsError(ValueError):
    pass


@dataclass
class WeatTest:
    x: WordSet
    y: WordSet
    a: WordSet
    b: WordSet
    class_name: str = ""

    @property
    def key(self):
        return (self.class_name, self.x.name, self.y.name, self.a.name, self.b.name)

    def swapped_targets(self):
        return WeatTest(self.y, self.x, self.a, self.b, self.class_name)

    def swapped_attributes(self):
        return WeatTest(self.x, self.y, self.b, self.a, self.class_name)


@dataclass
class WeatResult:
    s: float
    d: float | None
    p: float | None
    n_permutations: int = 0
    exact: bool = False

    @property
    def degenerate(self):
        """True when the effect size is undefined (zero spread of h)."""
        return self.d is None


@dataclass
class BiasReport:
    per_test: list
    per_class: dict
    skipped: list = field(default_factory=list)

    def mean_abs_d(self):
        ds = [abs(r.d) for _, r in self.per_test if r.d is not None]
        return math.fsum(ds) / len(ds) if ds else 0.0

    def mean_bias_level(self):
        vals = list(self.per_class.values())
        return math.fsum(vals) / len(vals) if vals else 0.0

    def to_dict(self):
        rows = []
        for t, r in self.per_test:
            rows.append(
                {
                    "class": t.class_name,
                    "x": t.x.name,
                    "y": t.y.name,
                    "a": t.a.name,
                    "b": t.b.name,
                    "s": r.s,
                    "d": r.d,
                    "p": r.p,
                    "exact": r.exact,
                    "n_permutations": r.n_permutations,
                }
            )
        return {
            "per_test": rows,
            "per_class": dict(self.per_class),
            "skipped": list(self.skipped),
        }

    def format_table(self):
        lines = [f"{'class':<12} {'X':<14} {'Y':<14} {'A':<14} {'B':<14} {'s':>9} {'d':>7} {'p':>8}"]
        for t, r in self.per_test:
            d = "  undef" if r.d is None else f"{r.d:7.3f}"
            p = "     -" if r.p is None else f"{r.p:8.4f}"
            mark = "" if r.exact else "~"
            lines.append(
                f"{t.class_name:<12} {t.x.name:<14} {t.y.name:<14} {t.a.name:<14} {t.b.name:<14} "
                f"{r.s:9.4f} {d} {p}{mark}"
            )
        lines.append("")
        lines.append("bias levels:")
        for c, delta in self.per_class.items():
            lines.append(f"  {c:<12} {delta:.3f}")
        for msg in self.skipped:
            lines.append(f"  skipped: {msg}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------


def _unit_rows(e, words):
    v = e.vectors[e.rows(words)]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _h_for_words(e, words, a, b):
    """h for each word; each value depends only on that word's vector."""
    au = _unit_rows(e, a.words)
    bu = _unit_rows(e, b.words)
    out = np.empty(len(words))
    for i, w in enumerate(words):
        v = e.vector(w)
        u = v / np.linalg.norm(v)
        out[i] = math.fsum(au @ u) / len(au) - math.fsum(bu @ u) / len(bu)
    return out


def association(e, w, a, b):
    """Mean cosine of ``w`` to ``a`` minus mean cosine to ``b``."""
    return float(_h_for_words(e, [w], a, b)[0])


def _target_h(e, t):
    hx = _h_for_words(e, t.x.words, t.a, t.b)
    hy = _h_for_words(e, t.y.words, t.a, t.b)
    return hx, hy


def statistic(e, t):
    hx, hy = _target_h(e, t)
    return math.fsum(hx) - math.fsum(hy)


def _effect_from_h(hx, hy):
    allh = np.concatenate([hx, hy])
    n = allh.size
    mu = math.fsum(allh) / n
    sd = math.sqrt(math.fsum((allh - mu) ** 2) / n)
    if sd <= STD_FLOOR:
        return None
    return (math.fsum(hx) / hx.size - math.fsum(hy) / hy.size) / sd


def effect_size(e, t):
    """Normalized mean-association difference (population std); None if degenerate."""
    if len(t.x) + len(t.y) < 2:
        raise ValueError("effect size needs at least two target words")
    hx, hy = _target_h(e, t)
    return _effect_from_h(hx, hy)


def _seed_for(seed, key):
    tag = zlib.crc32("\x1f".join(map(str, key)).encode("utf-8"))
    return np.random.SeedSequence([int(seed), tag])


def equalize_targets(t, seed=0, strict=False):
    """Down-sample the larger target set so |X| == |Y|.

    Raises :class:`UnequalTargetsError` in strict mode.
    """
    if len(t.x) == len(t.y):
        return t
    if strict:
        raise UnequalTargetsError(
            f"test {t.key}: |X|={len(t.x)} != |Y|={len(t.y)} (strict mode)"
        )
    n = min(len(t.x), len(t.y))
    rng = np.random.default_rng(_seed_for(seed, ("trim",) + t.key))
    warnings.warn(
        f"test {t.key}: trimming target sets to {n} words each", WeatWarning, stacklevel=2
    )

    def trim(ws):
        if len(ws) == n:
            return ws
        keep = np.sort(rng.choice(len(ws), size=n, replace=False))
        return WordSet(ws.name, [ws.words[i] for i in keep])

    return WeatTest(trim(t.x), trim(t.y), t.a, t.b, t.class_name)


def _p_from_h(hx, hy, n_samples, rng_seed):
    n = hx.size
    allh = np.concatenate([hx, hy])
    total = allh.size
    n_parts = math.comb(total, n)
    if n_parts <= n_samples:
        members = np.array(list(itertools.combinations(range(total), n)), dtype=np.int64)
        exact = True
    else:
        rng = np.random.default_rng(rng_seed)
        perm = rng.permuted(np.tile(np.arange(total), (n_samples - 1, 1)), axis=1)[:, :n]
        members = np.vstack([np.arange(n)[None, :], perm])
        exact = False
    sums = _kernels.partition_sums(allh, members)
    observed = _kernels.partition_sums(allh, np.arange(n)[None, :])[0]
    eps = 1e-12 * max(1.0, float(np.abs(allh).sum()))
    count = int(np.count_nonzero(sums >= observed - eps))
    return count / members.shape[0], members.shape[0], exact


def p_value(e, t, n_samples=DEFAULT_SAMPLES, seed=0, strict=False):
    """One-sided permutation p-value over equal-size re-partitions of X u Y.

    Returns ``(p, exact)``.  All partitions are enumerated when there are at
    most ``n_samples`` of them; otherwise ``n_samples`` partitions are drawn
    (the observed one always included).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    t = equalize_targets(t, seed, strict)
    hx, hy = _target_h(e, t)
    p, _, exact = _p_from_h(hx, hy, n_samples, _seed_for(seed, t.key))
    return p, exact


def run_test(e, t, n_samples=DEFAULT_SAMPLES, seed=0, strict=False, with_p=True):
    t = equalize_targets(t, seed, strict)
    hx, hy = _target_h(e, t)
    s = math.fsum(hx) - math.fsum(hy)
    d = _effect_from_h(hx, hy)
    if with_p:
        p, n_perm, exact = _p_from_h(hx, hy, n_samples, _seed_for(seed, t.key))
    else:
        p, n_perm, exact = None, 0, False
    return t, WeatResult(s=s, d=d, p=p, n_permutations=n_perm, exact=exact)


def run_tests(e, tests, n_samples=DEFAULT_SAMPLES, seed=0, strict=False, with_p=True,
              absolute=True, skipped=()):
    """Run every test and aggregate into a :class:`BiasReport`."""
    per_test = [run_test(e, t, n_samples, seed, strict, with_p) for t in tests]
    return BiasReport(per_test, bias_levels(per_test, absolute), list(skipped))


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def _levels_from_rows(rows, absolute):
    # rows: iterable of (class, x, y, d)
    grouped = {}
    for cls, x, y, d in rows:
        if d is None:
            warnings.warn(f"class {cls!r}: degenerate effect size for ({x}, {y}) excluded",
                          WeatWarning, stacklevel=3)
            grouped.setdefault(cls, {})
            continue
        pair = frozenset((x, y))
        grouped.setdefault(cls, {}).setdefault(pair, []).append(abs(d) if absolute else d)
    levels = {}
    for cls, pairs in grouped.items():
        if not pairs:
            warnings.warn(f"class {cls!r} has no valid tests", WeatWarning, stacklevel=3)
            continue
        means = [math.fsum(v) / len(v) for v in pairs.values()]
        levels[cls] = math.fsum(means) / len(means)
    return levels


def bias_levels(results, absolute=True):
    """Per-class bias level: mean over target pairs of the mean |d| per pair.

    Pairs are unordered, so (X, Y) and (Y, X) tests share a group.  With
    ``absolute=False`` signed effect sizes are averaged instead.
    """
    return _levels_from_rows(
        ((t.class_name, t.x.name, t.y.name, r.d) for t, r in results), absolute
    )


def bias_levels_from_dict(report, absolute=True):
    """Recompute per-class levels from a serialized report's ``per_test`` rows."""
    return _levels_from_rows(
        ((r["class"], r["x"], r["y"], r["d"]) for r in report["per_test"]), absolute
    )
