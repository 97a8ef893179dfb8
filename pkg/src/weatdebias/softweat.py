"""SoftWEAT: translate each biased subclass (and its neighbourhood) part of
the way toward a vector in the nullspace of its attribute directions."""

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .numkit import DegenerateInputError, nullspace_basis, top_principal_component
from .vecspace import WordSet, nearest_neighbors, normalize_all
from .weat import DEFAULT_SAMPLES, run_tests

logger = logging.getLogger(__name__)

# translations are snapped to this grid; adding a grid-aligned shift to
# grid-aligned coordinates is exact in float64, so differences survive bit-for-bit
SHIFT_GRID = 2.0 ** -45


class SoftWeatError(ValueError):
    pass


class NothingSelectedWarning(UserWarning):
    pass


@dataclass
class SoftWeatParams:
    lam: float = 1.0
    neighbors_k: int = 20
    max_rank: int | None = 50_000
    selection_threshold: float = 0.6
    normalize_output: bool = True
    manual_pairs: dict | None = None
    protect_attributes: bool = True
    sequential: bool = True
    mean_over_extended: bool = False
    nullspace_tol: float = 1e-8
    n_samples: int = DEFAULT_SAMPLES
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if self.neighbors_k < 0:
            raise ValueError("neighbors_k must be >= 0")


@dataclass
class TranslationPlan:
    subclass: str
    words: list
    attribute_sets: list
    matrix: np.ndarray
    null_vector: np.ndarray
    mean: np.ndarray
    lam: float
    score: float = float("nan")

    @property
    def psi(self):
        return translation_vector(self.null_vector, self.mean, self.lam)

    def with_lambda(self, lam):
        return TranslationPlan(self.subclass, self.words, self.attribute_sets, self.matrix,
                               self.null_vector, self.mean, lam, self.score)

    def to_dict(self):
        return {
            "subclass": self.subclass,
            "attribute_sets": list(self.attribute_sets),
            "lambda": self.lam,
            "null_vector": self.null_vector.tolist(),
            "psi": self.psi.tolist(),
            "mean_abs_d": None if math.isnan(self.score) else self.score,
            "words": list(self.words),
        }


@dataclass
class SoftWeatResult:
    embedding: object
    before: object
    after: object
    plans: list = field(default_factory=list)
    selection: dict = field(default_factory=dict)


def translation_vector(n, m, lam):
    psi = lam * (np.asarray(n, dtype=np.float64) - np.asarray(m, dtype=np.float64))
    return np.round(psi / SHIFT_GRID) * SHIFT_GRID


def translation_matrix(psi):
    """Homogeneous (d+1)x(d+1) matrix that translates by ``psi``."""
    d = psi.shape[0]
    mat = np.eye(d + 1)
    mat[:d, d] = psi
    return mat


def select_attribute_sets(report, threshold=0.6):
    """Attribute sets each subclass should be moved away from.

    Tests are grouped by (X, Y, A, B); a group whose mean |d| exceeds the
    threshold sends A to X and B to Y when its mean d is positive, and the
    other way round when negative.
    """
    groups = {}
    for t, r in report.per_test:
        if r.d is None:
            continue
        groups.setdefault((t.x.name, t.y.name, t.a.name, t.b.name), []).append(r.d)
    out = {}
    for (x, y, a, b), ds in groups.items():
        mean_abs = math.fsum(abs(v) for v in ds) / len(ds)
        if mean_abs <= threshold:
            continue
        if math.fsum(ds) > 0:
            pairs = ((x, a), (y, b))
        else:
            pairs = ((x, b), (y, a))
        for sub, attr in pairs:
            lst = out.setdefault(sub, [])
            if attr not in lst:
                lst.append(attr)
    return out


def expand_target_set(e, s, k, max_rank=None, exclude=()):
    """``s`` plus each word's ``k`` nearest neighbours of rank < ``max_rank``.

    Returns ``(WordSet, scores)`` where ``scores[w]`` is the best cosine of
    an added neighbour to any word of ``s`` (own words score +inf).
    """
    scores = {w: math.inf for w in s.words}
    if k > 0:
        exclude = set(exclude) | set(s.words)
        for w in s.words:
            for nb, c in nearest_neighbors(e, w, k, max_rank, exclude=exclude):
                if c > scores.get(nb, -math.inf):
                    scores[nb] = c
    return WordSet(s.name, list(scores)), scores


def _assign_overlaps(expanded):
    """Keep each shared neighbour only in the subclass it is closest to."""
    owner = {}
    for name, (_, scores) in expanded.items():
        for w, sc in scores.items():
            if w not in owner or sc > owner[w][1]:
                owner[w] = (name, sc)
    out = {}
    for name, (ws, _) in expanded.items():
        out[name] = WordSet(ws.name, [w for w in ws.words if owner[w][0] == name])
    return out


def _pack_tests(e, tests, extra_words=()):
    """Index the words of ``tests`` into a compact row table for the kernel."""
    table = {}
    for w in extra_words:
        table.setdefault(w, len(table))
    sets = {k: [] for k in "xyab"}
    for t in tests:
        for k in "xyab":
            ws = getattr(t, k)
            sets[k].append([table.setdefault(w, len(table)) for w in ws.words])
    words = list(table)
    rows = e.vectors[e.rows(words)] if words else np.empty((0, e.dim))
    packed = []
    for k in "xyab":
        packed.extend(_kernels.pad_index_sets(sets[k]))
    return words, rows, tuple(packed)


def build_plan(e, subclass, extended, attribute_sets, tests, lam, params=None):
    """Pick the null vector that minimises mean |d| over ``tests``.

    Parameters
    ----------
    subclass : WordSet
        The original subclass words (S_c).
    extended : WordSet
        S_c plus its assigned neighbours; these are the words that move.
    attribute_sets : list of WordSet
        Sets whose first principal components form the rows of the matrix.
    tests : list of WeatTest
        Tests used for scoring candidates (normally those touching S_c).
    """
    params = params or SoftWeatParams(lam=lam)
    if not attribute_sets:
        raise SoftWeatError(f"subclass {subclass.name!r}: no attribute sets selected")
    if len(attribute_sets) >= e.dim:
        raise SoftWeatError(
            f"subclass {subclass.name!r}: {len(attribute_sets)} attribute sets leave no "
            f"nullspace in {e.dim} dimensions; select fewer sets"
        )
    pcs = []
    for a in attribute_sets:
        try:
            pcs.append(top_principal_component(e.vectors[e.rows(a.words)]))
        except DegenerateInputError as exc:
            raise SoftWeatError(f"attribute set {a.name!r}: {exc}") from None
    mat = np.vstack(pcs)
    basis = nullspace_basis(mat, params.nullspace_tol)
    candidates = np.vstack([basis, -basis])

    mean_src = extended.words if params.mean_over_extended else subclass.words
    m = e.vectors[e.rows(mean_src)].mean(axis=0)

    scores = np.zeros(len(candidates))
    if tests and lam > 0:
        moved_words = set(extended.words)
        words, rows, packed = _pack_tests(e, tests)
        moved = np.array([w in moved_words for w in words], dtype=bool)
        shifts = np.vstack([translation_vector(n, m, lam) for n in candidates])
        ds = _kernels.shifted_effect_sizes(rows, moved, shifts, packed)
        # a degenerate test has no measurable spread; count it as unbiased
        scores = np.nanmean(np.where(np.isnan(ds), 0.0, np.abs(ds)), axis=1)
    best = int(np.argmin(scores))
    return TranslationPlan(
        subclass=subclass.name,
        words=list(extended.words),
        attribute_sets=[a.name for a in attribute_sets],
        matrix=mat,
        null_vector=candidates[best],
        mean=m,
        lam=lam,
        score=float(scores[best]) if tests and lam > 0 else float("nan"),
    )


def apply_plan(e, plan):
    """Translate the plan's words by psi via the homogeneous matrix product.

    Rows outside the plan are untouched; a zero shift returns ``e`` itself.
    """
    psi = plan.psi
    if not np.any(psi):
        return e
    idx = e.rows(plan.words)
    homog = np.vstack([e.vectors[idx].T, np.ones((1, idx.size))])
    moved = (translation_matrix(psi) @ homog)[:-1].T
    vecs = e.vectors.copy()
    vecs[idx] = moved
    return e.with_vectors(vecs)


def _tests_touching(tests, name):
    return [t for t in tests if name in (t.x.name, t.y.name)]


def softweat(e, resolved, params=None):
    """Full SoftWEAT run on a resolved lexicon; returns :class:`SoftWeatResult`."""
    params = params or SoftWeatParams()
    tests = resolved.tests
    before = run_tests(e, tests, params.n_samples, params.seed, skipped=resolved.skipped)

    if params.manual_pairs:
        selection = {k: list(v) for k, v in params.manual_pairs.items()}
    else:
        selection = select_attribute_sets(before, params.selection_threshold)
    subs = resolved.subclass_sets()
    unknown = [s for s in selection if s not in subs]
    unknown += [a for v in selection.values() for a in v if resolved.attribute_sets.get(a) is None]
    if unknown:
        raise SoftWeatError(f"unknown or unusable set(s) in selection: {sorted(set(unknown))}")

    if not selection:
        warnings.warn("no test exceeds the selection threshold; embedding left unchanged",
                      NothingSelectedWarning, stacklevel=2)
        return SoftWeatResult(e, before, before, [], {})

    protected = set()
    for s in subs.values():
        protected.update(s.words)
    if params.protect_attributes:
        for a in resolved.attribute_sets.values():
            if a is not None:
                protected.update(a.words)

    expanded = {}
    for name in selection:
        others = protected - set(subs[name].words)
        expanded[name] = expand_target_set(e, subs[name], params.neighbors_k, params.max_rank, others)
    extended = _assign_overlaps(expanded)

    plans = []
    cur = e
    for name, attrs in selection.items():
        base = cur if params.sequential else e
        plan = build_plan(base, subs[name], extended[name],
                          [resolved.attribute_sets[a] for a in attrs],
                          _tests_touching(tests, name), params.lam, params)
        plans.append(plan)
        logger.info("subclass %s: %d words, mean |d| after candidate %.4f",
                    name, len(plan.words), plan.score)
        cur = apply_plan(cur, plan)

    out = normalize_all(cur) if params.normalize_output else cur
    after = run_tests(out, tests, params.n_samples, params.seed, skipped=resolved.skipped)
    return SoftWeatResult(out, before, after, plans, selection)
