"""HardWEAT: joint neutralization against a bias-weighted centroid followed
by equidistant re-embedding of every class's definitional words."""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .numkit import (
    DegenerateInputError,
    circle_points,
    orthonormal_pair_perpendicular_to,
    reject_rows,
    top_principal_component,
)
from .vecspace import normalize_all
from .weat import DEFAULT_SAMPLES, run_tests

logger = logging.getLogger(__name__)

PLANES = ("center-only", "center-and-attributes")
SCOPES = ("all_vocab", "listed")


class HardWeatError(ValueError):
    pass


class GuardWarning(UserWarning):
    """The angle guard was not satisfied within the iteration budget."""


@dataclass
class HardWeatParams:
    angle_threshold: float = 45.0
    max_iterations: int = 50
    radius_ratio_min: float = 10.0
    seed: int = 0
    neutral_scope: str = "all_vocab"
    plane: str = "center-and-attributes"
    align_word_circles: bool = True
    n_samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if not 0 < self.angle_threshold < 90:
            raise ValueError("angle_threshold must be in (0, 90) degrees")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.radius_ratio_min <= 1:
            raise ValueError("radius_ratio_min must exceed 1")
        if self.neutral_scope not in SCOPES:
            raise ValueError(f"neutral_scope must be one of {SCOPES}")
        if self.plane not in PLANES:
            raise ValueError(f"plane must be one of {PLANES}")


@dataclass
class HardWeatResult:
    embedding: object
    before: object
    after: object
    iterations: int
    guard_passed: bool
    centroid: np.ndarray
    def_vectors: dict
    bias_levels: dict
    neutral_words: list


def class_definitional_vector(e, c):
    """Top principal component of the class's subclass-mean-shifted words."""
    shifted = []
    for s in c.subclasses:
        v = e.vectors[e.rows(s.words)]
        shifted.append(v - v.mean(axis=0))
    try:
        return top_principal_component(np.vstack(shifted))
    except DegenerateInputError as exc:
        raise DegenerateInputError(f"class {c.name!r}: {exc}") from None


def centroid(def_vectors, levels):
    """Bias-level-weighted mean of class definitional vectors."""
    names = [c for c in def_vectors if levels.get(c, 0.0) > 0]
    total = sum(levels[c] for c in names)
    if not names or total <= 0:
        raise HardWeatError("all bias levels are zero; nothing to debias")
    omega = sum((levels[c] / total) * np.asarray(def_vectors[c], dtype=np.float64) for c in names)
    if np.linalg.norm(omega) <= 1e-10:
        raise HardWeatError(
            "class definitional vectors cancel out (centroid ~ 0); supply a centroid manually"
        )
    return omega


def neutralize(e, neutral, omega, seed=0):
    """Project every neutral word onto the hyperplane orthogonal to ``omega``.

    Words parallel to ``omega`` would vanish; they are reported and replaced
    by a tiny random vector orthogonal to ``omega``.
    """
    omega = np.asarray(omega, dtype=np.float64)
    if not np.any(omega):
        raise HardWeatError("centroid must be nonzero")
    idx = e.rows(list(neutral))
    vecs = e.vectors.copy()
    rows = reject_rows(vecs[idx], omega)
    norms = np.linalg.norm(rows, axis=1)
    orig = np.linalg.norm(vecs[idx], axis=1)
    collapsed = np.flatnonzero(norms <= 1e-10 * orig)
    if collapsed.size:
        rng = np.random.default_rng([seed, 0xC011])
        for j in collapsed:
            noise = reject_rows(rng.standard_normal((1, e.dim)), omega)[0]
            rows[j] = 1e-6 * orig[j] * noise / np.linalg.norm(noise)
        warnings.warn(
            f"{collapsed.size} neutral word(s) parallel to the centroid were perturbed: "
            + ", ".join(e.words[idx[j]] for j in collapsed[:10]),
            stacklevel=2,
        )
    # second pass mops up the rounding left by the first
    rows = reject_rows(rows, omega)
    vecs[idx] = rows
    return e.with_vectors(vecs)


def _draw_radii(rng, params):
    r_c = rng.uniform(0.01, 0.1)
    r_s = params.radius_ratio_min * r_c * rng.uniform(1.0, 2.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return r_c, r_s, phase


def class_plane(def_vec, omega, avoid=None):
    """Centre ``O_c`` of a class and the plane (v1, v2) for its circles."""
    center = def_vec - (np.dot(def_vec, omega) / np.dot(omega, omega)) * omega
    # single-class runs give O_c = 0; then keep the circles orthogonal to omega
    anchor = center if np.linalg.norm(center) > 1e-8 else omega
    d = anchor.shape[0]
    # attribute means first; drop the PC rows if the stack leaves no slack
    if avoid is not None and len(avoid) + 3 > d:
        avoid = avoid[: max(0, d - 3)]
    v1, v2 = orthonormal_pair_perpendicular_to(anchor, avoid)
    return center, v1, v2


def equidistance_class(e, c, center, v1, v2, r_c, r_s, phase=0.0, align=True):
    """Place subclass centres on a circle about ``center`` and each subclass's
    words on a larger circle about its centre.  Returns a new Embedding.

    With ``align`` each word circle starts at its subclass's own angle, so
    every subclass sees the same set of word-to-origin distances.
    """
    sizes = {len(s) for s in c.subclasses}
    if len(sizes) != 1:
        raise HardWeatError(
            f"class {c.name!r}: definitional sets must have equal sizes, got "
            + ", ".join(f"{s.name}={len(s)}" for s in c.subclasses)
        )
    if e.dim < 3:
        raise HardWeatError("equidistancing needs at least 3 dimensions")
    vecs = e.vectors.copy()
    n = len(c.subclasses)
    centers = circle_points(center, r_c, v1, v2, n, phase)
    for i, (s, sub_center) in enumerate(zip(c.subclasses, centers), start=1):
        word_phase = phase + 2.0 * np.pi * i / n if align else phase
        pts = circle_points(sub_center, r_s, v1, v2, len(s), word_phase)
        vecs[e.rows(s.words)] = pts
    return e.with_vectors(vecs)


def _neutral_words(e, lex, resolved, scope):
    definitional = set()
    for c in lex.classes:
        for s in c.subclasses:
            for w in s.words:
                i = e.find(w)
                if i is not None:
                    definitional.add(e.words[i])
    if scope == "all_vocab":
        neutral = [w for w in e.words if w not in definitional]
    else:
        neutral = []
        for w in lex.neutral_words:
            i = e.find(w)
            if i is not None and e.words[i] not in definitional:
                neutral.append(e.words[i])
        neutral = list(dict.fromkeys(neutral))
    return neutral, definitional


def attribute_directions(e, resolved):
    """Rows to keep the circle plane away from: for every attribute set its
    first principal component and the mean of its unit vectors."""
    means, pcs = [], []
    for name, ws in resolved.attribute_sets.items():
        if ws is None:
            continue
        unit = e.vectors[e.rows(ws.words)]
        unit = unit / np.linalg.norm(unit, axis=1, keepdims=True)
        means.append(unit.mean(axis=0))
        if len(ws) >= 2:
            try:
                pcs.append(top_principal_component(unit))
            except DegenerateInputError:
                logger.warning("attribute set %s has no spread", name)
    return np.array(means + pcs).reshape(-1, e.dim)


def validate_classes(resolved):
    problems = []
    for c in resolved.classes:
        if len(c.subclasses) < 2:
            problems.append(f"class {c.name!r}: fewer than 2 usable subclasses")
            continue
        sizes = [len(s) for s in c.subclasses]
        if len(set(sizes)) != 1:
            problems.append(
                f"class {c.name!r}: definitional sets must have equal sizes, got "
                + ", ".join(f"{s.name}={len(s)}" for s in c.subclasses)
            )
    return problems


def hardweat(e, resolved, params=None):
    """Full HardWEAT pipeline on a resolved lexicon.

    Returns a :class:`HardWeatResult`.  Bias levels driving the centroid are
    measured on the input embedding.
    """
    params = params or HardWeatParams()
    problems = validate_classes(resolved)
    if problems:
        raise HardWeatError("; ".join(problems))
    lex = resolved.lexicon

    before = run_tests(e, resolved.tests, params.n_samples, params.seed, skipped=resolved.skipped)
    levels = before.per_class
    defs = {c.name: class_definitional_vector(e, c) for c in resolved.classes}
    omega = centroid(defs, levels)

    neutral, definitional = _neutral_words(e, lex, resolved, params.neutral_scope)
    if not neutral:
        raise HardWeatError("neutral word set is empty")
    if params.neutral_scope == "all_vocab":
        assert len(neutral) + len(definitional) == len(e)

    base = normalize_all(neutralize(e, neutral, omega, params.seed))
    # directions are read off the neutralized embedding the WEAT will see
    avoid = attribute_directions(base, resolved) if params.plane == "center-and-attributes" else None
    planes = {c.name: class_plane(defs[c.name], omega, avoid) for c in resolved.classes}

    neutral_idx = base.rows(neutral)
    def_idx = np.array(sorted(base.find(w) for w in definitional), dtype=np.int64)
    cos_limit = np.cos(np.deg2rad(params.angle_threshold))
    neutral_unit = base.vectors[neutral_idx]  # already unit after normalize_all

    best = None
    for it in range(1, params.max_iterations + 1):
        cur = base
        for ci, c in enumerate(resolved.classes):
            rng = np.random.default_rng([params.seed, it, ci])
            r_c, r_s, phase = _draw_radii(rng, params)
            center, v1, v2 = planes[c.name]
            cur = equidistance_class(cur, c, center, v1, v2, r_c, r_s, phase,
                                     params.align_word_circles)
        cur = normalize_all(cur)
        closest = _kernels.max_cosine(neutral_unit, cur.vectors[def_idx])
        violations = int(np.count_nonzero(closest > cos_limit))
        logger.debug("iteration %d: %d neutral words inside the angle guard", it, violations)
        if best is None or violations < best[1]:
            best = (cur, violations, it)
        if violations == 0:
            break
    out, violations, used = best
    passed = violations == 0
    if not passed:
        warnings.warn(
            f"angle guard unsatisfied after {params.max_iterations} iterations; "
            f"best attempt (iteration {used}) has {violations} neutral word(s) "
            f"within {params.angle_threshold} degrees",
            GuardWarning,
            stacklevel=2,
        )
        used = params.max_iterations
    after = run_tests(out, resolved.tests, params.n_samples, params.seed, skipped=resolved.skipped)
    return HardWeatResult(out, before, after, used, passed, omega, defs, levels, neutral)
