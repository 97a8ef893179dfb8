"""Embedding quality: word-similarity Spearman correlation and 3CosAdd analogies."""

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import rankdata

from .vecspace import cosine


@dataclass
class SimilarityDataset:
    name: str
    pairs: list  # (word1, word2, score)

    def __post_init__(self):
        if len(self.pairs) < 2:
            raise ValueError(f"similarity dataset {self.name!r} needs at least 2 pairs")
        if not all(math.isfinite(p[2]) for p in self.pairs):
            raise ValueError(f"similarity dataset {self.name!r} has non-finite scores")


@dataclass
class AnalogyDataset:
    name: str
    sections: list  # (section name, [(a, b, c, d), ...])

    def __len__(self):
        return sum(len(q) for _, q in self.sections)


@dataclass
class SimilarityResult:
    rho: float
    used: int
    skipped: int


@dataclass
class AnalogyResult:
    accuracy: float
    correct: int
    used: int
    skipped: int
    sections: dict  # name -> (correct, used)


def load_similarity(path, name=None):
    """Read ``word1 word2 score`` lines; tab, comma or whitespace separated.

    ``#`` lines and a non-numeric header row are skipped.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    sample = "\n".join(lines[:20])
    splitter = "\t" if "\t" in sample else ("," if "," in sample else None)
    for i, ln in enumerate(lines):
        parts = [p.strip() for p in (ln.split(splitter) if splitter else ln.split())]
        if len(parts) < 3:
            raise ValueError(f"{path}: line {i + 1}: expected 'word1 word2 score'")
        try:
            score = float(parts[2])
        except ValueError:
            if i == 0:
                continue
            raise ValueError(f"{path}: line {i + 1}: bad score {parts[2]!r}") from None
        pairs.append((parts[0], parts[1], score))
    return SimilarityDataset(name or _stem(path), pairs)


def load_analogy(path, name=None):
    """Read the ``: section`` / ``a b c d`` analogy format."""
    sections = []
    current = None
    with open(path, encoding="utf-8") as fh:
        for lineno, ln in enumerate(fh, 1):
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if ln.startswith(":"):
                current = (ln[1:].strip(), [])
                sections.append(current)
                continue
            words = ln.split()
            if len(words) != 4:
                raise ValueError(f"{path}:{lineno}: expected four words")
            if len(set(words)) != 4:
                raise ValueError(f"{path}:{lineno}: analogy words must be distinct")
            if current is None:
                current = ("default", [])
                sections.append(current)
            current[1].append(tuple(words))
    return AnalogyDataset(name or _stem(path), sections)


def _stem(path):
    return re.sub(r"\.[^.]*$", "", str(path).replace("\\", "/").rsplit("/", 1)[-1])


def pearson_exact(x, y):
    """Pearson correlation of two rank vectors, accumulated in exact rationals.

    Average ranks are multiples of 1/2, so every sum is exact and equal
    inputs give equal outputs regardless of how the ranks were produced.
    """
    xs = [Fraction(v) for v in x]
    ys = [Fraction(v) for v in y]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = sum((a - mx) ** 2 for a in xs)
    syy = sum((b - my) ** 2 for b in ys)
    if sxx == 0 or syy == 0:
        return float("nan")
    return float(sxy / sxx) * math.sqrt(sxx / syy)


def spearman_similarity(e, ds):
    """Spearman rho between human scores and cosines over resolvable pairs."""
    human, model = [], []
    skipped = 0
    for w1, w2, score in ds.pairs:
        if e.find(w1) is None or e.find(w2) is None:
            skipped += 1
            continue
        human.append(score)
        model.append(cosine(e, w1, w2))
    if len(human) < 2:
        raise ValueError(f"{ds.name}: fewer than 2 usable pairs")
    rho = pearson_exact(rankdata(human), rankdata(model))
    return SimilarityResult(rho, len(human), skipped)


def analogy_accuracy(e, ds, max_rank=None):
    """3CosAdd accuracy on unit vectors, excluding the three query words."""
    unit = e.unit_vectors()
    eligible = np.ones(len(e), dtype=bool) if max_rank is None else e.rank < max_rank
    # ties resolve to the lower rank
    order = np.argsort(e.rank, kind="stable")
    sections = {}
    correct = used = skipped = 0
    for sec, questions in ds.sections:
        sc = su = 0
        for q in questions:
            idx = [e.find(w) for w in q]
            if any(i is None for i in idx):
                skipped += 1
                continue
            a, b, c, d = idx
            target = unit[b] - unit[a] + unit[c]
            scores = unit @ target
            mask = eligible.copy()
            mask[[a, b, c]] = False
            cand = order[mask[order]]
            if cand.size == 0:
                skipped += 1
                continue
            pred = cand[int(np.argmax(scores[cand]))]
            su += 1
            sc += int(pred == d)
        sections[sec] = (sc, su)
        correct += sc
        used += su
    if used == 0:
        raise ValueError(f"{ds.name}: no usable analogy questions")
    return AnalogyResult(correct / used, correct, used, skipped, sections)
