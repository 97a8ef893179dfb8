"""Embedding storage, text I/O, cosine geometry and neighbour queries."""

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels

logger = logging.getLogger(__name__)

FORMATS = ("plain", "header")


class EmbeddingFormatError(ValueError):
    """Malformed embedding file."""


class MissingWordError(KeyError):
    """A token is not in the embedding vocabulary."""

    def __init__(self, word):
        super().__init__(word)
        self.word = word

    def __str__(self):
        return f"word not in vocabulary: {self.word!r}"


class LoadWarning(UserWarning):
    """Recoverable problem while parsing an embedding file."""


@dataclass(frozen=True, eq=False)
class Embedding:
    """Vocabulary-indexed matrix of word vectors.

    ``rank[i]`` is the frequency rank of ``words[i]`` (0 = most frequent).
    By default it is the file order.  Lookups are case-sensitive unless
    ``lowercase_fallback`` is set, in which case a miss retries with the
    lowercased token.
    """

    words: tuple
    vectors: np.ndarray
    rank: np.ndarray = None
    lowercase_fallback: bool = False
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        words = tuple(self.words)
        vectors = np.array(self.vectors, dtype=np.float64, copy=True)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError("vectors must be a (len(words), d) matrix")
        if len(words) and vectors.shape[1] < 2:
            raise ValueError("embedding dimension must be >= 2")
        index = {w: i for i, w in enumerate(words)}
        if len(index) != len(words):
            raise ValueError("duplicate tokens in embedding")
        rank = np.arange(len(words)) if self.rank is None else np.asarray(self.rank, dtype=np.int64)
        if rank.shape != (len(words),):
            raise ValueError("rank must have one entry per word")
        vectors.setflags(write=False)
        rank = rank.copy()
        rank.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return self.find(word) is not None

    @property
    def dim(self):
        return self.vectors.shape[1]

    def find(self, word):
        """Row index of ``word`` or None."""
        i = self.index.get(word)
        if i is None and self.lowercase_fallback:
            i = self.index.get(word.lower())
        return i

    def row(self, word):
        i = self.find(word)
        if i is None:
            raise MissingWordError(word)
        return i

    def rows(self, words):
        return np.array([self.row(w) for w in words], dtype=np.int64)

    def vector(self, word):
        return self.vectors[self.row(word)]

    def with_vectors(self, vectors):
        """Same vocabulary and ranks, new vectors."""
        return Embedding(self.words, vectors, self.rank, self.lowercase_fallback)

    def with_frequencies(self, counts):
        """Re-rank words by descending ``counts``; uncounted words go last.

        Ties keep file order.
        """
        n = len(self.words)
        freq = np.array([counts.get(w, -1) for w in self.words], dtype=np.float64)
        order = np.lexsort((np.arange(n), -freq))
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n)
        return Embedding(self.words, self.vectors, rank, self.lowercase_fallback)

    def unit_vectors(self):
        return self.vectors / np.linalg.norm(self.vectors, axis=1, keepdims=True)


@dataclass
class WordSet:
    name: str
    words: list

    def __post_init__(self):
        self.words = list(dict.fromkeys(self.words))
        if not self.words:
            raise ValueError(f"word set {self.name!r} is empty")

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def resolve(e, ws):
    """Split a WordSet into (present WordSet or None, missing words).

    Present words are returned in their embedding spelling so later lookups
    do not depend on the fallback flag.
    """
    present, missing = [], []
    for w in ws.words:
        i = e.find(w)
        if i is None:
            missing.append(w)
        else:
            present.append(e.words[i])
    found = WordSet(ws.name, present) if present else None
    return found, missing


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------


def load_embedding(path, format="plain", lowercase_fallback=False):
    """Stream a space-separated text embedding.

    ``plain``: one token followed by ``d`` floats per line.
    ``header``: a first line ``"v d"``, then plain lines.
    Duplicate tokens keep their first occurrence; lines whose token is not
    valid UTF-8 are skipped.  Both emit a single :class:`LoadWarning` with
    the count.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown embedding format {format!r}")
    words, rows = [], []
    seen = set()
    dim = None
    declared = None
    duplicates = 0
    bad_tokens = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if format == "header" and lineno == 1:
                parts = raw.split()
                if len(parts) != 2:
                    raise EmbeddingFormatError(f"{path}:1: expected header 'v d'")
                try:
                    declared = (int(parts[0]), int(parts[1]))
                except ValueError:
                    raise EmbeddingFormatError(f"{path}:1: header is not two integers") from None
                dim = declared[1]
                continue
            parts = raw.rstrip(b"\r\n").split(b" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            try:
                token = parts[0].decode("utf-8")
            except UnicodeDecodeError:
                bad_tokens += 1
                continue
            try:
                values = np.array([float(p) for p in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric value") from None
            if dim is None:
                dim = values.size
                if dim < 2:
                    raise EmbeddingFormatError(f"{path}:{lineno}: dimension {dim} < 2")
            if values.size != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} values, found {values.size}"
                )
            if not np.any(values):
                raise EmbeddingFormatError(f"{path}:{lineno}: zero vector for {token!r}")
            if token in seen:
                duplicates += 1
                continue
            seen.add(token)
            words.append(token)
            rows.append(values)
    if duplicates:
        warnings.warn(f"{path}: {duplicates} duplicate token(s) ignored", LoadWarning, stacklevel=2)
    if bad_tokens:
        warnings.warn(f"{path}: {bad_tokens} non-UTF-8 token(s) skipped", LoadWarning, stacklevel=2)
    if declared is not None and declared[0] != len(words) + duplicates + bad_tokens:
        logger.warning("%s: header declares %d words, file has %d", path, declared[0], len(words))
    if not words:
        raise EmbeddingFormatError(f"{path}: no vectors")
    logger.info("loaded %d x %d embedding from %s", len(words), dim, path)
    return Embedding(words, np.vstack(rows), lowercase_fallback=lowercase_fallback)


def save_embedding(e, path, format="plain"):
    """Write ``e`` as text; floats use the shortest round-trip repr."""
    if format not in FORMATS:
        raise ValueError(f"unknown embedding format {format!r}")
    if len(e) == 0:
        raise ValueError("cannot save an empty embedding")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if format == "header":
            fh.write(f"{len(e)} {e.dim}\n")
        for word, row in zip(e.words, e.vectors.tolist()):
            fh.write(word)
            fh.write(" ")
            fh.write(" ".join(map(repr, row)))
            fh.write("\n")


def load_frequencies(path):
    """Read ``token<TAB>count`` lines into a dict (first occurrence wins)."""
    counts = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            token, count = line.rsplit("\t", 1)
            counts.setdefault(token, int(count))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected 'token<TAB>count'") from None
    return counts


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


def cosine(e, w1, w2):
    a = e.vector(w1)
    b = e.vector(w2)
    return cosine_vectors(a, b)


def cosine_vectors(a, b):
    c = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return min(1.0, max(-1.0, c))


def normalize_all(e):
    """Scale every row to unit Euclidean norm."""
    norms = np.linalg.norm(e.vectors, axis=1, keepdims=True)
    return e.with_vectors(e.vectors / norms)


def nearest_neighbors(e, word, k, max_rank=None, exclude=()):
    """Top-``k`` words by cosine to ``word``.

    The query word is never returned.  With ``max_rank`` only words of rank
    below it are eligible.  Ties go to the more frequent (lower rank) word.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    qi = e.row(word)
    unit = e.unit_vectors()
    scores = unit @ unit[qi]
    eligible = np.ones(len(e), dtype=bool)
    eligible[qi] = False
    if max_rank is not None:
        eligible &= e.rank < max_rank
    for w in exclude:
        i = e.find(w)
        if i is not None:
            eligible[i] = False
    # scan in rank order so index ties resolve to the lower rank
    order = np.argsort(e.rank, kind="stable")
    picked = _kernels.topk(scores[order], eligible[order], min(k, len(e)))
    return [(e.words[order[i]], min(1.0, max(-1.0, float(scores[order[i]])))) for i in picked]
