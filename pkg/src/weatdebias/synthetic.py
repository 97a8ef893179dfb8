"""Seeded synthetic embeddings with planted multiclass bias.

The generator builds a three-class lexicon (gender 2 subclasses, race 2,
religion 3), eight attribute sets forming four attribute pairs, and an
embedding where each subclass leans toward one side of its attribute pairs.
Everything else in the vocabulary is filler noise.  Coordinates are rounded
to multiples of 2**-24 (float32-like resolution).
"""

import numpy as np

from .lexicon import lexicon_from_dict
from .vecspace import Embedding

GRID = 2.0 ** -24

SUBCLASSES = {
    "gender": {
        "male": ["he", "him", "his", "man", "boy", "father", "son", "brother"],
        "female": ["she", "her", "hers", "woman", "girl", "mother", "daughter", "sister"],
    },
    "race": {
        "european_names": ["adam", "harry", "josh", "roger", "alan", "frank", "justin", "ryan"],
        "african_names": ["jamel", "lerone", "malik", "tyrone", "darnell", "hakim", "jermaine", "kareem"],
    },
    "religion": {
        "christianity": ["church", "bible", "christian", "priest", "gospel", "christ", "baptism", "pastor"],
        "islam": ["mosque", "quran", "muslim", "imam", "allah", "hijab", "ramadan", "mecca"],
        "atheism": ["atheist", "atheism", "godless", "irreligious", "secular", "agnostic", "nonbeliever", "unbeliever"],
    },
}

ATTRIBUTES = {
    "career": ["executive", "management", "professional", "corporation", "salary", "office", "business", "career"],
    "family": ["home", "parents", "children", "family", "cousins", "marriage", "wedding", "relatives"],
    "science": ["science", "technology", "physics", "chemistry", "einstein", "nasa", "experiment", "astronomy"],
    "arts": ["poetry", "art", "dance", "literature", "novel", "symphony", "drama", "sculpture"],
    "pleasant": ["joy", "love", "peace", "wonderful", "pleasure", "glorious", "laughter", "happy"],
    "unpleasant": ["agony", "terrible", "horrible", "nasty", "evil", "awful", "failure", "hurt"],
    "safe": ["safe", "calm", "gentle", "trusted", "friendly", "honest", "kind", "polite"],
    "threat": ["dangerous", "violent", "threat", "attack", "criminal", "terror", "hostile", "aggressive"],
}

# (class, x, y, a, b); the generator makes x lean to a and y lean to b
TESTS = [
    ("gender", "male", "female", "career", "family"),
    ("gender", "male", "female", "science", "arts"),
    ("race", "european_names", "african_names", "pleasant", "unpleasant"),
    ("race", "european_names", "african_names", "safe", "threat"),
    ("religion", "christianity", "islam", "pleasant", "unpleasant"),
    ("religion", "christianity", "islam", "safe", "threat"),
    ("religion", "christianity", "atheism", "pleasant", "unpleasant"),
    ("religion", "atheism", "islam", "safe", "threat"),
]

# per subclass: attribute sets it is pulled toward
LEANS = {
    "male": ["career", "science"],
    "female": ["family", "arts"],
    "european_names": ["pleasant", "safe"],
    "african_names": ["unpleasant", "threat"],
    "christianity": ["pleasant", "safe"],
    "islam": ["unpleasant", "threat"],
    "atheism": ["unpleasant", "safe"],
}


def sample_lexicon_dict(words_per_set=None):
    """The planted lexicon as a JSON-ready dict."""
    k = words_per_set

    def cut(ws):
        return list(ws[:k]) if k else list(ws)

    return {
        "description": "Illustrative toy lexicon; not the research word lists.",
        "classes": [
            {"name": c, "subclasses": [{"name": s, "words": cut(ws)} for s, ws in subs.items()]}
            for c, subs in SUBCLASSES.items()
        ],
        "attribute_sets": [{"name": a, "words": cut(ws)} for a, ws in ATTRIBUTES.items()],
        "weat_tests": [dict(zip(("class", "x", "y", "a", "b"), t)) for t in TESTS],
    }


def _unit(v):
    return v / np.linalg.norm(v)


def make_synthetic(vocab_size=2000, dim=50, seed=0, bias=0.6, noise=0.8, words_per_set=None):
    """Return ``(Embedding, Lexicon)`` with planted bias.

    Parameters
    ----------
    vocab_size : int
        Total vocabulary including lexicon words.
    dim : int
        Vector dimension.
    bias : float
        Strength of the pull from each subclass toward its leaning attributes.
    noise : float
        Norm of the isotropic noise added to every lexicon word.
    """
    rng = np.random.default_rng(seed)
    doc = sample_lexicon_dict(words_per_set)
    lex = lexicon_from_dict(doc)

    attr_dir = {a.name: _unit(rng.standard_normal(dim)) for a in lex.attribute_sets}
    words, rows = [], []

    def add(word, vec):
        words.append(word)
        rows.append(vec)

    def noisy(center, scale):
        return center + scale * rng.standard_normal(dim) / np.sqrt(dim)

    for a in lex.attribute_sets:
        for w in a.words:
            add(w, noisy(attr_dir[a.name], noise))

    for c in lex.classes:
        class_dir = _unit(rng.standard_normal(dim))
        plane = np.linalg.qr(rng.standard_normal((dim, 2)))[0].T
        n_sub = len(c.subclasses)
        for i, s in enumerate(c.subclasses):
            ang = 2 * np.pi * i / n_sub
            sub_dir = np.cos(ang) * plane[0] + np.sin(ang) * plane[1]
            lean = sum(attr_dir[a] for a in LEANS[s.name])
            center = class_dir + 0.8 * sub_dir + bias * lean
            for w in s.words:
                add(w, noisy(center, noise))

    n_fill = vocab_size - len(words)
    if n_fill < 0:
        raise ValueError("vocab_size too small for the lexicon")
    filler = rng.standard_normal((n_fill, dim))
    filler /= np.linalg.norm(filler, axis=1, keepdims=True)
    for i in range(n_fill):
        add(f"w{i:05d}", filler[i])

    # shuffle so lexicon words are spread over the rank order
    order = rng.permutation(len(words))
    vecs = np.vstack(rows)[order]
    vecs = np.round(vecs / GRID) * GRID
    return Embedding([words[i] for i in order], vecs), lex


def write_sample_data(directory, vocab_size=600, dim=30, seed=2024):
    """Regenerate the bundled sample lexicon and embedding."""
    import json
    from pathlib import Path

    from .vecspace import save_embedding

    directory = Path(directory)
    e, _ = make_synthetic(vocab_size=vocab_size, dim=dim, seed=seed)
    save_embedding(e, directory / "sample_embedding.txt", "plain")
    (directory / "sample_lexicon.json").write_text(
        json.dumps(sample_lexicon_dict(), indent=2) + "\n", encoding="utf-8"
    )
