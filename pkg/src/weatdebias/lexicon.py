"""Lexicon configuration: protected classes, attribute sets, WEAT tests.

A lexicon is a single JSON document::

    {
      "classes": [
        {"name": "gender",
         "subclasses": [{"name": "male", "words": ["he", "man"]},
                        {"name": "female", "words": ["she", "woman"]}]}
      ],
      "attribute_sets": [{"name": "career", "words": [...]}, ...],
      "weat_tests": [{"class": "gender", "x": "male", "y": "female",
                      "a": "career", "b": "family"}],
      "neutral_words": [...]            # optional, for a listed neutral scope
    }
"""

import json
from dataclasses import dataclass, field
from importlib import resources

from .vecspace import WordSet, resolve
from .weat import WeatTest


class LexiconError(ValueError):
    """One or more validation problems, all reported together."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid lexicon:\n  " + "\n  ".join(self.problems))


@dataclass
class ClassSpec:
    name: str
    subclasses: list  # list of WordSet; the set name is the subclass name

    def subclass(self, name):
        for s in self.subclasses:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass
class TestRef:
    class_name: str
    x: str
    y: str
    a: str
    b: str


@dataclass
class Lexicon:
    classes: list
    attribute_sets: list
    weat_tests: list
    neutral_words: list = field(default_factory=list)

    def class_spec(self, name):
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def attribute(self, name):
        for a in self.attribute_sets:
            if a.name == name:
                return a
        raise KeyError(name)

    def subclass_owner(self):
        """Map subclass name -> class name."""
        return {s.name: c.name for c in self.classes for s in c.subclasses}

    def subclass_sets(self):
        return {s.name: s for c in self.classes for s in c.subclasses}

    def definitional_words(self):
        return {w for c in self.classes for s in c.subclasses for w in s.words}

    def attribute_words(self):
        return {w for a in self.attribute_sets for w in a.words}

    def to_dict(self):
        return {
            "classes": [
                {"name": c.name, "subclasses": [{"name": s.name, "words": list(s.words)} for s in c.subclasses]}
                for c in self.classes
            ],
            "attribute_sets": [{"name": a.name, "words": list(a.words)} for a in self.attribute_sets],
            "weat_tests": [
                {"class": t.class_name, "x": t.x, "y": t.y, "a": t.a, "b": t.b} for t in self.weat_tests
            ],
            **({"neutral_words": list(self.neutral_words)} if self.neutral_words else {}),
        }


def _wordset(obj, where, problems):
    name = obj.get("name") if isinstance(obj, dict) else None
    words = obj.get("words") if isinstance(obj, dict) else None
    if not isinstance(name, str) or not name:
        problems.append(f"{where}: missing name")
        return None
    if not isinstance(words, list) or not words or not all(isinstance(w, str) for w in words):
        problems.append(f"{where} {name!r}: 'words' must be a non-empty list of strings")
        return None
    return WordSet(name, words)


def lexicon_from_dict(doc):
    """Build and validate a :class:`Lexicon`; raises :class:`LexiconError`."""
    problems = []
    if not isinstance(doc, dict):
        raise LexiconError(["top level must be a JSON object"])

    classes = []
    for i, c in enumerate(doc.get("classes") or []):
        if not isinstance(c, dict) or not isinstance(c.get("name"), str):
            problems.append(f"classes[{i}]: missing name")
            continue
        subs = [_wordset(s, f"class {c['name']!r} subclass[{j}]", problems)
                for j, s in enumerate(c.get("subclasses") or [])]
        subs = [s for s in subs if s is not None]
        if len(subs) < 2:
            problems.append(f"class {c['name']!r}: needs at least 2 subclasses")
        classes.append(ClassSpec(c["name"], subs))
    if not classes:
        problems.append("no classes defined")

    attrs = [_wordset(a, f"attribute_sets[{i}]", problems)
             for i, a in enumerate(doc.get("attribute_sets") or [])]
    attrs = [a for a in attrs if a is not None]

    # name uniqueness
    seen = {}
    for c in classes:
        if c.name in seen:
            problems.append(f"duplicate class name {c.name!r}")
        seen[c.name] = "class"
    sub_seen = {}
    for c in classes:
        for s in c.subclasses:
            if s.name in sub_seen:
                problems.append(f"duplicate subclass name {s.name!r}")
            sub_seen[s.name] = c.name
    attr_seen = set()
    for a in attrs:
        if a.name in attr_seen:
            problems.append(f"duplicate attribute set name {a.name!r}")
        if a.name in sub_seen:
            problems.append(f"attribute set {a.name!r} clashes with a subclass name")
        attr_seen.add(a.name)

    # definitional sets disjoint (within and across classes)
    owner = {}
    for c in classes:
        for s in c.subclasses:
            for w in s.words:
                if w in owner and owner[w] != s.name:
                    problems.append(f"word {w!r} is in both {owner[w]!r} and {s.name!r}")
                owner.setdefault(w, s.name)

    tests = []
    for i, t in enumerate(doc.get("weat_tests") or []):
        if not isinstance(t, dict):
            problems.append(f"weat_tests[{i}]: not an object")
            continue
        missing_keys = [k for k in ("class", "x", "y", "a", "b") if not isinstance(t.get(k), str)]
        if missing_keys:
            problems.append(f"weat_tests[{i}]: missing {', '.join(missing_keys)}")
            continue
        ref = TestRef(t["class"], t["x"], t["y"], t["a"], t["b"])
        cls = next((c for c in classes if c.name == ref.class_name), None)
        if cls is None:
            problems.append(f"weat_tests[{i}]: undefined class {ref.class_name!r}")
        else:
            names = {s.name for s in cls.subclasses}
            for side in ("x", "y"):
                v = getattr(ref, side)
                if v not in names:
                    problems.append(
                        f"weat_tests[{i}]: {side}={v!r} is not a subclass of {ref.class_name!r}"
                    )
        if ref.x == ref.y:
            problems.append(f"weat_tests[{i}]: x and y are the same subclass")
        for side in ("a", "b"):
            v = getattr(ref, side)
            if v not in attr_seen:
                problems.append(f"weat_tests[{i}]: undefined attribute set {side}={v!r}")
        if ref.a == ref.b:
            problems.append(f"weat_tests[{i}]: a and b are the same attribute set")
        elif ref.a in attr_seen and ref.b in attr_seen:
            aw = next(s for s in attrs if s.name == ref.a).words
            bw = set(next(s for s in attrs if s.name == ref.b).words)
            shared = [w for w in aw if w in bw]
            if shared:
                problems.append(f"weat_tests[{i}]: attribute sets share words {shared}")
        tests.append(ref)
    if not tests:
        problems.append("no weat_tests defined")

    neutral = doc.get("neutral_words") or []
    if not isinstance(neutral, list) or not all(isinstance(w, str) for w in neutral):
        problems.append("neutral_words must be a list of strings")
        neutral = []

    if problems:
        raise LexiconError(problems)
    return Lexicon(classes, attrs, tests, list(dict.fromkeys(neutral)))


def load_lexicon(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LexiconError([f"{path}: not valid JSON ({exc})"]) from None
    return lexicon_from_dict(doc)


def sample_lexicon_path():
    """Path of the bundled illustrative lexicon (toy-sized word lists)."""
    return resources.files("weatdebias") / "data" / "sample_lexicon.json"


def sample_embedding_path():
    return resources.files("weatdebias") / "data" / "sample_embedding.txt"


# ---------------------------------------------------------------------------
# binding to an embedding
# ---------------------------------------------------------------------------


@dataclass
class Resolved:
    """Lexicon bound to an embedding: missing words dropped and reported."""

    lexicon: Lexicon
    classes: list          # ClassSpec with resolved WordSets
    attribute_sets: dict   # name -> resolved WordSet (or None)
    tests: list            # runnable WeatTest objects
    missing: dict          # set name -> list of dropped words
    skipped: list          # messages for tests that could not run

    def subclass_sets(self):
        return {s.name: s for c in self.classes for s in c.subclasses}


def resolve_lexicon(e, lex):
    """Drop out-of-vocabulary words; abort tests whose sets become too small.

    A set that loses words and ends up with fewer than 2 is unusable; a set
    that was given with a single word and lost nothing is kept.
    """
    missing = {}

    def bind(ws):
        found, miss = resolve(e, ws)
        if miss:
            missing[ws.name] = miss
        if found is None or (miss and len(found) < 2):
            return None
        return found

    classes = []
    for c in lex.classes:
        classes.append(ClassSpec(c.name, [s for s in (bind(s) for s in c.subclasses) if s is not None]))
    subs = {s.name: s for c in classes for s in c.subclasses}
    attrs = {a.name: bind(a) for a in lex.attribute_sets}

    tests, skipped = [], []
    for ref in lex.weat_tests:
        sets = [subs.get(ref.x), subs.get(ref.y), attrs.get(ref.a), attrs.get(ref.b)]
        if any(s is None for s in sets):
            bad = [n for n, s in zip((ref.x, ref.y, ref.a, ref.b), sets) if s is None]
            skipped.append(
                f"{ref.class_name}: ({ref.x}, {ref.y}, {ref.a}, {ref.b}) aborted, "
                f"unusable set(s) {', '.join(bad)}"
            )
            continue
        tests.append(WeatTest(*sets, class_name=ref.class_name))
    return Resolved(lex, classes, attrs, tests, missing, skipped)
