import numpy as np
import pytest

from oracles import brute_force_neighbors
from weatdebias.lexicon import resolve_lexicon
from weatdebias.softweat import (
    SHIFT_GRID,
    NothingSelectedWarning,
    SoftWeatError,
    SoftWeatParams,
    TranslationPlan,
    _assign_overlaps,
    apply_plan,
    build_plan,
    expand_target_set,
    select_attribute_sets,
    softweat,
    translation_matrix,
    translation_vector,
)
from weatdebias.synthetic import make_synthetic
from weatdebias.vecspace import Embedding, WordSet
from weatdebias.weat import BiasReport, WeatResult, WeatTest, effect_size


def _report(*rows):
    per_test = []
    for x, y, a, b, d in rows:
        t = WeatTest(WordSet(x, [x]), WordSet(y, [y]), WordSet(a, [a]), WordSet(b, [b]), "c")
        per_test.append((t, WeatResult(s=0.0, d=d, p=None)))
    return BiasReport(per_test, {})


class TestSelection:
    def test_positive(self):
        assert select_attribute_sets(_report(("s1", "s2", "a1", "a2", 0.8))) == {"s1": ["a1"], "s2": ["a2"]}

    def test_negative(self):
        assert select_attribute_sets(_report(("s1", "s2", "a1", "a2", -0.8))) == {"s1": ["a2"], "s2": ["a1"]}

    def test_below_threshold(self):
        assert select_attribute_sets(_report(("s1", "s2", "a1", "a2", 0.6), ("s1", "s2", "b1", "b2", -0.3))) == {}

    def test_merge_duplicates(self):
        sel = select_attribute_sets(_report(("s1", "s2", "a1", "a2", 0.9), ("s1", "s3", "a1", "a2", 1.1)))
        assert sel == {"s1": ["a1"], "s2": ["a2"], "s3": ["a2"]}

    def test_degenerate_ignored(self):
        assert select_attribute_sets(_report(("s1", "s2", "a1", "a2", None))) == {}


def _toy(seed=0, n=40, dim=5):
    rng = np.random.default_rng(seed)
    return Embedding([f"t{i}" for i in range(n)], rng.standard_normal((n, dim)))


class TestExpansion:
    def test_k_zero(self):
        e = _toy()
        ws, scores = expand_target_set(e, WordSet("s", ["t0", "t1"]), 0)
        assert ws.words == ["t0", "t1"]

    def test_k_one_matches_scan(self):
        e = _toy()
        s = WordSet("s", ["t0", "t5", "t9"])
        ws, _ = expand_target_set(e, s, 1, max_rank=30)
        expected = list(s.words)
        for w in s.words:
            nb = [v for v in brute_force_neighbors(e, w, 40, 30) if v not in s.words][0]
            if nb not in expected:
                expected.append(nb)
        assert ws.words == expected

    def test_exclusion(self):
        e = _toy()
        s = WordSet("s", ["t0"])
        first = brute_force_neighbors(e, "t0", 1)[0]
        ws, _ = expand_target_set(e, s, 1, exclude={first})
        assert first not in ws.words and len(ws.words) == 2

    def test_overlap_goes_to_closer(self):
        expanded = {
            "p": (WordSet("p", ["a", "shared"]), {"a": np.inf, "shared": 0.9}),
            "q": (WordSet("q", ["b", "shared"]), {"b": np.inf, "shared": 0.95}),
        }
        out = _assign_overlaps(expanded)
        assert out["p"].words == ["a"] and out["q"].words == ["b", "shared"]


class TestPlan:
    def _coord_case(self):
        # attribute sets spread along e1 and e2 in 4 dimensions
        rows = {
            "a0": [2, 0, 0, 0.1], "a1": [-2, 0, 0, 0.1], "b0": [0, 2, 0.1, 0], "b1": [0, -2, 0.1, 0],
            "s0": [1, 0.2, 0.3, 0], "s1": [1, -0.1, 0, 0.2], "o0": [0, 1, 0.2, 0.1], "o1": [0.1, 1, 0, 0.3],
        }
        e = Embedding(list(rows), np.array(list(rows.values()), dtype=float))
        a, b = WordSet("A", ["a0", "a1"]), WordSet("B", ["b0", "b1"])
        s, o = WordSet("S", ["s0", "s1"]), WordSet("O", ["o0", "o1"])
        return e, a, b, s, o

    def test_coordinate_nullspace(self):
        e, a, b, s, o = self._coord_case()
        plan = build_plan(e, s, s, [a, b], [], 1.0)
        np.testing.assert_allclose(np.abs(plan.matrix), [[1, 0, 0, 0], [0, 1, 0, 0]], atol=1e-15)
        assert np.linalg.norm(plan.matrix @ plan.null_vector) == 0.0
        assert abs(np.linalg.norm(plan.null_vector) - 1) <= 1e-10

    def test_argmin_by_exhaustive_scan(self):
        e, a, b, s, o = self._coord_case()
        a = WordSet("A", ["a0", "a1"])
        tests = [WeatTest(s, o, a, b, "c")]
        plan = build_plan(e, s, s, [a], tests, 1.0)
        from weatdebias.numkit import nullspace_basis, top_principal_component
        basis = nullspace_basis(top_principal_component(e.vectors[e.rows(a.words)])[None, :])
        scores = []
        for n in np.vstack([basis, -basis]):
            p = TranslationPlan("S", list(s.words), ["A"], plan.matrix, n, plan.mean, 1.0)
            scores.append(abs(effect_size(apply_plan(e, p), tests[0])))
        assert abs(plan.score - min(scores)) <= 1e-10

    def test_lambda_zero(self):
        e, a, b, s, o = self._coord_case()
        plan = build_plan(e, s, s, [a], [WeatTest(s, o, a, b)], 0.0)
        assert not np.any(plan.psi)
        assert apply_plan(e, plan) is e

    def test_too_many_sets(self):
        e, a, b, s, o = self._coord_case()
        sets = [a, b, WordSet("C", ["s0", "o0"]), WordSet("D", ["s1", "o1"])]
        with pytest.raises(SoftWeatError, match="fewer"):
            build_plan(e, s, s, sets, [], 1.0)

    def test_single_word_lands_on_n(self):
        e, a, b, s, o = self._coord_case()
        single = WordSet("S", ["s0"])
        plan = build_plan(e, single, single, [a, b], [], 1.0)
        out = apply_plan(e, plan)
        assert np.abs(out.vector("s0") - plan.null_vector).max() <= SHIFT_GRID

    def test_matrix_form(self):
        psi = np.array([0.5, -1.0, 2.0])
        m = translation_matrix(psi)
        assert m.shape == (4, 4)
        np.testing.assert_array_equal(m @ np.array([1.0, 1, 1, 1]), [1.5, 0, 3, 1])

    def test_lambda_midpoint(self):
        e, a, b, s, o = self._coord_case()
        plan = build_plan(e, s, s, [a], [], 1.0)
        rows = {lam: apply_plan(e, plan.with_lambda(lam)).vectors[e.rows(s.words)] for lam in (0.0, 0.5, 1.0)}
        assert np.abs(rows[0.5] - (rows[0.0] + rows[1.0]) / 2).max() <= 1e-12

    def test_translation_vector_grid(self):
        psi = translation_vector(np.array([0.1, 0.2]), np.array([0.3, -0.7]), 0.37)
        np.testing.assert_array_equal(psi, np.round(psi / SHIFT_GRID) * SHIFT_GRID)


@pytest.fixture(scope="module")
def synthetic():
    e, lex = make_synthetic(vocab_size=800, dim=30, seed=3)
    return e, resolve_lexicon(e, lex)


class TestPipeline:
    def test_identity(self, synthetic):
        e, r = synthetic
        res = softweat(e, r, SoftWeatParams(lam=0.0, normalize_output=False, n_samples=20))
        assert res.embedding.vectors.tobytes() == e.vectors.tobytes()

    def test_locality_and_rigidity(self, synthetic):
        e, r = synthetic
        res = softweat(e, r, SoftWeatParams(lam=0.7, normalize_output=False, n_samples=20))
        moved = set()
        for plan in res.plans:
            idx = e.rows(plan.words)
            before, after = e.vectors[idx], res.embedding.vectors[idx]
            np.testing.assert_array_equal(after - after[0], before - before[0])
            assert not set(plan.words) & moved
            moved.update(plan.words)
        still = [i for i, w in enumerate(e.words) if w not in moved]
        assert res.embedding.vectors[still].tobytes() == e.vectors[still].tobytes()

    def test_null_vectors(self, synthetic):
        e, r = synthetic
        res = softweat(e, r, SoftWeatParams(n_samples=20))
        assert res.plans
        for p in res.plans:
            assert np.linalg.norm(p.matrix @ p.null_vector) <= 1e-8 * np.linalg.norm(p.matrix, 2)
            assert abs(np.linalg.norm(p.null_vector) - 1) <= 1e-10
            assert set(r.subclass_sets()[p.subclass].words) <= set(p.words)

    def test_reduces_bias(self, synthetic):
        e, r = synthetic
        res = softweat(e, r, SoftWeatParams(lam=1.0, n_samples=20))
        assert res.after.mean_bias_level() < res.before.mean_bias_level()

    def test_joint_mode_runs(self, synthetic):
        e, r = synthetic
        res = softweat(e, r, SoftWeatParams(lam=1.0, sequential=False, n_samples=20))
        assert len(res.plans) == len(res.selection)

    def test_nothing_selected(self, synthetic):
        e, r = synthetic
        with pytest.warns(NothingSelectedWarning):
            res = softweat(e, r, SoftWeatParams(selection_threshold=100, n_samples=20))
        assert res.embedding is e and res.plans == []

    def test_manual_pairs(self, synthetic):
        e, r = synthetic
        res = softweat(e, r, SoftWeatParams(manual_pairs={"male": ["career"]}, n_samples=20))
        assert [p.subclass for p in res.plans] == ["male"]
        with pytest.raises(SoftWeatError, match="nope"):
            softweat(e, r, SoftWeatParams(manual_pairs={"male": ["nope"]}, n_samples=20))

    def test_protected_attributes_stay(self, synthetic):
        e, r = synthetic
        res = softweat(e, r, SoftWeatParams(n_samples=20, normalize_output=False))
        attr_words = {w for a in r.attribute_sets.values() for w in a.words}
        for p in res.plans:
            assert not attr_words & set(p.words)

    @pytest.mark.parametrize("kw", [dict(lam=-0.1), dict(lam=1.5), dict(neighbors_k=-1)])
    def test_bad_params(self, kw):
        with pytest.raises(ValueError):
            SoftWeatParams(**kw)
