import random

import pytest
from hypothesis import given, settings, strategies as st

from lpfd.generate import full_product_pd, random_formula, random_pd, random_rpd, random_vocab
from lpfd.models import PDModel, eq_rel, fixture_path, load_model, pd_to_rpd, rpd_to_pd
from lpfd.semantics import (
    accessible, check_superadditivity, effectivity, effectivity_function, evaluate, extension,
    full_profile_condition, valid_in_model,
)
from lpfd.syntax import Dep, Pred, Vocabulary, parse_formula

import oracles


def _case(seed, nominals=1):
    rng = random.Random(seed)
    vocab = random_vocab(rng, 3, 2, nominals=nominals)
    return rng, vocab


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_evaluator_matches_recursive_oracle_on_rpd(seed):
    rng, vocab = _case(seed)
    m = random_rpd(rng, vocab, 5)
    for _ in range(4):
        phi = random_formula(rng, vocab, depth=2, size=6)
        ext = extension(m, phi)
        assert ext == {w for w in m.points if oracles.truth(m, w, phi)}


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_evaluator_matches_recursive_oracle_on_pd(seed):
    rng, vocab = _case(seed)
    m = random_pd(rng, vocab, 6)
    for _ in range(4):
        phi = random_formula(rng, vocab, depth=2, size=6)
        assert extension(m, phi) == {a for a in m.names if oracles.truth(m, a, phi)}


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_translations_preserve_truth(seed):
    rng, vocab = _case(seed)
    p = random_pd(rng, vocab, 6)
    r = random_rpd(rng, vocab, 5)
    for _ in range(4):
        phi = random_formula(rng, vocab, depth=2, size=6)
        assert extension(pd_to_rpd(p), phi) == {a for a in p.names if oracles.pd_truth(p, a, _core(phi, vocab))}
        assert extension(rpd_to_pd(r), phi) == {w for w in r.points if oracles.rpd_truth(r, w, _core(phi, vocab))}


def _core(phi, vocab):
    from lpfd.syntax import expand_derived
    return expand_derived(phi, vocab)


def test_unknown_point_is_an_error():
    m = load_model(fixture_path("example2.json"))
    with pytest.raises(KeyError):
        evaluate(m, "nowhere", parse_formula("Na{1,2}"))


def test_accessible_matches_definition():
    v = Vocabulary(("x", "y"))
    pts = ("a", "b", "c")
    ident = {(w, w) for w in pts}
    from lpfd.models import RPDModel
    m = RPDModel(
        v, pts,
        {"x": ident | {("a", "b"), ("b", "a")}, "y": ident},
        {"x": ident | {("a", "b"), ("a", "c"), ("b", "c")}, "y": ident | {("a", "b"), ("b", "a")}},
    )
    assert accessible(m, "a", ["x"], [], []) == {"a", "b"}
    assert accessible(m, "a", [], [], ["x"]) == {"b", "c"}
    assert accessible(m, "a", [], ["y"], ["x"]) == {"b"}
    assert accessible(m, "b", [], [], ["x"]) == {"c"}


def _eff_oracle(m: PDModel, xs, target) -> bool:
    rel = eq_rel(m, xs)
    return any({b for (a2, b) in rel if a2 == a} <= set(target) for a in m.names)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_effectivity_by_definition(seed):
    rng, vocab = _case(seed, 0)
    m = random_pd(rng, vocab, 5, 2)
    xs = [x for x in vocab.variables if rng.random() < 0.5]
    target = [a for a in m.names if rng.random() < 0.5]
    assert effectivity(m, xs, target) == _eff_oracle(m, xs, target)
    fam = effectivity_function(m, xs)
    assert frozenset(m.names) in fam
    # outcome monotonicity
    for s in fam:
        assert all(effectivity(m, xs, s | {a}) for a in m.names)


def test_superadditivity_holds_on_full_products(rng):
    vocab = Vocabulary(("x", "y", "z"), {"P": 1, "Q": 1})
    for _ in range(10):
        m = full_product_pd(rng, vocab, 2)
        m.interp = {"P": frozenset({("o0",)}), "Q": frozenset({("o1",), ("o0",)})}
        assert full_profile_condition(m)[0]
        r = check_superadditivity(m, {"x"}, {"y"}, Pred("P", ("x",)), Pred("Q", ("y",)))
        assert r.holds


def test_superadditivity_fails_on_a_restricted_space():
    vocab = Vocabulary(("x", "y"), {"P": 1, "Q": 1})
    m = PDModel(
        vocab, ("0", "1"),
        {"a": {"x": "0", "y": "1"}, "b": {"x": "1", "y": "0"}},
        {}, {"P": frozenset({("0",)}), "Q": frozenset({("0",)})},
    )
    ok, missing = full_profile_condition(m)
    assert not ok and missing is not None
    r = check_superadditivity(m, {"x"}, {"y"}, Pred("P", ("x",)), Pred("Q", ("y",)))
    assert not r.holds
    assert r.witness["S1"] == ["a"] and r.witness["S2"] == ["b"]
    with pytest.raises(ValueError):
        check_superadditivity(m, {"x"}, {"x"}, Pred("P", ("x",)), Pred("Q", ("y",)))


def test_dependence_atom_semantics():
    vocab = Vocabulary(("x", "y"))
    m = PDModel(vocab, ("0", "1"), {"a": {"x": "0", "y": "0"}, "b": {"x": "1", "y": "1"}}, {})
    assert valid_in_model(m, Dep(frozenset({"x"}), "y"))[0]
    m2 = PDModel(vocab, ("0", "1"), {"a": {"x": "0", "y": "0"}, "b": {"x": "0", "y": "1"}}, {})
    assert valid_in_model(m2, Dep(frozenset({"x"}), "y")) == (False, "a")
    assert valid_in_model(m2, Dep(frozenset(), "x"))[0]
