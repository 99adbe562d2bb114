import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from lpfd.generate import random_cpd, random_pd, random_rpd, random_vocab
from lpfd.models import (
    ChoiceProfile, CPDModel, ModelError, RPDModel, all_partitions, choice, dumps_model, finer, fixture_path,
    load_model, model_from_json, model_to_json, partition, pd_to_rpd, rpd_to_pd, validate, validate_cpd,
)
from lpfd.syntax import Pred, Vocabulary

import oracles


def ident(points):
    return frozenset((w, w) for w in points)


def test_rpd_validation_flags_bad_relations():
    v = Vocabulary(("x",), {"P": 1})
    pts = ("a", "b", "c")
    m = RPDModel(v, pts, {"x": ident(pts) | {("a", "b")}}, {"x": ident(pts) | {("a", "b"), ("b", "c")}})
    codes = {x.code for x in validate(m)}
    assert codes  # sim not symmetric, leq not transitive
    good = RPDModel(v, pts, {"x": ident(pts) | {("a", "b"), ("b", "a")}}, {"x": ident(pts)})
    assert validate(good) == []
    broken_val = RPDModel(v, pts, good.sim, good.leq, {Pred("P", ("x",)): frozenset({"a"})})
    assert any(x.code == "Val" for x in validate(broken_val))


def test_repair_adds_reflexive_closure_and_strict_load_does_not():
    d = {
        "kind": "rpd",
        "vocabulary": {"variables": ["x"]},
        "points": ["a", "b"],
        "relations": {"sim": {"x": []}, "leq": {"x": [["a", "b"]]}},
    }
    assert validate(model_from_json(d)) == []
    assert validate(model_from_json(d, repair=False))


def test_malformed_json_raises():
    with pytest.raises(ModelError):
        model_from_json({"kind": "rpd"})
    with pytest.raises(ModelError):
        model_from_json({"kind": "strange"})


@pytest.mark.parametrize("name", ["example1.json", "example2.json"])
def test_fixture_roundtrip_is_byte_identical(name):
    text = fixture_path(name).read_text()
    m = load_model(fixture_path(name), repair=False)
    assert dumps_model(m) == text
    assert validate(m) == [] or name == "example1.json"


def _seeded(seed):
    return random.Random(seed)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_random_models_are_valid_and_serialise(seed):
    rng = _seeded(seed)
    vocab = random_vocab(rng, 3, 2, nominals=1)
    for m in (random_rpd(rng, vocab, 5), random_pd(rng, vocab, 5)):
        assert validate(m) == []
        again = model_from_json(json.loads(dumps_model(m)), repair=False)
        assert model_to_json(again) == model_to_json(m)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_translations_produce_valid_models(seed):
    rng = _seeded(seed)
    vocab = random_vocab(rng, 3, 2, nominals=1)
    r = random_rpd(rng, vocab, 5)
    p = random_pd(rng, vocab, 5)
    # points agreeing on every cell become coinciding assignments; they are kept apart by name
    twins = {(w, u) for w in r.points for u in r.points if w < u and all((w, u) in r.sim[x] for x in vocab.variables)}
    flagged = {tuple(sorted(v.witness)) for v in validate(rpd_to_pd(r))}
    assert flagged <= {tuple(sorted(t)) for t in twins}
    assert bool(flagged) == bool(twins)
    assert validate(pd_to_rpd(p)) == []
    back = pd_to_rpd(rpd_to_pd(r))
    assert back.points == r.points and back.sim == r.sim and back.leq == r.leq


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_translation_preserves_atoms_and_relations(seed):
    rng = _seeded(seed)
    vocab = random_vocab(rng, 3, 2)
    p = random_pd(rng, vocab, 6)
    r = pd_to_rpd(p)
    for atom in r.atoms():
        for a in p.names:
            assert oracles.pd_truth(p, a, atom) == oracles.rpd_truth(r, a, atom)


def _profile(d):
    return ChoiceProfile.of(d)


def test_choice_profile_operations():
    a = _profile({"1": {"1": "b", "2": "a"}, "2": {"1": "b", "2": "a"}, "3": {"3": "c"}})
    assert a.merge() == ("b", "a", "c")
    assert a.dom_partition() == partition({"1", "2"}, {"3"})
    assert a.realizable() == []
    bad = _profile({"1": {"1": "b", "2": "a"}, "2": {"1": "a", "2": "a"}, "3": {"3": "c"}})
    assert bad.realizable()
    assert choice({"1": "a"}) == frozenset({("1", "a")})


def test_partitions():
    assert len(all_partitions(["1", "2", "3"])) == 5
    assert len(all_partitions(["1", "2", "3", "4"])) == 15
    assert finer(partition({"1"}, {"2"}, {"3"}), partition({"1", "2"}, {"3"}))
    assert not finer(partition({"1", "3"}, {"2"}), partition({"1", "2"}, {"3"}))


def _two_player(profiles, utils):
    return CPDModel.from_utilities(("1", "2"), ("a", "b"), profiles, utils)


def test_cpd_conditions_are_reported():
    ind = {"1": {"1": "a"}, "2": {"2": "a"}}
    grand = {"1": {"1": "a", "2": "a"}, "2": {"1": "a", "2": "a"}}
    m = _two_player({"s": _profile(ind), "g": _profile(grand)}, {"s": (1, 1), "g": (1, 1)})
    assert validate_cpd(m) == []
    only_ind = _two_player({"s": _profile(ind)}, {"s": (0, 0)})
    assert "CPD-2" in {x.code for x in validate_cpd(only_ind)}
    ind2 = {"1": {"1": "b"}, "2": {"2": "a"}}
    missing_up = _two_player({"s": _profile(ind), "t": _profile(ind2), "g": _profile(grand)}, {"s": (1, 1), "t": (0, 0), "g": (1, 1)})
    assert "CPD-3" in {x.code for x in validate_cpd(missing_up)}
    unequal = _two_player({"s": _profile(ind), "g": _profile(grand)}, {"s": (1, 1), "g": (1, 1)})
    unequal.prefs = {"1": unequal.prefs["1"] - {("g", "s")}, "2": unequal.prefs["2"]}
    assert "CPD-4" in {x.code for x in validate_cpd(unequal)}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([2, 3]))
def test_generated_cpd_models_are_valid(seed, n):
    m = random_cpd(random.Random(seed), n_players=n, n_strategies=2, rcpd=(seed % 2 == 0))
    assert validate(m) == []
    assert m.to_pd().names == m.names
    assert oracles.rcpd_flagged(m) == set() or not m.rcpd
