import random

import pytest

from lpfd.calculus import (
    HLPFD_SCHEMAS, LPFD_SCHEMAS, AxiomSchema, SideConditionError, fuzz_vocab, get_schema, instantiate, rule_check,
    sample_bindings, soundness_fuzz,
)
from lpfd.generate import random_formula, random_rpd, random_vocab
from lpfd.models import RPDModel
from lpfd.semantics import valid_in_model
from lpfd.syntax import At, Box, Dep, Diamond, Implies, Nom, Not, Pred, Vocabulary

E = frozenset()


def test_schema_inventory():
    assert {s.id for s in LPFD_SCHEMAS} == {
        "Tau-1", "Tau-2", "Tau-3", "K", "Ord-a", "Ord-b", "Ord-c", "Ord-d", "Ord-e", "Dep-a", "Dep-b", "Dep-c", "Dep-d",
    }
    assert {s.id for s in HLPFD_SCHEMAS} == {
        "Tau-1", "Tau-2", "Tau-3", "K", "Dep", "Nom", "DD-1", "DD-2", "Ord-1", "Ord-2", "Ord-3", "Ord-4", "Ord-5",
    }


@pytest.mark.parametrize("system", ["lpfd", "hlpfd"])
def test_soundness_fuzz_small(system):
    rep = soundness_fuzz(system, trials=60, seed=7, max_points=5)
    assert rep.ok, rep.to_text()
    assert all(n == 60 for n in rep.trials.values())


def test_fuzz_is_reproducible():
    a = soundness_fuzz("lpfd", trials=20, seed=3, schemas=["Ord-e"]).to_dict()
    b = soundness_fuzz("lpfd", trials=20, seed=3, schemas=["Ord-e"]).to_dict()
    assert a == b


def _hunt(schema: AxiomSchema, trials=400, seed=0) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        vocab = fuzz_vocab(rng, schema.system)
        m = random_rpd(rng, vocab, 5)
        phi = instantiate(schema, sample_bindings(schema, rng, vocab))
        if not valid_in_model(m, phi)[0]:
            bad += 1
    return bad


def test_fuzzer_catches_unsound_schemas():
    # a box over a strict preference is not reflexive, so this is not valid
    reflexive_strict = AxiomSchema("bogus-T", "lpfd", ("X", "Y", "Z", "phi"),
                                   lambda b: Implies(Box(b["X"], b["Y"], b["Z"] | {"x0"}, b["phi"]), b["phi"]))
    # dependence does not go from a variable to an arbitrary other one
    bogus_dep = AxiomSchema("bogus-D", "lpfd", ("v", "s"), lambda b: Dep(frozenset({b["v"]}), b["s"]))
    assert _hunt(reflexive_strict) > 0
    assert _hunt(bogus_dep) > 0


def test_side_conditions_are_enforced():
    ordc = get_schema("lpfd", "Ord-c")
    b = {"X": frozenset({"x"}), "Y": E, "Z": E, "X'": E, "Y'": E, "Z'": E, "phi": Pred("P", ("x",))}
    with pytest.raises(SideConditionError):
        instantiate(ordc, b)
    depb = get_schema("lpfd", "Dep-b")
    with pytest.raises(SideConditionError):
        instantiate(depb, {"X": frozenset({"x"}), "phi": Pred("P", ("y",))})
    instantiate(depb, {"X": frozenset({"x"}), "phi": Pred("P", ("x",))})
    with pytest.raises(SideConditionError):
        instantiate(get_schema("lpfd", "K"), {"X": E})
    with pytest.raises(KeyError):
        get_schema("lpfd", "DD-1")


def _two_points():
    v = Vocabulary(("x",), {"P": 0}, ("i", "j"))
    pts = ("a", "b")
    ident = {(w, w) for w in pts}
    return RPDModel(v, pts, {"x": ident}, {"x": ident | {("a", "b")}}, {Pred("P", ()): frozenset({"b"})}, {"i": "a", "j": "b"})


def test_modus_ponens_and_necessitation():
    m = _two_points()
    p = Pred("P", ())
    top = Dep(frozenset({"x"}), "x")
    assert rule_check("MP", [top, Implies(top, top)], top, m)
    assert rule_check("Nec", [top], Box(E, E, E, top), m)
    with pytest.raises(SideConditionError):
        rule_check("MP", [p, Implies(top, p)], p, m)
    with pytest.raises(SideConditionError):
        rule_check("Nec", [p], Box(E, E, E, top), m)
    with pytest.raises(KeyError):
        rule_check("Cut", [p], p, m)


@pytest.mark.parametrize("seed", range(20))
def test_rules_preserve_validity_on_random_models(seed):
    rng = random.Random(seed)
    vocab = random_vocab(rng, 2, 1, nominals=2)
    for _ in range(10):
        m = random_rpd(rng, vocab, 4, all_named=True)
        phi = random_formula(rng, vocab, depth=1, size=4, nominals=False)
        box = Box(frozenset({vocab.variables[0]}), E, E, phi)
        assert rule_check("Nec", [phi], box, m)
        assert rule_check("Name", [Implies(Nom(vocab.nominals[0]), phi)], phi, m)
        i, j = vocab.nominals
        prem = Implies(At(i, Diamond(E, E, E, Nom(j))), At(j, phi))
        assert rule_check("Paste", [prem], At(i, Box(E, E, E, phi)), m)


def test_name_and_paste_shape_checks():
    m = _two_points()
    p = Pred("P", ())
    with pytest.raises(SideConditionError):
        rule_check("Name", [Implies(Nom("i"), And_(p, Nom("i")))], And_(p, Nom("i")), m)
    with pytest.raises(SideConditionError):
        rule_check("Paste", [Implies(p, p)], p, m)
    prem = Implies(At("i", Diamond(E, E, E, Nom("j"))), At("j", Nom("j")))
    with pytest.raises(SideConditionError):
        rule_check("Paste", [prem], At("i", Box(E, E, E, Nom("j"))), m)


def And_(a, b):
    from lpfd.syntax import And
    return And(a, b)
