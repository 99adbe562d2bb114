"""Axiom schemas of the two Hilbert calculi, instantiation, and soundness fuzzing on random models."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable

from .generate import random_formula, random_rpd, random_subset, random_vocab
from .models import RPDModel, model_to_json
from .semantics import evaluator_for, prepare, valid_in_model
from .syntax import (
    And, At, Bot, Box, Dep, Diamond, Formula, Implies, Nom, Not, Pred, Vocabulary, conj, dep_all, disj,
    nominals_in, render, sort_names,
)


class SideConditionError(ValueError):
    pass


EMPTY = frozenset()


def _b(xs, ys, zs, phi):
    return Box(frozenset(xs), frozenset(ys), frozenset(zs), phi)


def _d(xs, ys, zs, phi):
    return Diamond(frozenset(xs), frozenset(ys), frozenset(zs), phi)


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def atoms_of(xs: frozenset, vocab: Vocabulary, with_deps: bool) -> list[Formula]:
    """Atom(X): predicate atoms over X, and dependence atoms D_Y z with Y inside X when with_deps."""
    out: list[Formula] = []
    for name, ar in vocab.predicates:
        for args in product(sort_names(xs), repeat=ar):
            out.append(Pred(name, args))
    if with_deps:
        for ys in _subsets(xs):
            for z in vocab.variables:
                out.append(Dep(ys, z))
    return out


def _subsets(xs):
    xs = sort_names(xs)
    return [frozenset(x for k, x in enumerate(xs) if bits >> k & 1) for bits in range(1 << len(xs))]


def in_atom(phi: Formula, xs: frozenset, with_deps: bool) -> bool:
    if isinstance(phi, Pred):
        return set(phi.args) <= xs
    if with_deps and isinstance(phi, Dep):
        return phi.xs <= xs
    return False


@dataclass(frozen=True)
class AxiomSchema:
    id: str
    system: str
    slots: tuple[str, ...]
    build: Callable[[dict], Formula]
    side: Callable[[dict], str | None] | None = None
    text: str = ""

    def check(self, b: dict) -> None:
        missing = [s for s in self.slots if s not in b]
        if missing:
            raise SideConditionError(f"{self.id}: unbound metavariable(s) {missing}")
        if self.side is not None:
            failed = self.side(b)
            if failed:
                raise SideConditionError(f"{self.id}: side condition fails: {failed}")


def _ord_b(b):
    X, Y, Z, X2, Y2, Z2 = (b[k] for k in ("X", "Y", "Z", "X'", "Y'", "Z'"))
    lhs = _d(X, Y, Z, _d(X2, Y2, Z2, b["phi"]))
    return Implies(lhs, _d(X & X2, Y & Y2, (Z & Y2) | (Z & Z2) | (Y & Z2), b["phi"]))


def _ord_e(b):
    X, Y, Z, phi, psi = b["X"], b["Y"], b["Z"], b["phi"], b["psi"]
    rhs = disj([_d(X, Y, Z, And(psi, _d(X, Y, EMPTY, phi)))] + [_d(X, Y, Z | {y}, psi) for y in sort_names(Y)])
    return Implies(And(phi, _d(X, Y, Z, psi)), rhs)


def _sub_side(b):
    for a, c in (("X", "X'"), ("Y", "Y'"), ("Z", "Z'")):
        if not b[a] <= b[c]:
            return f"{a} is not a subset of {c}"
    return None


def _atom_side(with_deps):
    def side(b):
        if not in_atom(b["phi"], b["X"], with_deps):
            return "phi is not in Atom(X)"
        return None
    return side


def _nominal_side(*names):
    def side(b):
        for n in names:
            if not isinstance(b[n], str):
                return f"{n} must be a nominal"
        return None
    return side


_TAU = [
    ("Tau-1", ("phi", "psi"), lambda b: Implies(b["phi"], Implies(b["psi"], b["phi"])), "phi -> (psi -> phi)"),
    ("Tau-2", ("phi", "psi", "chi"), lambda b: Implies(
        Implies(b["phi"], Implies(b["psi"], b["chi"])),
        Implies(Implies(b["phi"], b["psi"]), Implies(b["phi"], b["chi"]))), "distribution of ->"),
    ("Tau-3", ("phi", "psi"), lambda b: Implies(Implies(Not(b["psi"]), Not(b["phi"])), Implies(b["phi"], b["psi"])), "contraposition"),
]


def _common(system):
    out = [AxiomSchema(i, system, s, f, None, t) for i, s, f, t in _TAU]
    out.append(AxiomSchema(
        "K", system, ("X", "Y", "Z", "phi", "psi"),
        lambda b: Implies(_b(b["X"], b["Y"], b["Z"], Implies(b["phi"], b["psi"])),
                          Implies(_b(b["X"], b["Y"], b["Z"], b["phi"]), _b(b["X"], b["Y"], b["Z"], b["psi"]))),
        None, "[X,Y,Z](phi -> psi) -> ([X,Y,Z]phi -> [X,Y,Z]psi)",
    ))
    return out


LPFD_SCHEMAS: list[AxiomSchema] = _common("lpfd") + [
    AxiomSchema("Ord-a", "lpfd", ("X", "Y", "phi"), lambda b: Implies(_b(b["X"], b["Y"], EMPTY, b["phi"]), b["phi"]), None, "[X,Y,{}]phi -> phi"),
    AxiomSchema("Ord-b", "lpfd", ("X", "Y", "Z", "X'", "Y'", "Z'", "phi"), _ord_b, None, "generalised transitivity"),
    AxiomSchema("Ord-c", "lpfd", ("X", "Y", "Z", "X'", "Y'", "Z'", "phi"),
                lambda b: Implies(_b(b["X"], b["Y"], b["Z"], b["phi"]), _b(b["X'"], b["Y'"], b["Z'"], b["phi"])),
                _sub_side, "monotonicity in the subscripts"),
    AxiomSchema("Ord-d", "lpfd", ("X", "Y", "Z", "phi"),
                lambda b: Implies(_d(b["X"], b["Y"], b["Z"], b["phi"]), _d(b["X"], b["Y"] | b["Z"], b["Z"], b["phi"])),
                None, "<X,Y,Z>phi -> <X,Y+Z,Z>phi"),
    AxiomSchema("Ord-e", "lpfd", ("X", "Y", "Z", "phi", "psi"), _ord_e, None, "strictness splitting"),
    AxiomSchema("Dep-a", "lpfd", ("X",), lambda b: dep_all(b["X"], b["X"]), None, "D_X X"),
    AxiomSchema("Dep-b", "lpfd", ("X", "phi"), lambda b: Implies(b["phi"], _b(b["X"], EMPTY, EMPTY, b["phi"])),
                _atom_side(True), "atoms over X are X-invariant"),
    AxiomSchema("Dep-c", "lpfd", ("X", "S", "T"),
                lambda b: Implies(And(dep_all(b["X"], b["S"]), dep_all(b["S"], b["T"])), dep_all(b["X"], b["T"])),
                None, "transitivity of dependence"),
    AxiomSchema("Dep-d", "lpfd", ("X", "S", "Y", "Z", "phi"),
                lambda b: Implies(And(dep_all(b["X"], b["S"]), _b(b["S"], b["Y"], b["Z"], b["phi"])), _b(b["X"], b["Y"], b["Z"], b["phi"])),
                None, "D_X S & [S,Y,Z]phi -> [X,Y,Z]phi"),
]


def _ord4(b):
    i, j, v = b["i"], b["j"], frozenset({b["v"]})
    lhs = At(i, _d(EMPTY, EMPTY, v, Nom(j)))
    rhs = And(At(i, _d(EMPTY, v, EMPTY, Nom(j))), At(j, Not(_d(EMPTY, v, EMPTY, Nom(i)))))
    return iff(lhs, rhs)


def _ord5(b):
    i = Nom(b["i"])
    lhs = And(_d(b["X"], b["Y"], b["Z"], i), _d(b["X'"], b["Y'"], b["Z'"], i))
    return iff(lhs, _d(b["X"] | b["X'"], b["Y"] | b["Y'"], b["Z"] | b["Z'"], i))


HLPFD_SCHEMAS: list[AxiomSchema] = _common("hlpfd") + [
    AxiomSchema("Dep", "hlpfd", ("X", "phi"), lambda b: Implies(b["phi"], _b(b["X"], EMPTY, EMPTY, b["phi"])),
                _atom_side(False), "predicate atoms over X are X-invariant"),
    AxiomSchema("Nom", "hlpfd", ("i", "phi"), lambda b: Implies(At(b["i"], b["phi"]), _b(EMPTY, EMPTY, EMPTY, Implies(Nom(b["i"]), b["phi"]))),
                _nominal_side("i"), "@i phi -> [{},{},{}](i -> phi)"),
    AxiomSchema("DD-1", "hlpfd", ("X", "s", "phi"),
                lambda b: Implies(And(Dep(b["X"], b["s"]), _b({b["s"]}, EMPTY, EMPTY, b["phi"])), _b(b["X"], EMPTY, EMPTY, b["phi"])),
                None, "D_X s & [{s},{},{}]phi -> [X,{},{}]phi"),
    AxiomSchema("DD-2", "hlpfd", ("i", "X", "s"),
                lambda b: Implies(And(Nom(b["i"]), Not(Dep(b["X"], b["s"]))), _d(b["X"], EMPTY, EMPTY, _b({b["s"]}, EMPTY, EMPTY, Not(Nom(b["i"]))))),
                _nominal_side("i"), "i & ~D_X s -> <X,{},{}>[{s},{},{}]~i"),
    AxiomSchema("Ord-1", "hlpfd", ("X", "Y", "phi"), lambda b: Implies(_b(b["X"], b["Y"], EMPTY, b["phi"]), b["phi"]), None, "[X,Y,{}]phi -> phi"),
    AxiomSchema("Ord-2", "hlpfd", ("v", "phi"),
                lambda b: Implies(b["phi"], _b({b["v"]}, EMPTY, EMPTY, _d({b["v"]}, EMPTY, EMPTY, b["phi"]))),
                None, "symmetry of the v-equivalence"),
    AxiomSchema("Ord-3", "hlpfd", ("X", "Y", "Z", "X'", "Y'", "Z'", "phi"), _ord_b, None, "generalised transitivity"),
    AxiomSchema("Ord-4", "hlpfd", ("i", "j", "v"), _ord4, _nominal_side("i", "j"), "strict order through nominals"),
    AxiomSchema("Ord-5", "hlpfd", ("X", "Y", "Z", "X'", "Y'", "Z'", "i"), _ord5, _nominal_side("i"), "intersection of accessibility"),
]

SCHEMAS = {"lpfd": LPFD_SCHEMAS, "hlpfd": HLPFD_SCHEMAS}
RULES = {"lpfd": ("MP", "Nec"), "hlpfd": ("MP", "Nec", "Name", "Paste")}


def get_schema(system: str, ident: str) -> AxiomSchema:
    for s in SCHEMAS[system]:
        if s.id == ident:
            return s
    raise KeyError(f"no schema {ident!r} in {system}")


def instantiate(schema: AxiomSchema, bindings: dict) -> Formula:
    b = {k: frozenset(v) if k in _SET_SLOTS and not isinstance(v, frozenset) else v for k, v in bindings.items()}
    schema.check(b)
    return schema.build(b)


_SET_SLOTS = {"X", "Y", "Z", "X'", "Y'", "Z'", "S", "T"}


def sample_bindings(schema: AxiomSchema, rng: random.Random, vocab: Vocabulary) -> dict:
    """A random binding satisfying the schema's side conditions."""
    hybrid = schema.system == "hlpfd"
    b: dict = {}
    for slot in schema.slots:
        if slot in _SET_SLOTS:
            b[slot] = random_subset(rng, vocab.variables, 0.4)
        elif slot in ("phi", "psi", "chi"):
            b[slot] = random_formula(rng, vocab, depth=rng.randint(0, 2), size=5, nominals=hybrid)
        elif slot in ("v", "s", "y"):
            b[slot] = rng.choice(vocab.variables)
        elif slot in ("i", "j"):
            b[slot] = rng.choice(vocab.nominals)
    if schema.id == "Ord-c":
        for a, c in (("X", "X'"), ("Y", "Y'"), ("Z", "Z'")):
            b[c] = b[a] | b[c]
    if schema.id in ("Dep-b", "Dep"):
        atoms = atoms_of(b["X"], vocab, with_deps=not hybrid)
        if not atoms:
            b["X"] = frozenset(vocab.variables)
            atoms = atoms_of(b["X"], vocab, with_deps=not hybrid)
        b["phi"] = rng.choice(atoms)
    return b


@dataclass
class Counterexample:
    schema: str
    instance: str
    point: str
    model: dict

    def to_dict(self):
        return {"schema": self.schema, "instance": self.instance, "point": self.point, "model": self.model}


@dataclass
class FuzzReport:
    system: str
    seed: int
    trials: dict[str, int] = field(default_factory=dict)
    counterexamples: list[Counterexample] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def failures(self, schema: str) -> int:
        return sum(1 for c in self.counterexamples if c.schema == schema)

    def to_dict(self):
        return {
            "system": self.system,
            "seed": self.seed,
            "trials": self.trials,
            "failures": {s: self.failures(s) for s in self.trials},
            "counterexamples": [c.to_dict() for c in self.counterexamples[:20]],
        }

    def to_text(self):
        lines = [f"{s}: {n} trials, {self.failures(s)} counterexamples" for s, n in self.trials.items()]
        lines.append("all schemas sound on the sample" if self.ok else f"{len(self.counterexamples)} counterexample(s)")
        return "\n".join(lines)


def fuzz_vocab(rng: random.Random, system: str) -> Vocabulary:
    v = random_vocab(rng, max_vars=3, max_preds=2, nominals=2 if system == "hlpfd" else 0)
    if system == "hlpfd" and not v.predicates:
        v = Vocabulary(v.variables, (("P0", 1),), v.nominals)
    return v


def soundness_fuzz(
    system: str = "lpfd",
    trials: int = 1000,
    seed: int = 0,
    max_points: int = 6,
    schemas: list[str] | None = None,
) -> FuzzReport:
    """Instantiate every schema `trials` times on fresh random models and check validity there."""
    rng = random.Random(seed)
    chosen = [s for s in SCHEMAS[system] if schemas is None or s.id in schemas]
    rep = FuzzReport(system, seed)
    for schema in chosen:
        rep.trials[schema.id] = 0
        for _ in range(trials):
            vocab = fuzz_vocab(rng, system)
            all_named = schema.id == "DD-2" and rng.random() < 0.5
            m = random_rpd(rng, vocab, max_points=max_points, all_named=all_named)
            inst = instantiate(schema, sample_bindings(schema, rng, vocab))
            ok, w = valid_in_model(m, inst)
            rep.trials[schema.id] += 1
            if not ok:
                rep.counterexamples.append(Counterexample(schema.id, render(inst), w, model_to_json(m)))
    return rep


# ---------------------------------------------------------------- rules


def _renamed(m: RPDModel, nominal: str, point: str) -> RPDModel:
    naming = dict(m.naming)
    naming[nominal] = point
    return RPDModel(m.vocab, m.points, m.sim, m.leq, m.valuation, naming)


def _valid(m, phi) -> bool:
    return valid_in_model(m, phi)[0]


def rule_check(rule: str, premises: list[Formula], conclusion: Formula, model: RPDModel) -> bool:
    """Validity preservation of one rule application on a model.

    For Name and Paste the premise is read over every re-naming of the fresh nominal, which is what the
    rule's soundness argument quantifies over. Returns False only if the premises hold and the conclusion fails.
    """
    if rule == "MP":
        if len(premises) != 2 or premises[1] != Implies(premises[0], conclusion):
            raise SideConditionError("MP: premises must be phi and phi -> psi")
        return not (_valid(model, premises[0]) and _valid(model, premises[1])) or _valid(model, conclusion)
    if rule == "Nec":
        if len(premises) != 1 or not isinstance(conclusion, Box) or conclusion.body != premises[0]:
            raise SideConditionError("Nec: conclusion must be a box over the premise")
        return not _valid(model, premises[0]) or _valid(model, conclusion)
    if rule == "Name":
        if len(premises) != 1 or not isinstance(premises[0], Implies) or not isinstance(premises[0].left, Nom):
            raise SideConditionError("Name: premise must be i -> phi")
        i = premises[0].left.name
        if premises[0].right != conclusion:
            raise SideConditionError("Name: conclusion must be the consequent of the premise")
        if i in nominals_in(conclusion):
            raise SideConditionError(f"Name: {i} occurs in the conclusion")
        if i not in model.naming:
            raise SideConditionError(f"Name: {i} names no point of the model")
        premise_holds = all(_valid(_renamed(model, i, w), premises[0]) for w in model.points)
        return not premise_holds or _valid(model, conclusion)
    if rule == "Paste":
        if len(premises) != 1:
            raise SideConditionError("Paste takes one premise")
        p = premises[0]
        try:
            left, right = p.left, p.right
            i, dia = left.nominal, left.body
            j = dia.body.name
            phi = right.body
            ok_shape = (
                isinstance(p, Implies) and isinstance(left, At) and isinstance(dia, Diamond)
                and isinstance(dia.body, Nom) and isinstance(right, At) and right.nominal == j
            )
        except AttributeError:
            ok_shape = False
        if not ok_shape:
            raise SideConditionError("Paste: premise must be @i<X,Y,Z>j -> @j phi")
        expected = At(i, Box(dia.xs, dia.ys, dia.zs, phi))
        if conclusion != expected:
            raise SideConditionError("Paste: conclusion must be @i[X,Y,Z]phi")
        if i == j:
            raise SideConditionError("Paste: i and j must differ")
        if j in nominals_in(phi):
            raise SideConditionError(f"Paste: {j} occurs in phi")
        premise_holds = all(_valid(_renamed(model, j, w), p) for w in model.points)
        return not premise_holds or _valid(model, conclusion)
    raise KeyError(f"unknown rule {rule!r}")
