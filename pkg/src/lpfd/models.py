"""Model classes: PD models, relational models, choice-profile models, and translations."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Hashable, Iterable, Mapping

from .syntax import Pred, Vocabulary, VocabularyError, natkey, sort_names

log = logging.getLogger(__name__)

Pair = tuple[str, str]
Relation = frozenset  # of Pair


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    witness: tuple = ()

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "witness": [_jsonable(w) for w in self.witness]}


# ---------------------------------------------------------------- relation helpers


def reflexive_closure(rel: Iterable[Pair], universe: Iterable[str]) -> frozenset[Pair]:
    return frozenset(rel) | {(w, w) for w in universe}


def preorder_violations(rel: frozenset[Pair], universe: Iterable[str], label: str) -> list[Violation]:
    universe = list(universe)
    us = set(universe)
    out = []
    for a, b in sorted(rel):
        if a not in us or b not in us:
            out.append(Violation("domain", f"{label}: pair ({a},{b}) mentions an unknown point", (a, b)))
    for w in universe:
        if (w, w) not in rel:
            out.append(Violation("reflexivity", f"{label} is not reflexive at {w}", (w,)))
            break
    succ: dict[str, set[str]] = {}
    for a, b in rel:
        succ.setdefault(a, set()).add(b)
    for a in universe:
        for b in succ.get(a, ()):
            for c in succ.get(b, ()):
                if (a, c) not in rel:
                    out.append(Violation("transitivity", f"{label}: {a}<={b}<={c} but not {a}<={c}", (a, b, c)))
                    return out
    return out


def equivalence_violations(rel: frozenset[Pair], universe: Iterable[str], label: str) -> list[Violation]:
    out = preorder_violations(rel, universe, label)
    for a, b in sorted(rel):
        if (b, a) not in rel:
            out.append(Violation("symmetry", f"{label}: ({a},{b}) without ({b},{a})", (a, b)))
            break
    return out


def is_total(rel: frozenset[Pair], universe: Iterable[str]) -> tuple[str, str] | None:
    universe = list(universe)
    for i, a in enumerate(universe):
        for b in universe[i:]:
            if (a, b) not in rel and (b, a) not in rel:
                return (a, b)
    return None


def strict_part(rel: frozenset[Pair]) -> frozenset[Pair]:
    return frozenset((a, b) for a, b in rel if (b, a) not in rel)


def indifference(rel: frozenset[Pair]) -> frozenset[Pair]:
    return frozenset((a, b) for a, b in rel if (b, a) in rel)


# ---------------------------------------------------------------- relational models


@dataclass
class RPDModel:
    vocab: Vocabulary
    points: tuple[str, ...]
    sim: dict[str, frozenset[Pair]]
    leq: dict[str, frozenset[Pair]]
    valuation: dict[Pred, frozenset[str]] = field(default_factory=dict)
    naming: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.points = tuple(self.points)
        self.sim = {x: frozenset(map(tuple, r)) for x, r in self.sim.items()}
        self.leq = {x: frozenset(map(tuple, r)) for x, r in self.leq.items()}
        self.valuation = {a: frozenset(ws) for a, ws in self.valuation.items()}
        for x in self.vocab.variables:
            self.sim.setdefault(x, frozenset((w, w) for w in self.points))
            self.leq.setdefault(x, frozenset((w, w) for w in self.points))

    def strict(self, x: str) -> frozenset[Pair]:
        return strict_part(self.leq[x])

    def atoms(self) -> list[Pred]:
        out = []
        for name, ar in self.vocab.predicates:
            for args in product(self.vocab.variables, repeat=ar):
                out.append(Pred(name, args))
        return out


def validate_rpd(m: RPDModel) -> list[Violation]:
    out: list[Violation] = []
    if len(set(m.points)) != len(m.points):
        out.append(Violation("points", "duplicate point names"))
    if not m.points:
        out.append(Violation("points", "a model needs at least one point"))
    for x in m.vocab.variables:
        out += [Violation(v.code, v.message, v.witness) for v in equivalence_violations(m.sim[x], m.points, f"sim[{x}]")]
        out += preorder_violations(m.leq[x], m.points, f"leq[{x}]")
    extra = (set(m.sim) | set(m.leq)) - m.vocab.varset
    for x in sort_names(extra):
        out.append(Violation("vocabulary", f"relation for unknown variable {x}", (x,)))
    arity = m.vocab.arity
    pts = set(m.points)
    for atom, ws in m.valuation.items():
        if atom.name not in arity or len(atom.args) != arity[atom.name] or not set(atom.args) <= m.vocab.varset:
            out.append(Violation("vocabulary", f"valuation for ill-formed atom {atom}", (str(atom),)))
            continue
        if not ws <= pts:
            out.append(Violation("domain", f"valuation of {atom} mentions unknown points"))
        xs = set(atom.args)
        for w in m.points:
            for u in m.points:
                if all((w, u) in m.sim[x] for x in xs) and ((w in ws) != (u in ws)):
                    out.append(Violation("Val", f"{w} and {u} agree on {sort_names(xs)} but differ on {atom}", (str(atom), w, u)))
                    break
            else:
                continue
            break
    for nom, w in m.naming.items():
        if nom not in m.vocab.nominals:
            out.append(Violation("naming", f"unknown nominal {nom}", (nom,)))
        if w not in pts:
            out.append(Violation("naming", f"nominal {nom} names unknown point {w}", (nom, w)))
    return out


# ---------------------------------------------------------------- PD models


@dataclass
class PDModel:
    vocab: Vocabulary
    objects: tuple
    assignments: dict[str, dict[str, Hashable]]
    prefs: dict[str, frozenset[Pair]]
    interp: dict[str, frozenset[tuple]] = field(default_factory=dict)
    naming: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.objects = tuple(self.objects)
        self.prefs = {x: frozenset(map(tuple, r)) for x, r in self.prefs.items()}
        self.interp = {p: frozenset(tuple(t) for t in ts) for p, ts in self.interp.items()}
        names = list(self.assignments)
        for x in self.vocab.variables:
            self.prefs.setdefault(x, frozenset((a, a) for a in names))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.assignments)

    def restrict(self, name: str, xs: Iterable[str]) -> tuple:
        a = self.assignments[name]
        return tuple(a[x] for x in sort_names(xs))


def validate_pd(m: PDModel) -> list[Violation]:
    out: list[Violation] = []
    objs = set(m.objects)
    seen: dict[tuple, str] = {}
    for name, a in m.assignments.items():
        if set(a) != m.vocab.varset:
            out.append(Violation("assignment", f"assignment {name} is not total on the variables", (name,)))
            continue
        for x, o in a.items():
            if o not in objs:
                out.append(Violation("assignment", f"assignment {name} sends {x} outside the domain", (name, x)))
        key = tuple(a[x] for x in m.vocab.variables)
        if key in seen:
            out.append(Violation("assignment", f"assignments {seen[key]} and {name} coincide", (seen[key], name)))
        seen[key] = name
    for x in m.vocab.variables:
        out += preorder_violations(m.prefs[x], m.names, f"pref[{x}]")
    arity = m.vocab.arity
    for p, ts in m.interp.items():
        if p not in arity:
            out.append(Violation("vocabulary", f"interpretation for unknown predicate {p}", (p,)))
            continue
        for t in ts:
            if len(t) != arity[p] or not set(t) <= objs:
                out.append(Violation("interpretation", f"bad tuple {t} in I({p})", (p,)))
    for nom, a in m.naming.items():
        if a not in m.assignments:
            out.append(Violation("naming", f"nominal {nom} names unknown assignment {a}", (nom, a)))
    return out


def eq_rel(m: PDModel, xs: Iterable[str]) -> frozenset[Pair]:
    """Pairs of assignments agreeing on every variable in xs."""
    xs = sort_names(xs)
    groups: dict[tuple, list[str]] = {}
    for a in m.names:
        groups.setdefault(tuple(m.assignments[a][x] for x in xs), []).append(a)
    return frozenset((a, b) for g in groups.values() for a in g for b in g)


def strict_and_indiff(m: PDModel) -> tuple[dict[str, frozenset[Pair]], dict[str, frozenset[Pair]]]:
    return ({x: strict_part(r) for x, r in m.prefs.items()}, {x: indifference(r) for x, r in m.prefs.items()})


def pd_to_rpd(m: PDModel) -> RPDModel:
    names = m.names
    sim = {x: eq_rel(m, {x}) for x in m.vocab.variables}
    valuation = {}
    for name, ar in m.vocab.predicates:
        ext = m.interp.get(name, frozenset())
        for args in product(m.vocab.variables, repeat=ar):
            ws = frozenset(a for a in names if tuple(m.assignments[a][x] for x in args) in ext)
            if ws:
                valuation[Pred(name, args)] = ws
    return RPDModel(m.vocab, names, sim, dict(m.prefs), valuation, dict(m.naming))


def _cell(m: RPDModel, x: str, w: str) -> tuple[str, ...]:
    return tuple(sorted((u for u in m.points if (w, u) in m.sim[x]), key=natkey))


def rpd_to_pd(m: RPDModel) -> PDModel:
    """Objects are pairs (variable, equivalence class); each point becomes the assignment of its classes."""
    assignments = {w: {x: (x, _cell(m, x, w)) for x in m.vocab.variables} for w in m.points}
    objects = sorted({o for a in assignments.values() for o in a.values()}, key=repr)
    interp: dict[str, set] = {}
    for name, ar in m.vocab.predicates:
        ext = interp.setdefault(name, set())
        for args in product(m.vocab.variables, repeat=ar):
            for w in m.valuation.get(Pred(name, args), ()):
                ext.add(tuple(assignments[w][x] for x in args))
    return PDModel(m.vocab, tuple(objects), assignments, dict(m.leq), interp, dict(m.naming))


# ---------------------------------------------------------------- choice profiles

Choice = frozenset  # of (player, strategy)
Partition = frozenset  # of frozenset[str]


def choice(mapping: Mapping[str, str]) -> Choice:
    return frozenset(mapping.items())


def choice_dom(c: Choice) -> frozenset[str]:
    return frozenset(p for p, _ in c)


def choice_is_function(c: Choice) -> bool:
    return len(choice_dom(c)) == len(c)


def choice_at(c: Choice, player: str):
    for p, s in c:
        if p == player:
            return s
    return None


def render_choice(c: Choice) -> str:
    return "{" + ",".join(f"({p},{s})" for p, s in sorted(c, key=lambda t: (natkey(t[0]), t[1]))) + "}"


def render_partition(pi: Partition) -> str:
    return "{" + ",".join("".join(sort_names(b)) if all(len(p) == 1 for p in b) else "{" + ",".join(sort_names(b)) + "}" for b in sorted(pi, key=lambda b: [natkey(x) for x in sort_names(b)])) + "}"


def partition(*blocks: Iterable[str]) -> Partition:
    return frozenset(frozenset(b) for b in blocks)


def all_partitions(items: Iterable[str]) -> list[Partition]:
    items = sort_names(items)

    def go(rest):
        if not rest:
            yield []
            return
        first, tail = rest[0], rest[1:]
        for p in go(tail):
            for k in range(len(p)):
                yield p[:k] + [p[k] | {first}] + p[k + 1:]
            yield [frozenset({first})] + p

    return [frozenset(p) for p in go(items)]


def finer(pi: Partition, rho: Partition) -> bool:
    """pi is finer than or equal to rho."""
    return all(any(b <= c for c in rho) for b in pi)


@dataclass(frozen=True)
class ChoiceProfile:
    choices: tuple[tuple[str, Choice], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, Choice | Mapping[str, str]]) -> "ChoiceProfile":
        items = []
        for p, c in mapping.items():
            items.append((p, c if isinstance(c, frozenset) else choice(c)))
        return cls(tuple(sorted(items, key=lambda t: natkey(t[0]))))

    @property
    def by_player(self) -> dict[str, Choice]:
        return dict(self.choices)

    def dom_partition(self) -> frozenset:
        return frozenset(choice_dom(c) for _, c in self.choices)

    def merge(self) -> tuple:
        return tuple(choice_at(c, p) for p, c in self.choices)

    def realizable(self) -> list[str]:
        """Reasons this profile is not realizable (empty when it is)."""
        problems = []
        players = {p for p, _ in self.choices}
        by = self.by_player
        for p, c in self.choices:
            if not choice_is_function(c):
                problems.append(f"choice of {p} assigns a player twice: {render_choice(c)}")
            if p not in choice_dom(c):
                problems.append(f"player {p} is not in the domain of its own choice")
            if not choice_dom(c) <= players:
                problems.append(f"choice of {p} mentions unknown players")
        doms = [choice_dom(c) for _, c in self.choices]
        for i, d in enumerate(doms):
            for e in doms[i + 1:]:
                if d != e and d & e:
                    problems.append("domains of choices overlap without coinciding")
        for p, c in self.choices:
            for q, e in self.choices:
                if choice_dom(c) == choice_dom(e) and c != e:
                    problems.append(f"players {p} and {q} share a domain but choose differently")
        return sorted(set(problems))


def merge(profile: ChoiceProfile) -> tuple:
    return profile.merge()


def dom_partition(profile: ChoiceProfile) -> frozenset:
    return profile.dom_partition()


@dataclass
class CPDModel:
    players: tuple[str, ...]
    strategies: tuple[str, ...]
    profiles: dict[str, ChoiceProfile]
    prefs: dict[str, frozenset[Pair]]
    utilities: dict[str, tuple[int, ...]] | None = None
    rcpd: bool = False

    def __post_init__(self):
        self.players = tuple(sort_names(self.players))
        self.strategies = tuple(self.strategies)
        self.prefs = {p: frozenset(map(tuple, r)) for p, r in self.prefs.items()}

    @classmethod
    def from_utilities(cls, players, strategies, profiles, utilities, rcpd=False) -> "CPDModel":
        players = tuple(sort_names(players))
        names = list(profiles)
        prefs = {
            p: frozenset((a, b) for a in names for b in names if utilities[a][k] <= utilities[b][k])
            for k, p in enumerate(players)
        }
        return cls(players, strategies, dict(profiles), prefs, {a: tuple(u) for a, u in utilities.items()}, rcpd)

    @property
    def vocab(self) -> Vocabulary:
        return Vocabulary(self.players, (), tuple(self.profiles))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.profiles)

    def sigma(self, pi: Partition) -> frozenset[tuple]:
        pi = frozenset(frozenset(b) for b in pi)
        return frozenset(a.merge() for a in self.profiles.values() if a.dom_partition() == pi)

    def profiles_with(self, pi: Partition) -> list[str]:
        pi = frozenset(frozenset(b) for b in pi)
        return [n for n, a in self.profiles.items() if a.dom_partition() == pi]

    def to_pd(self) -> PDModel:
        key = (tuple(self.profiles.items()), tuple(sorted(self.prefs.items())))
        cached = self.__dict__.get("_pd_cache")
        if cached is not None and cached[0] == key:
            return cached[1]
        pd = self._build_pd()
        self.__dict__["_pd_cache"] = (key, pd)
        return pd

    def _build_pd(self) -> PDModel:
        assignments = {n: dict(a.choices) for n, a in self.profiles.items()}
        objects = sorted({c for a in assignments.values() for c in a.values()}, key=render_choice)
        return PDModel(self.vocab, tuple(objects), assignments, dict(self.prefs), {}, {n: n for n in self.profiles})

    def to_rpd(self) -> RPDModel:
        return pd_to_rpd(self.to_pd())


def sigma(m: CPDModel, pi: Partition) -> frozenset[tuple]:
    return m.sigma(pi)


def validate_cpd(m: CPDModel) -> list[Violation]:
    out: list[Violation] = []
    players = set(m.players)
    strategies = set(m.strategies)
    for n, a in m.profiles.items():
        if {p for p, _ in a.choices} != players:
            out.append(Violation("CPD-1", f"profile {n} does not give every player a choice", (n,)))
            continue
        for reason in a.realizable():
            out.append(Violation("CPD-1", f"profile {n} is not realizable: {reason}", (n,)))
        for _, c in a.choices:
            if not {s for _, s in c} <= strategies:
                out.append(Violation("CPD-1", f"profile {n} uses an unknown strategy", (n,)))
                break
    seen: dict[tuple, str] = {}
    for n, a in m.profiles.items():
        if a.choices in seen:
            out.append(Violation("CPD-1", f"profiles {seen[a.choices]} and {n} coincide", (seen[a.choices], n)))
        seen[a.choices] = n
    if any(v.code == "CPD-1" for v in out):
        return out
    parts = {a.dom_partition() for a in m.profiles.values()}
    for pi in all_partitions(m.players):
        if pi not in parts:
            out.append(Violation("CPD-2", f"no profile has coalition structure {render_partition(pi)}", (render_partition(pi),)))
    pis = all_partitions(m.players)
    for pi in pis:
        for rho in pis:
            if pi != rho and finer(pi, rho):
                missing = m.sigma(pi) - m.sigma(rho)
                if missing:
                    s = sorted(missing)[0]
                    out.append(Violation(
                        "CPD-3",
                        f"merged profile {s} occurs under {render_partition(pi)} but not under the coarser {render_partition(rho)}",
                        (render_partition(pi), render_partition(rho), s),
                    ))
    for p in m.players:
        if p not in m.prefs:
            out.append(Violation("CPD-5", f"no preference for player {p}", (p,)))
            continue
        out += [Violation("CPD-5", v.message, v.witness) for v in preorder_violations(m.prefs[p], m.names, f"pref[{p}]")]
        gap = is_total(m.prefs[p], m.names)
        if gap:
            out.append(Violation("CPD-5", f"pref[{p}] does not compare {gap[0]} and {gap[1]}", gap))
    by_merge: dict[tuple, list[str]] = {}
    for n, a in m.profiles.items():
        by_merge.setdefault(a.merge(), []).append(n)
    for group in by_merge.values():
        for a in group:
            for b in group:
                for p in m.players:
                    if p in m.prefs and (a, b) not in m.prefs[p]:
                        out.append(Violation("CPD-4", f"{a} and {b} merge equally but {p} is not indifferent", (a, b, p)))
    return out


def rcpd_violations(m: CPDModel) -> list[Violation]:
    """Profiles with a two-block structure {X, -X} at which X determines -X, checked by evaluating D_X(-X)."""
    from .semantics import evaluate
    from .syntax import dep_all

    out = []
    all_players = frozenset(m.players)
    for n, a in m.profiles.items():
        pi = a.dom_partition()
        if len(pi) != 2:
            continue
        for xs in sorted(pi, key=sort_names):
            if evaluate(m, n, dep_all(xs, all_players - xs)):
                out.append(Violation(
                    "RCPD",
                    f"at {n} the coalition {{{','.join(sort_names(xs))}}} determines the rest",
                    (n, "".join(sort_names(xs))),
                ))
    return out


def validate_rcpd(m: CPDModel) -> list[Violation]:
    return validate_cpd(m) + rcpd_violations(m)


def build_cpd_from_game(
    players: Iterable[str],
    strategies: Iterable[str],
    table: Mapping[Partition, Iterable[tuple]],
    utilities: Mapping[tuple, tuple[int, ...]],
    names: Mapping[tuple[Partition, tuple], str] | None = None,
    rcpd: bool = False,
) -> CPDModel:
    """Build a choice-profile model from merged strategy assignments per coalition structure.

    Preferences come from the integer utilities of merged profiles, so equal merges are indifferent.
    """
    players = tuple(sort_names(players))
    table = {frozenset(frozenset(b) for b in pi): list(ss) for pi, ss in table.items()}
    for pi in all_partitions(players):
        if pi not in table:
            raise ModelError(f"coalition structure {render_partition(pi)} has no strategy profiles")
    pis = list(table)
    for pi in pis:
        for rho in pis:
            if pi != rho and finer(pi, rho) and not set(table[pi]) <= set(table[rho]):
                raise ModelError(f"strategies under {render_partition(pi)} are not available under {render_partition(rho)}")
    profiles: dict[str, ChoiceProfile] = {}
    utils: dict[str, tuple[int, ...]] = {}
    k = 0
    for pi in sorted(pis, key=lambda p: (-len(p), render_partition(p))):
        for s in table[pi]:
            s = tuple(s)
            if s not in utilities:
                raise ModelError(f"no utility for merged profile {s}")
            name = (names or {}).get((pi, s)) or f"s{k}"
            k += 1
            by = {}
            for block in pi:
                c = frozenset((p, s[players.index(p)]) for p in block)
                for p in block:
                    by[p] = c
            profiles[name] = ChoiceProfile.of(by)
            utils[name] = tuple(utilities[s])
    return CPDModel.from_utilities(players, strategies, profiles, utils, rcpd)


# ---------------------------------------------------------------- JSON


def _jsonable(x: Any):
    if isinstance(x, frozenset):
        return sorted((_jsonable(y) for y in x), key=repr)
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def _pairs(rel: Iterable[Pair]) -> list[list[str]]:
    return [list(p) for p in sorted(rel, key=lambda p: (natkey(p[0]), natkey(p[1])))]


def _vocab_to_json(v: Vocabulary) -> dict:
    return {"variables": list(v.variables), "predicates": dict(v.predicates), "nominals": list(v.nominals)}


def _vocab_from_json(d: Mapping) -> Vocabulary:
    return Vocabulary(tuple(str(x) for x in d["variables"]), tuple(d.get("predicates", {}).items()), tuple(d.get("nominals", ())))


def _atom_key(a: Pred) -> str:
    return f"{a.name}({','.join(a.args)})"


def _atom_from_key(s: str) -> Pred:
    name, rest = s.split("(", 1)
    args = rest.rstrip(")")
    return Pred(name, tuple(a for a in args.split(",") if a))


def model_to_json(m) -> dict:
    if isinstance(m, RPDModel):
        return {
            "kind": "rpd",
            "vocabulary": _vocab_to_json(m.vocab),
            "points": sort_names(m.points),
            "relations": {
                "sim": {x: _pairs(m.sim[x]) for x in m.vocab.variables},
                "leq": {x: _pairs(m.leq[x]) for x in m.vocab.variables},
            },
            "valuation": {_atom_key(a): sort_names(ws) for a, ws in sorted(m.valuation.items(), key=lambda t: _atom_key(t[0])) if ws},
            "nominals": dict(sorted(m.naming.items())),
        }
    if isinstance(m, PDModel):
        return {
            "kind": "pd",
            "vocabulary": _vocab_to_json(m.vocab),
            "objects": sorted((_jsonable(o) for o in m.objects), key=repr),
            "assignments": {n: {x: _jsonable(o) for x, o in sorted(a.items())} for n, a in sorted(m.assignments.items(), key=lambda t: natkey(t[0]))},
            "relations": {"pref": {x: _pairs(m.prefs[x]) for x in m.vocab.variables}},
            "interpretation": {p: sorted((_jsonable(t) for t in ts), key=repr) for p, ts in sorted(m.interp.items())},
            "nominals": dict(sorted(m.naming.items())),
        }
    if isinstance(m, CPDModel):
        d = {
            "kind": "cpd",
            "players": list(m.players),
            "strategies": list(m.strategies),
            "profiles": {
                n: {p: dict(sorted(c, key=lambda t: natkey(t[0]))) for p, c in a.choices}
                for n, a in sorted(m.profiles.items(), key=lambda t: natkey(t[0]))
            },
        }
        if m.utilities is not None:
            d["utilities"] = {n: dict(zip(m.players, u)) for n, u in sorted(m.utilities.items(), key=lambda t: natkey(t[0]))}
        else:
            d["relations"] = {"pref": {p: _pairs(m.prefs[p]) for p in m.players}}
        if m.rcpd:
            d["rcpd"] = True
        return d
    raise TypeError(f"not a model: {m!r}")


def dumps_model(m) -> str:
    return json.dumps(model_to_json(m), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_model(m, path: str | Path) -> None:
    Path(path).write_text(dumps_model(m), encoding="utf-8")


def _obj(x):
    return tuple(_obj(y) for y in x) if isinstance(x, list) else x


def _relations(raw: Mapping, universe, label: str, repair: bool) -> frozenset[Pair]:
    rel = frozenset((str(a), str(b)) for a, b in raw)
    if repair:
        missing = [w for w in universe if (w, w) not in rel]
        if missing:
            log.warning("%s is not reflexive at %s; adding the reflexive closure", label, ", ".join(missing))
            rel = reflexive_closure(rel, universe)
    return rel


def model_from_json(d: Mapping, repair: bool = True):
    try:
        kind = d["kind"]
        if kind == "rpd":
            vocab = _vocab_from_json(d["vocabulary"])
            points = tuple(str(p) for p in d["points"])
            rels = d.get("relations", {})
            sim = {x: _relations(rels.get("sim", {}).get(x, []), points, f"sim[{x}]", repair) for x in vocab.variables}
            leq = {x: _relations(rels.get("leq", {}).get(x, []), points, f"leq[{x}]", repair) for x in vocab.variables}
            valuation = {_atom_from_key(k): frozenset(v) for k, v in d.get("valuation", {}).items()}
            return RPDModel(vocab, points, sim, leq, valuation, dict(d.get("nominals", {})))
        if kind == "pd":
            vocab = _vocab_from_json(d["vocabulary"])
            assignments = {str(n): {str(x): _obj(o) for x, o in a.items()} for n, a in d["assignments"].items()}
            names = tuple(assignments)
            prefs = {x: _relations(d.get("relations", {}).get("pref", {}).get(x, []), names, f"pref[{x}]", repair) for x in vocab.variables}
            interp = {p: frozenset(tuple(_obj(o) for o in t) for t in ts) for p, ts in d.get("interpretation", {}).items()}
            objects = tuple(_obj(o) for o in d.get("objects", [])) or tuple({o for a in assignments.values() for o in a.values()})
            return PDModel(vocab, objects, assignments, prefs, interp, dict(d.get("nominals", {})))
        if kind == "cpd":
            players = tuple(str(p) for p in d["players"])
            profiles = {
                str(n): ChoiceProfile(tuple(sorted(((str(p), frozenset((str(q), s) for q, s in c.items())) for p, c in a.items()), key=lambda t: natkey(t[0]))))
                for n, a in d["profiles"].items()
            }
            rcpd = bool(d.get("rcpd", False))
            if "utilities" in d:
                utils = {}
                for n, u in d["utilities"].items():
                    utils[str(n)] = tuple(u[p] for p in sort_names(players)) if isinstance(u, dict) else tuple(u)
                return CPDModel.from_utilities(players, d["strategies"], profiles, utils, rcpd)
            names = tuple(profiles)
            prefs = {p: _relations(d["relations"]["pref"].get(p, []), names, f"pref[{p}]", repair) for p in players}
            return CPDModel(players, tuple(d["strategies"]), profiles, prefs, None, rcpd)
    except (KeyError, TypeError, AttributeError, VocabularyError) as e:
        raise ModelError(f"malformed model file: {e}") from e
    raise ModelError(f"unknown model kind {d.get('kind')!r}")


def load_model(path: str | Path, repair: bool = True):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ModelError(f"{path}: {e}") from e
    return model_from_json(data, repair=repair)


def fixture_path(name: str) -> Path:
    return Path(__file__).parent / "fixtures" / name


def validate(m) -> list[Violation]:
    if isinstance(m, RPDModel):
        return validate_rpd(m)
    if isinstance(m, PDModel):
        return validate_pd(m)
    if isinstance(m, CPDModel):
        return validate_rcpd(m) if m.rcpd else validate_cpd(m)
    raise TypeError(f"not a model: {m!r}")


def as_rpd(m) -> RPDModel:
    if isinstance(m, RPDModel):
        return m
    if isinstance(m, PDModel):
        return pd_to_rpd(m)
    if isinstance(m, CPDModel):
        return m.to_rpd()
    raise TypeError(f"not a model: {m!r}")
