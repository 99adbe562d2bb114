"""Formulas of the preference/dependence language, their parser and renderer."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator


class VocabularyError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


RESERVED = frozenset({"D", "p", "wPa", "sPa", "Na", "Core", "top", "bot", "nom"})


def natkey(name: str):
    return (0, int(name), "") if name.isdigit() else (1, 0, name)


def sort_names(names: Iterable[str]) -> list[str]:
    return sorted(names, key=natkey)


@dataclass(frozen=True)
class Vocabulary:
    variables: tuple[str, ...]
    predicates: tuple[tuple[str, int], ...] = ()
    nominals: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "nominals", tuple(self.nominals))
        preds = self.predicates
        if isinstance(preds, dict):
            preds = preds.items()
        object.__setattr__(self, "predicates", tuple(sorted((str(n), int(a)) for n, a in preds)))
        if not self.variables:
            raise VocabularyError("vocabulary needs at least one variable")
        names = list(self.variables) + [n for n, _ in self.predicates] + list(self.nominals)
        seen = set()
        for n in names:
            if n in seen:
                raise VocabularyError(f"name {n!r} used twice")
            seen.add(n)
            if not re.fullmatch(r"[A-Za-z0-9_']+", n):
                raise VocabularyError(f"bad identifier {n!r}")
        for n, a in self.predicates:
            if a < 0:
                raise VocabularyError(f"negative arity for {n}")
            if n in RESERVED:
                raise VocabularyError(f"predicate name {n!r} is reserved")

    @property
    def arity(self) -> dict[str, int]:
        return dict(self.predicates)

    @property
    def varset(self) -> frozenset[str]:
        return frozenset(self.variables)

    def complement(self, xs: Iterable[str]) -> frozenset[str]:
        return self.varset - frozenset(xs)

    def with_nominals(self, nominals: Iterable[str]) -> "Vocabulary":
        return Vocabulary(self.variables, self.predicates, tuple(nominals))


# ---------------------------------------------------------------- AST


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __rshift__(self, other):
        return Implies(self, other)

    def __str__(self):
        return render(self)


def _fs(xs) -> frozenset[str]:
    return xs if isinstance(xs, frozenset) else frozenset(xs)


@dataclass(frozen=True, repr=False)
class Pred(Formula):
    name: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True, repr=False)
class Dep(Formula):
    xs: frozenset[str]
    y: str

    def __post_init__(self):
        object.__setattr__(self, "xs", _fs(self.xs))


@dataclass(frozen=True, repr=False)
class Nom(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Box(Formula):
    xs: frozenset[str]
    ys: frozenset[str]
    zs: frozenset[str]
    body: Formula

    def __post_init__(self):
        for f in ("xs", "ys", "zs"):
            object.__setattr__(self, f, _fs(getattr(self, f)))


# sugar


@dataclass(frozen=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Bot(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Diamond(Formula):
    xs: frozenset[str]
    ys: frozenset[str]
    zs: frozenset[str]
    body: Formula

    def __post_init__(self):
        for f in ("xs", "ys", "zs"):
            object.__setattr__(self, f, _fs(getattr(self, f)))


@dataclass(frozen=True, repr=False)
class WPa(Formula):
    xs: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "xs", _fs(self.xs))


@dataclass(frozen=True, repr=False)
class SPa(Formula):
    xs: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "xs", _fs(self.xs))


@dataclass(frozen=True, repr=False)
class Na(Formula):
    xs: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "xs", _fs(self.xs))


@dataclass(frozen=True, repr=False)
class Coal(Formula):
    """The coalition-structure atom p_X."""

    xs: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "xs", _fs(self.xs))


@dataclass(frozen=True, repr=False)
class CoreOf(Formula):
    xs: frozenset[str]
    nominal: str

    def __post_init__(self):
        object.__setattr__(self, "xs", _fs(self.xs))


@dataclass(frozen=True, repr=False)
class At(Formula):
    nominal: str
    body: Formula


def _cache_hash(raw):
    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = raw(self)
            object.__setattr__(self, "_hash", h)
            return h

    return __hash__


for _cls in (Pred, Dep, Nom, Not, And, Box, Top, Bot, Or, Implies, Diamond, WPa, SPa, Na, Coal, CoreOf, At):
    _cls.__repr__ = lambda self: f"<{render(self)}>"
    _cls.__hash__ = _cache_hash(_cls.__hash__)

CORE_TYPES = (Pred, Dep, Nom, Not, And, Box)


def is_core(phi: Formula) -> bool:
    return all(isinstance(s, CORE_TYPES) for s in walk(phi))


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, (Not,)):
        return (phi.arg,)
    if isinstance(phi, (And, Or, Implies)):
        return (phi.left, phi.right)
    if isinstance(phi, (Box, Diamond, At)):
        return (phi.body,)
    return ()


def walk(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(children(f))


def subformulas(phi: Formula) -> set[Formula]:
    return set(walk(phi))


def size(phi: Formula) -> int:
    return sum(1 for _ in walk(phi))


def modal_depth(phi: Formula) -> int:
    """Box nesting depth of the fully expanded formula."""
    if isinstance(phi, (Box, Diamond)):
        return 1 + modal_depth(phi.body)
    if isinstance(phi, At):
        return 1 + modal_depth(phi.body)
    if isinstance(phi, (WPa, SPa, Na)):
        return 1
    if isinstance(phi, CoreOf):
        return 3
    return max((modal_depth(c) for c in children(phi)), default=0)


def nominals_in(phi: Formula) -> set[str]:
    out = set()
    for f in walk(phi):
        if isinstance(f, Nom):
            out.add(f.name)
        elif isinstance(f, (At, CoreOf)):
            out.add(f.nominal)
    return out


def variables_in(phi: Formula) -> set[str]:
    out: set[str] = set()
    for f in walk(phi):
        if isinstance(f, Pred):
            out.update(f.args)
        elif isinstance(f, Dep):
            out.update(f.xs)
            out.add(f.y)
        elif isinstance(f, (Box, Diamond)):
            out.update(f.xs | f.ys | f.zs)
        elif isinstance(f, (WPa, SPa, Na, Coal, CoreOf)):
            out.update(f.xs)
    return out


# ---------------------------------------------------------------- builders


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return Bot()
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def conjuncts(phi: Formula) -> list[Formula]:
    if isinstance(phi, And):
        return conjuncts(phi.left) + conjuncts(phi.right)
    return [phi]


def global_box(xs: Iterable[str], phi: Formula) -> Formula:
    """Box over the X-equivalence only."""
    return Box(frozenset(xs), frozenset(), frozenset(), phi)


def universal(phi: Formula) -> Formula:
    return global_box((), phi)


def existential(phi: Formula) -> Formula:
    return Diamond(frozenset(), frozenset(), frozenset(), phi)


def dep_all(xs: Iterable[str], ys: Iterable[str]) -> Formula:
    xs = frozenset(xs)
    return conj(Dep(xs, y) for y in sort_names(ys))


def mk_wpa(xs: Iterable[str], vocab: Vocabulary) -> Formula:
    xs = frozenset(xs)
    return Box(vocab.complement(xs), frozenset(), xs, Bot())


def mk_spa(xs: Iterable[str], vocab: Vocabulary) -> Formula:
    xs = frozenset(xs)
    rest = vocab.complement(xs)
    return conj(Box(rest, xs - {x}, frozenset({x}), Bot()) for x in sort_names(xs))


def mk_na(xs: Iterable[str], vocab: Vocabulary) -> Formula:
    xs = frozenset(xs)
    return conj(Box(vocab.complement({x}), frozenset(), frozenset({x}), Bot()) for x in sort_names(xs))


def mk_coalition_atom(xs: Iterable[str], vocab: Vocabulary) -> Formula:
    xs = frozenset(xs)
    if not xs:
        raise VocabularyError("coalition atom needs a non-empty set")
    parts = [dep_all({i}, xs) for i in sort_names(xs)]
    parts += [Not(Dep(xs, j)) for j in sort_names(vocab.complement(xs))]
    return conj(parts)


def nonempty_subsets(xs: Iterable[str]) -> list[frozenset[str]]:
    xs = sort_names(xs)
    return [frozenset(c) for k in range(1, len(xs) + 1) for c in combinations(xs, k)]


def subsets(xs: Iterable[str]) -> list[frozenset[str]]:
    return [frozenset()] + nonempty_subsets(xs)


def mk_core(xs: Iterable[str], nominal: str, vocab: Vocabulary) -> Formula:
    xs = frozenset(xs)
    if not xs:
        raise VocabularyError("core formula needs a non-empty set")
    rest = vocab.complement(xs)
    i = Nom(nominal)
    clauses = []
    for c in nonempty_subsets(xs):
        escape = disj(Diamond(rest, frozenset({x}), frozenset(), i) for x in sort_names(c))
        inner = Diamond(rest | c, frozenset(), frozenset(), escape)
        clauses.append(global_box(rest, Implies(mk_coalition_atom(c, vocab), inner)))
    return conj([i, mk_coalition_atom(xs, vocab)] + clauses)


def mk_core_partition(blocks: Iterable[Iterable[str]], nominal: str, vocab: Vocabulary) -> Formula:
    return conj(mk_core(b, nominal, vocab) for b in sorted((frozenset(b) for b in blocks), key=lambda b: sort_names(b)))


def mk_at(nominal: str, phi: Formula) -> Formula:
    return Not(Box(frozenset(), frozenset(), frozenset(), Not(And(Nom(nominal), phi))))


def top_formula(vocab: Vocabulary) -> Formula:
    v0 = vocab.variables[0]
    return Dep(frozenset({v0}), v0)


_MEMO_LIMIT = 200_000
_EXPANDED: dict[Vocabulary, dict[Formula, Formula]] = {}
_CHECKED: dict[Vocabulary, set[Formula]] = {}


def _memo_for(store: dict, vocab: Vocabulary, factory):
    memo = store.get(vocab)
    if memo is None or len(memo) > _MEMO_LIMIT:
        if len(store) > 32:
            store.clear()
        memo = store[vocab] = factory()
    return memo


def expand_derived(phi: Formula, vocab: Vocabulary) -> Formula:
    """Rewrite every abbreviation into the core constructors."""
    memo = _memo_for(_EXPANDED, vocab, dict)
    noms = set(vocab.nominals)

    def go(f: Formula) -> Formula:
        hit = memo.get(f)
        if hit is not None:
            return hit
        if isinstance(f, (Pred, Dep)):
            out = f
        elif isinstance(f, Nom):
            if f.name not in noms:
                raise VocabularyError(f"unknown nominal {f.name!r}")
            out = f
        elif isinstance(f, Not):
            out = Not(go(f.arg))
        elif isinstance(f, And):
            out = And(go(f.left), go(f.right))
        elif isinstance(f, Box):
            out = Box(f.xs, f.ys, f.zs, go(f.body))
        elif isinstance(f, Top):
            out = top_formula(vocab)
        elif isinstance(f, Bot):
            out = Not(top_formula(vocab))
        elif isinstance(f, Or):
            out = Not(And(Not(go(f.left)), Not(go(f.right))))
        elif isinstance(f, Implies):
            out = Not(And(go(f.left), Not(go(f.right))))
        elif isinstance(f, Diamond):
            out = Not(Box(f.xs, f.ys, f.zs, Not(go(f.body))))
        elif isinstance(f, WPa):
            out = go(mk_wpa(f.xs, vocab))
        elif isinstance(f, SPa):
            out = go(mk_spa(f.xs, vocab))
        elif isinstance(f, Na):
            out = go(mk_na(f.xs, vocab))
        elif isinstance(f, Coal):
            out = go(mk_coalition_atom(f.xs, vocab))
        elif isinstance(f, CoreOf):
            out = go(mk_core(f.xs, f.nominal, vocab))
        elif isinstance(f, At):
            if f.nominal not in noms:
                raise VocabularyError(f"unknown nominal {f.nominal!r}")
            out = mk_at(f.nominal, go(f.body))
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[f] = out
        return out

    return go(phi)


def check_vocabulary(phi: Formula, vocab: Vocabulary) -> None:
    checked = _memo_for(_CHECKED, vocab, set)
    seen: list[Formula] = []
    try:
        _check_nodes(phi, vocab, checked, seen)
    except VocabularyError:
        checked.difference_update(seen)
        raise


def _check_nodes(phi: Formula, vocab: Vocabulary, checked: set, seen: list) -> None:
    arity = vocab.arity
    vs = vocab.varset
    noms = set(vocab.nominals)
    stack = [phi]
    bad: set[str] = set()
    while stack:
        f = stack.pop()
        if f in checked:
            continue
        checked.add(f)
        seen.append(f)
        if isinstance(f, Pred):
            if f.name not in arity:
                raise VocabularyError(f"unknown predicate {f.name!r}")
            if len(f.args) != arity[f.name]:
                raise VocabularyError(f"{f.name} expects {arity[f.name]} arguments, got {len(f.args)}")
            bad |= set(f.args) - vs
        elif isinstance(f, Dep):
            bad |= (f.xs | {f.y}) - vs
        elif isinstance(f, Nom) and f.name not in noms:
            raise VocabularyError(f"unknown nominal {f.name!r}")
        elif isinstance(f, (At, CoreOf)) and f.nominal not in noms:
            raise VocabularyError(f"unknown nominal {f.nominal!r}")
        for attr in ("xs", "ys", "zs"):
            bad |= set(getattr(f, attr, ())) - vs
        stack.extend(children(f))
    if bad:
        raise VocabularyError(f"unknown variable(s) {sort_names(bad)}")


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(->)|([~&|()\[\]<>{};,@:])|([A-Za-z0-9_']+))")


def tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(("op", "->", start))
        elif m.group(2):
            out.append(("op", m.group(2), start))
        else:
            out.append(("id", m.group(3), start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        t = self.take()
        if t[1] != value or t[0] == "eof":
            raise ParseError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2])
        return t

    def ident(self) -> str:
        t = self.take()
        if t[0] != "id":
            raise ParseError(f"expected identifier, found {t[1] or 'end of input'!r}", t[2])
        return t[1]

    def at(self, value: str) -> bool:
        t = self.peek()
        return t[0] == "op" and t[1] == value

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.take()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.at("|"):
            self.take()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.at("&"):
            self.take()
            out = And(out, self.unary())
        return out

    def varset(self) -> frozenset[str]:
        self.expect("{")
        names = []
        if not self.at("}"):
            names.append(self.ident())
            while self.at(","):
                self.take()
                names.append(self.ident())
        self.expect("}")
        return frozenset(names)

    def triple(self, close: str):
        xs = self.varset()
        self.expect(";")
        ys = self.varset()
        self.expect(";")
        zs = self.varset()
        self.expect(close)
        return xs, ys, zs

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "op":
            if val == "~":
                self.take()
                return Not(self.unary())
            if val == "[":
                self.take()
                return Box(*self.triple("]"), self.unary())
            if val == "<":
                self.take()
                return Diamond(*self.triple(">"), self.unary())
            if val == "@":
                self.take()
                name = self.ident()
                return At(name, self.unary())
            if val == "(":
                self.take()
                inner = self.formula()
                self.expect(")")
                return inner
            raise ParseError(f"unexpected {val!r}", pos)
        if kind == "eof":
            raise ParseError("unexpected end of input", pos)
        return self.atom()

    def atom(self) -> Formula:
        _, name, pos = self.take()
        nxt = self.peek()
        if nxt[0] == "op" and nxt[1] == "(":
            self.take()
            args = []
            if not self.at(")"):
                args.append(self.ident())
                while self.at(","):
                    self.take()
                    args.append(self.ident())
            self.expect(")")
            return Pred(name, tuple(args))
        opens_set = nxt[0] == "op" and nxt[1] == "{"
        if name == "top":
            return Top()
        if name == "bot":
            return Bot()
        if name == "nom":
            self.expect(":")
            return Nom(self.ident())
        if opens_set:
            if name == "D":
                xs = self.varset()
                return Dep(xs, self.ident())
            if name == "wPa":
                return WPa(self.varset())
            if name == "sPa":
                return SPa(self.varset())
            if name == "Na":
                return Na(self.varset())
            if name == "p":
                return Coal(self.varset())
            if name == "Core":
                xs = self.varset()
                return CoreOf(xs, self.ident())
        raise ParseError(f"unexpected identifier {name!r}", pos)


def parse_formula(text: str, vocab: Vocabulary | None = None) -> Formula:
    """Parse concrete syntax; when a vocabulary is given, names and arities are checked."""
    p = _Parser(text)
    phi = p.formula()
    t = p.peek()
    if t[0] != "eof":
        raise ParseError(f"trailing input {t[1]!r}", t[2])
    if vocab is not None:
        check_vocabulary(phi, vocab)
    return phi


def infer_vocabulary(phi: Formula, extra_variables: Iterable[str] = ()) -> Vocabulary:
    """Smallest vocabulary covering the names a formula mentions."""
    preds: dict[str, int] = {}
    for f in walk(phi):
        if isinstance(f, Pred):
            if preds.setdefault(f.name, len(f.args)) != len(f.args):
                raise VocabularyError(f"predicate {f.name} used with two arities")
    vs = sort_names(variables_in(phi) | set(extra_variables)) or ["x"]
    return Vocabulary(tuple(vs), tuple(preds.items()), tuple(sort_names(nominals_in(phi))))


# ---------------------------------------------------------------- renderer


def render_set(xs: Iterable[str]) -> str:
    return "{" + ",".join(sort_names(xs)) + "}"


def render(phi: Formula) -> str:
    return _render(phi, 0)


_PREC = {Implies: 1, Or: 2, And: 3}


def _render(f: Formula, ctx: int) -> str:
    prec = _PREC.get(type(f), 4)
    if isinstance(f, Implies):
        s = f"{_render(f.left, 2)} -> {_render(f.right, 1)}"
    elif isinstance(f, Or):
        s = f"{_render(f.left, 2)} | {_render(f.right, 3)}"
    elif isinstance(f, And):
        s = f"{_render(f.left, 3)} & {_render(f.right, 4)}"
    elif isinstance(f, Pred):
        s = f"{f.name}({','.join(f.args)})"
    elif isinstance(f, Dep):
        s = f"D{render_set(f.xs)}{f.y}"
    elif isinstance(f, Nom):
        s = f"nom:{f.name}"
    elif isinstance(f, Top):
        s = "top"
    elif isinstance(f, Bot):
        s = "bot"
    elif isinstance(f, Not):
        s = "~" + _render(f.arg, 4)
    elif isinstance(f, Box):
        s = f"[{render_set(f.xs)};{render_set(f.ys)};{render_set(f.zs)}]" + _render(f.body, 4)
    elif isinstance(f, Diamond):
        s = f"<{render_set(f.xs)};{render_set(f.ys)};{render_set(f.zs)}>" + _render(f.body, 4)
    elif isinstance(f, WPa):
        s = "wPa" + render_set(f.xs)
    elif isinstance(f, SPa):
        s = "sPa" + render_set(f.xs)
    elif isinstance(f, Na):
        s = "Na" + render_set(f.xs)
    elif isinstance(f, Coal):
        s = "p" + render_set(f.xs)
    elif isinstance(f, CoreOf):
        s = f"Core{render_set(f.xs)}{f.nominal}"
    elif isinstance(f, At):
        s = f"@{f.nominal} " + _render(f.body, 4)
    else:
        raise TypeError(f"not a formula: {f!r}")
    return f"({s})" if prec < ctx else s
