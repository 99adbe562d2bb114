"""Model checking over relational models, with PD and choice-profile models routed through the translation."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .models import CPDModel, PDModel, RPDModel, as_rpd, eq_rel
from .syntax import (
    And, Box, Dep, Formula, Nom, Not, Pred, Vocabulary, VocabularyError,
    check_vocabulary, expand_derived, global_box, existential, sort_names, subsets,
)


class Evaluator:
    """Bottom-up evaluator; extensions are bitmasks over the points, memoized per subformula."""

    def __init__(self, model: RPDModel):
        self.model = model
        self.vocab = model.vocab
        self.points = model.points
        self.index = {w: k for k, w in enumerate(self.points)}
        self.full = (1 << len(self.points)) - 1
        self.sim = {x: self._masks(model.sim[x]) for x in self.vocab.variables}
        self.leq = {x: self._masks(model.leq[x]) for x in self.vocab.variables}
        self.lt = {x: self._masks(model.strict(x)) for x in self.vocab.variables}
        self._memo: dict[Formula, int] = {}
        self._acc: dict[tuple, list[int]] = {}
        self._cells: dict[frozenset, list[int]] = {}
        self._prepared: dict[Formula, Formula] = {}

    def _masks(self, rel) -> list[int]:
        out = [0] * len(self.points)
        for a, b in rel:
            out[self.index[a]] |= 1 << self.index[b]
        return out

    def cells(self, xs: frozenset) -> list[int]:
        hit = self._cells.get(xs)
        if hit is None:
            hit = [self.full] * len(self.points)
            for x in xs:
                hit = [a & b for a, b in zip(hit, self.sim[x])]
            self._cells[xs] = hit
        return hit

    def access(self, xs: frozenset, ys: frozenset, zs: frozenset) -> list[int]:
        key = (xs, ys, zs)
        hit = self._acc.get(key)
        if hit is None:
            hit = list(self.cells(xs))
            for y in ys:
                hit = [a & b for a, b in zip(hit, self.leq[y])]
            for z in zs:
                hit = [a & b for a, b in zip(hit, self.lt[z])]
            self._acc[key] = hit
        return hit

    def extension(self, phi: Formula) -> int:
        hit = self._memo.get(phi)
        if hit is not None:
            return hit
        if isinstance(phi, Pred):
            ext = 0
            for w in self.model.valuation.get(phi, ()):
                ext |= 1 << self.index[w]
        elif isinstance(phi, Dep):
            xc = self.cells(phi.xs)
            yc = self.sim[phi.y]
            ext = 0
            for k in range(len(self.points)):
                if xc[k] & ~yc[k] == 0:
                    ext |= 1 << k
        elif isinstance(phi, Nom):
            w = self.model.naming.get(phi.name)
            ext = 0 if w is None else 1 << self.index[w]
        elif isinstance(phi, Not):
            ext = self.full & ~self.extension(phi.arg)
        elif isinstance(phi, And):
            ext = self.extension(phi.left) & self.extension(phi.right)
        elif isinstance(phi, Box):
            body = self.extension(phi.body)
            acc = self.access(phi.xs, phi.ys, phi.zs)
            ext = 0
            for k in range(len(self.points)):
                if acc[k] & ~body == 0:
                    ext |= 1 << k
        else:
            raise TypeError(f"unexpanded formula {phi!r}; call expand_derived first")
        self._memo[phi] = ext
        return ext

    def truth_set(self, phi: Formula) -> frozenset[str]:
        ext = self.extension(phi)
        return frozenset(w for k, w in enumerate(self.points) if ext >> k & 1)


_EVALUATORS: dict[int, tuple[object, Evaluator]] = {}


def evaluator_for(m) -> Evaluator:
    key = id(m)
    hit = _EVALUATORS.get(key)
    if hit is not None and hit[0] is m:
        return hit[1]
    ev = Evaluator(as_rpd(m))
    if len(_EVALUATORS) > 64:
        _EVALUATORS.clear()
    _EVALUATORS[key] = (m, ev)
    return ev


def prepare(phi: Formula, vocab: Vocabulary) -> Formula:
    check_vocabulary(phi, vocab)
    return expand_derived(phi, vocab)


def _prepared(ev: Evaluator, phi: Formula) -> Formula:
    hit = ev._prepared.get(phi)
    if hit is None:
        hit = ev._prepared[phi] = prepare(phi, ev.vocab)
    return hit


def extension(m, phi: Formula) -> frozenset[str]:
    """Points (or assignment / profile names) where phi holds."""
    ev = evaluator_for(m)
    return ev.truth_set(_prepared(ev, phi))


def evaluate(m, w: str, phi: Formula) -> bool:
    ev = evaluator_for(m)
    if w not in ev.index:
        raise KeyError(f"unknown point {w!r}")
    return bool(ev.extension(_prepared(ev, phi)) >> ev.index[w] & 1)


def valid_in_model(m, phi: Formula) -> tuple[bool, str | None]:
    ev = evaluator_for(m)
    ext = ev.extension(_prepared(ev, phi))
    for k, w in enumerate(ev.points):
        if not ext >> k & 1:
            return False, w
    return True, None


def accessible(m, w: str, xs: Iterable[str], ys: Iterable[str], zs: Iterable[str]) -> frozenset[str]:
    ev = evaluator_for(m)
    mask = ev.access(frozenset(xs), frozenset(ys), frozenset(zs))[ev.index[w]]
    return frozenset(u for k, u in enumerate(ev.points) if mask >> k & 1)


# ---------------------------------------------------------------- effectivity


def _pd(m) -> PDModel:
    if isinstance(m, PDModel):
        return m
    if isinstance(m, CPDModel):
        return m.to_pd()
    raise TypeError("effectivity is defined on PD models")


def effectivity(m, xs: Iterable[str], target: Iterable[str]) -> bool:
    """S is in E(X) iff some =_X class lies inside S."""
    pd = _pd(m)
    target = frozenset(target)
    rel = eq_rel(pd, xs)
    return any(all(b in target for (a2, b) in rel if a2 == a) for a in pd.names)


def effectivity_function(m, xs: Iterable[str]) -> list[frozenset[str]]:
    """All subsets of A that X is effective for (exponential; small models only)."""
    pd = _pd(m)
    names = pd.names
    out = []
    for bits in product((0, 1), repeat=len(names)):
        s = frozenset(n for n, b in zip(names, bits) if b)
        if effectivity(pd, xs, s):
            out.append(s)
    return out


@dataclass
class SuperadditivityResult:
    holds: bool
    instance: Formula
    witness: dict | None = None


def superadditivity_instance(xs, ys, phi1: Formula, phi2: Formula) -> Formula:
    xs, ys = frozenset(xs), frozenset(ys)
    left = And(existential(global_box(xs, phi1)), existential(global_box(ys, phi2)))
    return left >> existential(global_box(xs | ys, And(phi1, phi2)))


def check_superadditivity(m, xs, ys, phi1: Formula, phi2: Formula) -> SuperadditivityResult:
    """Check the superadditivity formula instance for disjoint X, Y on m."""
    xs, ys = frozenset(xs), frozenset(ys)
    if xs & ys:
        raise ValueError("superadditivity needs disjoint coalitions")
    inst = superadditivity_instance(xs, ys, phi1, phi2)
    ok, w = valid_in_model(m, inst)
    if ok:
        return SuperadditivityResult(True, inst)
    s1 = extension(m, phi1)
    s2 = extension(m, phi2)
    return SuperadditivityResult(False, inst, {"point": w, "S1": sorted(s1), "S2": sorted(s2)})


def full_profile_condition(m) -> tuple[bool, tuple | None]:
    """Every X-restriction of O^X is realised by some assignment. Returns a missing restriction if not."""
    pd = _pd(m)
    for xs in subsets(pd.vocab.variables):
        order = sort_names(xs)
        have = {tuple(pd.assignments[a][x] for x in order) for a in pd.names}
        for combo in product(pd.objects, repeat=len(order)):
            if combo not in have:
                return False, (tuple(order), combo)
    return True, None
