"""Random models and formulas used by the fuzzers and the test-suite."""

from __future__ import annotations

import random
from itertools import product

from .models import (
    CPDModel, PDModel, RPDModel, all_partitions, build_cpd_from_game, finer, rcpd_violations,
    validate_cpd,
)
from .syntax import (
    And, Box, Bot, Dep, Diamond, Formula, Implies, Nom, Not, Or, Pred, Top, Vocabulary,
)


def random_subset(rng: random.Random, items, p: float = 0.5) -> frozenset:
    return frozenset(x for x in items if rng.random() < p)


def random_partition_labels(rng: random.Random, n: int) -> list[int]:
    k = rng.randint(1, n)
    return [rng.randrange(k) for _ in range(n)]


def random_preorder(rng: random.Random, names, density: float | None = None) -> frozenset:
    names = list(names)
    density = rng.random() * 0.6 if density is None else density
    rel = {(a, a) for a in names}
    for a in names:
        for b in names:
            if a != b and rng.random() < density:
                rel.add((a, b))
    return transitive_closure(rel)


def random_total_preorder(rng: random.Random, names, levels: int = 3) -> frozenset:
    rank = {a: rng.randrange(levels) for a in names}
    return frozenset((a, b) for a in names for b in names if rank[a] <= rank[b])


def transitive_closure(rel) -> frozenset:
    rel = set(rel)
    nodes = {a for a, _ in rel} | {b for _, b in rel}
    for k in nodes:
        into = [a for a in nodes if (a, k) in rel]
        outof = [b for b in nodes if (k, b) in rel]
        for a in into:
            for b in outof:
                rel.add((a, b))
    return frozenset(rel)


def random_vocab(rng: random.Random, max_vars: int = 3, max_preds: int = 2, nominals: int = 0) -> Vocabulary:
    nv = rng.randint(1, max_vars)
    variables = tuple(f"x{k}" for k in range(nv)) if nv > 1 or rng.random() < 0.5 else ("x0",)
    preds = tuple((f"P{k}", rng.randint(0, min(2, nv))) for k in range(rng.randint(0, max_preds)))
    return Vocabulary(variables, preds, tuple(f"i{k}" for k in range(nominals)))


def random_rpd(
    rng: random.Random,
    vocab: Vocabulary,
    max_points: int = 6,
    name_prob: float = 0.7,
    all_named: bool = False,
    min_points: int = 1,
) -> RPDModel:
    n = rng.randint(min_points, max_points)
    points = tuple(f"w{k}" for k in range(n))
    sim = {}
    for x in vocab.variables:
        lab = random_partition_labels(rng, n)
        sim[x] = frozenset((points[a], points[b]) for a in range(n) for b in range(n) if lab[a] == lab[b])
    leq = {}
    for x in vocab.variables:
        leq[x] = random_total_preorder(rng, points) if rng.random() < 0.3 else random_preorder(rng, points)
    valuation = {}
    for name, ar in vocab.predicates:
        for args in product(vocab.variables, repeat=ar):
            cls: dict[str, int] = {}
            reps: list[str] = []
            for w in points:
                for k, r in enumerate(reps):
                    if all((w, r) in sim[x] for x in args):
                        cls[w] = k
                        break
                else:
                    cls[w] = len(reps)
                    reps.append(w)
            chosen = {k for k in range(len(reps)) if rng.random() < 0.5}
            ext = frozenset(w for w in points if cls[w] in chosen)
            if ext:
                valuation[Pred(name, args)] = ext
    naming = {}
    for nom in vocab.nominals:
        if all_named or rng.random() < name_prob:
            naming[nom] = rng.choice(points)
    return RPDModel(vocab, points, sim, leq, valuation, naming)


def random_pd(
    rng: random.Random,
    vocab: Vocabulary,
    max_assignments: int = 6,
    max_objects: int = 3,
) -> PDModel:
    objects = tuple(f"o{k}" for k in range(rng.randint(1, max_objects)))
    space = list(product(objects, repeat=len(vocab.variables)))
    k = rng.randint(1, min(max_assignments, len(space)))
    chosen = rng.sample(space, k)
    assignments = {f"a{j}": dict(zip(vocab.variables, t)) for j, t in enumerate(chosen)}
    prefs = {}
    for x in vocab.variables:
        prefs[x] = random_total_preorder(rng, assignments) if rng.random() < 0.5 else random_preorder(rng, assignments)
    interp = {}
    for name, ar in vocab.predicates:
        interp[name] = frozenset(t for t in product(objects, repeat=ar) if rng.random() < 0.4)
    naming = {nom: rng.choice(list(assignments)) for nom in vocab.nominals if rng.random() < 0.7}
    return PDModel(vocab, objects, assignments, prefs, interp, naming)


def full_product_pd(rng: random.Random, vocab: Vocabulary, max_objects: int = 2) -> PDModel:
    objects = tuple(f"o{k}" for k in range(rng.randint(1, max_objects)))
    space = list(product(objects, repeat=len(vocab.variables)))
    assignments = {f"a{j}": dict(zip(vocab.variables, t)) for j, t in enumerate(space)}
    prefs = {x: random_preorder(rng, assignments) for x in vocab.variables}
    return PDModel(vocab, objects, assignments, prefs, {}, {})


def random_cpd(
    rng: random.Random,
    n_players: int = 2,
    n_strategies: int = 2,
    rcpd: bool = False,
    tries: int = 500,
) -> CPDModel:
    """Random choice-profile model; with rcpd=True, retries until no block determines its complement."""
    players = tuple(str(k + 1) for k in range(n_players))
    strategies = tuple("abcdefg"[:n_strategies])
    space = list(product(strategies, repeat=n_players))
    pis = all_partitions(players)
    for _ in range(tries):
        base = {}
        for pi in pis:
            if len(pi) == 2 and rcpd:
                # product-shaped sets keep both blocks undetermined more often
                base[pi] = _product_like(rng, pi, players, strategies)
            else:
                base[pi] = {s for s in space if rng.random() < 0.4}
        table = {pi: set() for pi in pis}
        for pi in pis:
            for rho in pis:
                if finer(rho, pi):
                    table[pi] |= base[rho]
        if any(not v for v in table.values()):
            continue
        merged = sorted(set().union(*table.values()))
        utilities = {s: tuple(rng.randrange(4) for _ in players) for s in merged}
        m = build_cpd_from_game(players, strategies, {pi: sorted(v) for pi, v in table.items()}, utilities)
        if rcpd:
            if rcpd_violations(m):
                continue
            m.rcpd = True
        if validate_cpd(m):
            continue
        return m
    raise RuntimeError("could not draw a model meeting the constraints")


def _product_like(rng, pi, players, strategies) -> set:
    blocks = sorted(pi, key=sorted)
    per_block = []
    for b in blocks:
        opts = list(product(strategies, repeat=len(b)))
        k = rng.randint(min(2, len(opts)), len(opts))
        per_block.append((sorted(b), rng.sample(opts, k)))
    out = set()
    for combo in product(*(o for _, o in per_block)):
        s = {}
        for (b, _), vals in zip(per_block, combo):
            s.update(zip(b, vals))
        if rng.random() < 0.85:
            out.add(tuple(s[p] for p in players))
    return out


def random_sets(rng: random.Random, vocab: Vocabulary) -> tuple[frozenset, frozenset, frozenset]:
    vs = vocab.variables
    return random_subset(rng, vs, 0.35), random_subset(rng, vs, 0.3), random_subset(rng, vs, 0.25)


def random_formula(
    rng: random.Random,
    vocab: Vocabulary,
    depth: int = 2,
    size: int = 4,
    sugar: bool = True,
    nominals: bool = True,
) -> Formula:
    """Random formula with modal depth at most `depth`."""
    def leaf() -> Formula:
        choices = ["dep"]
        if vocab.predicates:
            choices += ["pred", "pred"]
        if nominals and vocab.nominals:
            choices.append("nom")
        if sugar:
            choices.append("const")
        kind = rng.choice(choices)
        if kind == "pred":
            name, ar = rng.choice(vocab.predicates)
            return Pred(name, tuple(rng.choice(vocab.variables) for _ in range(ar)))
        if kind == "nom":
            return Nom(rng.choice(vocab.nominals))
        if kind == "const":
            return rng.choice([Top(), Bot()])
        return Dep(random_subset(rng, vocab.variables, 0.4), rng.choice(vocab.variables))

    def go(d: int, budget: int) -> Formula:
        if budget <= 1:
            return leaf()
        ops = ["not", "and"] + (["box"] * 2 if d > 0 else [])
        if sugar:
            ops += ["or", "imp"] + (["dia"] if d > 0 else [])
        op = rng.choice(ops)
        if op == "not":
            return Not(go(d, budget - 1))
        if op in ("and", "or", "imp"):
            k = rng.randint(1, budget - 1)
            l, r = go(d, k), go(d, budget - k)
            return {"and": And, "or": Or, "imp": Implies}[op](l, r)
        xs, ys, zs = random_sets(rng, vocab)
        cls = Box if op == "box" else Diamond
        return cls(xs, ys, zs, go(d - 1, budget - 1))

    return go(depth, rng.randint(1, size))
