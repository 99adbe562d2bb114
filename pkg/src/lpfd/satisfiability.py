"""Deciding satisfiability by type elimination over a finite closure, with an induced tree model as certificate."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .models import RPDModel
from .semantics import evaluate, evaluator_for
from .syntax import (
    And, Box, Dep, Formula, Nom, Not, Pred, Vocabulary, check_vocabulary, expand_derived, infer_vocabulary,
    modal_depth, nominals_in, render, sort_names,
)

DEFAULT_MAX_CLOSURE = 40
DEFAULT_MAX_CANDIDATES = 1 << 18
DEFAULT_NODE_LIMIT = 4000


class ResourceExceeded(RuntimeError):
    def __init__(self, message: str, needed: int | None = None):
        super().__init__(message)
        self.needed = needed


# ---------------------------------------------------------------- closure


def normalize(phi: Formula) -> Formula:
    """Drop double negations and move Z out of Y in box subscripts (the relation is unchanged)."""
    if isinstance(phi, Not):
        inner = normalize(phi.arg)
        return inner.arg if isinstance(inner, Not) else Not(inner)
    if isinstance(phi, And):
        return And(normalize(phi.left), normalize(phi.right))
    if isinstance(phi, Box):
        return Box(phi.xs, phi.ys - phi.zs, phi.zs, normalize(phi.body))
    return phi


def base(phi: Formula) -> tuple[Formula, bool]:
    pol = True
    while isinstance(phi, Not):
        phi = phi.arg
        pol = not pol
    return phi, pol


def fdcl(xs: frozenset, fds: Iterable[tuple[frozenset, str]]) -> frozenset:
    """Attribute closure of xs under functional dependencies."""
    out = set(xs)
    fds = list(fds)
    changed = True
    while changed:
        changed = False
        for lhs, y in fds:
            if y not in out and lhs <= out:
                out.add(y)
                changed = True
    return frozenset(out)


def repartitions(b: Box) -> list[Box]:
    u = sort_names(b.ys | b.zs)
    out = []
    for bits in range(1 << len(u)):
        t = frozenset(x for k, x in enumerate(u) if bits >> k & 1)
        out.append(Box(b.xs, t, frozenset(u) - t, b.body))
    return out


@dataclass
class Closure:
    root: Formula
    vocab: Vocabulary
    formulas: list[Formula]
    index: dict[Formula, int]
    depth: int

    def __len__(self):
        return len(self.formulas)

    def __post_init__(self):
        f = self.formulas
        self.atoms = [(k, frozenset(x.args)) for k, x in enumerate(f) if isinstance(x, Pred)]
        self.deps = [(k, x.xs, x.y) for k, x in enumerate(f) if isinstance(x, Dep)]
        self.boxes = [k for k, x in enumerate(f) if isinstance(x, Box)]
        self.ands = [k for k, x in enumerate(f) if isinstance(x, And)]
        self.lits = {k: self.lit(x.body) for k, x in enumerate(f) if isinstance(x, Box)}

    def lit(self, phi: Formula) -> tuple[int, bool]:
        b, pol = base(phi)
        return self.index[b], pol

    def holds(self, bits: int, phi: Formula) -> bool:
        k, pol = self.lit(phi)
        return bool(bits >> k & 1) == pol

    def render_type(self, bits: int) -> list[str]:
        return [render(f if bits >> k & 1 else Not(f)) for k, f in enumerate(self.formulas) if not isinstance(f, And)]


def closure(alpha: Formula, vocab: Vocabulary | None = None) -> Closure:
    """Subformulas, all repartitions of every box, and an <X;{};{}>top probe for every dependence atom."""
    if nominals_in(alpha):
        raise ValueError("satisfiability is decided for formulas without nominals")
    vocab = vocab or infer_vocabulary(alpha)
    check_vocabulary(alpha, vocab)
    core = normalize(expand_derived(alpha, vocab))
    if modal_depth(core) == 0:
        top = expand_derived(Dep(frozenset({vocab.variables[0]}), vocab.variables[0]), vocab)
        core = And(core, Box(frozenset(), frozenset(), frozenset(), top))
    v0 = vocab.variables[0]
    bottom = Not(Dep(frozenset({v0}), v0))
    order: list[Formula] = []
    index: dict[Formula, int] = {}
    stack = [core]
    while stack:
        f, _ = base(stack.pop())
        if f in index:
            continue
        index[f] = len(order)
        order.append(f)
        if isinstance(f, And):
            stack += [f.right, f.left]
        elif isinstance(f, Box):
            stack.append(f.body)
            stack += [r for r in repartitions(f) if r != f]
        elif isinstance(f, Dep):
            stack.append(Box(f.xs, frozenset(), frozenset(), bottom))
    return Closure(core, vocab, order, index, modal_depth(core))


# ---------------------------------------------------------------- Hintikka types


def _formula_value(cl: Closure, f: Formula, assign: dict[int, bool]) -> bool:
    b, pol = base(f)
    if isinstance(b, And):
        v = _formula_value(cl, b.left, assign) and _formula_value(cl, b.right, assign)
    else:
        v = assign[cl.index[b]]
    return v == pol


def _free_deps(f: Formula, cl: Closure) -> set[int]:
    """Indices of the atom/dependence/box bits the propositional value of f depends on."""
    b, _ = base(f)
    if isinstance(b, And):
        return _free_deps(b.left, cl) | _free_deps(b.right, cl)
    return {cl.index[b]}


def enumerate_hintikka(cl: Closure, max_candidates: int = DEFAULT_MAX_CANDIDATES) -> list[int]:
    """All locally consistent types, as bitsets over the closure (And bits included)."""
    f = cl.formulas
    atom_ids = [k for k, _ in cl.atoms]
    dep_list = cl.deps
    box_ids = sorted(cl.boxes, key=lambda k: (modal_depth(f[k]), k))
    pos = {k: n for n, k in enumerate(box_ids)}

    # box-to-box implications with the same body: B1 -> B2 when R(B2) is inside R(B1) given the dep closure
    same_body: dict[Formula, list[int]] = {}
    for k in box_ids:
        same_body.setdefault(f[k].body, []).append(k)
    pair_rules: dict[int, list[tuple[int, int]]] = {k: [] for k in box_ids}
    for group in same_body.values():
        for k1 in group:
            for k2 in group:
                if k1 == k2:
                    continue
                b1, b2 = f[k1], f[k2]
                if b1.ys <= (b2.ys | b2.zs) and b1.zs <= b2.zs:
                    later = k1 if pos[k1] > pos[k2] else k2
                    pair_rules[later].append((k1, k2))

    body_deps = {k: _free_deps(f[k].body, cl) for k in box_ids}
    out: list[int] = []

    def finish(assign: dict[int, bool]) -> None:
        bits = 0
        for k in range(len(f)):
            if isinstance(f[k], And):
                v = _formula_value(cl, f[k], assign)
            else:
                v = assign[k]
            if v:
                bits |= 1 << k
        out.append(bits)
        if len(out) > max_candidates:
            raise ResourceExceeded(f"more than {max_candidates} candidate types", len(out))

    for atom_vals in product((False, True), repeat=len(atom_ids)):
        for dep_vals in product((False, True), repeat=len(dep_list)):
            true_fds = [(xs, y) for (k, xs, y), v in zip(dep_list, dep_vals) if v]
            ok = True
            for (k, xs, y), v in zip(dep_list, dep_vals):
                if (y in fdcl(xs, true_fds)) != v:
                    ok = False
                    break
            if not ok:
                continue
            assign = dict(zip(atom_ids, atom_vals))
            assign.update({k: v for (k, _, _), v in zip(dep_list, dep_vals)})
            closed = {}

            def cl_of(xs):
                hit = closed.get(xs)
                if hit is None:
                    hit = closed[xs] = fdcl(xs, true_fds)
                return hit

            def invariant_body(k: int) -> bool:
                b, _ = base(f[k].body)
                if isinstance(b, Pred):
                    return set(b.args) <= cl_of(f[k].xs)
                if isinstance(b, Dep):
                    return b.xs <= cl_of(f[k].xs)
                return False

            def consistent(k: int) -> bool:
                box = f[k]
                v = assign[k]
                body_known = all(d in assign for d in body_deps[k])
                if body_known:
                    bv = _formula_value(cl, box.body, assign)
                    if v and not box.zs and not bv:
                        return False
                    if not v and bv and invariant_body(k):
                        return False
                for k1, k2 in pair_rules[k]:
                    if assign[k1] and not assign[k2] and f[k1].xs <= cl_of(f[k2].xs):
                        return False
                return True

            def dfs(n: int) -> None:
                if n == len(box_ids):
                    finish(assign)
                    return
                k = box_ids[n]
                for v in (False, True):
                    assign[k] = v
                    if consistent(k):
                        dfs(n + 1)
                del assign[k]

            dfs(0)
    return out


# ---------------------------------------------------------------- relations between types


def _box(xs, ys, zs, body) -> Box:
    zs = frozenset(zs)
    return Box(frozenset(xs), frozenset(ys) - zs, zs, body)


def rp_related(cl: Closure, delta: int, sigma: int, xs, ys, zs) -> bool:
    """The filtration relation: every diamond of sigma, combined with (X,Y,Z), is a diamond of delta
    whenever the combined formula is in the closure. Stated with boxes, which is the contrapositive."""
    xs, ys, zs = frozenset(xs), frozenset(ys), frozenset(zs)
    for k in cl.boxes:
        b = cl.formulas[k]
        comb = _box(xs & b.xs, ys & b.ys, (zs & b.ys) | (b.zs & ys) | (zs & b.zs), b.body)
        j = cl.index.get(comb)
        if j is not None and (delta >> j & 1) and not (sigma >> k & 1):
            return False
    return True


def true_fds(cl: Closure, bits: int) -> list[tuple[frozenset, str]]:
    return [(xs, y) for k, xs, y in cl.deps if bits >> k & 1]


def saturated_diamonds(cl: Closure, bits: int) -> list[int]:
    """Boxes false in the type (diamonds of the negated body) none of whose strictness probes is a diamond."""
    out = []
    for k in cl.boxes:
        if bits >> k & 1:
            continue
        b = cl.formulas[k]
        probes_true = True
        for y in b.ys:
            probe = cl.index.get(_box(b.xs, b.ys - {y}, b.zs | {y}, b.body))
            if probe is None or not (bits >> probe & 1):
                probes_true = False
                break
        if probes_true:
            out.append(k)
    return out


def witness_masks(cl: Closure, delta: int, k: int) -> tuple[int, int] | None:
    """Bits a witness for the diamond at box k must have (true, false). None if contradictory."""
    f = cl.formulas
    b = f[k]
    X, Y, Z = b.xs, b.ys, b.zs
    link = fdcl(X, true_fds(cl, delta))
    mt = mf = 0
    for j, args in cl.atoms:
        if args <= link:
            if delta >> j & 1:
                mt |= 1 << j
            else:
                mf |= 1 << j
    for j, xs, _ in cl.deps:
        if xs <= link:
            if delta >> j & 1:
                mt |= 1 << j
            else:
                mf |= 1 << j
    U = Y | Z
    for j in cl.boxes:
        c = f[j]
        on = bool(delta >> j & 1)
        if c.xs <= link:
            if on and (c.ys | c.zs) <= U:
                t = cl.index.get(_box(c.xs, c.ys | (c.zs & Z), c.zs - Z, c.body))
                if t is not None:
                    mt |= 1 << t
            if not on and (c.ys | c.zs) <= Y:
                mf |= 1 << j
        fwd = cl.index.get(_box(X & c.xs, Y & c.ys, (Z & c.ys) | (c.zs & Y) | (Z & c.zs), c.body))
        if fwd is not None and (delta >> fwd & 1):
            mt |= 1 << j
        if not on:
            back = cl.index.get(_box(X & c.xs, Y & c.ys, c.zs & Y, c.body))
            if back is not None:
                mf |= 1 << back
    bi, pol = cl.lits[k]
    if pol:
        mf |= 1 << bi
    else:
        mt |= 1 << bi
    if mt & mf:
        return None
    return mt, mf


class _Packed:
    """Types packed into uint64 words for vectorised mask tests."""

    def __init__(self, types: Sequence[int], nbits: int):
        self.words = max(1, (nbits + 63) // 64)
        self.arr = np.zeros((len(types), self.words), dtype=np.uint64)
        for r, t in enumerate(types):
            for w in range(self.words):
                self.arr[r, w] = (t >> (64 * w)) & 0xFFFFFFFFFFFFFFFF

    def split(self, mask: int) -> np.ndarray:
        return np.array([(mask >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(self.words)], dtype=np.uint64)

    def matches(self, mt: int, mf: int) -> np.ndarray:
        a = self.arr
        t, fm = self.split(mt), self.split(mf)
        return np.all((a & t) == t, axis=1) & np.all((a & fm) == 0, axis=1)


@dataclass
class PreModel:
    closure: Closure
    types: list[int]
    alive: np.ndarray
    rounds: int = 0

    @property
    def members(self) -> list[int]:
        return [t for t, a in zip(self.types, self.alive) if a]

    def witnesses(self, delta: int, k: int) -> list[int]:
        masks = witness_masks(self.closure, delta, k)
        if masks is None:
            return []
        hits = _packed(self).matches(*masks) & self.alive
        return [int(i) for i in np.flatnonzero(hits)]


def _packed(pm: PreModel) -> _Packed:
    p = pm.__dict__.get("_pack")
    if p is None:
        p = pm.__dict__["_pack"] = _Packed(pm.types, len(pm.closure))
    return p


def eliminate(cl: Closure, types: list[int], order: Sequence[int] | None = None) -> PreModel:
    """Greatest fixpoint: drop types with a saturated diamond that has no surviving witness."""
    pm = PreModel(cl, list(types), np.ones(len(types), dtype=bool))
    packed = _packed(pm)
    reqs: list[list[tuple[int, int] | None]] = []
    for t in pm.types:
        reqs.append([witness_masks(cl, t, k) for k in saturated_diamonds(cl, t)])
    order = list(range(len(types))) if order is None else list(order)
    cache: dict[tuple[int, int], np.ndarray] = {}
    changed = True
    while changed:
        changed = False
        pm.rounds += 1
        for i in order:
            if not pm.alive[i]:
                continue
            for masks in reqs[i]:
                if masks is None:
                    ok = False
                else:
                    hit = cache.get(masks)
                    if hit is None:
                        hit = cache[masks] = packed.matches(*masks)
                    ok = bool(np.any(hit & pm.alive))
                if not ok:
                    pm.alive[i] = False
                    changed = True
                    break
    return pm


# ---------------------------------------------------------------- induced model


@dataclass
class TreeNode:
    name: str
    type_index: int
    parent: int | None
    label: tuple[frozenset, frozenset, frozenset] | None
    link: frozenset
    depth: int


def induced_model(pm: PreModel, root_type: int, path_bound: int, node_limit: int = DEFAULT_NODE_LIMIT) -> tuple[RPDModel, str, list[TreeNode]]:
    """Unravel the pre-model from one type into a finite tree, cut at path_bound steps."""
    cl = pm.closure
    if not pm.alive[root_type]:
        raise ValueError("root type is not in the pre-model")
    nodes = [TreeNode("p", root_type, None, None, frozenset(), 0)]
    queue = deque([0])
    while queue:
        n = queue.popleft()
        node = nodes[n]
        if node.depth >= path_bound:
            continue
        delta = pm.types[node.type_index]
        for c, k in enumerate(saturated_diamonds(cl, delta)):
            ws = pm.witnesses(delta, k)
            if not ws:
                raise ValueError("pre-model violates the witness condition")
            w = ws[0]
            b = cl.formulas[k]
            link = fdcl(b.xs, true_fds(cl, delta))
            nodes.append(TreeNode(f"{node.name}.{c}", w, n, (b.xs, b.ys, b.zs), link, node.depth + 1))
            if len(nodes) > node_limit:
                raise ResourceExceeded(f"induced model exceeds {node_limit} points", len(nodes))
            queue.append(len(nodes) - 1)
    return _tree_to_model(cl, pm, nodes), nodes[0].name, nodes


def _tree_to_model(cl: Closure, pm: PreModel, nodes: list[TreeNode]) -> RPDModel:
    vocab = cl.vocab
    names = [n.name for n in nodes]
    sim = {}
    for s in vocab.variables:
        parent = list(range(len(nodes)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, n in enumerate(nodes):
            if n.parent is not None and s in n.link:
                parent[find(i)] = find(n.parent)
        groups: dict[int, list[str]] = {}
        for i in range(len(nodes)):
            groups.setdefault(find(i), []).append(names[i])
        sim[s] = frozenset((a, b) for g in groups.values() for a in g for b in g)
    leq = {}
    for y in vocab.variables:
        succ: list[list[int]] = [[] for _ in nodes]
        for i, n in enumerate(nodes):
            if n.parent is None:
                continue
            xs, ys, zs = n.label
            if y in ys or y in zs:
                succ[n.parent].append(i)
            if y in ys:
                succ[i].append(n.parent)
        pairs = set()
        for i in range(len(nodes)):
            seen = {i}
            stack = [i]
            while stack:
                a = stack.pop()
                for b in succ[a]:
                    if b not in seen:
                        seen.add(b)
                        stack.append(b)
            pairs.update((names[i], names[j]) for j in seen)
        leq[y] = frozenset(pairs)
    valuation = {}
    for k, _ in cl.atoms:
        ws = frozenset(names[i] for i, n in enumerate(nodes) if pm.types[n.type_index] >> k & 1)
        if ws:
            valuation[cl.formulas[k]] = ws
    return RPDModel(vocab, tuple(names), sim, leq, valuation, {})


def verify_certificate(m: RPDModel, alpha: Formula, root: str) -> bool:
    return evaluate(m, root, alpha)


# ---------------------------------------------------------------- decision


@dataclass
class SatResult:
    status: str  # "sat", "unsat" or "resource"
    verdict: str
    closure_size: int = 0
    candidates: int = 0
    survivors: int = 0
    premodel: PreModel | None = None
    root_type: int | None = None
    certificate: RPDModel | None = None
    root: str | None = None
    path_bound: int | None = None
    message: str = ""

    @property
    def sat(self) -> bool:
        return self.status == "sat"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "verdict": self.verdict,
            "closure_size": self.closure_size,
            "candidates": self.candidates,
            "survivors": self.survivors,
            "path_bound": self.path_bound,
            "certificate_points": len(self.certificate.points) if self.certificate else None,
            "message": self.message,
        }


def decide_sat(
    alpha: Formula,
    vocab: Vocabulary | None = None,
    max_closure: int = DEFAULT_MAX_CLOSURE,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
    path_bound: int | None = None,
    max_path_bound: int | None = None,
    node_limit: int = DEFAULT_NODE_LIMIT,
    certify: bool = True,
) -> SatResult:
    """Sat iff some type containing alpha survives elimination. The verdict never depends on the certificate;
    the certificate is an induced tree model checked against alpha, escalating the path bound while it fails."""
    cl = closure(alpha, vocab)
    if len(cl) > max_closure:
        return SatResult("resource", "resource", len(cl), message=f"closure has {len(cl)} formulas, limit {max_closure}")
    try:
        types = enumerate_hintikka(cl, max_candidates)
    except ResourceExceeded as e:
        return SatResult("resource", "resource", len(cl), message=str(e))
    pm = eliminate(cl, types)
    root_formula = cl.root
    survivors = [i for i, t in enumerate(types) if pm.alive[i] and cl.holds(t, root_formula)]
    res = SatResult("unsat", "Unsat", len(cl), len(types), int(pm.alive.sum()), pm)
    if not survivors:
        return res
    res.status = "sat"
    res.root_type = survivors[0]
    res.verdict = "Sat-unverified(bound)"
    if not certify:
        return res
    start = cl.depth if path_bound is None else path_bound
    stop = max(start, max_path_bound if max_path_bound is not None else start + 3)
    for bound in range(start, stop + 1):
        for rt in survivors[:8]:
            try:
                m, root, _ = induced_model(pm, rt, bound, node_limit)
            except ResourceExceeded:
                res.message = f"certificate tree exceeded {node_limit} points at bound {bound}"
                return res
            if verify_certificate(m, root_formula, root):
                res.verdict = "Sat-verified"
                res.certificate, res.root, res.path_bound, res.root_type = m, root, bound, rt
                return res
        res.path_bound = bound
    res.message = f"no certificate up to path bound {stop}"
    return res


def semantic_type(cl: Closure, m: RPDModel, w: str) -> int:
    """The set of closure formulas true at w, as a bitset."""
    ev = evaluator_for(m)
    k = ev.index[w]
    bits = 0
    for j, f in enumerate(cl.formulas):
        if ev.extension(f) >> k & 1:
            bits |= 1 << j
    return bits
