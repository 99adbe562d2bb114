"""Nash equilibrium, Pareto optimality and the core: direct definitions and their formula counterparts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .models import (
    CPDModel, PDModel, Partition, all_partitions, eq_rel, rcpd_violations, render_partition,
    strict_and_indiff, validate_cpd,
)
from .semantics import evaluate, extension
from .syntax import And, Coal, CoreOf, Na, Nom, SPa, WPa, mk_core_partition, nonempty_subsets, sort_names


class GameError(ValueError):
    pass


class CrossCheckError(AssertionError):
    def __init__(self, mismatches: list[dict]):
        super().__init__(f"{len(mismatches)} formula/definition disagreement(s); first: {mismatches[0]}")
        self.mismatches = mismatches


def _pd(m) -> PDModel:
    if isinstance(m, CPDModel):
        return m.to_pd()
    if isinstance(m, PDModel):
        return m
    raise TypeError("game notions are defined on PD models")


def _coalition(pd: PDModel, xs: Iterable[str]) -> frozenset[str]:
    xs = frozenset(xs)
    if not xs:
        raise GameError("a coalition must be non-empty")
    if not xs <= pd.vocab.varset:
        raise GameError(f"unknown player(s) {sort_names(xs - pd.vocab.varset)}")
    return xs


def _same_outside(pd: PDModel, keep: Iterable[str]) -> dict[str, list[str]]:
    rel = eq_rel(pd, keep)
    out: dict[str, list[str]] = {a: [] for a in pd.names}
    for a, b in rel:
        out[a].append(b)
    return out


def nash_bruteforce(m, xs: Iterable[str]) -> frozenset[str]:
    """Assignments where no x in X gains by a unilateral change of its own value."""
    pd = _pd(m)
    xs = _coalition(pd, xs)
    strict, _ = strict_and_indiff(pd)
    allv = pd.vocab.varset
    reach = {x: _same_outside(pd, allv - {x}) for x in xs}
    out = set()
    for s in pd.names:
        ok = True
        for x in xs:
            if any((s, t) in strict[x] for t in reach[x][s]):
                ok = False
                break
        if ok:
            out.add(s)
    return frozenset(out)


def wpo_bruteforce(m, xs: Iterable[str]) -> frozenset[str]:
    pd = _pd(m)
    xs = _coalition(pd, xs)
    strict, _ = strict_and_indiff(pd)
    reach = _same_outside(pd, pd.vocab.varset - xs)
    return frozenset(
        s for s in pd.names
        if not any(all((s, t) in strict[x] for x in xs) for t in reach[s])
    )


def spo_bruteforce(m, xs: Iterable[str]) -> frozenset[str]:
    pd = _pd(m)
    xs = _coalition(pd, xs)
    strict, _ = strict_and_indiff(pd)
    reach = _same_outside(pd, pd.vocab.varset - xs)
    return frozenset(
        s for s in pd.names
        if not any(
            all((s, t) in pd.prefs[x] for x in xs) and any((s, t) in strict[x] for x in xs)
            for t in reach[s]
        )
    )


def nash_formula(m, xs) -> frozenset[str]:
    return extension(m, Na(frozenset(xs)))


def wpo_formula(m, xs) -> frozenset[str]:
    return extension(m, WPa(frozenset(xs)))


def spo_formula(m, xs) -> frozenset[str]:
    return extension(m, SPa(frozenset(xs)))


# ---------------------------------------------------------------- core


def core_bruteforce(m: CPDModel) -> frozenset[str]:
    """Profiles formed by the grand coalition that no coalition can block."""
    pd = m.to_pd()
    strict, _ = strict_and_indiff(pd)
    grand = frozenset({frozenset(m.players)})
    out = set()
    for a, prof in m.profiles.items():
        if prof.dom_partition() != grand:
            continue
        if not _blocked(m, pd, strict, a):
            out.add(a)
    return frozenset(out)


def _blocked(m: CPDModel, pd: PDModel, strict, a: str, within: frozenset | None = None) -> bool:
    for xs in nonempty_subsets(within if within is not None else m.players):
        same = _same_outside(pd, xs)
        for b, prof in m.profiles.items():
            if xs not in prof.dom_partition():
                continue
            if all((a, c) in strict[i] for c in same[b] for i in xs):
                return True
    return False


def _require_rcpd(m: CPDModel) -> None:
    key = (tuple(m.profiles.items()), tuple(sorted(m.prefs.items())))
    cached = m.__dict__.get("_rcpd_check")
    if cached is not None and cached[0] == key:
        bad = cached[1]
    else:
        bad = validate_cpd(m) + rcpd_violations(m)
        m.__dict__["_rcpd_check"] = (key, bad)
    if bad:
        raise GameError(f"model is not an RCPD model: {bad[0].message}")


def _named(m: CPDModel, a: str) -> str:
    if a not in m.profiles:
        raise GameError(f"profile {a!r} is not named")
    return a


def core_formula(m: CPDModel, a: str) -> bool:
    _require_rcpd(m)
    return evaluate(m, a, CoreOf(frozenset(m.players), _named(m, a)))


def core_relativized(m: CPDModel, xs: Iterable[str], a: str) -> bool:
    _require_rcpd(m)
    return evaluate(m, a, CoreOf(frozenset(xs), _named(m, a)))


def core_partition(m: CPDModel, pi: Partition, a: str) -> bool:
    _require_rcpd(m)
    return evaluate(m, a, mk_core_partition(pi, _named(m, a), m.vocab))


def coalition_partition_of(m: CPDModel, a: str) -> frozenset:
    """Read the coalition structure at a off the coalition atoms alone."""
    _require_rcpd(m)
    return frozenset(xs for xs in nonempty_subsets(m.players) if evaluate(m, a, Coal(xs)))


# ---------------------------------------------------------------- analysis


@dataclass
class AnalysisReport:
    players: tuple[str, ...]
    profiles: tuple[str, ...]
    nash: dict[str, list[str]] = field(default_factory=dict)
    wpo: dict[str, list[str]] = field(default_factory=dict)
    spo: dict[str, list[str]] = field(default_factory=dict)
    core: list[str] | None = None
    partitions: dict[str, str] = field(default_factory=dict)
    rcpd_violations: list[dict] = field(default_factory=list)
    cpd_violations: list[dict] = field(default_factory=list)
    checks: dict[str, int] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)
    mismatches: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "players": list(self.players),
            "profiles": list(self.profiles),
            "nash": self.nash,
            "weak_pareto": self.wpo,
            "strong_pareto": self.spo,
            "core": self.core,
            "partitions": self.partitions,
            "cpd_violations": self.cpd_violations,
            "rcpd_violations": self.rcpd_violations,
            "checks": self.checks,
            "skipped": self.skipped,
            "mismatches": self.mismatches,
        }

    def to_text(self) -> str:
        lines = [f"players: {', '.join(self.players)}", f"profiles: {', '.join(self.profiles)}"]
        for label, table in (("Nash", self.nash), ("weak Pareto", self.wpo), ("strong Pareto", self.spo)):
            for xs, names in table.items():
                lines.append(f"{label} for {{{xs}}}: {', '.join(names) or '-'}")
        if self.core is not None:
            lines.append(f"core: {', '.join(self.core) or '-'}")
        for v in self.cpd_violations + self.rcpd_violations:
            lines.append(f"violation [{v['code']}]: {v['message']}")
        if self.skipped:
            lines.append("skipped at: " + ", ".join(self.skipped))
        lines.append("cross-checks: " + ", ".join(f"{k}={v}" for k, v in sorted(self.checks.items())))
        lines.append(f"mismatches: {len(self.mismatches)}")
        return "\n".join(lines)


def _key(xs) -> str:
    return ",".join(sort_names(xs))


def analyze(m, strict: bool = True) -> AnalysisReport:
    """Solution concepts per coalition, each computed both from its definition and from its formula.

    With strict=True any disagreement raises CrossCheckError carrying the witnesses.
    """
    pd = _pd(m)
    players = pd.vocab.variables
    rep = AnalysisReport(tuple(players), tuple(sort_names(pd.names)))
    mism = rep.mismatches

    def compare(label, xs, brute, formula):
        rep.checks[label] = rep.checks.get(label, 0) + 1
        if brute != formula:
            mism.append({"check": label, "coalition": _key(xs), "definition": sorted(brute), "formula": sorted(formula)})

    for xs in nonempty_subsets(players):
        ne, wp, sp = nash_bruteforce(pd, xs), wpo_bruteforce(pd, xs), spo_bruteforce(pd, xs)
        compare("nash", xs, ne, nash_formula(pd, xs))
        compare("weak_pareto", xs, wp, wpo_formula(pd, xs))
        compare("strong_pareto", xs, sp, spo_formula(pd, xs))
        rep.nash[_key(xs)] = sort_names(ne)
        rep.wpo[_key(xs)] = sort_names(wp)
        rep.spo[_key(xs)] = sort_names(sp)
        # strong Pareto implies weak Pareto
        rep.checks["spo_implies_wpo"] = rep.checks.get("spo_implies_wpo", 0) + 1
        if not sp <= wp:
            mism.append({"check": "spo_implies_wpo", "coalition": _key(xs), "witness": sort_names(sp - wp)})

    if isinstance(m, CPDModel):
        _analyze_cpd(m, rep)
    if strict and mism:
        raise CrossCheckError(mism)
    return rep


def _analyze_cpd(m: CPDModel, rep: AnalysisReport) -> None:
    mism = rep.mismatches
    rep.cpd_violations = [v.to_dict() for v in validate_cpd(m)]
    if rep.cpd_violations:
        rep.skipped = sort_names(m.profiles)
        return
    flagged_v = rcpd_violations(m)
    rep.rcpd_violations = [v.to_dict() for v in flagged_v]
    flagged = {v.witness[0] for v in flagged_v}
    for a, prof in m.profiles.items():
        rep.partitions[a] = render_partition(prof.dom_partition())
    core = core_bruteforce(m)
    rep.core = sort_names(core)
    wpo_all = wpo_bruteforce(m, m.players)
    rep.checks["core_in_wpo"] = 1
    if not core <= wpo_all:
        mism.append({"check": "core_in_wpo", "witness": sort_names(core - wpo_all)})
    rep.skipped = sort_names(flagged)
    for a, prof in m.profiles.items():
        if a in flagged:
            continue
        found = frozenset(xs for xs in nonempty_subsets(m.players) if evaluate(m, a, Coal(xs)))
        rep.checks["coalition_atoms"] = rep.checks.get("coalition_atoms", 0) + 1
        if found != prof.dom_partition():
            mism.append({"check": "coalition_atoms", "profile": a, "stored": render_partition(prof.dom_partition()), "formula": render_partition(found)})
    if flagged:
        # the core formulas quantify over all profiles, so one flagged profile disables them
        return
    vocab = m.vocab
    for a, prof in m.profiles.items():
        in_core = evaluate(m, a, CoreOf(frozenset(m.players), a))
        rep.checks["core_formula"] = rep.checks.get("core_formula", 0) + 1
        if in_core != (a in core):
            mism.append({"check": "core_formula", "profile": a, "definition": a in core, "formula": in_core})
        pi = prof.dom_partition()
        if all(len(b) == 1 for b in pi):
            lhs = evaluate(m, a, mk_core_partition(pi, a, vocab))
            rhs = evaluate(m, a, And(Nom(a), Na(frozenset(m.players))))
            rep.checks["singleton_core_nash"] = rep.checks.get("singleton_core_nash", 0) + 1
            if lhs != rhs:
                mism.append({"check": "singleton_core_nash", "profile": a, "core_partition": lhs, "nash": rhs})
        for pi in all_partitions(m.players):
            lhs = evaluate(m, a, mk_core_partition(pi, a, vocab))
            rep.checks["partition_core_wpo"] = rep.checks.get("partition_core_wpo", 0) + 1
            if lhs and not all(evaluate(m, a, WPa(b)) for b in pi):
                mism.append({"check": "partition_core_wpo", "profile": a, "partition": render_partition(pi)})
