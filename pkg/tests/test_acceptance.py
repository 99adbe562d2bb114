"""One test per acceptance criterion; each prints a PASS/FAIL line with the measured numbers."""

import random
import time
from itertools import combinations

from lpfd.calculus import LPFD_SCHEMAS, HLPFD_SCHEMAS, instantiate, sample_bindings, soundness_fuzz
from lpfd.games import (
    analyze, coalition_partition_of, core_bruteforce, core_formula, core_partition, nash_bruteforce, nash_formula,
    spo_bruteforce, spo_formula, wpo_bruteforce, wpo_formula,
)
from lpfd.generate import full_product_pd, random_cpd, random_formula, random_pd, random_rpd
from lpfd.models import PDModel, all_partitions, fixture_path, load_model, partition, pd_to_rpd, rpd_to_pd, validate
from lpfd.satisfiability import closure, decide_sat, verify_certificate, DEFAULT_MAX_CLOSURE
from lpfd.semantics import check_superadditivity, evaluate, extension, full_profile_condition
from lpfd.syntax import And, Na, Nom, Not, Pred, SPa, Vocabulary, WPa, conj, nonempty_subsets, parse_formula

import oracles

SEED = 20240601


def test_criterion_1_example2(criterion):
    c = criterion(1, "Example 2 core and Nash values")
    t = time.perf_counter()
    m = load_model(fixture_path("example2.json"))
    rep = analyze(m)
    na = parse_formula("Na{1,2}", m.vocab)
    values = {a: evaluate(m, a, na) for a in ("a3p", "a4p", "a")}
    dt = time.perf_counter() - t
    c.note(f"core={rep.core}; Na{{1,2}}={values}; {dt:.3f}s")
    ok = rep.core == ["a4p"] and values == {"a3p": True, "a4p": True, "a": False} and not rep.mismatches and dt < 1
    c.done(ok)
    assert ok


def test_criterion_2_example1(criterion):
    c = criterion(2, "Example 1 merges, sigma chain, CPD validity, RCPD violations")
    t = time.perf_counter()
    m = load_model(fixture_path("example1.json"))
    merges = {n: m.profiles[n].merge() for n in ("a", "a1p", "a3p", "a5p", "a7p")}
    merge_ok = set(merges.values()) == {("alpha", "beta", "alpha")}
    s1 = m.sigma(partition({"1"}, {"2"}, {"3"}))
    s2 = m.sigma(partition({"1", "2"}, {"3"}))
    s3 = m.sigma(partition({"1", "2", "3"}))
    sigma_ok = s1 == {("alpha", "beta", "alpha")} and s1 <= s2 <= s3
    cpd_ok = validate(m) == []
    flagged = {v["witness"][0] for v in analyze(m).rcpd_violations}
    expected = {"a2p", "a4p", "a6p"}
    dt = time.perf_counter() - t
    c.note(f"merge chain {'ok' if merge_ok else merges}; sigma chain {'ok' if sigma_ok else 'broken'}; CPD {'valid' if cpd_ok else 'invalid'}")
    c.note(f"RCPD flagged {sorted(flagged)} vs expected {sorted(expected)}; {dt:.3f}s")
    assert flagged == oracles.rcpd_flagged(m)
    ok = merge_ok and sigma_ok and cpd_ok and flagged == expected and dt < 1
    c.done(ok)
    assert merge_ok and sigma_ok and cpd_ok and dt < 1
    assert flagged == expected


def test_criterion_3_nash_pareto_formulas(criterion):
    c = criterion(3, "formula NE/wPO/sPO equal brute force on random PD models")
    rng = random.Random(SEED)
    t = time.perf_counter()
    mismatches = checks = 0
    for _ in range(500):
        players = tuple(str(k) for k in range(1, rng.randint(1, 3) + 1))
        m = random_pd(rng, Vocabulary(players), 6, 3)
        for xs in nonempty_subsets(players):
            pairs = ((nash_formula, nash_bruteforce, oracles.nash), (wpo_formula, wpo_bruteforce, oracles.weak_pareto),
                     (spo_formula, spo_bruteforce, oracles.strong_pareto))
            for f, b, o in pairs:
                checks += 1
                ref = o(m, xs)
                if f(m, xs) != ref or b(m, xs) != ref:
                    mismatches += 1
    dt = time.perf_counter() - t
    c.note(f"500 models, {checks} coalition checks, {mismatches} mismatches, {dt:.1f}s")
    ok = mismatches == 0 and dt < 60
    c.done(ok)
    assert ok


def _rcpd(rng):
    n = rng.choice([2, 2, 3])
    return random_cpd(rng, n_players=n, n_strategies=rng.choice([2, 3]) if n == 2 else 2, rcpd=True)


def test_criterion_4_core_theorems(criterion):
    c = criterion(4, "Nash decomposition and core results on random (R)CPD models")
    rng = random.Random(SEED)
    t = time.perf_counter()
    bad = {"nash_split": 0, "core_in_wpo": 0, "core_formula": 0, "singleton_core": 0, "partition_core_wpo": 0}
    n_cpd = n_rcpd = 0
    for _ in range(200):
        m = random_cpd(rng, n_players=rng.choice([2, 3]), n_strategies=2)
        n_cpd += 1
        players = frozenset(m.players)
        na = extension(m, Na(players))
        if na != extension(m, conj(SPa(frozenset({x})) for x in sorted(players))) or \
                na != extension(m, conj(WPa(frozenset({x})) for x in sorted(players))):
            bad["nash_split"] += 1
        if not core_bruteforce(m) <= wpo_bruteforce(m, players):
            bad["core_in_wpo"] += 1
    for _ in range(200):
        m = _rcpd(rng)
        n_rcpd += 1
        players = frozenset(m.players)
        core = core_bruteforce(m)
        if not core <= wpo_bruteforce(m, players):
            bad["core_in_wpo"] += 1
        for a, prof in m.profiles.items():
            if core_formula(m, a) != (a in core):
                bad["core_formula"] += 1
            pi = prof.dom_partition()
            if all(len(b) == 1 for b in pi) and core_partition(m, pi, a) != evaluate(m, a, And(Nom(a), Na(players))):
                bad["singleton_core"] += 1
            for rho in all_partitions(m.players):
                if core_partition(m, rho, a) and not all(evaluate(m, a, WPa(b)) for b in rho):
                    bad["partition_core_wpo"] += 1
    dt = time.perf_counter() - t
    c.note(f"{n_cpd} CPD + {n_rcpd} RCPD models; counterexamples {bad}; {dt:.1f}s")
    ok = not any(bad.values()) and dt < 120
    c.done(ok)
    assert ok


def test_criterion_5_axiom_soundness(criterion):
    c = criterion(5, "soundness fuzz of every axiom schema")
    t = time.perf_counter()
    reps = [soundness_fuzz(s, trials=1000, seed=SEED, max_points=6) for s in ("lpfd", "hlpfd")]
    dt = time.perf_counter() - t
    fails = sum(r.failures(s) for r in reps for s in r.trials)
    counts = sorted({n for r in reps for n in r.trials.values()})
    c.note(f"{len(LPFD_SCHEMAS)} + {len(HLPFD_SCHEMAS)} schemas, trials per schema {counts}, {fails} counterexamples, {dt:.1f}s")
    ok = all(r.ok for r in reps) and counts == [1000] and dt < 120
    c.done(ok)
    assert ok


def test_criterion_6_translation_fidelity(criterion):
    c = criterion(6, "truth preserved by both translations")
    rng = random.Random(SEED)
    vocab = Vocabulary(("x", "y", "z"), {"P": 1, "Q": 2}, ("i",))
    formulas = [random_formula(rng, vocab, depth=rng.randint(0, 3), size=rng.randint(1, 7)) for _ in range(50)]
    mismatches = checks = 0
    for _ in range(50):
        p = random_pd(rng, vocab, 6)
        r = random_rpd(rng, vocab, 5)
        pr, rp = pd_to_rpd(p), rpd_to_pd(r)
        for phi in formulas:
            checks += 2
            mismatches += extension(pr, phi) != {a for a in p.names if oracles.truth(p, a, phi)}
            mismatches += extension(rp, phi) != {w for w in r.points if oracles.truth(r, w, phi)}
    c.note(f"50 formulas x 50 PD + 50 relational models, {checks} extension checks, {mismatches} mismatches")
    ok = mismatches == 0
    c.done(ok)
    assert ok


def test_criterion_7_decidability(criterion):
    c = criterion(7, "decision procedure verdicts")
    rng = random.Random(SEED)
    vocab = Vocabulary(("x", "y"), {"P": 1})
    worst = 0.0

    def timed(phi, v):
        nonlocal worst
        t = time.perf_counter()
        r = decide_sat(phi, v)
        worst = max(worst, time.perf_counter() - t)
        return r

    unsat = skipped = 0
    k = 0
    while unsat < 20 and k < 200:
        schema = LPFD_SCHEMAS[k % len(LPFD_SCHEMAS)]
        k += 1
        neg = Not(instantiate(schema, sample_bindings(schema, rng, vocab)))
        if len(closure(neg, vocab)) > DEFAULT_MAX_CLOSURE:
            skipped += 1
            continue
        r = timed(neg, vocab)
        if r.verdict != "Unsat":
            break
        unsat += 1
    c.note(f"{unsat} negated axiom instances Unsat ({skipped} over closure bound)")

    zv = Vocabulary(("z",))
    chain = parse_formula("~([{};{};{z}]bot | <{};{};{z}>[{};{};{z}]bot)", zv)
    r_chain = timed(chain, zv)
    found = oracles.search_model(chain, zv, 4)
    c.note(f"no-finite-model formula: {r_chain.verdict}, model search up to 4 points found {'none' if found is None else found[1]}")

    v3 = Vocabulary(("x", "y", "z"), {"P": 1, "Q": 2})
    corpus = [random_formula(rng, v3, depth=rng.randint(1, 2), size=rng.randint(3, 8), nominals=False) for _ in range(50)]
    verdicts = [(phi, timed(phi, v3)) for phi in corpus]
    sats = [(phi, r) for phi, r in verdicts if r.sat]
    verified = [1 for phi, r in sats if r.certificate is not None and verify_certificate(r.certificate, phi, r.root)]
    c.note(f"corpus: {len(sats)} Sat, {len(verified)} certificate-verified, {len(verdicts) - len(sats)} Unsat; slowest query {worst:.2f}s")
    ok = unsat == 20 and r_chain.sat and found is None and len(verified) == len(sats) and worst < 30
    c.done(ok)
    assert ok


def test_criterion_8_superadditivity(criterion):
    c = criterion(8, "superadditivity on full and restricted assignment spaces")
    rng = random.Random(SEED)
    t = time.perf_counter()
    vocab = Vocabulary(("x", "y", "z"), {"P": 1, "Q": 1})
    atoms = [Pred(p, (v,)) for p in ("P", "Q") for v in vocab.variables]
    held = total = 0
    for _ in range(3):
        m = full_product_pd(rng, vocab, 2)
        assert full_profile_condition(m)[0]
        for k1 in range(1, 3):
            for xs in combinations(vocab.variables, k1):
                rest = [v for v in vocab.variables if v not in xs]
                for k2 in range(1, len(rest) + 1):
                    for ys in combinations(rest, k2):
                        for p1 in atoms:
                            for p2 in atoms:
                                total += 1
                                held += check_superadditivity(m, xs, ys, p1, p2).holds
    v2 = Vocabulary(("x", "y"), {"P": 1, "Q": 1})
    restricted = PDModel(v2, ("0", "1"), {"a": {"x": "0", "y": "1"}, "b": {"x": "1", "y": "0"}}, {},
                         {"P": frozenset({("0",)}), "Q": frozenset({("0",)})})
    cex = check_superadditivity(restricted, {"x"}, {"y"}, Pred("P", ("x",)), Pred("Q", ("y",)))
    dt = time.perf_counter() - t
    c.note(f"full product: {held}/{total} instances hold; restricted model counterexample {cex.witness}; {dt:.2f}s")
    ok = held == total and not cex.holds and dt < 1
    c.done(ok)
    assert ok


def test_criterion_9_coalition_recovery(criterion):
    c = criterion(9, "coalition structure recovered from dependence formulas")
    rng = random.Random(SEED + 9)
    mismatches = profiles = 0
    models = [load_model(fixture_path("example2.json"))] + [_rcpd(rng) for _ in range(200)]
    for m in models:
        for a, prof in m.profiles.items():
            profiles += 1
            mismatches += coalition_partition_of(m, a) != prof.dom_partition()
    c.note(f"Example 2 fixture + 200 random RCPD models, {profiles} profiles, {mismatches} mismatches")
    ok = mismatches == 0
    c.done(ok)
    assert ok
