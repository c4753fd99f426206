"""End-to-end acceptance checks. Each test_criterion_N attaches a one-line
summary that conftest prints after the run."""
import math
import time

import numpy as np
import pytest

from localitylab import adversaries as adv
from localitylab.adversaries import ADV_WON, ALG_OK, first_fit, greedy_completion, superlog_adversary, twohalf_problem
from localitylab.cli import main, random_bipartite
from localitylab.coloring import SweepRunner, color_online, reveal_order
from localitylab.graph import gen_cycle, gen_grid, gen_path
from localitylab.lcl import (
    BUILTIN_ROOTED,
    PathAutomaton,
    RootedLcl,
    check_certificate,
    coloring_problem,
    extract_certificate,
    path_coloring,
    restrict,
    twohalf_coloring,
    verify_path,
)
from localitylab.models import (
    ContractViolation,
    edits_for_graph,
    lift_dynamic_to_online,
    lift_local_to_dynamic,
    lift_local_to_online,
    lift_local_to_slocal,
    lift_slocal_to_online,
    inclusion_fixtures,
    planted_confinement_violator,
    run_dynamic,
    run_local,
    run_online,
    run_slocal,
)
from localitylab.paths import build_canonical_map, logstar_local, lookahead_online, path_graph, speedup_online

from oracles import flexible_by_lengths, proper, rooted_completion_exists, scc_of, self_walk_gcd, walk_sets


def _summary(record_property, text):
    record_property("summary", text)
    print(text)


# --- criteria 1 and 2: online 3-coloring over the full family ------------------------


def coloring_family():
    for n in range(1, 513):
        yield f"path{n}", gen_path(n)
    for n in range(4, 513, 2):
        yield f"cycle{n}", gen_cycle(n)
    for a in range(1, 17):
        for b in range(a, 17):
            yield f"grid{a}x{b}", gen_grid(a, b)
    rng = np.random.default_rng(2024)
    for i in range(200):
        n = int(rng.integers(2, 513))
        yield f"bipartite#{i}n{n}", random_bipartite(n, min(1.0, 3.0 / n), rng)


SCRIPTED = ("farthest-first", "bit-reversal", "doubling-clash")


def orders_for(g):
    out = [reveal_order(g, "random", np.random.default_rng(s)) for s in range(17)]
    return out + [reveal_order(g, k) for k in SCRIPTED]


@pytest.fixture(scope="module")
def sweep():
    """Runs every (graph, order) pair once; failures are collected, not raised."""
    SweepRunner(gen_path(4)).run([0, 1, 2, 3])  # compile outside the clock
    t0 = time.perf_counter()
    st = {"graphs": 0, "runs": 0, "improper": [], "escapes": [], "violations": [], "over_bound": [],
          "worst_ratio": 0.0}
    for name, g in coloring_family():
        st["graphs"] += 1
        bound = math.ceil(math.log2(g.n)) if g.n > 1 else 0
        sr = SweepRunner(g)
        for i, order in enumerate(orders_for(g)):
            r = sr.run(order)
            st["runs"] += 1
            tag = (name, i)
            if r.escaped:
                st["escapes"].append(tag)
                continue
            labels = {v: int(c) for v, c in enumerate(r.labels)}
            if min(r.labels, default=0) < 0 or set(labels.values()) - {0, 1, 2} or not proper(g, labels):
                st["improper"].append(tag)
            if r.violations:
                st["violations"].append(tag)
            if r.max_border > bound:
                st["over_bound"].append(tag)
            if bound:
                st["worst_ratio"] = max(st["worst_ratio"], r.max_border / bound)
    st["seconds"] = time.perf_counter() - t0
    return st


def test_criterion_1(sweep, record_property):
    s = sweep
    _summary(record_property, f"{s['graphs']} graphs, {s['runs']} runs, improper={len(s['improper'])}, "
                              f"escapes={len(s['escapes'])}, {s['seconds']:.1f} s (limit 120 s)")
    assert s["graphs"] == 512 + 255 + 136 + 200 and s["runs"] == 20 * s["graphs"]
    assert s["improper"] == [] and s["escapes"] == []
    assert s["seconds"] < 120


def test_criterion_2(sweep, record_property):
    s = sweep
    _summary(record_property, f"size<2^border or far commitments: {len(s['violations'])}; "
                              f"border>ceil(log2 n): {len(s['over_bound'])}; "
                              f"worst border/ceil(log2 n)={s['worst_ratio']:.3f}")
    assert s["violations"] == [] and s["over_bound"] == []


CROSS_CHECK = [gen_path(97), gen_cycle(130), gen_grid(9, 11),
               random_bipartite(300, 0.01, np.random.default_rng(7))]


@pytest.mark.parametrize("g", CROSS_CHECK, ids=["path97", "cycle130", "grid9x11", "bipartite300"])
def test_sweep_runner_matches_engine_session(g):
    # the compiled runner used above must reproduce the engine-driven session exactly
    sr = SweepRunner(g)
    for order in orders_for(g):
        a = color_online(g, order)
        b = sr.run(order)
        assert not b.escaped
        assert {v: int(c) for v, c in enumerate(b.labels)} == a.labels
        assert {v: int(c) for v, c in enumerate(b.committed) if c >= 0} == a.committed
        assert (b.max_border, b.max_commit_radius, b.violations) == (
            a.max_border, a.max_commit_radius, len(a.border_violations))


# --- criterion 3 --------------------------------------------------------------------


def test_criterion_3(capsys, record_property):
    code = main(["analyze", "--problem", "twohalf"])
    out = capsys.readouterr().out
    f = {}
    for ln in out.splitlines():
        k, sep, v = ln.partition(": ")
        if sep:
            f.setdefault(k, v)
    got = (f.get("Γ1"), f.get("Γ2"), f.get("k"), f.get("terminal"))
    _summary(record_property, f"Γ1={got[0]} Γ2={got[1]} k={got[2]} terminal={got[3]}")
    assert code == 0 and got == ("{1,2}", "{A,B,X}", "2", "empty")
    assert "Γ3" not in f


# --- criteria 4 and 5: automata ------------------------------------------------------


def fixture_automata():
    out = {f"rooted:{k}": PathAutomaton.of(f()) for k, f in BUILTIN_ROOTED.items()}
    out["rooted:4col"] = PathAutomaton.of(coloring_problem(4))
    out["rooted:twohalf|ABX"] = PathAutomaton.of(restrict(twohalf_coloring(), "ABX"))
    out["rooted:empty"] = PathAutomaton.of(RootedLcl.make(2, "ab", []))
    # period 3 cycle with a tail, and two cycles of lengths 2 and 3 sharing a state
    out["hand:ring3+tail"] = PathAutomaton("pqrs", [("p", "q"), ("q", "r"), ("r", "p"), ("s", "p")])
    out["hand:2+3"] = PathAutomaton("uvwx", [("u", "v"), ("v", "u"), ("u", "w"), ("w", "x"), ("x", "u")])
    return out


def random_automata(count=1000, seed=4):
    rng = np.random.default_rng(seed)
    for i in range(count):
        s = int(rng.integers(1, 6))
        states = tuple("abcde"[:s])
        p = rng.uniform(0.05, 0.8)
        yield f"random#{i}", PathAutomaton(states, [(a, b) for a in states for b in states if rng.random() < p])


def _agrees(m, max_len=60):
    reach = walk_sets(m.states, m.transitions, max_len)
    comp = scc_of(m.states, m.transitions)
    for a in m.states:
        if m.is_flexible(a) != flexible_by_lengths(reach, a) or m.is_flexible(a) != (self_walk_gcd(reach, a) == 1):
            return False
        for b in m.states:
            if any(m.walk_exists(a, b, d) != ((a, b) in reach[d]) for d in range(max_len + 1)):
                return False
            pair = flexible_by_lengths(reach, a, b)
            if m.flexible_pair(a, b) != pair:
                return False
            if pair != (comp[a] == comp[b] and flexible_by_lengths(reach, a) and flexible_by_lengths(reach, b)):
                return False
    return True


def test_criterion_4(record_property):
    t0 = time.perf_counter()
    autos = list(fixture_automata().items()) + list(random_automata())
    bad = [name for name, m in autos if not _agrees(m)]
    secs = time.perf_counter() - t0
    _summary(record_property, f"{len(autos)} automata compared to length 60, disagreements={len(bad)}, "
                              f"{secs:.1f} s (limit 60 s)")
    assert len(autos) == 1000 + len(fixture_automata())
    assert bad == []
    assert secs < 60


def _four_walk_cases(m, top=31):
    """Inflexible pairs found by enumeration, with every (p1, p2) <= 30 where
    all four walks exist; the property says that list is empty."""
    reach = walk_sets(m.states, m.transitions, 60)
    found, pairs = [], 0
    for a in m.states:
        for b in m.states:
            if flexible_by_lengths(reach, a, b):
                continue
            pairs += 1
            for p1 in range(top):
                for p2 in range(top):
                    if ((a, b) in reach[p1] and (a, b) in reach[p1 + 1]
                            and (b, a) in reach[p2] and (b, a) in reach[p2 + 1]):
                        found.append((a, b, p1, p2))
    return pairs, found


def test_criterion_5(record_property):
    total, bad = 0, []
    for name, m in fixture_automata().items():
        pairs, found = _four_walk_cases(m)
        total += pairs
        bad += [(name, *f) for f in found]
    _summary(record_property, f"{total} inflexible pairs in fixture automata, p1,p2<=30, "
                              f"cases with all four walks present={len(bad)}")
    assert total > 0 and bad == []


def test_four_walk_property_on_random_automata():
    for name, m in random_automata(count=150, seed=11):
        assert _four_walk_cases(m)[1] == [], name


# --- criterion 6 ------------------------------------------------------------------------


def test_criterion_6(record_property):
    pi = twohalf_problem()
    rows, ok = [], True
    t0 = time.perf_counter()
    for T in (0, 1, 2):
        for make in (greedy_completion, first_fit):
            rep = superlog_adversary(pi, make(pi), T)
            w = rep.witness
            independent = w is not None and not rooted_completion_exists(
                pi.configs, list(w.instance.parent), w.instance_labels, pi.labels)
            good = (rep.outcome == ADV_WON and rep.details["x"] == 2 * T + 3 and rep.details["certified_dp"]
                    and rep.details["certified_bruteforce"] and independent)
            ok &= good
            rows.append(f"T={T} {make.__name__}:{'won' if good else 'FAILED'}")
    secs = time.perf_counter() - t0
    _summary(record_property, f"{', '.join(rows)}; {secs:.1f} s (limit 300 s)")
    assert ok and secs < 300


# --- criterion 7 ------------------------------------------------------------------------


def test_criterion_7(record_property):
    pi = coloring_problem(3)
    rep = extract_certificate(pi, greedy_completion(pi), 1)
    verdict = check_certificate(pi, rep.certificate) if rep.ok else (False, rep.reason)
    depths = rep.certificate.depths if rep.ok else None
    _summary(record_property, f"depths={depths}, check={verdict}")
    assert rep.ok and depths == (4, 5) and math.gcd(*depths) == 1
    assert verdict == (True, "ok")


# --- criterion 8 ------------------------------------------------------------------------


def adversarial_uids(n, rng, count=50):
    """Structured orders first (monotone, zig-zag, interleaved, block and
    bit-reversed, rotations, sparse values), then random permutations."""
    idx = list(range(n))
    bits = max(1, (n - 1).bit_length())
    out = [
        idx,
        idx[::-1],
        [i // 2 if i % 2 == 0 else n - 1 - i // 2 for i in idx],
        idx[::2] + idx[1::2],
        idx[1::2] + idx[::2],
        [int(format(i, f"0{bits}b")[::-1], 2) for i in idx],
        [(i * 7919) % 1_000_003 + 1 for i in idx],
        [10**9 - 3 * i for i in idx],
    ]
    for b in (2, 3, 5, 8, 13, 21):
        out.append([(i // b) * b + (b - 1 - i % b) for i in idx])
    for k in (1, n // 3, n // 2):
        out.append(idx[k:] + idx[:k])
    for k in (3, 4):
        out.append([i % k * n + i // k for i in idx])
    seen, uniq = set(), []
    for u in out:
        if len(set(u)) != n:
            # block reversal can overshoot the range at the tail
            u = list(np.argsort(np.argsort(u, kind="stable"), kind="stable"))
        key = tuple(u)
        if key not in seen:
            seen.add(key)
            uniq.append([int(x) for x in u])
    while len(uniq) < count:
        u = rng.permutation(n).tolist()
        if tuple(u) not in seen or n < 6:
            seen.add(tuple(u))
            uniq.append(u)
    return uniq[:count]


def test_criterion_8(record_property):
    pi = path_coloring(3)
    sp = speedup_online(pi, lookahead_online(pi), lambda n: math.ceil(n / 4))
    local = logstar_local(pi, build_canonical_map(pi, sp, sp.locality))
    rng = np.random.default_rng(8)
    runs, bad = 0, []
    t0 = time.perf_counter()
    for n in range(1, 301):
        uid_sets = adversarial_uids(n, rng)
        for cyc in (False, True):
            if cyc and n < 3:
                continue
            g = path_graph([None] * n, cyc)
            for uids in uid_sets:
                labels = local.run(g, uids)
                runs += 1
                if verify_path(pi, g, labels) or not proper(g, labels) or len(labels) != n:
                    bad.append((n, cyc, uids[:4]))
    secs = time.perf_counter() - t0
    _summary(record_property, f"alpha={sp.alpha} locality={sp.locality} beta={local.cmap.beta}; {runs} runs on "
                              f"paths and cycles n<=300, rejected={len(bad)}, gap fills={local.stats['gap_fills']}, "
                              f"{secs:.0f} s")
    assert runs == 300 * 50 + 298 * 50
    assert bad == []


# --- criterion 9 ------------------------------------------------------------------------


def _with_deletions(g):
    """Build g, then delete and restore each of its first two edges."""
    edits = edits_for_graph(g)
    for u, v in g.edges()[:2]:
        edits += [("del_edge", u, v), ("add_edge", u, v)]
    return edits


def _lift_checks(f):
    g, T, ok = f.graph, f.T, f.verifier
    res = {}
    res["local"] = ok(g, run_local(f.alg, g, None, T, n=g.n))
    sl = lift_local_to_slocal(f.alg)
    orders = [list(range(g.n)), list(range(g.n))[::-1], np.random.default_rng(g.n).permutation(g.n).tolist()]
    res["slocal"] = all(ok(g, run_slocal(sl, g, o, T)[0]) for o in orders)
    res["slocal->online"] = all(ok(g, run_online(lift_slocal_to_online(sl), g, o, T, n=g.n)[0]) for o in orders)
    res["local->online"] = all(ok(g, run_online(lift_local_to_online(f.alg), g, o, T, n=g.n)[0]) for o in orders)
    dyn = lift_local_to_dynamic(f.alg, T, n=g.n)
    hist, _, eng = run_dynamic(dyn, _with_deletions(g), T, allow_deletions=True)
    res["dynamic-pm"] = ok(eng.graph, hist[-1])
    hist, _, eng = run_dynamic(dyn, edits_for_graph(g, orders[2]), T)
    res["dynamic"] = ok(eng.graph, hist[-1])
    online, radius = lift_dynamic_to_online(lift_local_to_dynamic(f.alg, T, n=g.n), T)
    res["dynamic->online"] = all(ok(g, run_online(online, g, o, radius, n=g.n)[0]) for o in orders)
    return res


def test_criterion_9(record_property):
    fx = inclusion_fixtures()
    failed = []
    for f in fx:
        for stage, good in _lift_checks(f).items():
            if not good:
                failed.append(f"{f.name}:{stage}")
    try:
        run_dynamic(planted_confinement_violator, edits_for_graph(gen_path(8)), 1)
        rejected = False
    except ContractViolation:
        rejected = True
    _summary(record_property, f"{len(fx)} fixtures x 7 stages, failed={failed or 0}, "
                              f"planted violator rejected={rejected}")
    assert len(fx) == 10 and all(f.graph.n <= 12 for f in fx)
    assert failed == [] and rejected


# --- criterion 10 -----------------------------------------------------------------------


def test_criterion_10(record_property):
    from localitylab.cli import algorithm_by_name

    t0 = time.perf_counter()
    suites = {name: f() for name, f in adv.SUITES.items()}
    secs = time.perf_counter() - t0
    problems = []
    for name, reps in suites.items():
        if reps[0].outcome != ALG_OK or len(reps) < 2:
            problems.append(f"{name}: positive algorithm failed")
        for r in reps[1:]:
            w = r.witness
            if r.outcome != ADV_WON or w is None or not w.certified or w.graph.n > 200:
                problems.append(f"{name}/{r.algorithm}")
            elif not adv.replay_witness(w, algorithm_by_name(r.algorithm, name)):
                problems.append(f"{name}/{r.algorithm}: replay differs")
    nested = suites["nested-orientation"][0].details
    _summary(record_property, f"{sum(len(r) - 1 for r in suites.values())} certified adversary wins over "
                              f"{len(suites)} suites, problems={problems or 0}, {secs:.1f} s (limit 180 s)")
    assert problems == []
    assert suites["weak-reconstruction"][1].model == "slocal"
    assert [r.model for r in suites["cycle-detection"]].count("dynamic-pm") == 1
    assert suites["leader-election"][1].model == "dynamic"
    assert nested["graphs"] == 100 and nested["max_n"] == 50 and nested["all_valid"]
    assert secs < 180
