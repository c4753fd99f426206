import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from localitylab.graph import ParseError, from_parents, gen_complete_tree, gen_cycle, gen_path
from localitylab.lcl import (
    BUILTIN_PATH,
    BUILTIN_ROOTED,
    Certificate,
    PathAutomaton,
    RootedLcl,
    check_certificate,
    classify_rooted,
    coloring_problem,
    completion_exists,
    completion_exists_bruteforce,
    complete_labeling,
    extract_certificate,
    format_lcl,
    format_path_lcl,
    inflexible_decomposition,
    parse_lcl,
    path_form,
    restrict,
    twohalf_coloring,
    verify_path,
    verify_rooted,
    walk_table_oracle,
)
from localitylab.adversaries import greedy_completion

from oracles import flexible_by_lengths, rooted_tree_valid, scc_of, self_walk_gcd, walk_sets


# --- problems and verifiers -------------------------------------------------------


def test_twohalf_verifier_examples():
    pi = twohalf_coloring()
    t = from_parents([-1, 0, 0])
    assert verify_rooted(pi, t, ["X", "1", "2"]) == []
    assert verify_rooted(pi, t, ["X", "2", "1"]) == []
    bad = verify_rooted(pi, t, ["1", "1", "2"])
    assert [v.node for v in bad] == [0]
    assert [v.node for v in verify_rooted(pi, t, ["X", "2", "2"])] == [0]
    assert verify_rooted(pi, from_parents([]), []) == []


def test_twohalf_accepts_pure_two_coloring_and_layered_labeling():
    pi = twohalf_coloring()
    t = gen_complete_tree(2, 3)
    depth = [0, 1, 1, 2, 2, 2, 2] + [3] * 8
    assert verify_rooted(pi, t, ["12"[d % 2] for d in depth]) == []
    # A/B near the root, X interface, 1/2 below
    lab = ["A", "B", "B", "X", "X", "X", "X"] + ["1", "2"] * 4
    assert verify_rooted(pi, t, lab) == []


def test_verify_reports_unknown_labels_and_arity():
    pi = coloring_problem(3)
    t = from_parents([-1, 0, 0])
    assert [v.reason for v in verify_rooted(pi, t, ["9", "1", "2"])] == ["label '9' not in problem"]
    one_child = from_parents([-1, 0])
    assert verify_rooted(pi, one_child, ["1", "2"])
    assert verify_rooted(pi, one_child, ["1", "2"], partial=True) == []
    assert verify_rooted(pi, one_child, ["1", "1"], partial=True)


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_verify_rooted_matches_oracle(data):
    pi = data.draw(st.sampled_from([twohalf_coloring(), coloring_problem(2), coloring_problem(3)]))
    depth = data.draw(st.integers(0, 3))
    t = gen_complete_tree(2, depth)
    lab = data.draw(st.lists(st.sampled_from(pi.labels), min_size=t.n, max_size=t.n))
    assert (verify_rooted(pi, t, lab) == []) == rooted_tree_valid(2, pi.configs, t.parent, lab)


def test_verify_path_examples():
    pi = BUILTIN_PATH["3col"]()
    assert verify_path(pi, gen_path(4), ["1", "2", "1", "3"]) == []
    assert [v.node for v in verify_path(pi, gen_path(3), ["1", "1", "2"])] == [0, 1]
    assert verify_path(pi, gen_cycle(4), ["1", "2", "1", "2"]) == []
    assert verify_path(BUILTIN_PATH["2col"](), gen_cycle(5), list("12121"))


# --- file format ------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(BUILTIN_ROOTED))
def test_rooted_round_trip(name):
    pi = BUILTIN_ROOTED[name]()
    assert parse_lcl(format_lcl(pi)) == pi


@pytest.mark.parametrize("name", sorted(BUILTIN_PATH))
def test_path_round_trip(name):
    pi = BUILTIN_PATH[name]()
    back = parse_lcl(format_path_lcl(pi))
    assert (back.r, back.sigma, back.gamma, back.windows) == (pi.r, pi.sigma, pi.gamma, pi.windows)


@pytest.mark.parametrize(
    "text,line",
    [
        ("lcl rooted\nlabels a\n", 1),
        ("lcl rooted delta=2\nlabels a b\nconf a : b\n", 3),
        ("lcl rooted delta=2\nlabels a b\nconf a : b c\n", 3),
        ("lcl rooted delta=2\nlabels a b\n\nconf a b b\n", 4),
        ("lcl rooted delta=2\nlabels a b\nfrob a\n", 3),
        ("lcl path r=1\nlabels 1 2\nwindow 1 2\n", 3),
        ("lcl path r=1\nlabels 1 2\nwindow [1] [2]\n", 3),
        ("lcl path r=1\nlabels 1 2\nwindow 1 1 [2]\n", 3),
        ("lcl path r=1\nlabels 1 2\nwindow [7]\n", 3),
        ("lcl wobble\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as e:
        parse_lcl(text)
    assert e.value.line == line


def test_parse_ignores_comments():
    pi = parse_lcl("# binary 2-coloring\nlcl rooted delta=2\nlabels 1 2\nconf 1 : 2 2\nconf 2 : 1 1\n")
    assert pi.configs == coloring_problem(2).configs


def test_config_children_are_multisets():
    a = RootedLcl.make(2, "ab", [("a", ("b", "a"))])
    assert a.allows("a", ["a", "b"]) and a.allows("a", ["b", "a"])
    with pytest.raises(ValueError):
        RootedLcl(2, ("a",), frozenset({("a", ("a",))}))


# --- path form and automaton ------------------------------------------------------


def test_twohalf_path_form_transitions():
    m = PathAutomaton.of(twohalf_coloring())
    expected = {("A", "B"), ("A", "X"), ("B", "A"), ("B", "X"), ("X", "1"), ("X", "2"), ("X", "A"), ("X", "B"),
                ("1", "2"), ("2", "1")}
    assert m.transitions == expected
    assert path_form(twohalf_coloring()).directed


def test_small_path_forms():
    assert PathAutomaton.of(coloring_problem(2)).transitions == {("1", "2"), ("2", "1")}
    empty = RootedLcl.make(2, "ab", [])
    assert PathAutomaton.of(empty).transitions == set()
    assert PathAutomaton.of(path_form(coloring_problem(3))).transitions == PathAutomaton.of(coloring_problem(3)).transitions
    with pytest.raises(ValueError, match="two-cell"):
        PathAutomaton.of(BUILTIN_PATH["3col"]())


def test_walk_exists_examples():
    two = PathAutomaton.of(coloring_problem(2))
    assert two.walk_exists("1", "1", 4) and not two.walk_exists("1", "1", 3)
    m = PathAutomaton.of(twohalf_coloring())
    assert all(m.walk_exists("A", "A", d) for d in range(4, 200))
    assert all(m.walk_exists(a, a, 0) for a in m.states)
    with pytest.raises(ValueError):
        m.walk_exists("Q", "A", 1)
    with pytest.raises(ValueError):
        m.walk_exists("A", "A", -1)


def test_flexibility_examples():
    pi = twohalf_coloring()
    m = PathAutomaton.of(pi)
    assert not m.is_flexible("1") and not m.is_flexible("2")
    assert all(m.is_flexible(a) for a in "ABX")
    assert all(m.flexibility_constant(a) <= 4 for a in "ABX")
    restricted = PathAutomaton.of(restrict(pi, "ABX"))
    assert not any(restricted.is_flexible(a) for a in "ABX")
    three = PathAutomaton.of(coloring_problem(3))
    assert all(three.is_flexible(a) for a in "123")
    reach = walk_sets(three.states, three.transitions, 20)
    for a in "123":
        k = three.flexibility_constant(a)
        assert k <= 4
        assert all((a, a) in reach[d] for d in range(k, 21))
        assert k == 0 or (a, a) not in reach[k - 1]


def _random_automaton(rng, s):
    states = tuple("abcdef"[:s])
    p = rng.uniform(0.1, 0.7)
    edges = [(a, b) for a in states for b in states if rng.random() < p]
    return PathAutomaton(states, edges)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_automaton_against_bruteforce(s, seed):
    m = _random_automaton(np.random.default_rng(seed), s)
    reach = walk_sets(m.states, m.transitions, 60)
    comp = scc_of(m.states, m.transitions)
    for a in m.states:
        flex_len = flexible_by_lengths(reach, a)
        g = self_walk_gcd(reach, a)
        assert m.is_flexible(a) == flex_len == (g == 1)
        for b in m.states:
            for d in range(61):
                assert m.walk_exists(a, b, d) == ((a, b) in reach[d])
            pair = flexible_by_lengths(reach, a, b)
            assert m.flexible_pair(a, b) == pair
            assert pair == (comp[a] == comp[b] and m.is_flexible(a) and m.is_flexible(b))
    # far beyond the table the periodic answer still matches the numpy oracle
    table = walk_table_oracle(m, 150)
    for d in (90, 117, 150):
        assert np.array_equal(m.reach(d).astype(bool), table[d].astype(bool))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_walk_lengths_description_is_exact(s, seed):
    m = _random_automaton(np.random.default_rng(seed), s)
    reach = walk_sets(m.states, m.transitions, 80)
    for a in m.states:
        for b in m.states:
            small, thr, per, res = m.walk_lengths(a, b)
            for d in range(81):
                want = (a, b) in reach[d]
                got = d in small if d < thr else (d % per) in res
                assert got == want


# --- restriction and decomposition --------------------------------------------------


def test_restrict_examples():
    pi = twohalf_coloring()
    r = restrict(pi, "ABX")
    assert not any(a == "X" for a, _ in r.configs)
    assert restrict(pi, pi.labels) == pi
    assert restrict(pi, []).is_empty()
    with pytest.raises(ValueError):
        restrict(pi, "Q")


def test_twohalf_decomposition():
    dec = inflexible_decomposition(twohalf_coloring())
    assert dec.k == 2
    assert dec.layers == [frozenset("12"), frozenset("ABX")]
    assert dec.terminal == "empty"
    assert dec.problems[-1].is_empty()
    assert dec.layer_of("1") == 1 and dec.layer_of("A") == 2


def test_other_decompositions():
    d3 = inflexible_decomposition(coloring_problem(3))
    assert d3.k == 0 and d3.terminal == "all-flexible"
    d2 = inflexible_decomposition(coloring_problem(2))
    assert d2.k == 1 and d2.layers == [frozenset("12")] and d2.terminal == "empty"


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_decomposition_invariants(nl, seed):
    rng = np.random.default_rng(seed)
    labels = "abcd"[:nl]
    confs = [(a, kids) for a in labels for kids in itertools.combinations_with_replacement(labels, 2)
             if rng.random() < 0.4]
    pi = RootedLcl.make(2, labels, confs)
    dec = inflexible_decomposition(pi)
    removed = set()
    for i, layer in enumerate(dec.layers):
        prev = dec.problems[i]
        m = PathAutomaton.of(prev)
        assert layer == {a for a in prev.labels if not m.is_flexible(a)}
        removed |= layer
        assert set(dec.problems[i + 1].labels) == set(labels) - removed
    last = dec.problems[-1]
    if dec.terminal == "empty":
        assert last.is_empty()
    else:
        again = inflexible_decomposition(last)
        assert again.k == 0


# --- completions --------------------------------------------------------------------


@st.composite
def partial_instances(draw):
    pi = draw(st.sampled_from([twohalf_coloring(), coloring_problem(2), coloring_problem(3)]))
    n = draw(st.integers(1, 9))
    parent = [-1]
    kids = {0: 0}
    for v in range(1, n):
        p = draw(st.sampled_from([u for u in range(v) if kids[u] < 2]))
        parent.append(p)
        kids[p] += 1
        kids[v] = 0
    t = from_parents(parent)
    fixed = {v: draw(st.sampled_from(pi.labels)) for v in range(n) if draw(st.booleans())}
    opened = [v for v in range(n) if draw(st.integers(0, 3)) == 0]
    partial = draw(st.booleans())
    return pi, t, fixed, opened, partial


@settings(max_examples=200, deadline=None)
@given(partial_instances())
def test_completion_dp_matches_bruteforce(inst):
    pi, t, fixed, opened, partial = inst
    got = completion_exists(pi, t, fixed, opened, partial)
    assert got == completion_exists_bruteforce(pi, t, fixed, opened, partial)
    lab = complete_labeling(pi, t, fixed, opened, partial)
    assert (lab is not None) == got
    if lab is not None:
        assert all(lab[v] == a for v, a in fixed.items())
        loose = partial or bool(opened)
        bad = verify_rooted(pi, t, lab, partial=loose)
        if not opened:
            assert bad == []


def test_completion_on_full_trees_matches_exhaustive_labelling():
    pi = twohalf_coloring()
    t = gen_complete_tree(2, 2)
    for root in pi.labels:
        exists = any(rooted_tree_valid(2, pi.configs, t.parent, (root,) + rest)
                     for rest in itertools.product(pi.labels, repeat=t.n - 1))
        assert completion_exists(pi, t, {0: root}) == exists


# --- certificates -------------------------------------------------------------------


def _search_uniform_leaf_trees(pi, depth, leaf):
    """For each root label, some valid labelling of the complete tree with
    all leaves = leaf, by exhaustive enumeration of the internal nodes."""
    t = gen_complete_tree(pi.delta, depth)
    internal = sum(pi.delta**i for i in range(depth))
    out = {}
    for labs in itertools.product(pi.labels, repeat=internal):
        full = list(labs) + [leaf] * (t.n - internal)
        if labs[0] not in out and rooted_tree_valid(pi.delta, pi.configs, t.parent, full):
            out[labs[0]] = full
    return out


def _hand_certificate(pi, d1, d2):
    for leaf in pi.labels:
        a = _search_uniform_leaf_trees(pi, d1, leaf)
        b = _search_uniform_leaf_trees(pi, d2, leaf)
        gamma = tuple(x for x in pi.labels if x in a and x in b)
        if leaf in gamma:
            return Certificate(pi.delta, gamma, (d1, d2), ([a[x] for x in gamma], [b[x] for x in gamma]))
    raise AssertionError("no uniform-leaf certificate")


def test_hand_built_certificate_accepted():
    pi = coloring_problem(3)
    cert = _hand_certificate(pi, 2, 3)
    assert len(cert.gamma_t) == 3
    assert check_certificate(pi, cert) == (True, "ok")
    assert Certificate.from_text(cert.to_text()) == cert


def test_certificate_relabelled_leaf_rejected():
    pi = coloring_problem(3)
    cert = _hand_certificate(pi, 2, 3)
    tree = list(cert.trees[0][1])
    parent_label = tree[(len(tree) - 1 - 1) // 2]
    tree[-1] = next(x for x in pi.labels if x not in (tree[-1], parent_label))
    bad = Certificate(cert.delta, cert.gamma_t, cert.depths, ([cert.trees[0][0], tree, *cert.trees[0][2:]], cert.trees[1]))
    ok, reason = check_certificate(pi, bad)
    assert not ok and reason.startswith("condition 4")


def test_certificate_depths_must_be_coprime():
    pi = coloring_problem(3)
    a = _hand_certificate(pi, 2, 3)
    b = _hand_certificate(pi, 2, 4)
    ok, reason = check_certificate(pi, Certificate(2, a.gamma_t, (2, 4), (a.trees[0], b.trees[1])))
    assert not ok and reason.startswith("condition 1")
    assert math.gcd(2, 4) == 2


def test_certificate_other_conditions():
    pi = coloring_problem(3)
    c = _hand_certificate(pi, 2, 3)
    short = Certificate(2, c.gamma_t, c.depths, (c.trees[0][:2], c.trees[1]))
    assert check_certificate(pi, short)[1].startswith("condition 2")
    swapped = Certificate(2, c.gamma_t, c.depths, (c.trees[0][::-1], c.trees[1][::-1]))
    assert check_certificate(pi, swapped)[1].startswith("condition 5")
    broken = [list(t) for t in c.trees[0]]
    broken[0][1] = broken[0][0]
    assert check_certificate(pi, Certificate(2, c.gamma_t, c.depths, (broken, c.trees[1])))[1].startswith("condition 3")


def test_single_label_certificate():
    pi = RootedLcl.make(2, ["0"], [("0", ("0", "0"))], "trivial")
    cert = _hand_certificate(pi, 1, 2)
    assert cert.gamma_t == ("0",)
    assert check_certificate(pi, cert) == (True, "ok")


def test_extract_certificate_three_coloring():
    pi = coloring_problem(3)
    rep = extract_certificate(pi, greedy_completion(pi), 1)
    assert rep.ok
    assert rep.certificate.depths == (4, 5)
    assert check_certificate(pi, rep.certificate) == (True, "ok")


def test_extract_certificate_fails_on_two_coloring():
    pi = coloring_problem(2)
    rep = extract_certificate(pi, greedy_completion(pi), 1)
    assert not rep.ok and rep.certificate is None
    assert rep.reason


def test_classify_examples():
    c = classify_rooted(twohalf_coloring())
    assert c.tier == "n^Omega(1)" and c.decomposition.k == 2
    c3 = classify_rooted(coloring_problem(3))
    assert c3.tier == "O(log* n)" and c3.certificate is not None
    c2 = classify_rooted(coloring_problem(2))
    assert c2.tier == "n^Omega(1)" and c2.decomposition.k == 1
    assert classify_rooted(coloring_problem(3), search_certificate=False).tier == "O(log n)"
