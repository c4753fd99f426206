import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from localitylab import adversaries as adv
from localitylab.adversaries import (
    ADV_WON,
    ALG_OK,
    AdversaryScriptError,
    CombinationMode,
    combine_layered,
    first_fit,
    greedy_completion,
    longest_directed_walk,
    nested_orientation_slocal,
    replay_witness,
    superlog_adversary,
    twohalf_problem,
    verify_nested,
    walk_bound_check,
)
from localitylab.graph import LayeredTreeSpec, ResourceError, canonical_code, from_edges, gen_layered_tree, gen_path
from localitylab.lcl import coloring_problem
from localitylab.models import run_slocal

from oracles import bfs_dist, rooted_completion_exists

M = CombinationMode


def _depth(g, top, v):
    d = 0
    while v != top:
        v = g.parent[v]
        d += 1
    return d


def _dist(g, a, b):
    return bfs_dist(g, a)[b]


# --- layered-tree combination ---------------------------------------------------


@pytest.fixture(scope="module")
def t25():
    return gen_layered_tree(LayeredTreeSpec(2, 5, 2))


@pytest.mark.parametrize("up_mode,child_mode", [(M.IDENTIFY_B_ROOT_INTO_A_CONNECTOR, M.CHILD_B_ROOT_UNDER_A_CONNECTOR),
                                                (M.IDENTIFY_A_ROOT_INTO_B_CONNECTOR, M.CHILD_A_ROOT_UNDER_B_CONNECTOR)])
def test_identify_and_child_modes_differ_by_one(t25, up_mode, child_mode):
    dists = []
    for mode in (up_mode, child_mode):
        c = combine_layered(t25, t25, mode)
        dists.append(_dist(c.graph, c.of_a[t25.middle], c.of_b[t25.middle]))
    upper_to_conn = _depth(t25.graph, t25.middle, t25.connector)
    root_to_mid = _depth(t25.graph, t25.root, t25.middle)
    assert dists == [upper_to_conn + root_to_mid, upper_to_conn + root_to_mid + 1]


def test_combined_node_counts(t25):
    n = t25.graph.n
    for mode in M:
        c = combine_layered(t25, t25, mode)
        assert c.graph.n == (2 * n - 1 if mode.identify else 2 * n)
        tree = c.tree()
        assert len(tree.roots()) == 1
        # every node keeps at most delta children
        assert max(len(tree.children(v)) for v in range(tree.n)) <= 2
        if not mode.identify:
            assert tree.n == 2 * n


def test_identify_splits_off_the_connector_subtree(t25):
    c = combine_layered(t25, t25, M.IDENTIFY_B_ROOT_INTO_A_CONNECTOR)
    below = t25.graph.children(t25.connector)
    assert len(below) == 1
    sub = [v for v in range(t25.graph.n) if _is_below(t25.graph, v, below[0])]
    assert c.tree().n == 2 * t25.graph.n - 1 - len(sub)
    # B's root sits where A's connector was
    assert c.graph.parent[c.of_b[t25.root]] == c.of_a[t25.graph.parent[t25.connector]]


def _is_below(g, v, top):
    while v >= 0:
        if v == top:
            return True
        v = g.parent[v]
    return False


def test_combination_refuses_seen_nodes(t25):
    with pytest.raises(AdversaryScriptError):
        combine_layered(t25, t25, M.IDENTIFY_B_ROOT_INTO_A_CONNECTOR, seen_a=[t25.connector])
    with pytest.raises(AdversaryScriptError):
        combine_layered(t25, t25, M.CHILD_A_ROOT_UNDER_B_CONNECTOR, seen_a=[t25.root])
    # seen nodes elsewhere are fine
    combine_layered(t25, t25, M.CHILD_A_ROOT_UNDER_B_CONNECTOR, seen_a=[t25.middle], seen_b=[t25.root])


def test_modes_are_the_four_cases():
    assert len(M) == 4 and len(adv.MODE_ORDER) == 4 and set(adv.MODE_ORDER) == set(M)
    assert sum(m.identify for m in M) == 2 and sum(m.a_on_top for m in M) == 2


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("x", range(1, 8))
def test_layered_lower_layer_far_below(k, x):
    lt = gen_layered_tree(LayeredTreeSpec(k, x, 2))
    g = lt.graph
    kids = {v: g.children(v) for v in range(g.n)}
    for v in range(g.n):
        i = lt.layer[v]
        if i < 2:
            continue
        dist = {v: 0}
        todo = [v]
        for u in todo:
            for w in kids[u]:
                dist[w] = dist[u] + 1
                todo.append(w)
        assert any(lt.layer[u] == i - 1 and d >= x for u, d in dist.items())


# --- the layered-tree adversary ----------------------------------------------


def _certify_independently(pi, rep):
    w = rep.witness
    g = w.instance
    return not rooted_completion_exists(pi.configs, list(g.parent), w.instance_labels, pi.labels)


@pytest.mark.parametrize("T", [0, 1, 2])
@pytest.mark.parametrize("make", [greedy_completion, first_fit])
def test_superlog_defeats_baselines(T, make):
    pi = twohalf_problem()
    rep = superlog_adversary(pi, make(pi), T)
    assert rep.outcome == ADV_WON
    assert rep.details["x"] == 2 * T + 3
    assert rep.details["certified_dp"] and rep.details["certified_bruteforce"]
    assert rep.details["instance_solvable_without_commitments"]
    assert _certify_independently(pi, rep)
    assert replay_witness(rep.witness, make(pi))
    if T == 1:
        assert rep.witness.instance.n <= 4 * 55 + 4


def test_superlog_on_two_coloring():
    pi = coloring_problem(2)
    rep = superlog_adversary(pi, greedy_completion(pi), 1)
    assert rep.outcome == ADV_WON and rep.details["k"] == 1
    assert rep.details["copies"] == 4
    assert _certify_independently(pi, rep)


def test_superlog_preconditions():
    with pytest.raises(ValueError):
        superlog_adversary(coloring_problem(3), first_fit(coloring_problem(3)), 1)
    pi = twohalf_problem()
    with pytest.raises(ValueError):
        superlog_adversary(pi, first_fit(pi), 2, x=6)
    with pytest.raises(ResourceError) as e:
        superlog_adversary(pi, first_fit(pi), 2, budget=500)
    assert "x=7" in str(e.value)


def test_superlog_uses_only_the_view():
    # an algorithm that records what it is handed sees only OnlineView objects
    pi = twohalf_problem()
    base = greedy_completion(pi)
    kinds = set()

    def spy(view):
        kinds.add(type(view).__name__)
        return base(view)

    assert superlog_adversary(pi, spy, 1).outcome == ADV_WON
    assert kinds == {"OnlineView"}


def test_report_text():
    pi = twohalf_problem()
    text = superlog_adversary(pi, first_fit(pi), 0).to_text()
    assert text.startswith("problem: twohalf\nmodel: online\nalgorithm: first-fit[twohalf]\noutcome: adversary-won\n")
    assert "certified: True" in text


# --- separation suites ---------------------------------------------------------


@pytest.fixture(scope="module")
def suites():
    return {name: f() for name, f in adv.SUITES.items()}


def test_suites_positive_then_adversaries(suites):
    for name, reps in suites.items():
        first, rest = reps[0], reps[1:]
        assert first.outcome == ALG_OK and first.witness is None, name
        assert rest
        for r in rest:
            assert r.outcome == ADV_WON and r.witness.certified, (name, r.algorithm)
            assert r.witness.graph.n <= 200


def test_suite_models(suites):
    models = {name: [r.model for r in reps] for name, reps in suites.items()}
    assert models == {
        "weak-reconstruction": ["dynamic", "slocal", "slocal"],
        "cycle-detection": ["dynamic", "dynamic-pm", "slocal", "slocal"],
        "leader-election": ["online", "dynamic", "slocal"],
        "nested-orientation": ["slocal", "dynamic"],
    }


def test_suite_witnesses_replay(suites):
    from localitylab.cli import algorithm_by_name

    for name, reps in suites.items():
        for r in reps[1:]:
            assert replay_witness(r.witness, algorithm_by_name(r.algorithm, name)), (name, r.algorithm)


def test_weak_reconstruction_family_size():
    fam = adv.rooted_trees_with_root_degree(9)
    assert len(fam) == 160
    assert len({canonical_code(t) for t in fam}) == 160
    assert all(len(t.children(t.roots()[0])) == 2 for t in fam)
    rep = adv.weak_reconstruction_adversary(adv.ball_reconstruction_slocal(2), 2)
    assert rep.details["k_exceeds_2n"] and rep.details["pivot_checks"] == 3


def test_two_order_traces_match():
    # a ball of radius 3 never shows the 40-cycle, so the intact cycle fails
    rep = adv.cycle_two_order_adversary(adv.ball_cycle_slocal(3), 3)
    assert rep.details["orders_identical"] and rep.outcome == ADV_WON
    assert rep.witness.violated == "a cycle has no node reporting yes"
    # the optimistic baseline says yes, so an edge is deleted behind it
    rep = adv.cycle_two_order_adversary(adv.optimistic_cycle_slocal(3), 3)
    assert rep.details["orders_identical"] and rep.details["early_outputs_kept"]
    assert rep.outcome == ADV_WON and "deleted_edge" in rep.details


def test_cycle_far_deletion_example():
    rep = adv.cycle_far_deletion_adversary(adv.recompute_cycle_dynamic, 3, 40)
    assert rep.outcome == ADV_WON
    assert rep.details["valid_before"] and rep.details["distance_to_yes"] > 3
    assert "reports yes but lies on no cycle" in rep.witness.violated


def test_leader_far_join_example():
    rep = adv.leader_far_join_adversary(adv.local_demotion_dynamic, 3)
    assert rep.outcome == ADV_WON and rep.details["join_distance_to_leaders"] > 3
    assert "2 leaders" in rep.witness.violated


def test_verifiers_reject_obvious_errors():
    g = gen_path(4)
    assert adv.cycle_detection_violations(g, {v: "yes" for v in range(4)})
    assert not adv.cycle_detection_violations(g, {v: "no" for v in range(4)})
    assert adv.leader_violations(g, {v: "follower" for v in range(4)})
    assert adv.leader_ok(g, {0: "leader", 1: "follower", 2: "follower", 3: "follower"})
    assert not adv.weak_reconstruction_ok(g, {})


# --- nested orientation ---------------------------------------------------------


def test_nested_star_any_order():
    g = from_edges(6, [(0, v) for v in range(1, 6)])
    rng = np.random.default_rng(0)
    for _ in range(10):
        order = rng.permutation(6).tolist()
        labels, _ = run_slocal(nested_orientation_slocal(), g, order, 1)
        assert verify_nested(g, None, labels) == []
        pos = order.index(0)
        # the center points at exactly the leaves processed after it
        assert labels[0][1] == frozenset(order[pos + 1:])


def test_nested_single_node():
    g = from_edges(1, [])
    labels, _ = run_slocal(nested_orientation_slocal(), g, [0], 1, [7])
    assert labels[0][0] == (7, frozenset(), frozenset())
    assert verify_nested(g, [7], labels) == []


def test_nested_path_walk():
    g = gen_path(6)
    labels, tr = run_slocal(nested_orientation_slocal(), g, list(range(6)), 1)
    assert longest_directed_walk(labels) == 5
    for T in range(5):
        assert not walk_bound_check(tr, T)
    assert walk_bound_check(labels, 5)


def test_verify_nested_rejections():
    g = gen_path(3)
    labels, _ = run_slocal(nested_orientation_slocal(), g, [0, 1, 2], 1)
    bad = dict(labels)
    bad[1] = (labels[1][0], labels[1][1] | {0})
    assert verify_nested(g, None, bad)
    h = dict(labels)
    h[2] = ((2, frozenset({1}), frozenset()), labels[2][1])
    assert any("H differs" in x for x in verify_nested(g, None, h))
    assert verify_nested(g, [0, 0, 1], labels) == ["identifiers are not distinct"]
    c3 = from_edges(3, [(0, 1), (1, 2), (0, 2)])
    cyc = {v: ((v, frozenset(c3.adj[v]), frozenset()), frozenset({(v + 1) % 3})) for v in range(3)}
    assert any("cycle" in x for x in verify_nested(c3, None, cyc))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25), st.floats(0, 0.4), st.randoms(use_true_random=False))
def test_nested_solver_on_random_graphs(n, p, rnd):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rnd.random() < p]
    g = from_edges(n, edges)
    order = list(range(n))
    rnd.shuffle(order)
    uids = rnd.sample(range(100 * n), n)
    labels, _ = run_slocal(nested_orientation_slocal(), g, order, 1, uids)
    assert verify_nested(g, uids, labels) == []
