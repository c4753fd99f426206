import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from localitylab.graph import (
    Graph,
    LayeredTreeSpec,
    ParseError,
    ResourceError,
    ball,
    bipartition,
    canonical_code,
    components,
    distances,
    from_edges,
    from_parents,
    from_text,
    gen_complete_tree,
    gen_cycle,
    gen_grid,
    gen_layered_tree,
    gen_path,
    induced,
    to_text,
)


def nx_of(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return from_edges(n, edges)


@st.composite
def rooted_trees(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    parent = [-1] + [draw(st.integers(0, v - 1)) for v in range(1, n)]
    return from_parents(parent)


# --- construction invariants ---------------------------------------------


def test_graph_rejects_self_loop_and_asymmetry():
    with pytest.raises(ValueError):
        Graph(2, ((0,), ()))
    with pytest.raises(ValueError):
        Graph(2, ((1,), ()))
    with pytest.raises(ValueError):
        from_edges(2, [(0, 1), (1, 0)])


def test_rooted_parent_must_be_acyclic():
    with pytest.raises(ValueError):
        Graph(2, ((1,), (0,)), parent=(1, 0))


# --- balls ----------------------------------------------------------------


def test_ball_examples():
    p = gen_path(5)
    assert ball(p, 2, 0) == (2,)
    assert ball(p, 2, 1) == (1, 2, 3)
    g = gen_grid(3, 3)
    assert ball(g, 4, 1) == tuple(sorted(nx.single_source_shortest_path_length(nx_of(g), 4, cutoff=1)))
    assert len(ball(g, 4, 1)) == 5


def test_ball_rejects_bad_node():
    with pytest.raises(ValueError):
        ball(gen_path(3), 5, 1)
    with pytest.raises(ValueError):
        ball(gen_path(3), -1, 1)


@settings(max_examples=60, deadline=None)
@given(graphs(), st.data())
def test_ball_matches_networkx_and_is_monotone(g, data):
    if g.n == 0:
        return
    v = data.draw(st.integers(0, g.n - 1))
    ref = nx.single_source_shortest_path_length(nx_of(g), v)
    comp = len(ref)
    prev = 0
    for T in range(g.n + 1):
        b = ball(g, v, T)
        assert set(b) == {u for u, d in ref.items() if d <= T}
        assert len(b) >= prev
        prev = len(b)
    assert prev == comp


@settings(max_examples=40, deadline=None)
@given(graphs(10), st.data())
def test_induced_ball_commutes(g, data):
    if g.n == 0:
        return
    v = data.draw(st.integers(0, g.n - 1))
    T = data.draw(st.integers(0, 4))
    big = ball(g, v, T)
    sub = induced(g, big)
    for w in big:
        for t in range(T + 1):
            inner = ball(g, w, t)
            if set(inner) <= set(big):
                got = ball(sub.graph, sub.new_of_old[w], t)
                assert {sub.old_of_new[x] for x in got} == set(inner)


# --- induced ------------------------------------------------------------------


def test_induced_examples():
    sub = induced(gen_cycle(6), {0, 1, 2})
    assert sub.graph.edges() == [(0, 1), (1, 2)]
    assert induced(gen_path(4), set()).graph.n == 0
    row = induced(gen_grid(2, 3), {0, 1, 2})
    assert row.graph.edges() == [(0, 1), (1, 2)]


def test_induced_keeps_orientation():
    t = gen_complete_tree(2, 2)
    sub = induced(t, {1, 3, 4})
    assert sub.graph.parent == (-1, 0, 0)


# --- generators ----------------------------------------------------------------


def test_generator_sizes():
    assert gen_complete_tree(2, 3).n == 15
    assert gen_grid(16, 16).n == 256
    assert gen_cycle(10).num_edges() == 10
    assert gen_path(1).num_edges() == 0


def test_layered_tree_sizes():
    lt = gen_layered_tree(LayeredTreeSpec(2, 5, 2))
    assert lt.graph.n == 55
    assert gen_layered_tree(LayeredTreeSpec(0, 7, 3)).graph.n == 1


def _layered_size_recursive(k, x, delta):
    return 1 if k == 0 else x * (1 + (delta - 1) * _layered_size_recursive(k - 1, x, delta))


@pytest.mark.parametrize("k,x,delta", [(k, x, d) for k in range(4) for x in range(1, 6) for d in (2, 3)])
def test_layered_tree_size_closed_form(k, x, delta):
    spec = LayeredTreeSpec(k, x, delta)
    lt = gen_layered_tree(spec)
    assert lt.graph.n == spec.size() == _layered_size_recursive(k, x, delta)
    if k == 2 and delta == 2:
        assert lt.graph.n == x + 2 * x * x


def test_layered_tree_roles():
    lt = gen_layered_tree(LayeredTreeSpec(2, 5, 2))
    g = lt.graph
    assert g.roots() == [lt.root]
    assert lt.core[0] == lt.connector and lt.core[-1] == lt.root
    assert lt.middle == lt.core[2]
    # the connector carries only the lower-layer copy
    assert len(g.children(lt.connector)) == 1
    assert lt.layer[lt.connector] == 2
    for a, b in zip(lt.core[1:], lt.core):
        assert g.parent[b] == a


def test_layered_tree_spec_validation():
    with pytest.raises(ValueError):
        LayeredTreeSpec(1, 0, 2)
    with pytest.raises(ValueError):
        LayeredTreeSpec(1, 3, 1)


def test_budget_is_enforced(monkeypatch):
    monkeypatch.setenv("LOCALITY_LAB_BUDGET", "100")
    with pytest.raises(ResourceError):
        gen_path(101)
    with pytest.raises(ResourceError):
        gen_layered_tree(LayeredTreeSpec(3, 7, 2))


# --- components / bipartition --------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(graphs())
def test_components_and_bipartition_match_networkx(g):
    h = nx_of(g)
    assert sorted(map(sorted, components(g))) == sorted(sorted(c) for c in nx.connected_components(h))
    side, cyc = bipartition(g)
    assert (side is not None) == nx.is_bipartite(h)
    if side is None:
        assert len(cyc) % 2 == 1
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            assert g.has_edge(a, b)
    else:
        assert all(side[u] != side[v] for u, v in g.edges())


# --- text format ------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.one_of(graphs(), rooted_trees()))
def test_text_round_trip(g):
    assert from_text(to_text(g)) == g
    assert to_text(from_text(to_text(g))) == to_text(g)


def test_text_inputs_round_trip():
    g = from_edges(3, [(0, 1), (1, 2)], inputs=["a", "b", "a"])
    assert from_text(to_text(g)) == g


@pytest.mark.parametrize(
    "text,line",
    [
        ("graph 3\nedge 0 1\nedge 1 9\n", 3),
        ("graph 2\nedge 0\n", 2),
        ("graph 2 rooted\nparent 1 0\nparent 1 0\n", 3),
        ("graph 2\nwobble 0 1\n", 2),
        ("grph 2\n", 1),
    ],
)
def test_text_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as e:
        from_text(text)
    assert e.value.line == line
    assert str(e.value).startswith(f"line {line}:")


# --- canonical codes --------------------------------------------------------------


def test_canonical_examples():
    assert canonical_code(gen_path(3)) != canonical_code(gen_path(4))
    t1 = from_parents([-1, 0, 0, 1])
    t2 = from_parents([-1, 0, 0, 2])
    assert canonical_code(t1) == canonical_code(t2)


def test_star_labelings_give_two_codes():
    # the 6 orderings of labels (a, a, b) over a 3-node star: b sits either
    # on the center or on a leaf
    star = from_edges(3, [(0, 1), (0, 2)])
    labelings = list(itertools.permutations("aab"))
    assert len(labelings) == 6
    codes = {canonical_code(star, lab) for lab in labelings}
    classes: list = []
    for lab in labelings:
        if not any(_nx_iso(star, lab, star, other) for other in classes):
            classes.append(lab)
    assert len(codes) == len(classes) == 2


def _nx_iso(g, lg, h, lh):
    a, b = nx_of(g), nx_of(h)
    for v in range(g.n):
        a.nodes[v]["l"] = lg[v]
        a.nodes[v]["r"] = g.parent is not None and g.parent[v] < 0
    for v in range(h.n):
        b.nodes[v]["l"] = lh[v]
        b.nodes[v]["r"] = h.parent is not None and h.parent[v] < 0
    return nx.is_isomorphic(a, b, node_match=lambda x, y: x == y)


@settings(max_examples=150, deadline=None)
@given(graphs(7), graphs(7), st.data())
def test_canonical_code_agrees_with_isomorphism_oracle(g, h, data):
    lg = data.draw(st.lists(st.sampled_from("ab"), min_size=g.n, max_size=g.n))
    lh = data.draw(st.lists(st.sampled_from("ab"), min_size=h.n, max_size=h.n))
    same = canonical_code(g, lg) == canonical_code(h, lh)
    assert same == _nx_iso(g, lg, h, lh)


@settings(max_examples=60, deadline=None)
@given(graphs(7), st.data())
def test_canonical_code_invariant_under_relabeling(g, data):
    perm = data.draw(st.permutations(range(g.n)))
    h = from_edges(g.n, [(perm[u], perm[v]) for u, v in g.edges()])
    lg = data.draw(st.lists(st.sampled_from("xyz"), min_size=g.n, max_size=g.n))
    lh = [None] * g.n
    for v in range(g.n):
        lh[perm[v]] = lg[v]
    assert canonical_code(g, lg) == canonical_code(h, lh)


@settings(max_examples=60, deadline=None)
@given(rooted_trees(9), rooted_trees(9))
def test_rooted_tree_codes_match_oracle(g, h):
    lg = ["."] * g.n
    lh = ["."] * h.n
    assert (canonical_code(g) == canonical_code(h)) == _nx_iso(g, lg, h, lh)


def test_general_canon_budget():
    g = gen_grid(9, 9)
    with pytest.raises(ResourceError):
        canonical_code(g)
    assert canonical_code(gen_grid(3, 3), limit=9)


def test_distances_limit():
    assert distances(gen_path(10), 0, 3) == {0: 0, 1: 1, 2: 2, 3: 3}
