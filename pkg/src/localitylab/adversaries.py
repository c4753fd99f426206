"""Adversary constructions and the model-separation suites.

The online adversary for problems whose inflexible decomposition ends empty
works on a forest of layered trees, reads only the labels the algorithm
emits and which nodes the engine has shown, and rewires unseen parts of the
forest between reveals. Every claimed victory is backed by an exact
completion check on the final instance.
"""
from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .graph import (
    Graph,
    GraphBuilder,
    LayeredTree,
    LayeredTreeSpec,
    ResourceError,
    ball,
    canonical_code,
    components,
    distances,
    from_edges,
    from_parents,
    gen_complete_tree,
    gen_cycle,
    gen_layered_tree,
    induced,
    node_budget,
)
from .lcl import (
    Certificate,
    ExtractionReport,
    Label,
    PathAutomaton,
    RootedLcl,
    check_certificate,
    complete_labeling,
    completion_exists,
    completion_exists_bruteforce,
    inflexible_decomposition,
    twohalf_coloring,
)
from .models import (
    ContractViolation,
    DynamicEngine,
    DynamicView,
    ExecutionTrace,
    OnlineAlgorithm,
    OnlineEngine,
    OnlineView,
    SlocalView,
    edits_for_graph,
    format_edit,
    parse_edit,
    run_dynamic,
    run_online,
    run_slocal,
)

ALG_OK = "algorithm-succeeded"
ADV_WON = "adversary-won"


class AdversaryScriptError(RuntimeError):
    """The adversary would have to touch something the algorithm has seen."""


def twohalf_problem() -> RootedLcl:
    return twohalf_coloring()


# --- reports -------------------------------------------------------------


@dataclass
class Witness:
    """An instance plus the run that fails on it.

    ``graph`` and ``script`` replay the run in ``model``; ``instance`` is the
    part of the graph that carries the violation when that is smaller.
    Script lines are ``reveal v`` (online), ``process v`` (SLOCAL) or edits
    (dynamic).
    """

    graph: Graph
    script: list[str]
    labels: dict[int, Hashable]
    violated: str
    certified: bool
    instance: Graph | None = None
    instance_labels: dict[int, Hashable] | None = None
    model: str = "online"
    T: int = 0
    uids: list[int] | None = None
    n_claim: int | None = None

    def script_text(self) -> str:
        return "\n".join(self.script) + "\n"


@dataclass
class SeparationReport:
    problem: str
    model: str
    algorithm: str
    outcome: str
    witness: Witness | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_text(self) -> str:
        out = [f"problem: {self.problem}", f"model: {self.model}", f"algorithm: {self.algorithm}",
               f"outcome: {self.outcome}"]
        for k in sorted(self.details):
            out.append(f"{k}: {self.details[k]}")
        w = self.witness
        if w is not None:
            out.append(f"witness_nodes: {w.graph.n}")
            if w.instance is not None:
                out.append(f"instance_nodes: {w.instance.n}")
            out.append(f"violated: {w.violated}")
            out.append(f"certified: {w.certified}")
            out.append(f"script_steps: {len(w.script)}")
        return "\n".join(out) + "\n"


# --- layered-tree combination ---------------------------------------------


class CombinationMode(Enum):
    IDENTIFY_B_ROOT_INTO_A_CONNECTOR = "identify-B-root-into-A-connector"  # (a)
    IDENTIFY_A_ROOT_INTO_B_CONNECTOR = "identify-A-root-into-B-connector"  # (b)
    CHILD_B_ROOT_UNDER_A_CONNECTOR = "child-B-root-under-A-connector"  # (c)
    CHILD_A_ROOT_UNDER_B_CONNECTOR = "child-A-root-under-B-connector"  # (d)

    @property
    def identify(self) -> bool:
        return self.value.startswith("identify")

    @property
    def a_on_top(self) -> bool:
        """True when B hangs below A's connector."""
        return self in (CombinationMode.IDENTIFY_B_ROOT_INTO_A_CONNECTOR, CombinationMode.CHILD_B_ROOT_UNDER_A_CONNECTOR)


# order in which modes are tried: a, c, b, d
MODE_ORDER = (
    CombinationMode.IDENTIFY_B_ROOT_INTO_A_CONNECTOR,
    CombinationMode.CHILD_B_ROOT_UNDER_A_CONNECTOR,
    CombinationMode.IDENTIFY_A_ROOT_INTO_B_CONNECTOR,
    CombinationMode.CHILD_A_ROOT_UNDER_B_CONNECTOR,
)


def _kids(b: GraphBuilder, v: int) -> list[int]:
    assert b.parent is not None
    return sorted(w for w in b.nbrs[v] if b.parent[w] == v)


def _subtree(b: GraphBuilder, v: int) -> list[int]:
    out = [v]
    for u in out:
        out.extend(_kids(b, u))
    return out


def _attach(b: GraphBuilder, connector: int, root: int, identify: bool) -> None:
    """Hang ``root`` at ``connector``. Identification merges the two nodes:
    ``root`` takes the connector's place under its parent and the connector's
    own children are split off as separate trees, so arity stays delta. The
    connector is left isolated."""
    assert b.parent is not None
    if b.parent[root] >= 0:
        raise AdversaryScriptError(f"node {root} is not a root")
    if not identify:
        b.set_parent(root, connector)
        return
    p = b.parent[connector]
    if p < 0:
        raise AdversaryScriptError("cannot identify into a connector that is itself a root")
    for c in _kids(b, connector):
        b.remove_edge(connector, c)
        b.parent[c] = -1
    b.remove_edge(p, connector)
    b.parent[connector] = -1
    b.set_parent(root, p)


@dataclass
class CombinedTree:
    """``graph`` holds |A|+|B| nodes minus the merged connector in identify
    modes; the combined tree is the component of ``root``, any other
    components are split-off pendants of the merged connector."""

    graph: Graph
    root: int
    of_a: dict[int, int]  # node of A -> node of graph
    of_b: dict[int, int]
    mode: CombinationMode

    def tree(self) -> Graph:
        comp = next(c for c in components(self.graph) if self.root in c)
        return induced(self.graph, comp).graph


def combine_layered(a: LayeredTree, b: LayeredTree, mode: CombinationMode,
                    seen_a: Iterable[int] = (), seen_b: Iterable[int] = ()) -> CombinedTree:
    """Combine two layered trees in one of the four modes.

    ``seen_a``/``seen_b`` are the nodes an algorithm has already seen; the
    connector of the upper tree and the root of the lower tree must not be
    among them.
    """
    sa, sb = set(seen_a), set(seen_b)
    upper, lower, s_up, s_low = (a, b, sa, sb) if mode.a_on_top else (b, a, sb, sa)
    if upper.connector in s_up:
        raise AdversaryScriptError("connector of the upper tree has been seen")
    if lower.root in s_low:
        raise AdversaryScriptError("root of the lower tree has been seen")
    bld = GraphBuilder(0)
    bld.parent = []
    off = {}
    for name, t in (("A", a), ("B", b)):
        off[name] = bld.n
        for _ in range(t.graph.n):
            bld.add_node()
        assert t.graph.parent is not None
        for v, p in enumerate(t.graph.parent):
            if p >= 0:
                bld.set_parent(off[name] + v, off[name] + p)
    up_off, low_off = (off["A"], off["B"]) if mode.a_on_top else (off["B"], off["A"])
    conn = up_off + upper.connector
    _attach(bld, conn, low_off + lower.root, mode.identify)
    keep = [v for v in range(bld.n) if not (mode.identify and v == conn)]
    ind = induced(bld.freeze(), keep)
    m = ind.new_of_old
    of_a = {v: m[off["A"] + v] for v in range(a.graph.n) if off["A"] + v in m}
    of_b = {v: m[off["B"] + v] for v in range(b.graph.n) if off["B"] + v in m}
    return CombinedTree(ind.graph, m[up_off + upper.root], of_a, of_b, mode)


# --- baseline online algorithms ---------------------------------------------


def _visible_component(view: OnlineView) -> tuple[Graph, dict[int, int], list[int]]:
    comp = sorted(view.bfs(view.v))
    idx = {u: i for i, u in enumerate(comp)}
    b = GraphBuilder(len(comp))
    b.parent = [-1] * len(comp)
    for u in comp:
        p = view.parent(u)
        if p is not None and p in idx:
            b.set_parent(idx[u], idx[p])
    return b.freeze(), idx, comp


def greedy_completion(pi: RootedLcl) -> OnlineAlgorithm:
    """Pick the first label (in problem order) that leaves the visible
    component completable. Nodes not within T-1 of a revealed node may still
    have unseen children and count as open."""

    def alg(view: OnlineView) -> Label:
        rd = view.memory.setdefault("rdist", {})
        for u, d in view.bfs(view.v, view.T).items():
            if d < rd.get(u, 1 << 30):
                rd[u] = d
        sub, idx, comp = _visible_component(view)
        fixed = {idx[u]: view.label(u) for u in comp if view.label(u) is not None}
        open_nodes = [idx[u] for u in comp if rd.get(u, 1 << 30) > view.T - 1]
        me = idx[view.v]
        for a in pi.labels:
            fixed[me] = a
            if completion_exists(pi, sub, fixed, open_nodes, partial=True):
                return a
        view.memory["stuck"] = view.memory.get("stuck", 0) + 1
        return pi.labels[0]

    alg.__name__ = f"greedy-completion[{pi.name}]"
    return alg


def first_fit(pi: RootedLcl) -> OnlineAlgorithm:
    """First label consistent with the labelled visible parent and children."""

    def alg(view: OnlineView) -> Label:
        v = view.v
        kids = [view.label(c) for c in view.children(v)]
        kids = [c for c in kids if c is not None]
        p = view.parent(v)
        plab = view.label(p) if p is not None else None
        sibs = [view.label(c) for c in view.children(p) if c != v] if p is not None else []
        sibs = [c for c in sibs if c is not None]
        for a in pi.labels:
            if not pi.allows(a, kids):
                continue
            if plab is not None and not pi.allows(plab, sibs + [a]):
                continue
            return a
        return pi.labels[0]

    alg.__name__ = f"first-fit[{pi.name}]"
    return alg


# --- the layered-tree adversary ---------------------------------------------


@dataclass
class _Piece:
    root: int
    connector: int
    anchor: int
    label: Label
    layer: int
    copies: tuple[int, ...]


class _Forest:
    """Growing forest of layered trees shown to an online engine."""

    def __init__(self, spec: LayeredTreeSpec, copies: int):
        self.b = GraphBuilder(0)
        self.b.parent = []
        self.layer: list[int] = []
        self.trees: list[tuple[int, int, int]] = []  # (root, connector, middle)
        for _ in range(copies):
            lt = gen_layered_tree(spec)
            off = self.b.n
            for _ in range(lt.graph.n):
                self.b.add_node()
            assert lt.graph.parent is not None
            for v, p in enumerate(lt.graph.parent):
                if p >= 0:
                    self.b.set_parent(off + v, off + p)
            self.layer.extend(lt.layer)
            self.trees.append((off + lt.root, off + lt.connector, off + lt.middle))
        self.delta = spec.delta
        self.graph = self.b.freeze()

    def refresh(self) -> Graph:
        self.graph = self.b.freeze()
        return self.graph

    def depth_below(self, top: int, v: int) -> int:
        """Edges from ``top`` down to its descendant ``v``."""
        par = self.b.parent
        assert par is not None
        d = 0
        while v != top:
            v = par[v]
            if v < 0:
                raise AdversaryScriptError(f"node {top} is not an ancestor")
            d += 1
        return d

    def path_down(self, top: int, v: int) -> list[int]:
        par = self.b.parent
        assert par is not None
        out = [v]
        while v != top:
            v = par[v]
            out.append(v)
        return out[::-1]


def _walk(m: PathAutomaton, a: Label, b: Label, d: int) -> bool:
    return m.walk_exists(a, b, d)


def superlog_adversary(pi: RootedLcl, alg: OnlineAlgorithm, T: int, x: int | None = None,
                       budget: int | None = None, name: str | None = None) -> SeparationReport:
    """Run the collection-based layered-tree adversary against ``alg``.

    Label the middle core node of 2^(k+1) copies of the k-layer tree, bucket
    the copies by the layer of the label, repeatedly join two copies of one
    bucket so that no walk of the needed length exists in the automaton of
    the matching restricted problem, reveal the joining path, and continue
    from the node that had to take a lower-layer label. Two trees in the
    lowest bucket are finally joined so that no valid completion exists.
    """
    dec = inflexible_decomposition(pi)
    if dec.terminal != "empty":
        raise ValueError("the inflexible decomposition of the problem does not end empty")
    k = dec.k
    if x is None:
        x = 2 * T + 3
    if x <= 2 * T + 2:
        raise ValueError(f"x must exceed 2T+2 = {2 * T + 2}")
    spec = LayeredTreeSpec(k, x, pi.delta)
    copies = 2 ** (k + 1)
    total = copies * spec.size()
    limit = node_budget() if budget is None else budget
    if total > limit:
        raise ResourceError(f"adversary needs {total} nodes for x={x} (T={T}, k={k}); budget is {limit}")
    forest = _Forest(spec, copies)
    eng = OnlineEngine(alg, total, T, forest.graph)
    automata = [PathAutomaton.of(p) for p in dec.problems]
    log: list[str] = []
    alg_name = name or getattr(alg, "__name__", "algorithm")

    def reveal(v: int) -> Label:
        return eng.reveal(v, forest.graph)

    def finish(outcome: str, violated: str, region_root: int, extra: dict | None = None) -> SeparationReport:
        g = forest.graph
        comp = next(c for c in components(g) if region_root in c)
        ind = induced(g, comp)
        fixed = {ind.new_of_old[v]: eng.labels[v] for v in comp if v in eng.labels}
        dp = not completion_exists(pi, ind.graph, fixed, partial=True)
        bf = not completion_exists_bruteforce(pi, ind.graph, fixed, partial=True)
        free = completion_exists(pi, ind.graph, {}, partial=True)
        details = {
            "k": k, "x": x, "T": T, "copies": copies, "total_nodes": total,
            "steps": "; ".join(log) if log else "none", "certified_dp": dp,
            "certified_bruteforce": bf, "instance_solvable_without_commitments": free,
            "n_claim": total,
        }
        details.update(extra or {})
        if outcome == ADV_WON and not (dp and bf):
            outcome = ALG_OK
            violated = "certification failed: " + violated
        script = [f"reveal {v}" for v in eng.revealed]
        w = Witness(g, script, dict(eng.labels), violated, dp and bf, ind.graph, fixed, "online", T, None, total)
        return SeparationReport(pi.name, "online", alg_name, outcome, w, details)

    buckets: dict[int, list[_Piece]] = {i: [] for i in range(1, k + 1)}
    for c, (root, conn, mid) in enumerate(forest.trees):
        lab = reveal(mid)
        j = dec.layer_of(lab) if lab in pi.labels else 0
        if j == 0:
            return finish(ADV_WON, f"label {lab!r} outside the problem at node {mid}", mid)
        buckets[j].append(_Piece(root, conn, mid, lab, j, (c,)))
    log.append("middles " + ",".join(f"C{i}={len(buckets[i])}" for i in range(1, k + 1)))

    while True:
        i = 1 if len(buckets[1]) >= 2 else next((i for i in range(k, 1, -1) if len(buckets[i]) >= 2), None)
        if i is None:
            # cannot happen with 2^(k+1) copies; reported rather than hidden
            return finish(ALG_OK, "no bucket holds two trees", forest.trees[0][0])
        A, B = buckets[i].pop(0), buckets[i].pop(0)
        m = automata[i - 1]
        choice = None
        for mode in MODE_ORDER:
            up, low = (A, B) if mode.a_on_top else (B, A)
            d = forest.depth_below(up.anchor, up.connector) + forest.depth_below(low.root, low.anchor)
            d += 0 if mode.identify else 1
            if not _walk(m, up.label, low.label, d):
                choice = (mode, up, low, d)
                break
        if choice is None:
            raise AdversaryScriptError(f"labels {A.label},{B.label} admit walks for all four modes")
        mode, up, low, d = choice
        for node, what in ((up.connector, "connector"), (low.root, "root")):
            if eng.local_of_arr[node] >= 0:
                raise AdversaryScriptError(f"{what} {node} has been seen by the algorithm")
        _attach(forest.b, up.connector, low.root, mode.identify)
        try:
            eng.set_graph(forest.refresh())
        except ContractViolation as e:
            raise AdversaryScriptError(str(e)) from e
        log.append(f"C{i}:{up.label}>{low.label} {mode.value} d={d}")
        if i == 1:
            return finish(ADV_WON, f"no walk {up.label}->{low.label} of length {d} in the path-form automaton",
                          up.root, {"final_mode": mode.value, "final_distance": d})
        path = forest.path_down(up.anchor, low.anchor)
        region = []
        for v in path:
            region.append(v)
            region.extend(w for w in _kids(forest.b, v) if w not in path)
        for v in region:
            if v not in eng.labels:
                reveal(v)
        keep = set(dec.problems[i - 1].labels)
        forced = []
        for pos, v in enumerate(region):
            lab = eng.labels[v]
            if lab not in pi.labels:
                return finish(ADV_WON, f"label {lab!r} outside the problem at node {v}", up.root)
            if lab not in keep:
                forced.append((dec.layer_of(lab), pos, v))
        if not forced:
            bad = _first_bad_configuration(dec.problems[i - 1], forest, path, eng.labels)
            return finish(ADV_WON, f"invalid configuration on the joining path at node {bad}", up.root)
        j, _, vp = min(forced)
        u = _find_connector(forest, vp, j, eng.local_of_arr)
        if u is None:
            raise AdversaryScriptError(f"no unseen layer-{j} connector below node {vp}")
        buckets[j].append(_Piece(up.root, u, vp, eng.labels[vp], j, up.copies + low.copies))
        log.append(f"forced {eng.labels[vp]} at {vp} -> C{j}")


def _first_bad_configuration(pi: RootedLcl, forest: _Forest, path: list[int], labels: Mapping[int, Label]) -> int:
    for v in path:
        kids = _kids(forest.b, v)
        if kids and not pi.allows(labels[v], [labels[c] for c in kids]):
            return v
    return path[0]


def _find_connector(forest: _Forest, top: int, j: int, seen: np.ndarray) -> int | None:
    """Closest node below ``top`` that is a layer-j core end with a free
    child slot and whose whole subtree is unseen."""
    best = None
    dist = {top: 0}
    q = deque([top])
    while q:
        v = q.popleft()
        for w in _kids(forest.b, v):
            dist[w] = dist[v] + 1
            q.append(w)
            if forest.layer[w] != j or j < 1 or len(_kids(forest.b, w)) >= forest.delta:
                continue
            if seen[w] >= 0 or any(seen[s] >= 0 for s in _subtree(forest.b, w)):
                continue
            if best is None or (dist[w], w) < best:
                best = (dist[w], w)
    return None if best is None else best[1]


def replay_witness(w: Witness, alg: Callable) -> bool:
    """Rerun the recorded script with ``alg``; True iff every label comes
    out identical."""
    if w.model == "online":
        order = [int(s.split()[1]) for s in w.script]
        labels, _ = run_online(alg, w.graph, order, w.T, n=w.n_claim)
    elif w.model == "slocal":
        order = [int(s.split()[1]) for s in w.script]
        labels, _ = run_slocal(alg, w.graph, order, w.T, w.uids)
    elif w.model in ("dynamic", "dynamic-pm"):
        edits = [parse_edit(s) for s in w.script]
        hist, _, _ = run_dynamic(alg, edits, w.T, w.model == "dynamic-pm")
        labels = hist[-1] if hist else {}
    else:
        raise ValueError(f"unknown model {w.model!r}")
    return labels == w.labels


# --- certificate extraction -------------------------------------------------


def certificate_extraction(pi: RootedLcl, alg: OnlineAlgorithm, T: int, budget: int | None = None) -> ExtractionReport:
    """Build a certificate for log-star solvability from an online algorithm.

    Complete trees of depth 2T+2 get their middle layer labelled; one tree
    per used label is kept aside, the rest supply lower parts. For each used
    label the engine is forked twice: once with lower trees identified into
    the leaves below the labelled node (depth 2T+2), once with lower trees
    hung under those leaves (depth 2T+3). The algorithm labels the rest.
    """
    delta = pi.delta
    D = 2 * T + 2
    count = delta ** (T + 2) + len(pi.labels)
    shape = gen_complete_tree(delta, D)
    size = shape.n
    total = count * size
    limit = node_budget() if budget is None else budget
    if total > limit:
        raise ResourceError(f"certificate extraction needs {total} nodes; budget is {limit}")
    b = GraphBuilder(0)
    b.parent = []
    for t in range(count):
        off = b.n
        for _ in range(size):
            b.add_node()
        assert shape.parent is not None
        for v, p in enumerate(shape.parent):
            if p >= 0:
                b.set_parent(off + v, off + p)
    base_graph = b.freeze()
    eng = OnlineEngine(alg, total, T, base_graph)
    depth_of = [0] * size
    for v in range(1, size):
        depth_of[v] = depth_of[(v - 1) // delta] + 1
    middles = [v for v in range(size) if depth_of[v] == T + 1]
    leaves = [v for v in range(size) if depth_of[v] == D]
    for t in range(count):
        for v in middles:
            eng.reveal(t * size + v)
    used = [a for a in pi.labels if any(eng.labels[t * size + v] == a for t in range(count) for v in middles)]
    upper: dict[Label, tuple[int, int]] = {}
    chosen_trees: list[int] = []
    for a in used:
        if any(eng.labels[t * size + v] == a for t in chosen_trees for v in middles):
            continue
        t = next(t for t in range(count) if any(eng.labels[t * size + v] == a for v in middles))
        chosen_trees.append(t)
    for a in used:
        for t in chosen_trees:
            hit = [t * size + v for v in middles if eng.labels[t * size + v] == a]
            if hit:
                upper[a] = (t, hit[0])
                break
    lower = [t for t in range(count) if t not in chosen_trees]
    if len(lower) < delta ** (T + 2):
        return ExtractionReport(False, None, "not enough lower trees", {"used": used})

    def leaves_below(t: int, u: int) -> list[int]:
        out = [u]
        for _ in range(T + 1):
            out = [delta * (w - t * size) + 1 + c + t * size for w in out for c in range(delta)]
        return out

    seqs: tuple[list[list[Label]], list[list[Label]]] = ([], [])
    for a in used:
        t, u = upper[a]
        for s, hang in ((0, False), (1, True)):
            fork = copy.deepcopy(eng)
            bb = GraphBuilder(0)
            bb.nbrs = [set(nb) for nb in b.nbrs]
            bb.parent = list(b.parent)
            lv = leaves_below(t, u)
            if hang:
                for i, leaf in enumerate(lv):
                    for c in range(delta):
                        bb.set_parent(lower[i * delta + c] * size, leaf)
            else:
                for i, leaf in enumerate(lv):
                    r = lower[i] * size
                    for c in sorted(w for w in bb.nbrs[r] if bb.parent[w] == r):
                        bb.remove_edge(r, c)
                        bb.set_parent(c, leaf)
            g = bb.freeze()
            try:
                fork.set_graph(g)
            except ContractViolation as e:
                raise AdversaryScriptError(str(e)) from e
            bfs = [u]
            depth = D + (1 if hang else 0)
            level = [u]
            for _ in range(depth):
                level = [c for w in level for c in sorted(x for x in g.adj[w] if g.parent[x] == w)]
                bfs.extend(level)
            for v in bfs:
                if v not in fork.labels:
                    fork.reveal(v)
            seqs[s].append([fork.labels[v] for v in bfs])
    cert = Certificate(delta, tuple(used), (D, D + 1), seqs)
    ok, reason = check_certificate(pi, cert)
    return ExtractionReport(ok, cert if ok else None, reason, {"used": used, "trees": count, "nodes": total,
                                                              "candidate": cert})


# --- weak reconstruction ---------------------------------------------------


def component_code(g: Graph, comp: Sequence[int]) -> bytes:
    return canonical_code(induced(g, comp).graph)


def weak_reconstruction_ok(g: Graph, labels: Mapping[int, Hashable]) -> bool:
    """Some node of every component carries the canonical code of its component."""
    for comp in components(g):
        code = component_code(g, comp)
        if not any(labels.get(v) == code for v in comp):
            return False
    return True


def weak_reconstruction_dynamic(view: DynamicView) -> dict[int, Hashable]:
    """Endpoints of each edit report the structure of their component."""
    g = view.graph
    touched = [g.n - 1] if view.edit[:1] == ("add_node",) else list(view.edit[1:])
    out = {}
    comps = components(g)
    where = {v: c for c in comps for v in c}
    for v in touched:
        out[v] = component_code(g, where[v])
    return out


def random_edit_script(rng: np.random.Generator, n: int, p_edge: float = 0.6) -> list[tuple]:
    """add_node/add_edge script growing to ``n`` nodes, no deletions."""
    edits: list[tuple] = [("add_node",)]
    have = 1
    edges: set[tuple[int, int]] = set()
    while have < n or rng.random() < 0.3:
        free = [(u, v) for u in range(have) for v in range(u + 1, have) if (u, v) not in edges]
        if free and (have >= n or rng.random() < p_edge):
            u, v = free[int(rng.integers(len(free)))]
            edges.add((u, v))
            edits.append(("add_edge", u, v))
        elif have < n:
            edits.append(("add_node",))
            have += 1
        else:
            break
    return edits


def ball_reconstruction_slocal(T: int):
    """Report the radius-T ball as if it were the whole component."""

    def alg(view: SlocalView):
        g, _ = view.graph()
        return canonical_code(g), None

    alg.__name__ = f"ball-reconstruction[T={T}]"
    return alg


def gossip_reconstruction_slocal(T: int):
    """Merge the edge sets remembered by processed nodes in view with the
    own ball; report the known part of the component."""

    def alg(view: SlocalView):
        known: set[tuple[int, int]] = set()
        nodes = {view.uid(view.v)}
        for u in view.nodes:
            nodes.add(view.uid(u))
            for w in view.neighbors(u):
                a, b = view.uid(u), view.uid(w)
                known.add((min(a, b), max(a, b)))
            mem = view.memory(u)
            if mem is not None:
                known |= mem[0]
                nodes |= mem[1]
        ids = sorted(nodes)
        idx = {x: i for i, x in enumerate(ids)}
        g = from_edges(len(ids), [(idx[a], idx[b]) for a, b in sorted(known)])
        me = idx[view.uid(view.v)]
        comp = next(c for c in components(g) if me in c)
        return component_code(g, comp), (frozenset(known), frozenset(nodes))

    alg.__name__ = f"gossip-reconstruction[T={T}]"
    return alg


def rooted_trees_with_root_degree(max_nodes: int, root_degree: int = 2) -> list[Graph]:
    """Non-isomorphic rooted trees on at most ``max_nodes`` nodes whose root
    has exactly ``root_degree`` children, ordered by size then code."""
    layer = {canonical_code(from_parents([-1])): [-1]}
    found = dict(layer)
    for _ in range(max_nodes - 1):
        nxt: dict[bytes, list[int]] = {}
        for par in layer.values():
            for v in range(len(par)):
                q = par + [v]
                nxt.setdefault(canonical_code(from_parents(q)), q)
        layer = nxt
        found.update(nxt)
    out = [(len(p), c, p) for c, p in found.items() if sum(1 for x in p if x == 0) == root_degree]
    return [from_parents(p) for _, _, p in sorted(out)]


@dataclass
class _Gij:
    graph: Graph
    uids: list[int]
    middle: list[int]
    head: list[int]  # head path nodes then S_i nodes
    tail: list[int]


def _gij(si: Graph, sj: Graph, T: int) -> _Gij:
    """S_i - head(T+1) - middle(2T+1) - tail(T+1) - S_j, roots attached to
    the path ends."""
    h, m, t = T + 1, 2 * T + 1, T + 1
    L = h + m + t
    edges = [(p, p + 1) for p in range(L - 1)]
    oi, oj = L, L + si.n
    edges += [(oi + u, oi + v) for u, v in si.edges()]
    edges += [(oj + u, oj + v) for u, v in sj.edges()]
    edges += [(0, oi), (L - 1, oj)]
    g = from_edges(L + si.n + sj.n, edges)
    uids = list(range(L)) + [1000 + v for v in range(si.n)] + [2000 + v for v in range(sj.n)]
    return _Gij(g, uids, list(range(h, h + m)), list(range(h)) + [oi + v for v in range(si.n)],
                list(range(h + m, L)) + [oj + v for v in range(sj.n)])


def weak_reconstruction_adversary(alg, T: int, family: Sequence[Graph] | None = None,
                                  name: str | None = None) -> SeparationReport:
    """Middle-first SLOCAL adversary over the G_{i,j} family."""
    fam = list(family) if family is not None else rooted_trees_with_root_degree(9)
    # the family members are used unrooted from here on
    fam = [from_edges(s.n, s.edges()) for s in fam]
    k = len(fam)
    M: set | None = None
    H: list[set] = [set() for _ in range(k)]
    Tl: list[set] = [set() for _ in range(k)]
    pivots = 0
    for i in range(k):
        j = (i + 1) % k
        inst = _gij(fam[i], fam[j], T)
        order = inst.middle + inst.head + inst.tail
        labels, tr = run_slocal(alg, inst.graph, order, T, inst.uids)
        mid = {labels[v] for v in inst.middle}
        if M is None:
            M = mid
        elif mid != M:
            raise AdversaryScriptError("middle labels depend on the attached trees")
        H[i] = {labels[v] for v in inst.head}
        Tl[j] = {labels[v] for v in inst.tail}
        if i < 3:
            # pivot: swapping the last two parts leaves every output unchanged
            other, _ = run_slocal(alg, inst.graph, inst.middle + inst.tail + inst.head, T, inst.uids)
            if other != labels:
                raise AdversaryScriptError("the two processing orders disagree")
            pivots += 1
    assert M is not None
    X = M.union(*H, *Tl)
    n_max = max(_gij(fam[-1], fam[-1], T).graph.n, 1)
    details = {"T": T, "k": k, "X_size": len(X), "pairs": k * (k - 1) // 2, "n_max": n_max,
               "k_exceeds_2n": k > 2 * n_max, "pivot_checks": pivots}
    for i, j in combinations(range(k), 2):
        inst = _gij(fam[i], fam[j], T)
        code = canonical_code(inst.graph)
        if code in X:
            continue
        order = inst.middle + inst.head + inst.tail
        labels, _ = run_slocal(alg, inst.graph, order, T, inst.uids)
        predicted = set(labels.values()) <= X
        ok = weak_reconstruction_ok(inst.graph, labels)
        details.update({"pair": f"{i},{j}", "labels_within_X": predicted})
        w = Witness(inst.graph, [f"process {v}" for v in order], labels,
                    "no node reports the structure of its component", not ok and predicted,
                    model="slocal", T=T, uids=inst.uids)
        return SeparationReport("weak-reconstruction", "slocal", name or alg.__name__,
                                ADV_WON if not ok else ALG_OK, w, details)
    return SeparationReport("weak-reconstruction", "slocal", name or alg.__name__, ALG_OK, None, details)


def weak_reconstruction_suite(T: int = 2, seeds: Sequence[int] = (0, 1, 2, 3, 4), n: int = 12) -> list[SeparationReport]:
    """Positive dynamic algorithm on random scripts, then the middle-first
    adversary against both SLOCAL baselines."""
    steps = 0
    good = True
    for seed in seeds:
        edits = random_edit_script(np.random.default_rng(seed), n)
        _, _, eng = run_dynamic(weak_reconstruction_dynamic, edits, 1, verifier=weak_reconstruction_ok)
        good &= all(eng.valid)
        steps += len(edits)
    out = [SeparationReport("weak-reconstruction", "dynamic", "report-component-at-edit",
                            ALG_OK if good else ADV_WON, None,
                            {"T": 1, "scripts": len(seeds), "steps": steps, "all_steps_valid": good})]
    for alg in (ball_reconstruction_slocal(T), gossip_reconstruction_slocal(T)):
        out.append(weak_reconstruction_adversary(alg, T))
    return out


# --- cycle detection ---------------------------------------------------------


def non_bridge_nodes(g: Graph) -> set[int]:
    """Nodes incident to an edge that lies on a cycle."""
    bridges = _bridges(g)
    return {v for u, v in g.edges() if (u, v) not in bridges} | {u for u, v in g.edges() if (u, v) not in bridges}


def _bridges(g: Graph) -> set[tuple[int, int]]:
    disc = [-1] * g.n
    low = [0] * g.n
    out: set[tuple[int, int]] = set()
    t = 0
    for s in range(g.n):
        if disc[s] >= 0:
            continue
        disc[s] = low[s] = t
        t += 1
        stack = [(s, -1, iter(g.adj[s]))]
        while stack:
            v, p, it = stack[-1]
            w = next(it, None)
            if w is None:
                stack.pop()
                if p >= 0:
                    low[p] = min(low[p], low[v])
                    if low[v] > disc[p]:
                        out.add((min(p, v), max(p, v)))
                continue
            if w == p:
                continue
            if disc[w] >= 0:
                low[v] = min(low[v], disc[w])
            else:
                disc[w] = low[w] = t
                t += 1
                stack.append((w, v, iter(g.adj[w])))
    return out


def cycle_detection_violations(g: Graph, labels: Mapping[int, Hashable]) -> list[str]:
    on = non_bridge_nodes(g)
    out = [f"node {v} reports yes but lies on no cycle" for v in sorted(labels) if labels[v] == "yes" and v not in on]
    rest = [v for v in range(g.n) if labels.get(v) != "yes"]
    sub = induced(g, rest).graph
    if sub.num_edges() != sub.n - len(components(sub)):
        out.append("a cycle has no node reporting yes")
    return out


def cycle_detection_ok(g: Graph, labels: Mapping[int, Hashable]) -> bool:
    return not cycle_detection_violations(g, labels)


def cycle_closing_dynamic(view: DynamicView) -> dict[int, Hashable]:
    """Insertion-only: the first endpoint of an edge that closes a cycle says yes."""
    e = view.edit
    if e[0] == "add_node":
        return {view.graph.n - 1: "no"}
    if e[0] == "add_edge":
        u, w = e[1], e[2]
        if (min(u, w), max(u, w)) not in _bridges(view.graph):
            return {u: "yes"}
    return {}


def recompute_cycle_dynamic(view: DynamicView) -> dict[int, Hashable]:
    """Changed nodes take the current truth; the rest cannot be touched."""
    on = non_bridge_nodes(view.graph)
    return {v: "yes" if v in on else "no" for v in view.changed}


def ball_cycle_slocal(T: int):
    """Yes iff a cycle through the node is visible in the radius-T ball."""

    def alg(view: SlocalView):
        g, old = view.graph()
        me = old.index(view.v)
        return ("yes" if me in non_bridge_nodes(g) else "no"), None

    alg.__name__ = f"ball-cycle[T={T}]"
    return alg


def optimistic_cycle_slocal(T: int):
    """Yes iff nothing in view contradicts a cycle: no leaf within the ball
    and no processed node in view said no."""

    def alg(view: SlocalView):
        for u in view.nodes:
            if view.dist(u) < view.T and len(view.neighbors(u)) <= 1:
                return "no", "no"
            if view.memory(u) == "no":
                return "no", "no"
        return "yes", "yes"

    alg.__name__ = f"optimistic-cycle[T={T}]"
    return alg


def _delete_edge(g: Graph, u: int, v: int) -> Graph:
    return from_edges(g.n, [e for e in g.edges() if e != (min(u, v), max(u, v))])


def cycle_two_order_adversary(alg, T: int, n: int = 40, name: str | None = None) -> SeparationReport:
    if n % 4 or n // 4 <= 2 * T:
        raise ValueError("cycle length must split into four parts longer than 2T")
    g = gen_cycle(n)
    q = n // 4
    C = [list(range(i * q, (i + 1) * q)) for i in range(4)]
    o1 = C[0] + C[2] + C[1] + C[3]
    o2 = C[0] + C[2] + C[3] + C[1]
    l1, t1 = run_slocal(alg, g, o1, T)
    l2, t2 = run_slocal(alg, g, o2, T)
    same = l1 == l2 and sorted(t1.to_text().splitlines()) == sorted(t2.to_text().splitlines())
    details = {"T": T, "n": n, "orders_identical": same}
    alg_name = name or alg.__name__
    if not same:
        raise AdversaryScriptError("the two processing orders disagree")
    bad = cycle_detection_violations(g, l1)
    if bad:
        w = Witness(g, [f"process {v}" for v in o1], l1, bad[0], True, model="slocal", T=T)
        return SeparationReport("cycle-detection", "slocal", alg_name, ADV_WON, w, details)
    yes = [v for v in range(n) if l1[v] == "yes"]
    if any(v not in C[3] for v in yes):
        order, last = o1, C[3]
    else:
        order, last = o2, C[1]
    mid = last[len(last) // 2 - 1]
    h = _delete_edge(g, mid, mid + 1)
    labels, _ = run_slocal(alg, h, order, T)
    early = [v for v in order[: 3 * q] if l1[v] == "yes"]
    bad = cycle_detection_violations(h, labels)
    details.update({"deleted_edge": f"{mid}-{mid + 1}", "early_yes": len(early),
                    "early_outputs_kept": all(labels[v] == l1[v] for v in order[: 3 * q])})
    w = Witness(h, [f"process {v}" for v in order], labels, bad[0] if bad else "none", bool(bad),
                model="slocal", T=T)
    return SeparationReport("cycle-detection", "slocal", alg_name, ADV_WON if bad else ALG_OK, w, details)


def cycle_far_deletion_adversary(alg, T: int, n: int = 40, name: str | None = None) -> SeparationReport:
    """Build a cycle, then delete the edge farthest from every yes node."""
    g = gen_cycle(n)
    edits = edits_for_graph(g)
    eng = DynamicEngine(alg, T, True, cycle_detection_ok)
    for e in edits:
        eng.apply(e)
    yes = [v for v, a in eng.labels.items() if a == "yes"]
    details = {"T": T, "n": n, "yes_before": len(yes), "valid_before": eng.valid[-1]}
    alg_name = name or getattr(alg, "__name__", "algorithm")
    if yes:
        dist = {v: min(min(abs(v - y), n - abs(v - y)) for y in yes) for v in range(n)}
        u = max(range(n), key=lambda v: (min(dist[v], dist[(v + 1) % n]), -v))
        e = ("del_edge", u, (u + 1) % n)
        eng.apply(e)
        edits.append(e)
        details["deleted_edge"] = f"{e[1]}-{e[2]}"
        details["distance_to_yes"] = min(dist[u], dist[(u + 1) % n])
    bad = cycle_detection_violations(eng.graph, eng.labels)
    w = Witness(eng.graph, [format_edit(x) for x in edits], dict(eng.labels), bad[0] if bad else "none",
                bool(bad), model="dynamic-pm", T=T)
    return SeparationReport("cycle-detection", "dynamic-pm", alg_name, ADV_WON if bad else ALG_OK, w, details)


def cycle_detection_suite(T: int = 3, seeds: Sequence[int] = (0, 1, 2, 3, 4), n: int = 12) -> list[SeparationReport]:
    good = True
    steps = 0
    for seed in seeds:
        edits = random_edit_script(np.random.default_rng(seed), n, p_edge=0.7)
        _, _, eng = run_dynamic(cycle_closing_dynamic, edits, 1, verifier=cycle_detection_ok)
        good &= all(eng.valid)
        steps += len(edits)
    _, _, eng = run_dynamic(cycle_closing_dynamic, edits_for_graph(gen_cycle(40)), 1, verifier=cycle_detection_ok)
    good &= all(eng.valid)
    out = [SeparationReport("cycle-detection", "dynamic", "yes-on-closing-edge", ALG_OK if good else ADV_WON, None,
                            {"T": 1, "scripts": len(seeds) + 1, "steps": steps, "all_steps_valid": good})]
    out.append(cycle_far_deletion_adversary(recompute_cycle_dynamic, T, name="recompute-locally"))
    for alg in (ball_cycle_slocal(T), optimistic_cycle_slocal(T)):
        out.append(cycle_two_order_adversary(alg, T))
    return out


# --- component-wise leader election -------------------------------------------


def leader_violations(g: Graph, labels: Mapping[int, Hashable]) -> list[str]:
    out = []
    for comp in components(g):
        lead = [v for v in comp if labels.get(v) == "leader"]
        if len(lead) != 1:
            out.append(f"component of node {comp[0]} has {len(lead)} leaders")
    return out


def leader_ok(g: Graph, labels: Mapping[int, Hashable]) -> bool:
    return not leader_violations(g, labels)


def last_revealed_leader_online(view: OnlineView) -> Hashable:
    """Leader iff every node of the visible component is revealed; then the
    component is closed and this is its last node."""
    done = set(view.revealed)
    return "leader" if all(u in done for u in view.bfs(view.v)) else "follower"


def local_demotion_dynamic(view: DynamicView) -> dict[int, Hashable]:
    """New nodes lead; on a merge the changed leaders step down, highest id
    first, while their component has more than one leader."""
    g = view.graph
    labels = dict(view.labels)
    out: dict[int, Hashable] = {}
    if view.edit[0] == "add_node":
        return {g.n - 1: "leader"}
    for comp in components(g):
        lead = [v for v in comp if labels.get(v) == "leader"]
        for v in sorted((v for v in lead if v in view.changed), reverse=True):
            if len(lead) <= 1:
                break
            out[v] = "follower"
            lead.remove(v)
        if not lead:
            ch = [v for v in comp if v in view.changed]
            if ch:
                out[min(ch)] = "leader"
    return out


def gossip_leader_slocal(T: int):
    """Lead unless a processed node in view already knows of a leader."""

    def alg(view: SlocalView):
        if any(view.memory(u) for u in view.nodes if u != view.v):
            return "follower", True
        return "leader", True

    alg.__name__ = f"gossip-leader[T={T}]"
    return alg


def leader_far_join_adversary(alg, T: int, m: int = 30, name: str | None = None) -> SeparationReport:
    b = GraphBuilder(2 * m)
    for off in (0, m):
        for i in range(m - 1):
            b.add_edge(off + i, off + i + 1)
    edits = edits_for_graph(b.freeze())
    eng = DynamicEngine(alg, T, False, leader_ok)
    for e in edits:
        eng.apply(e)
    leaders = sorted(v for v, a in eng.labels.items() if a == "leader")
    details = {"T": T, "path_nodes": m, "valid_before": eng.valid[-1], "leaders_before": leaders}
    e = ("add_edge", m - 1, 2 * m - 1)
    before = eng.graph
    near = [d for end in e[1:] for v, d in distances(before, end).items() if v in leaders]
    details["join_distance_to_leaders"] = min(near) if near else -1
    eng.apply(e)
    edits.append(e)
    details["join_edge"] = f"{e[1]}-{e[2]}"
    bad = leader_violations(eng.graph, eng.labels)
    w = Witness(eng.graph, [format_edit(x) for x in edits], dict(eng.labels), bad[0] if bad else "none",
                bool(bad), model="dynamic", T=T)
    return SeparationReport("leader-election", "dynamic", name or getattr(alg, "__name__", "algorithm"),
                            ADV_WON if bad else ALG_OK, w, details)


def leader_two_order_adversary(alg, T: int, m: int = 30, name: str | None = None) -> SeparationReport:
    """Two paths P, Q in thirds; parts are processed outward from the middle
    third. Orders (P2,P1,P3) and (P2,P3,P1) must agree; the paths are then
    joined at the far end of the last part."""
    if m % 3 or m // 3 <= 2 * T:
        raise ValueError("paths must split into thirds longer than 2T")
    q = m // 3
    alg_name = name or alg.__name__

    def parts(off: int) -> tuple[list[int], list[int], list[int]]:
        p1 = [off + v for v in range(q - 1, -1, -1)]
        p2 = [off + v for v in range(q, 2 * q)]
        p3 = [off + v for v in range(2 * q, m)]
        return p1, p2, p3

    base = from_edges(2 * m, [(o + i, o + i + 1) for o in (0, m) for i in range(m - 1)])
    orders = []
    for off in (0, m):
        p1, p2, p3 = parts(off)
        orders.append((p2 + p1 + p3, p2 + p3 + p1, p1, p3))
    l1, t1 = run_slocal(alg, base, orders[0][0] + orders[1][0], T)
    l2, t2 = run_slocal(alg, base, orders[0][1] + orders[1][1], T)
    same = l1 == l2 and sorted(t1.to_text().splitlines()) == sorted(t2.to_text().splitlines())
    if not same:
        raise AdversaryScriptError("the two processing orders disagree")
    details = {"T": T, "path_nodes": m, "orders_identical": same}
    bad = leader_violations(base, l1)
    if bad:
        w = Witness(base, [f"process {v}" for v in orders[0][0] + orders[1][0]], l1, bad[0], True,
                    model="slocal", T=T)
        return SeparationReport("leader-election", "slocal", alg_name, ADV_WON, w, details)
    chosen, ends = [], []
    for off, (o1, o2, p1, p3) in zip((0, m), orders):
        lead = next(v for v in range(off, off + m) if l1[v] == "leader")
        # the leader must sit in the first two parts of the chosen order
        if lead not in p3:
            chosen.append(o1)
            ends.append(p3[-1])
        else:
            chosen.append(o2)
            ends.append(p1[-1])
    h = from_edges(2 * m, base.edges() + [(ends[0], ends[1])])
    order = chosen[0] + chosen[1]
    labels, _ = run_slocal(alg, h, order, T)
    bad = leader_violations(h, labels)
    details["join_edge"] = f"{ends[0]}-{ends[1]}"
    w = Witness(h, [f"process {v}" for v in order], labels, bad[0] if bad else "none", bool(bad),
                model="slocal", T=T)
    return SeparationReport("leader-election", "slocal", alg_name, ADV_WON if bad else ALG_OK, w, details)


def leader_election_suite(T: int = 3, seeds: Sequence[int] = (0, 1, 2, 3, 4), n: int = 30) -> list[SeparationReport]:
    good = True
    for seed in seeds:
        rng = np.random.default_rng(seed)
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 1.5 / n]
        g = from_edges(n, edges)
        order = [int(v) for v in rng.permutation(n)]
        labels, _ = run_online(last_revealed_leader_online, g, order, 1)
        good &= leader_ok(g, labels)
    out = [SeparationReport("leader-election", "online", "last-revealed-leader", ALG_OK if good else ADV_WON, None,
                            {"T": 1, "graphs": len(seeds), "all_valid": good})]
    out.append(leader_far_join_adversary(local_demotion_dynamic, T, name="local-demotion"))
    out.append(leader_two_order_adversary(gossip_leader_slocal(T), T))
    return out


# --- nested orientation --------------------------------------------------------


def nested_orientation_slocal():
    """T=1: orient every edge to an unprocessed neighbor away from the node;
    processed neighbors are exactly the in-neighbors."""

    def alg(view: SlocalView):
        v = view.v
        nb = view.neighbors(v)
        f = view.uid(v)
        F = frozenset(view.uid(u) for u in nb)
        H = frozenset(view.memory(u) for u in nb if view.memory(u) is not None)
        h = (f, F, H)
        outs = frozenset(view.uid(u) for u in nb if view.memory(u) is None)
        return (h, outs), h

    alg.__name__ = "nested-orientation[T=1]"
    return alg


def verify_nested(g: Graph, uids: Sequence[int] | None, out: Mapping[int, Hashable]) -> list[str]:
    uid = list(uids) if uids is not None else list(range(g.n))
    bad: list[str] = []
    if len(set(uid)) != len(uid):
        return ["identifiers are not distinct"]
    if any(v not in out for v in range(g.n)):
        return ["some node has no output"]
    node_of = {x: v for v, x in enumerate(uid)}
    outs = {v: out[v][1] for v in range(g.n)}
    h = {v: out[v][0] for v in range(g.n)}
    succ: list[list[int]] = [[] for _ in range(g.n)]
    for u, v in g.edges():
        a, b = uid[v] in outs[u], uid[u] in outs[v]
        if a == b:
            bad.append(f"edge {u}-{v} is not oriented exactly once")
        elif a:
            succ[u].append(v)
        else:
            succ[v].append(u)
    for v in range(g.n):
        extra = {x for x in outs[v] if x not in node_of or node_of[x] not in g.adj[v]}
        if extra:
            bad.append(f"node {v} orients towards non-neighbors")
    indeg = [0] * g.n
    for v in range(g.n):
        for w in succ[v]:
            indeg[w] += 1
    stack = [v for v in range(g.n) if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    if seen != g.n:
        bad.append("orientation has a directed cycle")
    pred: list[list[int]] = [[] for _ in range(g.n)]
    for v in range(g.n):
        for w in succ[v]:
            pred[w].append(v)
    for v in range(g.n):
        hv = h[v]
        if not (isinstance(hv, tuple) and len(hv) == 3):
            bad.append(f"node {v} has a malformed nesting")
            continue
        if hv[0] != uid[v]:
            bad.append(f"node {v}: f differs from its identifier")
        if hv[1] != frozenset(uid[u] for u in g.adj[v]):
            bad.append(f"node {v}: F differs from the neighbor identifiers")
        if hv[2] != frozenset(h[u] for u in pred[v]):
            bad.append(f"node {v}: H differs from the in-neighbor nestings")
    return bad


def longest_directed_walk(out: Mapping[int, Hashable]) -> int:
    """Edges on the longest directed walk of the orientation encoded in
    ``out``; -1 if the orientation has a cycle (walks are unbounded)."""
    node_of = {lab[0][0]: v for v, lab in out.items()}
    succ = {v: [node_of[x] for x in lab[1] if x in node_of] for v, lab in out.items()}
    indeg = {v: 0 for v in succ}
    for v in succ:
        for w in succ[v]:
            indeg[w] += 1
    order = [v for v in succ if indeg[v] == 0]
    for v in order:
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                order.append(w)
    if len(order) != len(succ):
        return -1
    best = {v: 0 for v in succ}
    for v in reversed(order):
        best[v] = max((best[w] + 1 for w in succ[v]), default=0)
    return max(best.values(), default=0)


def walk_bound_check(labels_or_trace: Mapping[int, Hashable] | ExecutionTrace, T: int) -> bool:
    """True iff the orientation has no directed walk of length T+1."""
    if isinstance(labels_or_trace, ExecutionTrace):
        labels: dict[int, Hashable] = {}
        for s in labels_or_trace.steps:
            labels.update(s.labels)
    else:
        labels = dict(labels_or_trace)
    w = longest_directed_walk(labels)
    return w != -1 and w < T + 1


def _global_nested(g: Graph, uids: Sequence[int]) -> dict[int, Hashable]:
    labels, _ = run_slocal(nested_orientation_slocal(), g, sorted(range(g.n), key=lambda v: uids[v]), 1, uids)
    return labels


def recompute_nested_dynamic(view: DynamicView) -> dict[int, Hashable]:
    """Global id-ordered nested orientation; only changed nodes may adopt it."""
    full = _global_nested(view.graph, list(range(view.graph.n)))
    return {v: full[v] for v in view.changed}


def nested_walk_adversary(alg, T: int, n: int = 12, name: str | None = None) -> SeparationReport:
    """Build a path, then hang a new node off the start of the longest
    directed walk; outputs past distance T cannot follow."""
    edits = edits_for_graph(from_edges(n, [(i, i + 1) for i in range(n - 1)]))
    eng = DynamicEngine(alg, T, False, lambda g, lab: not verify_nested(g, None, lab))
    for e in edits:
        eng.apply(e)
    walk = longest_directed_walk(eng.labels)
    details = {"T": T, "n": n, "valid_before": eng.valid[-1], "longest_walk": walk,
               "walk_bound_holds": walk_bound_check(eng.labels, T)}
    starts = [v for v in range(n) if not any(eng.labels[v][0][0] in lab[1] for lab in eng.labels.values())]
    start = min(starts) if starts else 0
    for e in (("add_node",), ("add_edge", start, n)):
        eng.apply(e)
        edits.append(e)
    bad = verify_nested(eng.graph, None, eng.labels)
    w = Witness(eng.graph, [format_edit(x) for x in edits], dict(eng.labels), bad[0] if bad else "none",
                bool(bad), model="dynamic", T=T)
    return SeparationReport("nested-orientation", "dynamic", name or getattr(alg, "__name__", "algorithm"),
                            ADV_WON if bad else ALG_OK, w, details)


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    return from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p])


def nested_orientation_suite(T: int = 2, graphs: int = 100, max_n: int = 50, seed: int = 0) -> list[SeparationReport]:
    rng = np.random.default_rng(seed)
    good = True
    for _ in range(graphs):
        n = int(rng.integers(1, max_n + 1))
        g = random_graph(rng, n, float(rng.uniform(0.0, 0.3)))
        uids = [int(x) for x in rng.permutation(10 * n)[:n]]
        order = [int(v) for v in rng.permutation(n)]
        labels, _ = run_slocal(nested_orientation_slocal(), g, order, 1, uids)
        good &= not verify_nested(g, uids, labels)
    out = [SeparationReport("nested-orientation", "slocal", "nested-orientation[T=1]", ALG_OK if good else ADV_WON,
                            None, {"T": 1, "graphs": graphs, "max_n": max_n, "all_valid": good})]
    out.append(nested_walk_adversary(recompute_nested_dynamic, T, name="recompute-id-order"))
    return out


SUITES: dict[str, Callable[[], list[SeparationReport]]] = {
    "weak-reconstruction": weak_reconstruction_suite,
    "cycle-detection": cycle_detection_suite,
    "leader-election": leader_election_suite,
    "nested-orientation": nested_orientation_suite,
}
