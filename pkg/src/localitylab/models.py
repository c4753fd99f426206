"""Execution engines for LOCAL, SLOCAL, dynamic-LOCAL(+/-) and online-LOCAL,
plus the simulations between them.

Engines hand algorithms only what the model allows: online algorithms get a
view of the revealed region with first-seen numbering, SLOCAL algorithms a
radius-T ball with the stored memories inside it, dynamic algorithms may
relabel only the nodes whose radius-T ball changed.
"""
from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .graph import Graph, GraphBuilder, ResourceError, ball, components, distances, from_edges, induced, multi_ball


class ContractViolation(RuntimeError):
    """An algorithm stepped outside what its model permits."""


@dataclass
class TraceStep:
    kind: str
    nodes: tuple[int, ...]
    snapshot: int  # size of the visible region / graph after the step
    labels: dict[int, Hashable]
    radius: int

    def line(self) -> str:
        labs = " ".join(f"{v}={self.labels[v]}" for v in sorted(self.labels))
        nodes = " ".join(map(str, self.nodes))
        return f"{self.kind} {nodes} | seen={self.snapshot} radius={self.radius} | {labs}".rstrip()


@dataclass
class ExecutionTrace:
    model: str
    T: int
    steps: list[TraceStep] = field(default_factory=list)

    def to_text(self) -> str:
        return "\n".join([f"trace {self.model} T={self.T}"] + [s.line() for s in self.steps]) + "\n"


# --- online-LOCAL --------------------------------------------------------


class OnlineView:
    """What an online-LOCAL algorithm sees at one step. Node handles are
    first-seen indices; global ids never leak."""

    def __init__(self, engine: "OnlineEngine", v: int, new_nodes: list[int]):
        self._e = engine
        self.v = v
        self.new_nodes = new_nodes
        self.n = engine.n
        self.T = engine.T
        self.step = len(engine.revealed)
        self.memory = engine.memory

    @property
    def num_seen(self) -> int:
        return len(self._e.global_of)

    @property
    def revealed(self) -> list[int]:
        return list(self._e.revealed_local)

    def label(self, u: int) -> Hashable | None:
        return self._e.labels.get(self._e.global_of[u])

    def input(self, u: int) -> Hashable:
        inputs = self._e.graph.inputs
        return None if inputs is None else inputs[self._e.global_of[u]]

    def neighbors(self, u: int) -> list[int]:
        e = self._e
        gu = e.global_of[u]
        lo = e.local_of
        return [int(lo[w]) for w in e.graph.adj[gu] if lo[w] >= 0]

    def parent(self, u: int) -> int | None:
        """Visible parent of u in a rooted graph, else None."""
        e = self._e
        par = e.graph.parent
        if par is None:
            return None
        p = par[e.global_of[u]]
        if p < 0 or e.local_of[p] < 0:
            return None
        return int(e.local_of[p])

    def children(self, u: int) -> list[int]:
        e = self._e
        par = e.graph.parent
        if par is None:
            return []
        gu = e.global_of[u]
        return [int(e.local_of[w]) for w in e.graph.adj[gu] if par[w] == gu and e.local_of[w] >= 0]

    def ball_distances(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        """(locals, distances) of visible nodes within r of the revealed node,
        measured in the visible graph. Radii up to T+1 use the precomputed
        distance row, which agrees with the visible graph in that range."""
        e = self._e
        if e.dist is not None and r <= e.T + 1:
            row = e.dist[e.global_of[self.v]]
            idx = np.flatnonzero((row >= 0) & (row <= r) & (e.local_of_arr >= 0))
            return e.local_of_arr[idx], row[idx]
        d = self.bfs(self.v, r)
        locs = np.fromiter(d.keys(), dtype=np.int64, count=len(d))
        return locs, np.fromiter(d.values(), dtype=np.int64, count=len(d))

    def bfs(self, u: int, r: int | None = None) -> dict[int, int]:
        dist = {u: 0}
        q = deque([u])
        while q:
            x = q.popleft()
            if r is not None and dist[x] >= r:
                continue
            for w in self.neighbors(x):
                if w not in dist:
                    dist[w] = dist[x] + 1
                    q.append(w)
        return dist

    def graph(self) -> Graph:
        """Snapshot of the visible graph in first-seen numbering."""
        return self._e.snapshot()


OnlineAlgorithm = Callable[[OnlineView], Hashable]


class OnlineEngine:
    """Incremental online-LOCAL engine over a possibly growing graph.

    ``reveal`` accepts the current graph so adaptive adversaries can extend
    it between steps; ``audit`` checks that the part shown so far is unchanged.
    """

    def __init__(self, alg: OnlineAlgorithm, n: int, T: int, graph: Graph | None = None, fast: bool = True,
                 dist: np.ndarray | None = None):
        if T < 0:
            raise ValueError("locality must be non-negative")
        self.alg = alg
        self.n = n
        self.T = T
        self.memory: dict[str, Any] = {}
        self.labels: dict[int, Hashable] = {}
        self.revealed: list[int] = []
        self.revealed_local: list[int] = []
        self.global_of: list[int] = []
        self.trace = ExecutionTrace("online", T)
        self.graph: Graph = graph if graph is not None else Graph(0, ())
        self.dist: np.ndarray | None = None
        self._fast = fast
        self._snap: Graph | None = None
        self._resize(dist)

    def __deepcopy__(self, memo) -> "OnlineEngine":
        """Resumable copy: algorithm memory is deep-copied; graph, distance
        matrix and recorded trace steps are shared, as they are never mutated."""
        new = object.__new__(OnlineEngine)
        memo[id(self)] = new
        new.__dict__.update(self.__dict__)
        new.alg = copy.deepcopy(self.alg, memo)
        new.memory = copy.deepcopy(self.memory, memo)
        new.labels = dict(self.labels)
        new.revealed = list(self.revealed)
        new.revealed_local = list(self.revealed_local)
        new.global_of = list(self.global_of)
        new.local_of_arr = self.local_of_arr.copy()
        new.local_of = new.local_of_arr
        new.trace = ExecutionTrace(self.trace.model, self.trace.T, list(self.trace.steps))
        return new

    def _resize(self, dist: np.ndarray | None = None) -> None:
        n = self.graph.n
        old = getattr(self, "local_of_arr", np.zeros(0, dtype=np.int64))
        arr = np.full(n, -1, dtype=np.int64)
        arr[: len(old)] = old
        self.local_of_arr = arr
        self.local_of = arr  # indexable by global id
        self.dist = dist
        if dist is None and self._fast and 0 < n <= 4096:
            self.dist = _kernels.all_pairs_distances(self.graph.adj)

    def set_graph(self, g: Graph) -> None:
        if g is self.graph:
            return
        if g.n < self.graph.n:
            raise ValueError("graphs may only grow between reveals")
        self.audit(g)
        self.graph = g
        self._snap = None
        self._resize()

    def audit(self, g: Graph) -> None:
        """The visible region of g must equal the region shown so far."""
        seen = self.global_of
        if not seen:
            return
        old = self.graph
        changed = [u for u in range(old.n) if old.adj[u] != g.adj[u]
                   or (old.parent is not None and g.parent is not None and old.parent[u] != g.parent[u])]
        if not changed:
            return
        idx = set(seen)
        near = multi_ball(g, changed, self.T)
        for r in self.revealed:
            if r in near and set(ball(g, r, self.T)) - idx:
                raise ContractViolation(f"graph change reaches into the view of revealed node {r}")
        for u in changed:
            if u not in idx:
                continue
            if [w for w in old.adj[u] if w in idx] != [w for w in g.adj[u] if w in idx]:
                raise ContractViolation(f"edges among visible nodes changed at {u}")
            if old.parent is not None and g.parent is not None and g.parent[u] != old.parent[u]:
                if g.parent[u] in idx or old.parent[u] in idx:
                    raise ContractViolation(f"visible orientation changed at {u}")

    def reveal(self, v: int, g: Graph | None = None) -> Hashable:
        if g is not None:
            self.set_graph(g)
        if not 0 <= v < self.graph.n:
            raise ValueError(f"node {v} out of range")
        if v in self.labels:
            # re-reveal is a no-op
            self.trace.steps.append(TraceStep("reveal", (v,), len(self.global_of), {}, self.T))
            return self.labels[v]
        if self.dist is not None:
            row = self.dist[v]
            ball_nodes = np.flatnonzero((row >= 0) & (row <= self.T))
            fresh = ball_nodes[self.local_of_arr[ball_nodes] < 0]
            fresh = fresh[np.lexsort((fresh, row[fresh]))]
            new_globals = fresh.tolist()
        else:
            d = distances(self.graph, v, self.T)
            new_globals = sorted((w for w in d if self.local_of_arr[w] < 0), key=lambda w: (d[w], w))
        start = len(self.global_of)
        for i, w in enumerate(new_globals):
            self.local_of_arr[w] = start + i
        self.global_of.extend(new_globals)
        if new_globals:
            self._snap = None
        self.revealed.append(v)
        lv = int(self.local_of_arr[v])
        self.revealed_local.append(lv)
        view = OnlineView(self, lv, list(range(start, len(self.global_of))))
        out = self.alg(view)
        if out is None:
            raise ContractViolation("online algorithm must return a label for the revealed node")
        self.labels[v] = out
        self.trace.steps.append(TraceStep("reveal", (v,), len(self.global_of), {v: out}, self.T))
        return out

    def snapshot(self) -> Graph:
        if self._snap is None:
            b = GraphBuilder(len(self.global_of))
            lo = self.local_of_arr
            par = self.graph.parent
            for i, gu in enumerate(self.global_of):
                for w in self.graph.adj[gu]:
                    j = lo[w]
                    if j > i:
                        if par is not None and par[w] == gu:
                            b.set_parent(int(j), i)
                        elif par is not None and par[gu] == w:
                            b.set_parent(i, int(j))
                        else:
                            b.add_edge(i, int(j))
            if par is not None and b.parent is None:
                b.parent = [-1] * b.n
            if self.graph.inputs is not None:
                for i, gu in enumerate(self.global_of):
                    b.set_input(i, self.graph.inputs[gu])
            self._snap = b.freeze()
        return self._snap


def run_online(alg: OnlineAlgorithm, g: Graph, order: Sequence[int], T: int, n: int | None = None,
               fast: bool = True) -> tuple[dict[int, Hashable], ExecutionTrace]:
    seen = set()
    for v in order:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < g.n:
            raise ValueError(f"order contains invalid node {v!r}")
        if v in seen:
            raise ValueError(f"order repeats node {v}; use OnlineEngine.reveal for re-reveals")
        seen.add(v)
    eng = OnlineEngine(alg, g.n if n is None else n, T, g, fast=fast)
    for v in order:
        eng.reveal(int(v))
    return dict(eng.labels), eng.trace


def replay_online(alg: OnlineAlgorithm, g: Graph, trace: ExecutionTrace) -> bool:
    order = [s.nodes[0] for s in trace.steps if s.labels]
    _, again = run_online(alg, g, order, trace.T)
    return again.to_text() == trace.to_text()


# --- SLOCAL --------------------------------------------------------------


class SlocalView:
    def __init__(self, g: Graph, v: int, T: int, memories: dict[int, Any], uids: Sequence[int] | None, n: int):
        self.v = v
        self.T = T
        self.n = n
        self._g = g
        self._dist = distances(g, v, T)
        self._mem = memories
        self._uids = uids
        self.max_read = 0

    @property
    def nodes(self) -> list[int]:
        return sorted(self._dist)

    def dist(self, u: int) -> int:
        if u not in self._dist:
            raise ContractViolation(f"node {u} is outside the radius-{self.T} view of {self.v}")
        return self._dist[u]

    def neighbors(self, u: int) -> list[int]:
        self.dist(u)
        return [w for w in self._g.adj[u] if w in self._dist]

    def memory(self, u: int) -> Any:
        d = self.dist(u)
        self.max_read = max(self.max_read, d)
        return self._mem.get(u)

    def uid(self, u: int) -> int:
        self.dist(u)
        return self._uids[u] if self._uids is not None else u

    def input(self, u: int) -> Hashable:
        self.dist(u)
        return self._g.inputs[u] if self._g.inputs is not None else None

    def graph(self) -> tuple[Graph, list[int]]:
        ind = induced(self._g, self._dist)
        return ind.graph, list(ind.old_of_new)


SlocalAlgorithm = Callable[[SlocalView], tuple[Hashable, Any]]


def run_slocal(alg: SlocalAlgorithm, g: Graph, order: Sequence[int], T: int,
               uids: Sequence[int] | None = None) -> tuple[dict[int, Hashable], ExecutionTrace]:
    if sorted(order) != sorted(set(order)) or any(not 0 <= v < g.n for v in order):
        raise ValueError("order must list distinct nodes of the graph")
    memories: dict[int, Any] = {}
    labels: dict[int, Hashable] = {}
    trace = ExecutionTrace("slocal", T)
    for v in order:
        view = SlocalView(g, v, T, memories, uids, g.n)
        lab, mem = alg(view)
        labels[v] = lab
        memories[v] = mem
        trace.steps.append(TraceStep("process", (v,), len(view._dist), {v: lab}, view.max_read))
    return labels, trace


# --- dynamic-LOCAL -------------------------------------------------------


@dataclass
class DynamicView:
    graph: Graph
    labels: dict[int, Hashable]
    changed: frozenset[int]
    T: int
    step: int
    memory: dict
    edit: tuple = ()


DynamicAlgorithm = Callable[[DynamicView], Mapping[int, Hashable]]


def parse_edit(line: str) -> tuple:
    parts = line.split()
    if not parts:
        raise ValueError("empty edit")
    if parts[0] == "add_node":
        return ("add_node",)
    if parts[0] in ("add_edge", "del_edge"):
        return (parts[0], int(parts[1]), int(parts[2]))
    if parts[0] == "reveal":
        return ("reveal", int(parts[1]))
    raise ValueError(f"unknown directive {parts[0]!r}")


def format_edit(e: tuple) -> str:
    return " ".join(map(str, e))


def ball_snapshot(g: Graph, v: int, T: int) -> tuple:
    nodes = ball(g, v, T)
    s = set(nodes)
    edges = tuple((u, w) for u in nodes for w in g.adj[u] if u < w and w in s)
    return nodes, edges


def change_set(prev: Graph, cur: Graph, T: int, touched: Iterable[int] = ()) -> frozenset[int]:
    """Nodes whose radius-T ball differs between the two graphs. Only nodes
    within T of a touched node in either graph can differ; those candidates
    are compared snapshot against snapshot."""
    touched = list(touched)
    cand: set[int] = set(range(prev.n, cur.n))
    for t in touched:
        if t < prev.n:
            cand.update(ball(prev, t, T))
        cand.update(ball(cur, t, T))
    out = set(range(prev.n, cur.n))
    for v in cand:
        if v >= prev.n or ball_snapshot(prev, v, T) != ball_snapshot(cur, v, T):
            out.add(v)
    return frozenset(out)


def change_set_bruteforce(prev: Graph, cur: Graph, T: int) -> frozenset[int]:
    return frozenset(v for v in range(cur.n) if v >= prev.n or ball_snapshot(prev, v, T) != ball_snapshot(cur, v, T))


class DynamicEngine:
    def __init__(self, alg: DynamicAlgorithm, T: int, allow_deletions: bool = False,
                 verifier: Callable[[Graph, Mapping[int, Hashable]], bool] | None = None, n: int | None = None):
        self.alg = alg
        self.T = T
        self.plus = allow_deletions
        self.verifier = verifier
        self.builder = GraphBuilder(0)
        self.graph = self.builder.freeze()
        self.labels: dict[int, Hashable] = {}
        self.memory: dict = {}
        self.valid: list[bool | None] = []
        self.history: list[dict[int, Hashable]] = []
        self.trace = ExecutionTrace("dynamic-pm" if allow_deletions else "dynamic", T)

    def apply(self, edit: tuple) -> frozenset[int]:
        kind = edit[0]
        prev = self.graph
        if kind == "add_node":
            touched = [self.builder.add_node()]
        elif kind == "add_edge":
            self.builder.add_edge(edit[1], edit[2])
            touched = [edit[1], edit[2]]
        elif kind == "del_edge":
            if not self.plus:
                raise ContractViolation("deletions need the +/- variant")
            self.builder.remove_edge(edit[1], edit[2])
            touched = [edit[1], edit[2]]
        else:
            raise ValueError(f"unknown edit {edit!r}")
        cur = self.builder.freeze()
        changed = change_set(prev, cur, self.T, touched)
        self.graph = cur
        view = DynamicView(cur, dict(self.labels), changed, self.T, len(self.history), self.memory, edit)
        updates = dict(self.alg(view))
        new = dict(self.labels)
        for v, lab in updates.items():
            if not 0 <= v < cur.n:
                raise ContractViolation(f"label for unknown node {v}")
            if v not in changed and self.labels.get(v) != lab:
                raise ContractViolation(f"node {v} relabeled outside the change set")
            new[v] = lab
        missing = [v for v in range(cur.n) if v not in new]
        if missing:
            raise ContractViolation(f"nodes {missing[:5]} left unlabeled")
        self.labels = new
        self.history.append(dict(new))
        ok = self.verifier(cur, new) if self.verifier is not None else None
        self.valid.append(ok)
        self.trace.steps.append(TraceStep(kind, tuple(edit[1:]), cur.n, {v: new[v] for v in sorted(changed)}, self.T))
        return changed


def run_dynamic(alg: DynamicAlgorithm, edits: Iterable[tuple], T: int, allow_deletions: bool = False,
                verifier=None) -> tuple[list[dict[int, Hashable]], ExecutionTrace, DynamicEngine]:
    eng = DynamicEngine(alg, T, allow_deletions, verifier)
    for e in edits:
        eng.apply(e)
    return eng.history, eng.trace, eng


def edits_for_graph(g: Graph, order: Sequence[int] | None = None) -> list[tuple]:
    """Build g from scratch: all nodes, then edges in order of the later endpoint."""
    edits: list[tuple] = [("add_node",)] * g.n
    rank = {v: i for i, v in enumerate(order if order is not None else range(g.n))}
    for u, v in sorted(g.edges(), key=lambda e: (max(rank[e[0]], rank[e[1]]), min(rank[e[0]], rank[e[1]]))):
        edits.append(("add_edge", u, v))
    return edits


# --- LOCAL ---------------------------------------------------------------


@dataclass
class LocalView:
    graph: Graph  # the radius-T ball, renumbered
    center: int
    uids: tuple[int, ...]
    n: int
    T: int


LocalAlgorithm = Callable[[LocalView], Hashable]


def run_local(alg: LocalAlgorithm, g: Graph, uids: Sequence[int] | None, T: int,
              n: int | None = None) -> dict[int, Hashable]:
    uids = list(range(g.n)) if uids is None else list(uids)
    if len(set(uids)) != len(uids) or len(uids) != g.n:
        raise ValueError("uids must be distinct, one per node")
    size = g.n if n is None else n
    out = {}
    for v in range(g.n):
        out[v] = alg(local_view(g, v, uids, T, size))
    return out


def local_view(g: Graph, v: int, uids: Sequence[int], T: int, n: int) -> LocalView:
    ind = induced(g, ball(g, v, T))
    return LocalView(ind.graph, ind.new_of_old[v], tuple(uids[u] for u in ind.old_of_new), n, T)


# --- simulations ---------------------------------------------------------


def lift_local_to_slocal(alg: LocalAlgorithm) -> SlocalAlgorithm:
    def slocal(view: SlocalView):
        g, old = view.graph()
        center = old.index(view.v)
        uids = tuple(view.uid(u) for u in old)
        return alg(LocalView(g, center, uids, view.n, view.T)), None

    return slocal


def lift_slocal_to_online(alg: SlocalAlgorithm) -> OnlineAlgorithm:
    """Per-node memories live in the global memory, keyed by visible id;
    the first-seen index doubles as the uid."""

    def online(view: OnlineView):
        mems = view.memory.setdefault("slocal_memories", {})
        dist = view.bfs(view.v, view.T)
        sub = _BallGraph(view, dist)
        sv = SlocalView(sub.graph, sub.center, view.T, {sub.new_of[u]: m for u, m in mems.items() if u in sub.new_of},
                        [sub.old_of[i] for i in range(sub.graph.n)], view.n)
        lab, mem = alg(sv)
        mems[view.v] = mem
        return lab

    return online


class _BallGraph:
    def __init__(self, view: OnlineView, dist: Mapping[int, int]):
        nodes = sorted(dist)
        self.old_of = nodes
        self.new_of = {u: i for i, u in enumerate(nodes)}
        b = GraphBuilder(len(nodes))
        for u in nodes:
            for w in view.neighbors(u):
                if w in self.new_of and u < w:
                    b.add_edge(self.new_of[u], self.new_of[w])
        self.graph = b.freeze()
        self.center = self.new_of[view.v]


def lift_local_to_online(alg: LocalAlgorithm) -> OnlineAlgorithm:
    return lift_slocal_to_online(lift_local_to_slocal(alg))


def lift_local_to_dynamic(alg: LocalAlgorithm, T: int, n: int | None = None) -> DynamicAlgorithm:
    """Recompute every changed node's output from scratch; node ids are uids."""

    def dyn(view: DynamicView):
        g = view.graph
        size = n if n is not None else max(g.n, 1)
        return {v: alg(local_view(g, v, list(range(g.n)), T, size)) for v in view.changed}

    return dyn


def lift_dynamic_to_online(alg: DynamicAlgorithm, T: int, c: int = 2) -> tuple[OnlineAlgorithm, int]:
    """Online algorithm with locality c*T that feeds the visible part of
    B(v, c*T) into an internal dynamic run and answers with v's label."""
    radius = c * T

    def online(view: OnlineView):
        st = view.memory.get("dyn")
        if st is None:
            st = view.memory["dyn"] = {"engine": DynamicEngine(alg, T), "fed": {}, "answered": {}}
        eng: DynamicEngine = st["engine"]
        fed: dict[int, int] = st["fed"]
        dist = view.bfs(view.v, radius)
        new = sorted((u for u in dist if u not in fed), key=lambda u: (dist[u], u))
        for u in new:
            eng.apply(("add_node",))
            fed[u] = eng.graph.n - 1
        edges = sorted({(min(u, w), max(u, w)) for u in new for w in view.neighbors(u) if w in fed})
        for u, w in edges:
            eng.apply(("add_edge", fed[u], fed[w]))
        for u, lab in st["answered"].items():
            if eng.labels[fed[u]] != lab:
                raise ContractViolation(f"label of answered node {u} changed after it was output")
        lab = eng.labels[fed[view.v]]
        st["answered"][view.v] = lab
        return lab

    return online, radius


def lift_slocal_to_local(alg: SlocalAlgorithm, T: int, g: Graph, uids: Sequence[int] | None = None,
                         max_degree: int | None = 64) -> tuple[dict[int, Hashable], np.ndarray]:
    """Distance-k coloring with k = 2T+2, then color classes in increasing
    order; nodes of one class run in parallel on the memories from before
    the class."""
    if max_degree is not None and g.n and max(g.degree(v) for v in range(g.n)) > max_degree:
        raise ResourceError("degree too large for the power-graph coloring")
    k = 2 * T + 2
    if g.n > 4096:
        raise ResourceError("power-graph coloring limited to 4096 nodes")
    colors = _kernels.power_graph_coloring(_kernels.all_pairs_distances(g.adj), k) if g.n else np.zeros(0, int)
    memories: dict[int, Any] = {}
    labels: dict[int, Hashable] = {}
    for c in sorted(set(colors.tolist())):
        batch = [v for v in range(g.n) if colors[v] == c]
        results = {}
        for v in batch:
            view = SlocalView(g, v, T, memories, uids, g.n)
            results[v] = alg(view)
        for v, (lab, mem) in results.items():
            labels[v] = lab
            memories[v] = mem
    return labels, colors


# --- stock algorithms ----------------------------------------------------


def constant_online(label: Hashable = 0) -> OnlineAlgorithm:
    return lambda view: label


def greedy_coloring_online(view: OnlineView) -> int:
    """Smallest color unused by visible already-labeled neighbors."""
    used = {view.label(u) for u in view.neighbors(view.v)}
    c = 0
    while c in used:
        c += 1
    return c


def greedy_mis_slocal(view: SlocalView):
    joined = any(view.memory(u) for u in view.neighbors(view.v))
    return (0, False) if joined else (1, True)


def greedy_coloring_slocal(view: SlocalView):
    used = {view.memory(u) for u in view.neighbors(view.v)}
    c = 0
    while c in used:
        c += 1
    return c, c


def greedy_coloring_dynamic(view: DynamicView) -> dict[int, int]:
    """Keep labels; a changed node keeps its color if still proper,
    otherwise takes the smallest free one."""
    g = view.graph
    labels = dict(view.labels)
    out = {}
    for v in sorted(view.changed):
        cur = labels.get(v)
        nb = {labels.get(u) for u in g.adj[v]}
        if cur is None or cur in nb:
            c = 0
            while c in nb:
                c += 1
            labels[v] = c
        out[v] = labels[v]
    return out


def cv_rounds(n: int) -> int:
    """Rounds of bit-index reduction taking colors below n**3 under 6."""
    bits = max((max(n, 2) ** 3 - 1).bit_length(), 3)
    r = 0
    while bits > 3:
        bits = (2 * bits - 1).bit_length()
        r += 1
    return r + 1


def cole_vishkin_rounds(n: int) -> int:
    return cv_rounds(n) + 33


def cole_vishkin_local(view: LocalView) -> int:
    """3-coloring of graphs of maximum degree 2 from uids.

    Edges point to the larger uid; a node's out-edge to its smaller (resp.
    larger) out-neighbor forms forest 1 (resp. 2), each with at most one
    parent per node. Bit-index reduction 6-colors each forest, the pair is
    a proper 36-coloring, and 33 rounds of class-by-class recoloring bring
    it down to 3. Needs T >= cole_vishkin_rounds(n).
    """
    g = view.graph
    uid = view.uids
    parents: list[dict[int, int]] = [{}, {}]
    for u in range(g.n):
        outs = sorted((w for w in g.adj[u] if uid[w] > uid[u]), key=lambda w: uid[w])
        if len(outs) > 2:
            raise ValueError("maximum degree 2 required")
        for f, w in enumerate(outs):
            parents[f][u] = w
    pair = []
    for par in parents:
        color = {u: uid[u] for u in range(g.n)}
        for _ in range(cv_rounds(view.n)):
            new = {}
            for u in range(g.n):
                other = color[par[u]] if u in par else color[u] ^ 1
                diff = color[u] ^ other
                i = (diff & -diff).bit_length() - 1
                new[u] = 2 * i + ((color[u] >> i) & 1)
            color = new
        pair.append(color)
    color = {u: 6 * pair[0][u] + pair[1][u] for u in range(g.n)}
    for k in range(35, 2, -1):
        new = dict(color)
        for u in range(g.n):
            if color[u] == k:
                used = {color[w] for w in g.adj[u]}
                new[u] = min(c for c in range(3) if c not in used)
        color = new
    return color[view.center]


# --- inclusion fixtures ------------------------------------------------------


def _component_order(view: LocalView) -> list[int]:
    """Nodes of the center's component in the view, by increasing uid."""
    comp = components(view.graph)
    mine = next(c for c in comp if view.center in c)
    return sorted(mine, key=lambda u: view.uids[u])


def gather_greedy_coloring_local(view: LocalView) -> int:
    """Greedy coloring in uid order over the visible component; correct
    once T reaches the diameter."""
    g = view.graph
    col: dict[int, int] = {}
    for u in _component_order(view):
        used = {col.get(w) for w in g.adj[u]}
        c = 0
        while c in used:
            c += 1
        col[u] = c
    return col[view.center]


def gather_greedy_mis_local(view: LocalView) -> int:
    g = view.graph
    inside: set[int] = set()
    for u in _component_order(view):
        if not any(w in inside for w in g.adj[u]):
            inside.add(u)
    return 1 if view.center in inside else 0


def coloring_verifier(max_colors: int | None = None) -> Callable[[Graph, Mapping[int, Hashable]], bool]:
    def ok(g: Graph, labels: Mapping[int, Hashable]) -> bool:
        if any(v not in labels for v in range(g.n)):
            return False
        if max_colors is not None and any(not 0 <= labels[v] < max_colors for v in range(g.n)):
            return False
        return all(labels[u] != labels[v] for u, v in g.edges())

    return ok


def mis_ok(g: Graph, labels: Mapping[int, Hashable]) -> bool:
    if any(labels.get(v) not in (0, 1) for v in range(g.n)):
        return False
    for u, v in g.edges():
        if labels[u] == 1 and labels[v] == 1:
            return False
    return all(labels[v] == 1 or any(labels[u] == 1 for u in g.adj[v]) for v in range(g.n))


@dataclass(frozen=True)
class InclusionFixture:
    name: str
    graph: Graph
    alg: LocalAlgorithm
    T: int
    verifier: Callable[[Graph, Mapping[int, Hashable]], bool]


def inclusion_fixtures() -> list[InclusionFixture]:
    """Ten (problem, graph) pairs on at most 12 nodes with LOCAL algorithms
    whose locality covers the whole graph."""
    from .graph import gen_complete_tree, gen_cycle, gen_grid, gen_path

    star = from_edges(6, [(0, i) for i in range(1, 6)])
    tree = from_edges(10, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (5, 6), (6, 7), (6, 8), (8, 9)])
    two = from_edges(9, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7), (7, 4)])
    col, mis = coloring_verifier(), mis_ok
    out = [
        InclusionFixture("coloring/path7", gen_path(7), gather_greedy_coloring_local, 7, col),
        InclusionFixture("coloring/cycle8", gen_cycle(8), gather_greedy_coloring_local, 8, col),
        InclusionFixture("coloring/grid3x4", gen_grid(3, 4), gather_greedy_coloring_local, 12, col),
        InclusionFixture("coloring/star6", star, gather_greedy_coloring_local, 6, col),
        InclusionFixture("mis/tree10", tree, gather_greedy_mis_local, 10, mis),
        InclusionFixture("mis/cycle9", gen_cycle(9), gather_greedy_mis_local, 9, mis),
        InclusionFixture("mis/two-components", two, gather_greedy_mis_local, 9, mis),
        InclusionFixture("mis/binary-tree7", from_edges(7, gen_complete_tree(2, 2).edges()), gather_greedy_mis_local, 7, mis),
        InclusionFixture("3-coloring/cycle11", gen_cycle(11), cole_vishkin_local, cole_vishkin_rounds(11), coloring_verifier(3)),
        InclusionFixture("3-coloring/path12", gen_path(12), cole_vishkin_local, cole_vishkin_rounds(12), coloring_verifier(3)),
    ]
    return out


def planted_confinement_violator(view: DynamicView) -> dict[int, Hashable]:
    """Labels every changed node and also flips node 0 at every step, which
    is outside the change set once the graph has grown away from it."""
    out: dict[int, Hashable] = {v: 0 for v in view.changed}
    if view.graph.n:
        out[0] = view.step % 2
    return out
