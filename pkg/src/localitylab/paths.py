"""Segment classes, pumping and replacement for LCLs on paths and cycles
with inputs, plus two constructions built on them: a constant-locality
online wrapper around a slow online algorithm, and a LOCAL algorithm
assembled from a canonical map of neighborhood outputs.

Segments are input words read from s (index 0) to t (last index). Their
length counts edges. A segment's class records the inputs of its first and
last 2r nodes and, for every labeling of those nodes, whether the labeling
extends to the nodes in between with every node at distance >= r from both
ends happy.
"""
from __future__ import annotations

import copy
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Hashable, Sequence

import numpy as np

from . import _kernels
from .graph import Graph, GraphBuilder, ResourceError, components, distances, induced, node_budget
from .lcl import Label, PathLcl, _path_order, verify_path
from .models import ContractViolation, OnlineEngine, OnlineView


class PreconditionError(ValueError):
    """An operation was called outside its precondition."""


class VirtualFailure(RuntimeError):
    """The simulated algorithm failed on a virtual instance."""

    def __init__(self, msg: str, instance: Graph | None = None):
        super().__init__(msg)
        self.instance = instance


@dataclass(frozen=True)
class Segment:
    inputs: tuple

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("a segment has at least one node")

    @property
    def length(self) -> int:
        return len(self.inputs) - 1

    def __len__(self) -> int:
        return len(self.inputs)

    @staticmethod
    def plain(length: int, symbol: Hashable = None) -> "Segment":
        return Segment((symbol,) * (length + 1))


def path_graph(inputs: Sequence[Hashable], cycle: bool = False) -> Graph:
    m = len(inputs)
    edges = [(i, i + 1) for i in range(m - 1)]
    if cycle and m >= 3:
        edges.append((m - 1, 0))
    b = GraphBuilder(m)
    for u, w in edges:
        b.add_edge(u, w)
    for i, x in enumerate(inputs):
        b.set_input(i, x)
    return b.freeze()


# --- exact dynamic programming over a line -------------------------------


class _Windows:
    """Memoised window acceptance for one problem."""

    def __init__(self, pi: PathLcl):
        self.pi = pi
        self.cache: dict = {}

    def ok(self, ins: tuple, labs: tuple, center: int) -> bool:
        key = (ins, labs, center)
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = self.pi.accepts(tuple(zip(ins, labs)), center)
        return hit


def _solve_line(win: _Windows, ins: Sequence, allowed: Sequence[Sequence[Label]], checked: Sequence[bool],
                left_real: bool = True, right_real: bool = True) -> list[Label] | None:
    """Some labeling with every checked node's window accepted, or None.

    A checked node's window is clipped at the array ends; callers only check
    nodes whose window would leave the array at a real end.
    """
    r = win.pi.r
    m = len(ins)
    ins = tuple(ins)
    for j in range(m):
        if checked[j] and ((j - r < 0 and not left_real) or (j + r > m - 1 and not right_real)):
            raise ValueError(f"window of checked node {j} leaves the array at an open end")
    layers: list[dict] = []
    frontier: dict = {(): None}
    for i in range(m):
        nxt: dict = {}
        j = i - r
        test = j >= 0 and checked[j]
        if test:
            lo = max(0, j - r)
            wins = ins[lo: i + 1]
            center = j - lo
            width = i + 1 - lo
        for st in frontier:
            for c in allowed[i]:
                full = st + (c,)
                if test and not win.ok(wins, full[-width:], center):
                    continue
                ns = full[-2 * r:]
                if ns not in nxt:
                    nxt[ns] = (st, c)
        if not nxt:
            return None
        layers.append(nxt)
        frontier = nxt
    tail = [j for j in range(max(0, m - r), m) if checked[j]]
    end = None
    for st in frontier:
        good = True
        for j in tail:
            lo = max(0, j - r)
            # st holds the labels of the last len(st) positions
            labs = st[len(st) - (m - lo):]
            if not win.ok(ins[lo:], labs, j - lo):
                good = False
                break
        if good:
            end = st
            break
    if end is None:
        return None
    out: list[Label] = [None] * m
    st = end
    for i in range(m - 1, -1, -1):
        prev, c = layers[i][st]
        out[i] = c
        st = prev
    return out


def _allowed(pi: PathLcl, m: int, fixed) -> list[tuple]:
    fixed = fixed or {}
    return [(fixed[i],) if i in fixed else pi.gamma for i in range(m)]


def solve_path(pi: PathLcl, inputs: Sequence, fixed: dict[int, Label] | None = None,
               win: _Windows | None = None) -> list[Label] | None:
    """A valid labeling of the path with these inputs extending ``fixed``."""
    win = win or _Windows(pi)
    m = len(inputs)
    return _solve_line(win, inputs, _allowed(pi, m, fixed), [True] * m)


def solve_cycle(pi: PathLcl, inputs: Sequence, fixed: dict[int, Label] | None = None,
                win: _Windows | None = None) -> list[Label] | None:
    win = win or _Windows(pi)
    r = pi.r
    m = len(inputs)
    allowed = _allowed(pi, m, fixed)
    if m < 2 * r + 1:
        g = path_graph(inputs, cycle=True)
        for labs in product(*allowed):
            if not verify_path(pi, g, list(labs)):
                return list(labs)
        return None
    ins = tuple(inputs) + tuple(inputs[: 2 * r])
    checked = [r <= i < m + r for i in range(m + 2 * r)]
    for prefix in product(*allowed[: 2 * r]):
        al = [(c,) for c in prefix] + allowed[2 * r:] + [(c,) for c in prefix]
        sol = _solve_line(win, ins, al, checked, False, False)
        if sol is not None:
            return sol[:m]
    return None


# --- tripartition and segment classes ------------------------------------


def tripartition(pi: PathLcl, seg: Segment) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Endpoint zone D1, its radius-r shell D2 and the rest D3, as indices."""
    r = pi.r
    m = len(seg)
    d1 = set(range(min(r, m))) | set(range(max(0, m - r), m))
    d2 = set()
    for v in d1:
        d2.update(range(max(0, v - r), min(m, v + r + 1)))
    d2 -= d1
    d3 = set(range(m)) - d1 - d2
    return tuple(sorted(d1)), tuple(sorted(d2)), tuple(sorted(d3))


@dataclass(frozen=True)
class SegmentClass:
    """Inputs of the first and last 2r nodes and the set of (head labels,
    tail labels) pairs that extend. Segments with fewer than 2r nodes form
    singleton classes keyed by their whole input word."""

    kind: str  # "full" or "short"
    head_inputs: tuple
    tail_inputs: tuple
    table: frozenset = frozenset()

    def extendable(self, head: tuple, tail: tuple) -> bool:
        return (tuple(head), tuple(tail)) in self.table


class SegmentClasses:
    """Class computation and the append-one-node transition between classes."""

    def __init__(self, pi: PathLcl, budget: int = 200_000):
        self.pi = pi
        self.win = _Windows(pi)
        self.budget = budget
        self._step: dict = {}
        self._words = list(product(pi.gamma, repeat=2 * pi.r))

    def base(self, head: tuple) -> SegmentClass:
        head = tuple(head)
        if len(head) != 2 * self.pi.r:
            raise ValueError("base word must have 2r symbols")
        return SegmentClass("full", head, head, frozenset((w, w) for w in self._words))

    def step(self, cls: SegmentClass, x: Hashable) -> SegmentClass:
        key = (cls, x)
        hit = self._step.get(key)
        if hit is not None:
            return hit
        r = self.pi.r
        ins = cls.tail_inputs + (x,)
        table = set()
        for h, t in cls.table:
            for c in self.pi.gamma:
                labs = t + (c,)
                if self.win.ok(ins, labs, r):
                    table.add((h, labs[1:]))
        out = SegmentClass("full", cls.head_inputs, ins[1:], frozenset(table))
        self._step[key] = out
        return out

    def of(self, seg: Segment | Sequence) -> SegmentClass:
        ins = tuple(seg.inputs if isinstance(seg, Segment) else seg)
        r2 = 2 * self.pi.r
        if len(ins) < r2:
            return SegmentClass("short", ins, ())
        cls = self.base(ins[:r2])
        for x in ins[r2:]:
            cls = self.step(cls, x)
        return cls

    def explore(self, starts: Sequence[SegmentClass]) -> dict[SegmentClass, dict[Hashable, SegmentClass]]:
        """Transition graph of all classes reachable from ``starts``."""
        graph: dict[SegmentClass, dict[Hashable, SegmentClass]] = {}
        todo = deque(starts)
        for s in starts:
            graph.setdefault(s, {})
        while todo:
            s = todo.popleft()
            for x in self.pi.sigma:
                t = self.step(s, x)
                graph[s][x] = t
                if t not in graph:
                    if len(graph) >= self.budget:
                        raise ResourceError(f"class space exceeds {self.budget} states")
                    graph[t] = {}
                    todo.append(t)
        return graph


def segment_class(pi: PathLcl, seg: Segment, classes: SegmentClasses | None = None) -> SegmentClass:
    return (classes or SegmentClasses(pi)).of(seg)


def _sccs(graph: dict) -> list[list]:
    """Kosaraju over a dict-of-dict transition graph."""
    order: list = []
    seen: set = set()
    for root in graph:
        if root in seen:
            continue
        seen.add(root)
        stack = [(root, iter(graph[root].values()))]
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, iter(graph[nxt].values())))
                    break
            else:
                stack.pop()
                order.append(node)
    rev: dict = {s: [] for s in graph}
    for s, outs in graph.items():
        for t in outs.values():
            rev[t].append(s)
    comp: dict = {}
    out = []
    for root in reversed(order):
        if root in comp:
            continue
        members = [root]
        comp[root] = len(out)
        q = [root]
        while q:
            u = q.pop()
            for w in rev[u]:
                if w not in comp:
                    comp[w] = len(out)
                    members.append(w)
                    q.append(w)
        out.append(members)
    return out


def _cyclic_states(graph: dict) -> set:
    cyc = set()
    for comp in _sccs(graph):
        if len(comp) > 1 or any(t == comp[0] for t in graph[comp[0]].values()):
            cyc.update(comp)
    return cyc


def _closure(graph: dict, seeds) -> set:
    out = set(seeds)
    q = deque(out)
    while q:
        s = q.popleft()
        for t in graph[s].values():
            if t not in out:
                out.add(t)
                q.append(t)
    return out


def pumping_constant(pi: PathLcl, budget: int = 200_000, classes: SegmentClasses | None = None) -> int:
    """Smallest alpha (in edges) such that every segment of length >= alpha
    lies in an infinite class.

    A class is infinite iff it is reachable from a class on a cycle of the
    append transition graph. Classes off that closure form a DAG, so their
    depths are bounded; alpha is the deepest one (in nodes, i.e. length + 1).
    """
    classes = classes or SegmentClasses(pi, budget)
    r2 = 2 * pi.r
    starts = [classes.base(w) for w in product(pi.sigma, repeat=r2)]
    try:
        graph = classes.explore(starts)
    except ResourceError as e:
        raise ResourceError(f"{e}; alpha >= {r2 - 1}") from None
    infinite = _closure(graph, _cyclic_states(graph))
    finite = [s for s in graph if s not in infinite]
    depth = {s: r2 for s in starts if s not in infinite}
    # finite classes only have finite predecessors; relax in BFS-topological order
    indeg = {s: 0 for s in finite}
    for s in finite:
        for t in graph[s].values():
            if t in indeg:
                indeg[t] += 1
    q = deque(s for s in finite if indeg[s] == 0)
    while q:
        s = q.popleft()
        for t in graph[s].values():
            if t in indeg:
                depth[t] = max(depth.get(t, 0), depth[s] + 1)
                indeg[t] -= 1
                if indeg[t] == 0:
                    q.append(t)
    return max([r2 - 1] + list(depth.values()))


def pump_segment(pi: PathLcl, seg: Segment, min_len: int, alpha: int | None = None,
                 classes: SegmentClasses | None = None) -> Segment:
    """A segment of length >= min_len in the class of ``seg``."""
    classes = classes or SegmentClasses(pi)
    alpha = pumping_constant(pi, classes=classes) if alpha is None else alpha
    if seg.length < alpha:
        raise PreconditionError(f"segment length {seg.length} is below the pumping constant {alpha}")
    if min_len <= seg.length:
        return seg
    r2 = 2 * pi.r
    target = classes.of(seg)
    start = classes.base(seg.inputs[:r2])
    graph = classes.explore([start])
    rev: dict = {s: [] for s in graph}
    for s, outs in graph.items():
        for x, t in outs.items():
            rev[t].append((s, x))
    # co-reachable part: word from each class to the target
    to_target: dict = {target: ()}
    q = deque([target])
    while q:
        t = q.popleft()
        for s, x in rev[t]:
            if s not in to_target:
                to_target[s] = (x,) + to_target[t]
                q.append(s)
    from_start = _bfs_words(graph, start, set(graph))
    for c in sorted(from_start, key=lambda s: len(from_start[s])):
        if c not in to_target:
            continue
        loop = _cycle_word(graph, c, set(to_target))
        if loop is None:
            continue
        pre, suf = from_start[c], to_target[c]
        base = r2 + len(pre) + len(suf) - 1
        k = max(1, math.ceil((min_len - base) / len(loop)))
        word = tuple(seg.inputs[:r2]) + pre + loop * k + suf
        out = Segment(word)
        if classes.of(out) != target:
            raise AssertionError("pumping changed the class")
        return out
    raise PreconditionError("class of the segment is finite")


def _bfs_words(graph: dict, start, allowed: set) -> dict:
    words = {start: ()}
    q = deque([start])
    while q:
        s = q.popleft()
        for x, t in graph[s].items():
            if t in allowed and t not in words:
                words[t] = words[s] + (x,)
                q.append(t)
    return words


def _cycle_word(graph: dict, c, allowed: set) -> tuple | None:
    words: dict = {}
    q = deque()
    for x, t in graph[c].items():
        if t == c:
            return (x,)
        if t in allowed and t not in words:
            words[t] = (x,)
            q.append(t)
    while q:
        s = q.popleft()
        for x, t in graph[s].items():
            if t == c:
                return words[s] + (x,)
            if t in allowed and t not in words:
                words[t] = words[s] + (x,)
                q.append(t)
    return None


def replace_and_extend(pi: PathLcl, inputs: Sequence, labels: Sequence[Label], start: int, end: int,
                       new: Segment, classes: SegmentClasses | None = None) -> tuple[list, list[Label]]:
    """Replace inputs[start..end] by ``new`` and relabel only its interior.

    Returns the new input word and a labeling that agrees with ``labels``
    outside the replaced segment and on its first and last 2r nodes.
    """
    classes = classes or SegmentClasses(pi)
    inputs = list(inputs)
    labels = list(labels)
    if not 0 <= start <= end < len(inputs):
        raise ValueError("segment out of range")
    if verify_path(pi, path_graph(inputs), labels):
        raise PreconditionError("labeling is not valid on the original path")
    old = Segment(tuple(inputs[start: end + 1]))
    if classes.of(old) != classes.of(new):
        raise PreconditionError("replacement segment is in a different class")
    new_inputs = inputs[:start] + list(new.inputs) + inputs[end + 1:]
    if new == old:
        return new_inputs, labels
    r, r2 = pi.r, 2 * pi.r
    m = len(new)
    seg_labels = labels[start: end + 1]
    fixed = {i: seg_labels[i] for i in range(r2)}
    fixed.update({m - r2 + i: seg_labels[len(old) - r2 + i] for i in range(r2)})
    checked = [r <= i <= m - 1 - r for i in range(m)]
    inner = _solve_line(classes.win, new.inputs, _allowed(pi, m, fixed), checked, False, False)
    if inner is None:
        raise AssertionError("equal classes but no extension")
    out = labels[:start] + inner + labels[end + 1:]
    bad = verify_path(pi, path_graph(new_inputs), out)
    if bad:
        raise AssertionError(f"replacement produced violations at {[b.node for b in bad]}")
    return new_inputs, out


# --- ruling sets ---------------------------------------------------------


def ruling_set(g: Graph, alpha: int, beta: int, order: Sequence[int] | None = None) -> frozenset[int]:
    """Greedy in ``order``: v joins unless B(v, alpha) already meets the set.

    Members end up more than alpha apart and every node is within alpha of
    one, so the result is an (alpha, beta)-ruling set whenever alpha <= beta.
    """
    if alpha > beta:
        raise PreconditionError("greedy ruling sets need alpha <= beta")
    order = range(g.n) if order is None else order
    chosen: set[int] = set()
    for v in order:
        if not any(u in chosen for u in distances(g, v, alpha)):
            chosen.add(v)
    return frozenset(chosen)


def check_ruling_set(g: Graph, rs, alpha: int, beta: int) -> list[str]:
    out = []
    rs = sorted(rs)
    for i, u in enumerate(rs):
        d = distances(g, u)
        for w in rs[i + 1:]:
            if d.get(w, math.inf) < alpha:
                out.append(f"{u} and {w} are closer than {alpha}")
    for v in range(g.n):
        d = distances(g, v, beta)
        if not any(u in d for u in rs):
            out.append(f"{v} has no ruling node within {beta}")
    return out


# --- online helpers ------------------------------------------------------


def _line(view: OnlineView, nodes) -> tuple[list[int], bool]:
    """Order the nodes of a visible path or cycle component."""
    nodes = set(nodes)
    nb = {u: [w for w in view.neighbors(u) if w in nodes] for u in nodes}
    ends = sorted(u for u in nodes if len(nb[u]) < 2)
    cyc = not ends
    start = min(nodes) if cyc else ends[0]
    order = [start]
    prev = -1
    cur = start
    while True:
        nxt = [w for w in sorted(nb[cur]) if w != prev]
        if not nxt or (cyc and nxt[0] == start):
            break
        prev, cur = cur, nxt[0]
        order.append(cur)
    if len(order) != len(nodes):
        raise ValueError("visible component is not a path or cycle")
    return order, cyc


def lookahead_online(pi: PathLcl) -> Callable[[OnlineView], Label]:
    """Online algorithm: first label for v such that the labels given so far
    extend over v's visible component. Nodes within T-1 of a revealed node
    have all their neighbors visible, which tells real ends from open ones."""
    win = _Windows(pi)
    r = pi.r

    def alg(view: OnlineView) -> Label:
        complete = view.memory.setdefault("complete", set())
        if view.T >= 1:
            complete.update(view.bfs(view.v, view.T - 1))
        comp = view.bfs(view.v)
        order, cyc = _line(view, comp)
        m = len(order)
        ins = [view.input(u) for u in order]
        fixed = {i: view.label(u) for i, u in enumerate(order) if view.label(u) is not None}
        pos = order.index(view.v)
        if cyc:
            for c in pi.gamma:
                if solve_cycle(pi, ins, {**fixed, pos: c}, win) is not None:
                    return c
            raise ContractViolation("no label of the revealed node extends")
        real = [order[0] in complete and len(view.neighbors(order[0])) <= 1,
                order[-1] in complete and len(view.neighbors(order[-1])) <= 1]
        checked = [(i - r >= 0 or real[0]) and (i + r <= m - 1 or real[1]) for i in range(m)]
        for c in pi.gamma:
            al = _allowed(pi, m, {**fixed, pos: c})
            if _solve_line(win, ins, al, checked, real[0], real[1]) is not None:
                return c
        raise ContractViolation("no label of the revealed node extends")

    return alg


# --- constant-locality online wrapper ------------------------------------


def choose_virtual_size(n: int, alpha: int, T_fn: Callable[[int], int], max_exp: int = 40) -> tuple[int, bool]:
    """Smallest power of two N with (2n/alpha)*T(N) <= N/4, else a fallback
    of the smallest power of two >= max(8*alpha, 16) (flagged False)."""
    for e in range(1, max_exp + 1):
        N = 1 << e
        if (2 * n / alpha) * T_fn(N) <= N / 4:
            return N, True
    N = 16
    while N < 8 * alpha:
        N *= 2
    return N, False


@dataclass
class _SpeedupState:
    N: int
    met: bool
    T_A: int
    W: int
    label: dict = field(default_factory=dict)
    in_R: dict = field(default_factory=dict)
    zones: set = field(default_factory=set)
    vb: GraphBuilder = field(default_factory=GraphBuilder)
    vgraph: Graph | None = None
    veng: OnlineEngine | None = None
    windows: int = 0


class SpeedupOnline:
    """Constant-locality online algorithm built from ``alg`` of locality T(n).

    Per reveal of v:
      1. undecided nodes within 4a+2 of v join the ruling set R unless
         B(u, a) already meets R (a is the effective pumping constant);
      2. each R node u needed for v gets its zone B(u, 2r-1) labeled by alg,
         run on a virtual path where the segments to the neighboring R nodes
         are pumped to length >= max(N/a, 2W);
      3. the interior of the segment holding v is filled by exact DP.
    A component that is fully visible on its first reveal is solved whole.
    """

    def __init__(self, pi: PathLcl, alg: Callable[[OnlineView], Label], T: int | Callable[[int], int],
                 alpha: int | None = None, budget: int = 200_000):
        self.pi = pi
        self.alg = alg
        self.T_fn = T if callable(T) else (lambda n, T=T: T)
        self.classes = SegmentClasses(pi, budget)
        self.alpha_raw = pumping_constant(pi, classes=self.classes) if alpha is None else alpha
        # zones of radius 2r-1 around R nodes must not meet
        self.alpha = max(self.alpha_raw, 4 * pi.r - 2, 3)
        self.locality = 5 * self.alpha + 3
        self._pumped: dict = {}

    def __deepcopy__(self, memo) -> "SpeedupOnline":
        return self  # configuration only; per-run state lives in the engine memory

    @property
    def bound(self) -> int:
        return 6 * self.alpha

    def state(self, n: int) -> _SpeedupState:
        N, met = choose_virtual_size(n, self.alpha, self.T_fn)
        T_A = self.T_fn(N)
        return _SpeedupState(N, met, T_A, T_A + 2 * self.pi.r + 1)

    def __call__(self, view: OnlineView) -> Label:
        st = view.memory.get("speedup")
        if st is None:
            st = view.memory["speedup"] = self.state(view.n)
        v = view.v
        if v in st.label:
            return st.label[v]
        L = self.locality
        dist = view.bfs(v, L)
        if max(dist.values()) < L and not any(u in st.in_R or u in st.label for u in dist):
            self._solve_small(view, dist, st)
            return st.label[v]
        a = self.alpha
        for u in sorted(u for u, d in dist.items() if d <= 4 * a + 2 and u not in st.in_R):
            st.in_R[u] = not any(st.in_R.get(w, False) for w in view.bfs(u, a))
        self._label(view, v, st)
        return st.label[v]

    def _solve_small(self, view: OnlineView, nodes, st: _SpeedupState) -> None:
        order, cyc = _line(view, nodes)
        ins = [view.input(u) for u in order]
        sol = (solve_cycle if cyc else solve_path)(self.pi, ins, None, self.classes.win)
        if sol is None:
            raise ContractViolation("component admits no valid labeling")
        st.label.update(zip(order, sol))

    def _walk(self, view: OnlineView, start: int, first: int, st: _SpeedupState) -> tuple[list[int], bool]:
        nodes = []
        prev, cur = start, first
        for _ in range(2 * self.alpha + 2):
            nodes.append(cur)
            if st.in_R[cur]:
                return nodes, True
            nxt = [w for w in view.neighbors(cur) if w != prev]
            if not nxt:
                return nodes, False
            prev, cur = cur, nxt[0]
        raise AssertionError("no ruling node within 2a+1")

    def _label(self, view: OnlineView, v: int, st: _SpeedupState) -> None:
        r = self.pi.r
        for u in view.bfs(v, 2 * r - 1):
            if st.in_R[u]:
                self._zone(view, u, st)
                return
        sides = [self._walk(view, v, w, st) for w in sorted(view.neighbors(v))]
        if len(sides) == 2 and sides[0][1] and sides[1][1]:
            a, b = sides
            nodes = a[0][::-1] + [v] + b[0]
            self._zone(view, nodes[0], st)
            self._zone(view, nodes[-1], st)
            self._fill(view, nodes, st, end=False)
            return
        at_r = [s for s in sides if s[1]]
        at_end = [s for s in sides if not s[1]]
        if len(at_r) != 1:
            raise AssertionError("node is not between a ruling node and a path end")
        nodes = at_r[0][0][::-1] + [v] + (at_end[0][0] if at_end else [])
        self._zone(view, nodes[0], st)
        self._fill(view, nodes, st, end=True)

    def pumped(self, inputs: tuple, min_len: int) -> tuple:
        key = (inputs, min_len)
        hit = self._pumped.get(key)
        if hit is None:
            seg = pump_segment(self.pi, Segment(inputs), min_len, self.alpha_raw, self.classes)
            hit = self._pumped[key] = seg.inputs
        return hit

    def _zone(self, view: OnlineView, u: int, st: _SpeedupState) -> None:
        if u in st.zones:
            return
        r = self.pi.r
        min_len = max(math.ceil(st.N / self.alpha), 2 * st.W)
        words: list[tuple] = []
        zone_sides: list[list[int]] = []
        for w in sorted(view.neighbors(u)):
            nodes, at_r = self._walk(view, u, w, st)
            if at_r:
                seg = [u] + nodes
                canon = seg if u < seg[-1] else seg[::-1]
                word = self.pumped(tuple(view.input(x) for x in canon), min_len)
                if canon[0] != u:
                    word = word[::-1]
                words.append(word[1: st.W + 1])
            else:
                words.append(tuple(view.input(x) for x in nodes[: st.W]))
            zone_sides.append(nodes[: 2 * r - 1])
        vb = st.vb
        center = vb.add_node()
        vb.set_input(center, view.input(u))
        vids: list[list[int]] = []
        for word in words:
            prev = center
            ids = []
            for x in word:
                y = vb.add_node()
                vb.set_input(y, x)
                vb.add_edge(prev, y)
                ids.append(y)
                prev = y
            vids.append(ids)
        st.vgraph = vb.freeze()
        if st.veng is None:
            st.veng = OnlineEngine(self.alg, st.N, st.T_A, st.vgraph, fast=False)
        st.windows += 1
        todo = [(u, center)]
        for k in range(2 * r - 1):
            for side, ids in zip(zone_sides, vids):
                if k < len(side):
                    todo.append((side[k], ids[k]))
        for real, virt in todo:
            try:
                st.label[real] = st.veng.reveal(virt, st.vgraph)
            except (ContractViolation, ValueError, RuntimeError) as e:
                raise VirtualFailure(f"simulated algorithm failed: {e}", st.vgraph) from e
        st.zones.add(u)

    def _fill(self, view: OnlineView, nodes: list[int], st: _SpeedupState, end: bool) -> None:
        r = self.pi.r
        m = len(nodes)
        ins = [view.input(x) for x in nodes]
        fixed = {i: st.label[x] for i, x in enumerate(nodes) if x in st.label}
        if end:
            checked = [i >= r for i in range(m)]
        else:
            checked = [r <= i <= m - 1 - r for i in range(m)]
        sol = _solve_line(self.classes.win, ins, _allowed(self.pi, m, fixed), checked, False, end)
        if sol is None:
            raise VirtualFailure("zone labels do not extend over a segment", st.vgraph)
        for x, c in zip(nodes, sol):
            st.label.setdefault(x, c)


def speedup_online(pi: PathLcl, alg: Callable[[OnlineView], Label], T: int | Callable[[int], int],
                   alpha: int | None = None) -> SpeedupOnline:
    return SpeedupOnline(pi, alg, T, alpha)


# --- canonical map and the LOCAL algorithm -------------------------------


@dataclass
class CanonicalMap:
    """f maps a radius-beta input word (the lexicographically smaller reading)
    to the radius-r outputs in the same reading. ``pairs`` names the two probe
    copies that received those outputs."""

    pi: PathLcl
    T: int
    beta: int
    f: dict
    pairs: dict
    fragments: dict  # (word, copy) -> probe node ids in reading order
    probe: OnlineEngine

    @property
    def copies(self) -> int:
        return len(self.pi.gamma) ** (2 * self.pi.r + 1) + 1


def _sym_key(pi: PathLcl):
    rank = {x: i for i, x in enumerate(pi.sigma)}
    return lambda word: tuple(rank[x] for x in word)


def canonical_word(pi: PathLcl, word: tuple) -> tuple[tuple, bool]:
    """(smaller of the two readings, whether ``word`` had to be reversed)."""
    key = _sym_key(pi)
    rev = word[::-1]
    if key(rev) < key(word):
        return rev, True
    return word, False


def build_canonical_map(pi: PathLcl, alg: Callable[[OnlineView], Label], T: int,
                        domain: Sequence[tuple] | None = None, n_claim: int | None = None) -> CanonicalMap:
    """Run alg once on a probe graph of disjoint (2beta+1)-node fragments,
    revealing the radius-r ball of each centre, and keep for every input word
    an output that two copies agree on."""
    r = pi.r
    beta = T + r + 1
    size = 2 * beta + 1
    if domain is None:
        words = sorted({canonical_word(pi, w)[0] for w in product(pi.sigma, repeat=size)}, key=_sym_key(pi))
    else:
        words = sorted({canonical_word(pi, tuple(w))[0] for w in domain}, key=_sym_key(pi))
    K = len(pi.gamma) ** (2 * r + 1) + 1
    total = len(words) * K * size
    if total > node_budget():
        raise ResourceError(f"probe graph needs {total} nodes, budget {node_budget()}")
    b = GraphBuilder(total)
    fragments = {}
    nid = 0
    for w in words:
        for c in range(K):
            ids = list(range(nid, nid + size))
            for i, x in zip(ids, w):
                b.set_input(i, x)
            for i in range(size - 1):
                b.add_edge(ids[i], ids[i + 1])
            fragments[(w, c)] = ids
            nid += size
    g = b.freeze() if total else Graph(0, ())
    eng = OnlineEngine(alg, n_claim or max(total, 1), T, g, fast=False)
    f, pairs = {}, {}
    for w in words:
        seen: dict = {}
        for c in range(K):
            ids = fragments[(w, c)]
            reveal = [beta] + [beta + s * k for k in range(1, r + 1) for s in (-1, 1)]
            for i in reveal:
                eng.reveal(ids[i])
            out = tuple(eng.labels[ids[i]] for i in range(beta - r, beta + r + 1))
            if out in seen and (w not in f):
                f[w] = out
                pairs[w] = (seen[out], c)
            seen.setdefault(out, c)
        if w not in f:
            raise ContractViolation(f"no two probe copies of {w} received equal outputs")
    return CanonicalMap(pi, T, beta, f, pairs, fragments, eng)


class LogstarLocal:
    """LOCAL algorithm on paths and cycles from a canonical map.

    (i) distance-2beta coloring by color reduction on the 2beta-th power,
    (ii) greedy ruling set over color classes, dropping members within beta
    of a path end, (iii) stamping f around each member, (iv) each gap filled
    by resuming the probe run on a copy where two fragments are joined
    through the gap's nodes. Components of at most 6beta+2 nodes are solved
    directly, anchored at the smallest uid.
    """

    def __init__(self, pi: PathLcl, cmap: CanonicalMap):
        self.pi = pi
        self.cmap = cmap
        self.beta = cmap.beta
        self.win = _Windows(pi)
        self._gaps: dict = {}
        self._small: dict = {}
        self.stats = {"gap_fills": 0, "small": 0}

    def __call__(self, view) -> Label:
        return self.run(view.graph, view.uids)[view.center]

    def run(self, g: Graph, uids: Sequence[int] | None = None) -> dict[int, Label]:
        uids = list(range(g.n)) if uids is None else list(uids)
        if len(set(uids)) != g.n:
            raise ValueError("uids must be distinct")
        out: dict[int, Label] = {}
        comps = components(g)
        for comp in comps:
            if len(comps) == 1:
                order, cyc = _path_order(g)
                nodes = order
            else:
                sub = induced(g, comp)
                order, cyc = _path_order(sub.graph)
                nodes = [sub.old_of_new[i] for i in order]
            labs = self._component([g.inputs[x] if g.inputs is not None else None for x in nodes],
                                   [uids[x] for x in nodes], cyc)
            out.update(zip(nodes, labs))
        return out

    # one component, given in path order
    def _component(self, ins: list, uid: list[int], cyc: bool) -> list[Label]:
        m = len(ins)
        beta, r = self.beta, self.pi.r
        if m <= 6 * beta + 2:
            return self._solve_small(ins, uid, cyc)
        colors = distance_coloring(uid, 2 * beta, cyc)
        rset = _greedy_ruling(colors, 2 * beta, cyc)
        if not cyc:
            rset = [p for p in rset if beta <= p <= m - 1 - beta]
        if not rset:
            raise AssertionError("no ruling node in a long component")
        rset.sort()
        labels: list = [None] * m
        orient = {}
        for p in rset:
            fwd = self._forward(p, uid, cyc)
            word = tuple(ins[(p + fwd * d) % m] for d in range(-beta, beta + 1))
            canon, flip = canonical_word(self.pi, word)
            orient[p] = (canon, fwd * (-1 if flip else 1))
            stamp = self.cmap.f[canon]
            for d in range(-r, r + 1):
                labels[(p + orient[p][1] * d) % m] = stamp[d + r]
        k = len(rset)
        gaps = [(rset[i], rset[(i + 1) % k]) for i in range(k if cyc else k - 1)]
        for a, b in gaps:
            # traverse from the member with the smaller uid
            if uid[a] < uid[b]:
                seq = self._between(a, b, m, +1)
                fa, fb = (orient[a], +1), (orient[b], -1)
            else:
                seq = self._between(b, a, m, -1)
                fa, fb = (orient[b], -1), (orient[a], +1)
            self._fill_gap(seq, ins, labels, fa, fb)
        if not cyc:
            first, last = rset[0], rset[-1]
            self._fill_end(list(range(first - 1, -1, -1)), ins, labels, (orient[first], -1))
            self._fill_end(list(range(last + 1, m)), ins, labels, (orient[last], +1))
        return labels

    @staticmethod
    def _forward(p: int, uid: list[int], cyc: bool) -> int:
        m = len(uid)
        return 1 if uid[(p + 1) % m] > uid[(p - 1) % m] else -1

    @staticmethod
    def _between(a: int, b: int, m: int, step: int) -> list[int]:
        """Positions strictly between a and b walking in direction ``step``."""
        out = []
        p = (a + step) % m
        while p != b:
            out.append(p)
            p = (p + step) % m
        return out

    def _end_index(self, orient: tuple, toward: int) -> int:
        """Fragment index (in canonical reading) of the end facing ``toward``,
        where toward is the path direction (+1/-1) away from the member."""
        _, dirn = orient
        return 2 * self.beta if dirn == toward else 0

    def _fill_gap(self, seq: list[int], ins: list, labels: list, fa, fb) -> None:
        beta, r = self.beta, self.pi.r
        (oa, ta), (ob, tb) = fa, fb
        new = seq[beta: len(seq) - beta]
        key = ((oa[0], 0, self._end_index(oa, ta)), tuple(ins[p] for p in new), (ob[0], 1, self._end_index(ob, tb)))
        labs = self._gaps.get(key)
        if labs is None:
            labs = self._gaps[key] = self._resume(key[0], key[1], key[2])
        for p, c in zip(seq[r: len(seq) - r], labs):
            labels[p] = c

    def _fill_end(self, seq: list[int], ins: list, labels: list, fa) -> None:
        beta, r = self.beta, self.pi.r
        oa, ta = fa
        new = seq[beta:]
        key = ((oa[0], 0, self._end_index(oa, ta)), tuple(ins[p] for p in new), None)
        labs = self._gaps.get(key)
        if labs is None:
            labs = self._gaps[key] = self._resume(key[0], key[1], None)
        for p, c in zip(seq[r:], labs):
            labels[p] = c

    def _resume(self, left, new_inputs: tuple, right) -> list[Label]:
        """Copy the probe run, glue fragment(s) and new nodes into one path,
        reveal the unlabeled nodes and return their labels in path order."""
        cm = self.cmap
        beta, r = self.beta, self.pi.r
        self.stats["gap_fills"] += 1
        eng: OnlineEngine = copy.deepcopy(cm.probe)
        g = eng.graph
        b = GraphBuilder(g.n)
        for u in range(g.n):
            b.nbrs[u] = set(g.adj[u])
        b.inputs = list(g.inputs) if g.inputs is not None else [None] * g.n

        def frag(desc, facing_last: bool) -> list[int]:
            word, which, end = desc
            ids = cm.fragments[(word, cm.pairs[word][which])]
            ids = list(ids) if end == 2 * beta else ids[::-1]
            return ids if facing_last else ids[::-1]

        path = frag(left, True)
        for x in new_inputs:
            y = b.add_node()
            b.set_input(y, x)
            path.append(y)
        if right is not None:
            path += frag(right, False)
        for i in range(2 * beta, len(path) - 1):
            if path[i + 1] not in b.nbrs[path[i]]:
                b.add_edge(path[i], path[i + 1])
        eng.set_graph(b.freeze())
        stop = len(path) - (beta + r + 1) if right is not None else len(path)
        return [eng.reveal(u) for u in path[beta + r + 1: stop]]

    def _solve_small(self, ins: list, uid: list[int], cyc: bool) -> list[Label]:
        m = len(ins)
        # anchored reading: start at the smallest uid (cycles) or the end with
        # the smaller uid (paths), heading to the smaller-uid neighbor
        if cyc:
            s = min(range(m), key=lambda i: uid[i])
            step = 1 if uid[(s + 1) % m] < uid[(s - 1) % m] else -1
            idx = [(s + step * i) % m for i in range(m)]
        else:
            idx = list(range(m)) if uid[0] <= uid[-1] else list(range(m - 1, -1, -1))
        key = (cyc, tuple(ins[i] for i in idx))
        sol = self._small.get(key)
        if sol is None:
            self.stats["small"] += 1
            word = list(key[1])
            sol = (solve_cycle if cyc else solve_path)(self.pi, word, None, self.win)
            if sol is None:
                raise ContractViolation("component admits no valid labeling")
            self._small[key] = sol
        out: list = [None] * m
        for i, c in zip(idx, sol):
            out[i] = c
        return out


def logstar_local(pi: PathLcl, cmap: CanonicalMap) -> LogstarLocal:
    return LogstarLocal(pi, cmap)


def distance_coloring(uid: Sequence[int], k: int, cyc: bool) -> np.ndarray:
    """Proper coloring of the k-th power of a path/cycle (given in order).

    Each node's neighbors in the power with larger uid, sorted by uid, give
    it one parent in each of 2k forests; color reduction runs on all forests
    at once and the per-forest colors (each below 6) form the color tuple,
    returned as rows of a (m, 2k) array.
    """
    if cyc and len(uid) <= 2 * k + 1:
        raise ValueError("cycle too short for the power coloring")
    return _kernels.power_cv_coloring(np.asarray(uid, dtype=np.int64), k, cyc)


def _greedy_ruling(colors: np.ndarray, k: int, cyc: bool) -> list[int]:
    """Members pairwise more than k apart, scheduled by color tuple."""
    m = colors.shape[0]
    order = np.lexsort(colors.T[::-1])
    blocked = np.zeros(m, dtype=bool)
    out = []
    for p in order.tolist():
        if blocked[p]:
            continue
        out.append(p)
        lo, hi = p - k, p + k + 1
        if cyc:
            blocked[np.arange(lo, hi) % m] = True
        else:
            blocked[max(lo, 0): min(hi, m)] = True
    return out
