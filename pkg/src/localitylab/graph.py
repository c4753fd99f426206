"""Graphs, balls, induced subgraphs, generators and canonical codes."""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence


class ResourceError(RuntimeError):
    """A configured size budget was exceeded."""


class ParseError(ValueError):
    """Malformed text input; ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def numbered_lines(text: str) -> list[tuple[int, str]]:
    """(1-based number, stripped text) of non-blank, non-comment lines."""
    out = []
    for i, ln in enumerate(text.splitlines(), 1):
        ln = ln.strip()
        if ln and not ln.startswith("#"):
            out.append((i, ln))
    return out


def node_budget() -> int:
    return int(os.environ.get("LOCALITY_LAB_BUDGET", "2000000"))


def _check_budget(n: int) -> None:
    if n > node_budget():
        raise ResourceError(f"graph of {n} nodes exceeds node budget {node_budget()}")


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1.

    ``parent[v]`` is -1 for roots when the graph is rooted. ``inputs`` holds
    one input label per node when the graph carries inputs.
    """

    n: int
    adj: tuple[tuple[int, ...], ...]
    parent: tuple[int, ...] | None = None
    inputs: tuple[Hashable, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.adj) != self.n:
            raise ValueError("adjacency length differs from n")
        for v, nb in enumerate(self.adj):
            for u in nb:
                if u == v:
                    raise ValueError(f"self-loop at {v}")
                if not 0 <= u < self.n:
                    raise ValueError(f"neighbor {u} of {v} out of range")
            if any(nb[i] >= nb[i + 1] for i in range(len(nb) - 1)):
                raise ValueError(f"neighbors of {v} not strictly sorted")
        for v, nb in enumerate(self.adj):
            for u in nb:
                if not _contains(self.adj[u], v):
                    raise ValueError(f"asymmetric edge {v}-{u}")
        if self.parent is not None:
            _check_parent(self)
        if self.inputs is not None and len(self.inputs) != self.n:
            raise ValueError("inputs length differs from n")

    def __deepcopy__(self, memo) -> "Graph":
        return self  # immutable

    @property
    def rooted(self) -> bool:
        return self.parent is not None

    def edges(self) -> list[tuple[int, int]]:
        return [(v, u) for v in range(self.n) for u in self.adj[v] if v < u]

    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.adj) // 2

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return _contains(self.adj[u], v)

    def children(self, v: int) -> list[int]:
        if self.parent is None:
            raise ValueError("graph is not rooted")
        return [u for u in self.adj[v] if self.parent[u] == v]

    def roots(self) -> list[int]:
        if self.parent is None:
            raise ValueError("graph is not rooted")
        return [v for v in range(self.n) if self.parent[v] < 0]

    def to_text(self) -> str:
        return to_text(self)


def _contains(seq: Sequence[int], x: int) -> bool:
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if seq[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < len(seq) and seq[lo] == x


def _check_parent(g: Graph) -> None:
    par = g.parent
    assert par is not None
    if len(par) != g.n:
        raise ValueError("parent length differs from n")
    tree_edges = 0
    for v, p in enumerate(par):
        if p >= 0:
            if not g.has_edge(v, p):
                raise ValueError(f"parent {p} of {v} is not a neighbor")
            tree_edges += 1
    if tree_edges != g.num_edges():
        raise ValueError("every edge must be a parent edge in a rooted graph")
    # walking up from every node must reach a root
    state = [0] * g.n
    for v in range(g.n):
        path = []
        u = v
        while u >= 0 and state[u] == 0:
            state[u] = 1
            path.append(u)
            u = par[u]
        if u >= 0 and state[u] == 1:
            raise ValueError("parent relation has a cycle")
        for w in path:
            state[w] = 2


class GraphBuilder:
    """Mutable edge-set builder; ``freeze`` produces an immutable Graph."""

    def __init__(self, n: int = 0) -> None:
        self.nbrs: list[set[int]] = [set() for _ in range(n)]
        self.parent: list[int] | None = None
        self.inputs: list[Hashable] | None = None

    @property
    def n(self) -> int:
        return len(self.nbrs)

    def add_node(self) -> int:
        self.nbrs.append(set())
        if self.parent is not None:
            self.parent.append(-1)
        if self.inputs is not None:
            self.inputs.append(None)
        return len(self.nbrs) - 1

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self-loop")
        if v in self.nbrs[u]:
            raise ValueError(f"duplicate edge {u}-{v}")
        self.nbrs[u].add(v)
        self.nbrs[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        if v not in self.nbrs[u]:
            raise ValueError(f"no edge {u}-{v}")
        self.nbrs[u].discard(v)
        self.nbrs[v].discard(u)

    def set_parent(self, child: int, par: int) -> None:
        if self.parent is None:
            self.parent = [-1] * self.n
        self.add_edge(child, par)
        self.parent[child] = par

    def set_input(self, v: int, label: Hashable) -> None:
        if self.inputs is None:
            self.inputs = [None] * self.n
        self.inputs[v] = label

    def freeze(self) -> Graph:
        _check_budget(self.n)
        return Graph(
            self.n,
            tuple(tuple(sorted(s)) for s in self.nbrs),
            tuple(self.parent) if self.parent is not None else None,
            tuple(self.inputs) if self.inputs is not None else None,
        )


def from_edges(n: int, edges: Iterable[tuple[int, int]], inputs: Sequence | None = None) -> Graph:
    b = GraphBuilder(n)
    for u, v in edges:
        b.add_edge(u, v)
    if inputs is not None:
        for v, x in enumerate(inputs):
            b.set_input(v, x)
    return b.freeze()


def from_parents(parent: Sequence[int]) -> Graph:
    b = GraphBuilder(len(parent))
    b.parent = [-1] * len(parent)
    for v, p in enumerate(parent):
        if p >= 0:
            b.set_parent(v, p)
    return b.freeze()


# --- neighborhoods -------------------------------------------------------


def _check_node(g: Graph, v: int) -> None:
    if not isinstance(v, int) or not 0 <= v < g.n:
        raise ValueError(f"node id {v!r} out of range for graph of {g.n} nodes")


def distances(g: Graph, v: int, limit: int | None = None) -> dict[int, int]:
    """Hop distances from v, truncated at ``limit`` when given."""
    _check_node(g, v)
    dist = {v: 0}
    q = deque([v])
    while q:
        u = q.popleft()
        d = dist[u]
        if limit is not None and d >= limit:
            continue
        for w in g.adj[u]:
            if w not in dist:
                dist[w] = d + 1
                q.append(w)
    return dist


def ball(g: Graph, v: int, T: int) -> tuple[int, ...]:
    """Sorted ids of the nodes within hop distance T of v."""
    if T < 0:
        raise ValueError("radius must be non-negative")
    return tuple(sorted(distances(g, v, T)))


def multi_ball(g: Graph, centers: Iterable[int], T: int) -> set[int]:
    dist: dict[int, int] = {}
    q: deque[int] = deque()
    for c in centers:
        _check_node(g, c)
        if c not in dist:
            dist[c] = 0
            q.append(c)
    while q:
        u = q.popleft()
        if dist[u] >= T:
            continue
        for w in g.adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return set(dist)


def distance(g: Graph, u: int, v: int) -> float:
    return distances(g, u).get(v, float("inf"))


@dataclass(frozen=True)
class Induced:
    graph: Graph
    old_of_new: tuple[int, ...]
    new_of_old: Mapping[int, int] = field(compare=False)


def induced(g: Graph, s: Iterable[int]) -> Induced:
    """Subgraph induced by s with ids renumbered in increasing old-id order.

    A parent edge survives when both endpoints do; nodes whose parent was cut
    become roots.
    """
    nodes = sorted(set(s))
    for v in nodes:
        _check_node(g, v)
    new_of = {v: i for i, v in enumerate(nodes)}
    adj = tuple(tuple(new_of[u] for u in g.adj[v] if u in new_of) for v in nodes)
    parent = None
    if g.parent is not None:
        parent = tuple(new_of.get(g.parent[v], -1) if g.parent[v] >= 0 else -1 for v in nodes)
    inputs = tuple(g.inputs[v] for v in nodes) if g.inputs is not None else None
    return Induced(Graph(len(nodes), adj, parent, inputs), tuple(nodes), new_of)


def components(g: Graph) -> list[list[int]]:
    seen = [False] * g.n
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        q = deque([s])
        while q:
            u = q.popleft()
            for w in g.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    q.append(w)
        out.append(sorted(comp))
    return out


def bipartition(g: Graph) -> tuple[list[int] | None, list[int] | None]:
    """Return (side per node, None) or (None, odd cycle as a node list)."""
    side = [-1] * g.n
    par = [-1] * g.n
    for s in range(g.n):
        if side[s] >= 0:
            continue
        side[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for w in g.adj[u]:
                if side[w] < 0:
                    side[w] = 1 - side[u]
                    par[w] = u
                    q.append(w)
                elif side[w] == side[u]:
                    return None, _odd_cycle(par, u, w)
    return side, None


def _odd_cycle(par: list[int], u: int, w: int) -> list[int]:
    def up(x: int) -> list[int]:
        out = [x]
        while par[x] >= 0:
            x = par[x]
            out.append(x)
        return out

    pu, pw = up(u), up(w)
    in_pw = {x: i for i, x in enumerate(pw)}
    for i, x in enumerate(pu):
        if x in in_pw:
            return pu[: i + 1] + list(reversed(pw[: in_pw[x]]))
    raise AssertionError("endpoints of a conflicting edge share a BFS tree")


# --- generators ----------------------------------------------------------


def gen_path(n: int) -> Graph:
    if n < 1:
        raise ValueError("path needs at least one node")
    return from_edges(n, ((i, i + 1) for i in range(n - 1)))


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least three nodes")
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def gen_grid(a: int, b: int) -> Graph:
    """Non-toroidal a-by-b grid; node (i, j) has id i*b + j."""
    if a < 1 or b < 1:
        raise ValueError("grid sides must be positive")
    edges = []
    for i in range(a):
        for j in range(b):
            v = i * b + j
            if j + 1 < b:
                edges.append((v, v + 1))
            if i + 1 < a:
                edges.append((v, v + b))
    return from_edges(a * b, edges)


def gen_complete_tree(delta: int, depth: int) -> Graph:
    """Complete delta-ary rooted tree; root 0, children in BFS order."""
    if delta < 1 or depth < 0:
        raise ValueError("bad complete tree parameters")
    n = sum(delta**i for i in range(depth + 1))
    _check_budget(n)
    parent = [-1] + [(v - 1) // delta for v in range(1, n)]
    return from_parents(parent)


def complete_tree_depths(delta: int, depth: int) -> list[int]:
    out = [0]
    for d in range(1, depth + 1):
        out.extend([d] * delta**d)
    return out


@dataclass(frozen=True)
class LayeredTreeSpec:
    k: int
    x: int
    delta: int

    def __post_init__(self) -> None:
        if self.k < 0 or self.x < 1 or self.delta < 2:
            raise ValueError("layered tree needs k >= 0, x >= 1, delta >= 2")

    def size(self) -> int:
        s = 1
        for _ in range(self.k):
            s = self.x + self.x * (self.delta - 1) * s
        return s


@dataclass(frozen=True)
class LayeredTree:
    graph: Graph
    spec: LayeredTreeSpec
    layer: tuple[int, ...]
    root: int
    connector: int
    middle: int
    core: tuple[int, ...]  # v_1 (connector) .. v_x (root)


def gen_layered_tree(spec: LayeredTreeSpec) -> LayeredTree:
    """Layered tree: a core path whose nodes each carry delta-1 copies of the
    next lower layered tree as children. Edges point from v_{i+1} down to v_i;
    v_x is the root and v_1 the connector."""
    _check_budget(spec.size())
    parent: list[int] = []
    layer: list[int] = []

    def build(k: int, par: int) -> tuple[int, list[int]]:
        if k == 0:
            parent.append(par)
            layer.append(0)
            return len(parent) - 1, []
        core = []
        above = par
        # create the root first so that parent ids precede child ids
        for _ in range(spec.x):
            parent.append(above)
            layer.append(k)
            above = len(parent) - 1
            core.append(above)
        core.reverse()  # core[0] = v_1
        for v in core:
            for _ in range(spec.delta - 1):
                build(k - 1, v)
        return core[-1], core

    _, core = build(spec.k, -1)
    g = from_parents(parent)
    if spec.k == 0:
        return LayeredTree(g, spec, tuple(layer), 0, 0, 0, (0,))
    mid = core[(spec.x - 1) // 2]
    return LayeredTree(g, spec, tuple(layer), core[-1], core[0], mid, tuple(core))


# --- text format ---------------------------------------------------------


def to_text(g: Graph) -> str:
    head = ["graph", str(g.n)]
    if g.rooted:
        head.append("rooted")
    if g.inputs is not None:
        head.append("inputs")
    lines = [" ".join(head)]
    par = g.parent
    for u, v in g.edges():
        if par is not None:
            if par[u] == v:
                lines.append(f"parent {u} {v}")
            else:
                lines.append(f"parent {v} {u}")
        else:
            lines.append(f"edge {u} {v}")
    if g.inputs is not None:
        for v, x in enumerate(g.inputs):
            lines.append(f"input {v} {x}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Graph:
    lines = numbered_lines(text)
    if not lines or lines[0][1].split()[0] != "graph":
        raise ParseError(lines[0][0] if lines else 0, "missing 'graph <n>' header")
    no, head_text = lines[0]
    head = head_text.split()
    try:
        n = int(head[1])
    except (IndexError, ValueError):
        raise ParseError(no, "header needs a node count") from None
    flags = set(head[2:])
    unknown = flags - {"rooted", "inputs"}
    if unknown:
        raise ParseError(no, f"unknown header flags {sorted(unknown)}")
    b = GraphBuilder(n)
    if "rooted" in flags:
        b.parent = [-1] * n
    if "inputs" in flags:
        b.inputs = [None] * n
    for no, ln in lines[1:]:
        parts = ln.split()
        kind = parts[0]
        try:
            if kind in ("edge", "parent", "input"):
                u = int(parts[1])
                if not 0 <= u < n:
                    raise ValueError(f"node {u} out of range")
            if kind == "edge":
                v = int(parts[2])
                if not 0 <= v < n:
                    raise ValueError(f"node {v} out of range")
                b.add_edge(u, v)
            elif kind == "parent":
                if b.parent is None:
                    raise ValueError("parent line in an unrooted graph")
                v = int(parts[2])
                if not 0 <= v < n:
                    raise ValueError(f"node {v} out of range")
                if b.parent[u] >= 0:
                    raise ValueError(f"node {u} already has a parent")
                b.set_parent(u, v)
            elif kind == "input":
                b.set_input(u, " ".join(parts[2:]))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except IndexError:
            raise ParseError(no, f"too few fields for {kind!r}") from None
        except ValueError as e:
            raise ParseError(no, str(e)) from None
    try:
        return b.freeze()
    except ValueError as e:
        raise ParseError(0, str(e)) from None


# --- canonical codes -----------------------------------------------------

GENERAL_CANON_LIMIT = 64


def canonical_code(
    g: Graph, labels: Sequence[Hashable] | Mapping[int, Hashable] | None = None, limit: int | None = None
) -> bytes:
    """Code equal for two graphs iff they are isomorphic preserving inputs,
    the given output labels and, for rooted graphs, the orientation."""
    lab = _label_list(g, labels)
    if g.rooted:
        return b"T" + _forest_code(g, lab).encode()
    if g.num_edges() == g.n - len(components(g)):
        return b"F" + _unrooted_forest_code(g, lab).encode()
    lim = GENERAL_CANON_LIMIT if limit is None else limit
    if g.n > lim:
        raise ResourceError(f"general canonicalization limited to {lim} nodes")
    return b"G" + _general_code(g, lab).encode()


def _label_list(g: Graph, labels) -> list[Hashable]:
    inputs = g.inputs if g.inputs is not None else (None,) * g.n
    if labels is None:
        out = [None] * g.n
    elif isinstance(labels, Mapping):
        out = [labels.get(v) for v in range(g.n)]
    else:
        out = list(labels)
    return [repr((inputs[v], out[v])) for v in range(g.n)]


def _forest_code(g: Graph, lab: list[str]) -> str:
    kids: list[list[int]] = [[] for _ in range(g.n)]
    roots = []
    assert g.parent is not None
    for v, p in enumerate(g.parent):
        if p >= 0:
            kids[p].append(v)
        else:
            roots.append(v)
    code: list[str] = [""] * g.n
    order = []
    stack = list(roots)
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kids[v])
    for v in reversed(order):
        code[v] = "(" + lab[v] + "".join(sorted(code[c] for c in kids[v])) + ")"
    return "".join(sorted(code[r] for r in roots))


def _centers(g: Graph, comp: list[int]) -> list[int]:
    """One or two centres of a tree, by repeatedly stripping leaves."""
    deg = {v: len(g.adj[v]) for v in comp}
    layer = [v for v in comp if deg[v] <= 1]
    left = len(comp)
    while left > 2:
        left -= len(layer)
        nxt = []
        for v in layer:
            for u in g.adj[v]:
                deg[u] -= 1
                if deg[u] == 1:
                    nxt.append(u)
        layer = nxt
    return sorted(layer)


def _unrooted_forest_code(g: Graph, lab: list[str]) -> str:
    codes = []
    for comp in components(g):
        best = None
        for c in _centers(g, comp):
            par = {c: -1}
            order = [c]
            for v in order:
                for u in g.adj[v]:
                    if u not in par:
                        par[u] = v
                        order.append(u)
            code: dict[int, str] = {}
            for v in reversed(order):
                kids = sorted(code[u] for u in g.adj[v] if par.get(u) == v and u != par[v])
                code[v] = "(" + lab[v] + "".join(kids) + ")"
            if best is None or code[c] < best:
                best = code[c]
        codes.append(best)
    return "".join(sorted(codes))


def _refine(g: Graph, colors: list[int]) -> list[int]:
    """Colour refinement to a stable partition; colours are ranks of
    signatures so the result is isomorphism-invariant."""
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in g.adj[v]))) for v in range(g.n)]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def _general_code(g: Graph, lab: list[str]) -> str:
    if g.n == 0:
        return "0|"
    ranks = {s: i for i, s in enumerate(sorted(set(lab)))}
    palette = "\x1f".join(sorted(set(lab)))
    start = _refine(g, [ranks[s] for s in lab])
    best: list[str | None] = [None]

    def encode(colors: list[int]) -> str:
        order = sorted(range(g.n), key=lambda v: colors[v])
        pos = {v: i for i, v in enumerate(order)}
        rows = []
        for v in order:
            rows.append(",".join(map(str, sorted(pos[u] for u in g.adj[v]))))
        return palette + "|" + ";".join(lab_idx[v] for v in order) + "|" + "/".join(rows)

    lab_idx = [str(ranks[s]) for s in lab]

    def search(colors: list[int]) -> None:
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = None
        for c in sorted(counts):
            if counts[c] > 1:
                target = c
                break
        if target is None:
            code = encode(colors)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        for v in range(g.n):
            if colors[v] == target:
                # individualize v: give it a colour just below its cell
                indiv = [2 * c + (0 if c < target else 2) for c in colors]
                indiv[v] = 2 * target + 1
                search(_refine(g, indiv))

    search(start)
    return f"{g.n}|" + str(best[0])


def isomorphic_bruteforce(g: Graph, h: Graph, lg=None, lh=None) -> bool:
    """Permutation search; the oracle for canonical_code on tiny graphs."""
    from itertools import permutations

    if g.n != h.n or g.num_edges() != h.num_edges() or g.rooted != h.rooted:
        return False
    a, b = _label_list(g, lg), _label_list(h, lh)
    eg = set(g.edges())
    for perm in permutations(range(h.n)):
        if any(a[v] != b[perm[v]] for v in range(g.n)):
            continue
        if all(h.has_edge(perm[u], perm[v]) for u, v in eg):
            if g.rooted:
                assert g.parent is not None and h.parent is not None
                if any(
                    (g.parent[v] < 0) != (h.parent[perm[v]] < 0)
                    or (g.parent[v] >= 0 and perm[g.parent[v]] != h.parent[perm[v]])
                    for v in range(g.n)
                ):
                    continue
            return True
    return False
