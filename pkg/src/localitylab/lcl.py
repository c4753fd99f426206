"""LCL problems on rooted trees and paths, path-form automata, flexibility,
the inflexible decomposition, and certificates for log-star solvability."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations, product
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .graph import (Graph, ParseError, ResourceError, canonical_code, complete_tree_depths, gen_complete_tree, node_budget,
                    numbered_lines)

Label = str


# --- rooted-tree problems ------------------------------------------------


@dataclass(frozen=True)
class RootedLcl:
    """(delta, labels, configurations); children of a configuration are a
    sorted tuple so that they behave as a multiset."""

    delta: int
    labels: tuple[Label, ...]
    configs: frozenset[tuple[Label, tuple[Label, ...]]]
    name: str = ""

    def __post_init__(self) -> None:
        if self.delta < 1:
            raise ValueError("delta must be at least 1")
        known = set(self.labels)
        for a, kids in self.configs:
            if len(kids) != self.delta:
                raise ValueError(f"configuration {a}:{kids} has wrong arity")
            if a not in known or any(b not in known for b in kids):
                raise ValueError(f"configuration {a}:{kids} uses an unknown label")
            if tuple(sorted(kids)) != kids:
                raise ValueError("configuration children must be sorted")

    @staticmethod
    def make(delta: int, labels: Iterable[Label], configs: Iterable[tuple[Label, Iterable[Label]]], name: str = "") -> "RootedLcl":
        return RootedLcl(delta, tuple(labels), frozenset((a, tuple(sorted(k))) for a, k in configs), name)

    @cached_property
    def by_label(self) -> dict[Label, list[Counter]]:
        out: dict[Label, list[Counter]] = {a: [] for a in self.labels}
        for a, kids in sorted(self.configs):
            out[a].append(Counter(kids))
        return out

    def allows(self, a: Label, children: Sequence[Label]) -> bool:
        """True iff ``children`` fit inside some configuration of ``a``;
        with delta children this is plain membership."""
        want = Counter(children)
        for conf in self.by_label.get(a, ()):
            if all(conf[b] >= c for b, c in want.items()):
                return True
        return False

    def is_empty(self) -> bool:
        return not self.labels


def parse_lcl(text: str) -> "RootedLcl | PathLcl":
    lines = numbered_lines(text)
    if not lines or not lines[0][1].startswith("lcl"):
        raise ParseError(lines[0][0] if lines else 0, "missing 'lcl' header")
    no, head_text = lines[0]
    head = head_text.split()
    try:
        params = dict(p.split("=", 1) for p in head[2:])
        kind = head[1]
    except (IndexError, ValueError):
        raise ParseError(no, "header must read 'lcl <rooted|path> key=value ...'") from None
    if kind == "rooted":
        if "delta" not in params:
            raise ParseError(no, "rooted header needs delta=<arity>")
        try:
            delta = int(params["delta"])
        except ValueError:
            raise ParseError(no, "delta must be an integer") from None
        labels: list[str] = []
        confs = []
        for no, ln in lines[1:]:
            kind, _, rest = ln.partition(" ")
            if kind == "labels":
                labels.extend(rest.split())
            elif kind == "conf":
                a, sep, kids = rest.partition(":")
                if not sep or not a.strip():
                    raise ParseError(no, "conf must read 'conf <label> : <children>'")
                if len(kids.split()) != delta:
                    raise ParseError(no, f"configuration needs exactly {delta} children")
                unknown = [x for x in [a.strip(), *kids.split()] if x not in labels]
                if unknown:
                    raise ParseError(no, f"unknown labels {unknown}")
                confs.append((a.strip(), kids.split()))
            else:
                raise ParseError(no, f"unknown directive {kind!r}")
        try:
            return RootedLcl.make(delta, labels, confs, params.get("name", ""))
        except ValueError as e:
            raise ParseError(0, str(e)) from None
    if kind == "path":
        return PathLcl.parse(lines)
    raise ParseError(no, f"unknown lcl kind {kind!r}")


def format_lcl(pi: RootedLcl) -> str:
    head = f"lcl rooted delta={pi.delta}" + (f" name={pi.name}" if pi.name else "")
    out = [head, "labels " + " ".join(pi.labels)]
    for a, kids in sorted(pi.configs):
        out.append(f"conf {a} : {' '.join(kids)}")
    return "\n".join(out) + "\n"


def twohalf_coloring() -> RootedLcl:
    """The 2.5-coloring problem on binary rooted trees."""
    confs = []
    for x in ("B", "X"):
        for y in ("B", "X"):
            confs.append(("A", (x, y)))
    for x in ("A", "X"):
        for y in ("A", "X"):
            confs.append(("B", (x, y)))
    for other in ("A", "B", "1", "2"):
        confs.append(("X", ("1", other)))
    confs.append(("1", ("2", "2")))
    confs.append(("2", ("1", "1")))
    return RootedLcl.make(2, ("A", "B", "X", "1", "2"), confs, "twohalf")


def coloring_problem(colors: int, delta: int = 2) -> RootedLcl:
    """Proper c-coloring of delta-ary rooted trees (a child differs from its parent)."""
    labels = tuple(str(i + 1) for i in range(colors))
    confs = []
    for a in labels:
        others = [b for b in labels if b != a]
        for kids in product(others, repeat=delta):
            confs.append((a, kids))
    return RootedLcl.make(delta, labels, confs, f"{colors}-coloring")


BUILTIN_ROOTED = {
    "twohalf": twohalf_coloring,
    "2col": lambda: coloring_problem(2),
    "3col": lambda: coloring_problem(3),
}


@dataclass(frozen=True)
class Violation:
    node: int
    reason: str


def verify_rooted(
    pi: RootedLcl, g: Graph, labels: Sequence[Label] | Mapping[int, Label], partial: bool = False
) -> list[Violation]:
    """Violations of pi under ``labels``. Leaves are unconstrained below.

    A node with between 1 and delta-1 children is a violation unless
    ``partial`` is set, in which case its children must fit inside some
    configuration (the node could still receive more children).
    """
    if not g.rooted:
        raise ValueError("verify_rooted needs a rooted graph")
    lab = (lambda v: labels.get(v)) if isinstance(labels, Mapping) else (lambda v: labels[v])
    known = set(pi.labels)
    out = []
    for v in range(g.n):
        a = lab(v)
        if a not in known:
            out.append(Violation(v, f"label {a!r} not in problem"))
            continue
        kids = g.children(v)
        if not kids:
            continue
        if len(kids) > pi.delta or (len(kids) < pi.delta and not partial):
            out.append(Violation(v, f"has {len(kids)} children, expected 0 or {pi.delta}"))
            continue
        kl = [lab(c) for c in kids]
        if any(b not in known for b in kl):
            continue  # reported at the child
        if not pi.allows(a, kl):
            out.append(Violation(v, f"configuration {a} : {' '.join(sorted(kl))} not allowed"))
    return out


# --- path problems -------------------------------------------------------


@dataclass(frozen=True)
class PathLcl:
    """LCL on paths and cycles given by an explicit window table.

    A window is a tuple of (input, output) pairs centred on the checked
    node, with up to r entries on each side (fewer at path ends). A node is
    happy if its window, read in either direction, is in the table.
    """

    r: int
    sigma: tuple[Hashable, ...]
    gamma: tuple[Label, ...]
    windows: frozenset[tuple[tuple[tuple[Hashable, Label], ...], int]]
    name: str = ""
    directed: bool = False

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError("verification radius must be at least 1")

    @staticmethod
    def from_predicate(r: int, gamma: Sequence[Label], ok: Callable[[tuple[Label, ...], int], bool], name: str = "",
                       sigma: Sequence[Hashable] = (None,)) -> "PathLcl":
        """Enumerate all windows (single input symbol) accepted by ``ok``."""
        wins = set()
        for left in range(r + 1):
            for right in range(r + 1):
                for outs in product(gamma, repeat=left + 1 + right):
                    if ok(outs, left):
                        for ins in product(sigma, repeat=len(outs)):
                            wins.add((tuple(zip(ins, outs)), left))
        return PathLcl(r, tuple(sigma), tuple(gamma), frozenset(wins), name)

    @staticmethod
    def parse(lines: Sequence[str] | Sequence[tuple[int, str]]) -> "PathLcl":
        """Parse header and directive lines, optionally numbered."""
        num = [ln if isinstance(ln, tuple) else (i + 1, ln) for i, ln in enumerate(lines)]
        no, head_text = num[0]
        head = head_text.split()
        try:
            params = dict(p.split("=", 1) for p in head[2:])
            r = int(params["r"])
        except (KeyError, ValueError):
            raise ParseError(no, "path header needs r=<radius>") from None
        gamma: list[str] = []
        sigma: list[str] = []
        wins = set()
        for no, ln in num[1:]:
            kind, _, rest = ln.partition(" ")
            if kind == "labels":
                gamma.extend(rest.split())
            elif kind == "inputs":
                sigma.extend(rest.split())
            elif kind == "window":
                toks = rest.split()
                cells = []
                center = -1
                for i, tok in enumerate(toks):
                    if tok.startswith("[") and tok.endswith("]"):
                        if center >= 0:
                            raise ParseError(no, "window has two [centre] cells")
                        center = i
                        tok = tok[1:-1]
                    inp, _, out = tok.rpartition("/")
                    if out not in gamma:
                        raise ParseError(no, f"unknown output label {out!r}")
                    cells.append((inp or None, out))
                if center < 0:
                    raise ParseError(no, "window needs a [centre] cell")
                if center > r or len(cells) - 1 - center > r:
                    raise ParseError(no, f"window reaches beyond radius {r}")
                wins.add((tuple(cells), center))
            else:
                raise ParseError(no, f"unknown directive {kind!r}")
        try:
            return PathLcl(r, tuple(sigma) or (None,), tuple(gamma), frozenset(wins), params.get("name", ""))
        except ValueError as e:
            raise ParseError(0, str(e)) from None

    def accepts(self, cells: Sequence[tuple[Hashable, Label]], center: int) -> bool:
        w = (tuple(cells), center)
        if w in self.windows:
            return True
        if self.directed:
            return False
        return (tuple(reversed(cells)), len(cells) - 1 - center) in self.windows


def path_coloring(colors: int) -> PathLcl:
    gamma = tuple(str(i + 1) for i in range(colors))

    def ok(outs, c):
        return all(outs[i] != outs[i + 1] for i in range(len(outs) - 1))

    return PathLcl.from_predicate(1, gamma, ok, f"{colors}-coloring-path")


def trivial_path_problem() -> PathLcl:
    """One output label, every window accepted."""
    return PathLcl.from_predicate(1, ("0",), lambda outs, c: True, "trivial")


def dominated_coloring() -> PathLcl:
    """Proper 3-coloring; a node with input b needs label 1 on itself or a
    neighbor. Inputs a/b, radius 1."""
    gamma = ("1", "2", "3")
    wins = set()
    for left in (0, 1):
        for right in (0, 1):
            size = left + 1 + right
            for outs in product(gamma, repeat=size):
                if any(outs[i] == outs[i + 1] for i in range(size - 1)):
                    continue
                for ins in product("ab", repeat=size):
                    if ins[left] == "b" and "1" not in outs:
                        continue
                    wins.add((tuple(zip(ins, outs)), left))
    return PathLcl(1, ("a", "b"), gamma, frozenset(wins), "dominated-3-coloring")


def format_path_lcl(pi: PathLcl) -> str:
    head = f"lcl path r={pi.r}" + (f" name={pi.name}" if pi.name else "")
    lines = [head, "labels " + " ".join(map(str, pi.gamma))]
    if pi.sigma != (None,):
        lines.append("inputs " + " ".join(map(str, pi.sigma)))
    for cells, center in sorted(pi.windows, key=repr):
        toks = []
        for i, (inp, out) in enumerate(cells):
            tok = f"{out}" if inp is None else f"{inp}/{out}"
            toks.append(f"[{tok}]" if i == center else tok)
        lines.append("window " + " ".join(toks))
    return "\n".join(lines) + "\n"


BUILTIN_PATH = {
    "3col": lambda: path_coloring(3),
    "2col": lambda: path_coloring(2),
    "trivial": trivial_path_problem,
    "dominated": dominated_coloring,
}


def _path_order(g: Graph) -> tuple[list[int], bool]:
    """Node order along a path or cycle graph; the flag marks a cycle."""
    if g.n == 0:
        return [], False
    degs = [g.degree(v) for v in range(g.n)]
    if max(degs) > 2:
        raise ValueError("graph is not a path or cycle")
    ends = [v for v in range(g.n) if degs[v] <= 1]
    cyc = not ends
    start = 0 if cyc else ends[0]
    order = [start]
    prev = -1
    cur = start
    while True:
        nxt = [u for u in g.adj[cur] if u != prev]
        if not nxt or (cyc and nxt[0] == start):
            break
        prev, cur = cur, nxt[0]
        order.append(cur)
    if len(order) != g.n:
        raise ValueError("graph is not a single path or cycle")
    return order, cyc


def verify_path(pi: PathLcl, g: Graph, labels: Sequence[Label] | Mapping[int, Label]) -> list[Violation]:
    lab = (lambda v: labels.get(v)) if isinstance(labels, Mapping) else (lambda v: labels[v])
    inp = (lambda v: g.inputs[v]) if g.inputs is not None else (lambda v: None)
    order, cyc = _path_order(g)
    m = len(order)
    out = []
    for i, v in enumerate(order):
        if lab(v) not in pi.gamma:
            out.append(Violation(v, f"label {lab(v)!r} not in problem"))
            continue
        if cyc and m >= 2 * pi.r + 1:
            idx = [(i + j) % m for j in range(-pi.r, pi.r + 1)]
            center = pi.r
        elif cyc:
            # short cycle: the window wraps onto itself; check pairwise properness instead
            idx = [(i - 1) % m, i, (i + 1) % m]
            center = 1
        else:
            lo, hi = max(0, i - pi.r), min(m - 1, i + pi.r)
            idx = list(range(lo, hi + 1))
            center = i - lo
        cells = [(inp(order[j]), lab(order[j])) for j in idx]
        if not pi.accepts(cells, center):
            out.append(Violation(v, "window not accepted"))
    return out


# --- path form and automaton ---------------------------------------------


def path_form(pi: RootedLcl) -> PathLcl:
    """Directed radius-1 problem: (a : b) allowed iff b is a child in some
    configuration of a. Windows are (parent, child) pairs centred on the parent."""
    wins = set()
    for a, kids in pi.configs:
        for b in kids:
            wins.add((((None, a), (None, b)), 0))
    return PathLcl(1, (None,), pi.labels, frozenset(wins), f"pathform({pi.name})", directed=True)


class PathAutomaton:
    """Unary nondeterministic semiautomaton with exact walk-length analysis.

    The boolean matrices M^0, M^1, ... are eventually periodic. ``start`` and
    ``period`` record the first repetition, so M^d for any d is read off a
    finite table.
    """

    def __init__(self, states: Sequence[Label], transitions: Iterable[tuple[Label, Label]]):
        self.states = tuple(states)
        self.index = {s: i for i, s in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise ValueError("duplicate states")
        s = len(self.states)
        self.trans = np.zeros((s, s), dtype=np.uint8)
        for a, b in transitions:
            self.trans[self.index[a], self.index[b]] = 1
        self._analyse()

    @staticmethod
    def of(pi: RootedLcl | PathLcl) -> "PathAutomaton":
        if isinstance(pi, RootedLcl):
            pf = path_form(pi)
        else:
            pf = pi
        if any(len(cells) != 2 for cells, _ in pf.windows):
            raise ValueError("automata are defined for two-cell (path-form) windows only")
        edges = [(cells[0][1], cells[1][1]) for cells, _ in pf.windows]
        return PathAutomaton(pf.gamma, edges)

    @property
    def transitions(self) -> set[tuple[Label, Label]]:
        return {(self.states[a], self.states[b]) for a, b in zip(*np.nonzero(self.trans))}

    def _analyse(self) -> None:
        s = len(self.states)
        seen: dict[bytes, int] = {}
        table = []
        cur = np.eye(s, dtype=np.uint8)
        t = self.trans.astype(np.int64)
        d = 0
        while True:
            key = cur.tobytes()
            if key in seen:
                self.start = seen[key]
                self.period = d - seen[key]
                break
            seen[key] = d
            table.append(cur)
            cur = ((cur.astype(np.int64) @ t) > 0).astype(np.uint8)
            d += 1
        self.table = np.array(table, dtype=np.uint8).reshape(len(table), s, s)
        self._scc()

    def _scc(self) -> None:
        s = len(self.states)
        succ = [list(np.nonzero(self.trans[a])[0]) for a in range(s)]
        index = [-1] * s
        low = [0] * s
        on = [False] * s
        stack: list[int] = []
        comp = [-1] * s
        counter = [0, 0]

        def strong(v: int) -> None:
            index[v] = low[v] = counter[0]
            counter[0] += 1
            stack.append(v)
            on[v] = True
            for w in succ[v]:
                if index[w] < 0:
                    strong(w)
                    low[v] = min(low[v], low[w])
                elif on[w]:
                    low[v] = min(low[v], index[w])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = counter[1]
                    if w == v:
                        break
                counter[1] += 1

        for v in range(s):
            if index[v] < 0:
                strong(v)
        self.component = comp
        # period of each component: gcd of level differences over internal edges
        self.comp_period: dict[int, int] = {}
        for c in set(comp):
            members = [v for v in range(s) if comp[v] == c]
            root = members[0]
            level = {root: 0}
            order = [root]
            for u in order:
                for w in succ[u]:
                    if comp[w] == c and w not in level:
                        level[w] = level[u] + 1
                        order.append(w)
            g = 0
            for u in members:
                for w in succ[u]:
                    if comp[w] == c:
                        g = math.gcd(g, level[u] + 1 - level[w])
            self.comp_period[c] = g  # 0 means no cycle in the component

    def _idx(self, a: Label) -> int:
        try:
            return self.index[a]
        except KeyError:
            raise ValueError(f"unknown label {a!r}") from None

    def reach(self, d: int) -> np.ndarray:
        if d < 0:
            raise ValueError("walk length must be non-negative")
        if d < len(self.table):
            return self.table[d]
        return self.table[self.start + (d - self.start) % self.period]

    def walk_exists(self, a: Label, b: Label, d: int) -> bool:
        return bool(self.reach(d)[self._idx(a), self._idx(b)])

    def walk_lengths(self, a: Label, b: Label) -> tuple[frozenset[int], int, int, frozenset[int]]:
        """(explicit lengths below threshold, threshold, period, residues):
        a walk of length d >= threshold exists iff d % period in residues."""
        i, j = self._idx(a), self._idx(b)
        col = self.table[:, i, j]
        small = frozenset(int(d) for d in range(self.start) if col[d])
        res = frozenset(int(d % self.period) for d in range(self.start, len(self.table)) if col[d])
        return small, self.start, self.period, res

    def stabilization_bound(self) -> int:
        s = len(self.states)
        return s * s + (2 * s) * (2 * s - 1)

    def on_cycle(self, a: Label) -> bool:
        return self.comp_period[self.component[self._idx(a)]] > 0

    def is_flexible(self, a: Label) -> bool:
        return self.comp_period[self.component[self._idx(a)]] == 1

    def flexible_pair(self, a: Label, b: Label) -> bool:
        i, j = self._idx(a), self._idx(b)
        return self.component[i] == self.component[j] and self.is_flexible(a) and self.is_flexible(b)

    def flexibility_constant(self, a: Label) -> int | None:
        """Least K with self-walks of every length >= K, or None."""
        if not self.is_flexible(a):
            return None
        i = self._idx(a)
        col = self.table[:, i, i]
        k = len(self.table)
        while k > 0 and col[k - 1]:
            k -= 1
        return k


def walk_table_oracle(m: PathAutomaton, max_len: int) -> np.ndarray:
    """(state x length) breadth-first table, independent of the periodicity analysis."""
    return _kernels.walk_table(m.trans, max_len)


def restrict(pi: RootedLcl, keep: Iterable[Label]) -> RootedLcl:
    keep_set = set(keep)
    unknown = keep_set - set(pi.labels)
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} not in problem")
    labels = tuple(a for a in pi.labels if a in keep_set)
    confs = frozenset(c for c in pi.configs if c[0] in keep_set and all(b in keep_set for b in c[1]))
    return RootedLcl(pi.delta, labels, confs, pi.name)


@dataclass
class Decomposition:
    problems: list[RootedLcl]
    layers: list[frozenset[Label]]  # layers[i] holds the labels removed at step i+1
    terminal: str  # "empty" or "all-flexible"

    @property
    def k(self) -> int:
        return len(self.layers)

    def layer_of(self, a: Label) -> int:
        """1-based index of the label set containing a; 0 if a survives."""
        for i, layer in enumerate(self.layers):
            if a in layer:
                return i + 1
        return 0


def inflexible_decomposition(pi: RootedLcl) -> Decomposition:
    problems = [pi]
    layers: list[frozenset[Label]] = []
    cur = pi
    while not cur.is_empty():
        m = PathAutomaton.of(cur)
        bad = frozenset(a for a in cur.labels if not m.is_flexible(a))
        if not bad:
            return Decomposition(problems, layers, "all-flexible")
        layers.append(bad)
        cur = restrict(pi, [a for a in cur.labels if a not in bad])
        problems.append(cur)
    return Decomposition(problems, layers, "empty")


# --- completions on rooted forests ---------------------------------------


def _fits(pi: RootedLcl, a: Label, kid_options: Sequence[frozenset[Label]], exact: bool) -> bool:
    """Can each child pick a label from its option set so that the chosen
    multiset fits a configuration of a (equals it when ``exact``)?"""
    if exact and len(kid_options) != pi.delta:
        return False
    if len(kid_options) > pi.delta:
        return False
    for conf in pi.by_label.get(a, ()):
        slots = sorted(conf.elements())
        # match children to distinct slots; delta is small so try permutations
        for perm in permutations(range(len(slots)), len(kid_options)):
            if all(slots[p] in opts for p, opts in zip(perm, kid_options)):
                return True
    return False


def feasible_labels(
    pi: RootedLcl,
    g: Graph,
    fixed: Mapping[int, Label] | None = None,
    open_nodes: Iterable[int] = (),
    partial: bool = False,
) -> list[frozenset[Label]]:
    """Bottom-up sets of labels each node can take in some valid completion
    of its subtree. ``open_nodes`` may still gain children: they need a
    configuration containing their current children (or any configuration
    when childless). With ``partial`` nodes with fewer than delta children
    are treated the same way."""
    fixed = fixed or {}
    opened = set(open_nodes)
    assert g.parent is not None
    kids: list[list[int]] = [[] for _ in range(g.n)]
    roots = []
    for v, p in enumerate(g.parent):
        (kids[p] if p >= 0 else roots).append(v)
    order = []
    stack = list(roots)
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kids[v])
    feas: list[frozenset[Label]] = [frozenset()] * g.n
    for v in reversed(order):
        cands = [fixed[v]] if v in fixed else list(pi.labels)
        ks = kids[v]
        ok = []
        for a in cands:
            if a not in pi.by_label:
                continue
            if not ks and v not in opened:
                ok.append(a)
                continue
            if not ks:
                if pi.by_label[a]:
                    ok.append(a)
                continue
            lenient = v in opened or (partial and len(ks) < pi.delta)
            if _fits(pi, a, [feas[c] for c in ks], exact=not lenient):
                ok.append(a)
        feas[v] = frozenset(ok)
    return feas


def completion_exists(pi: RootedLcl, g: Graph, fixed: Mapping[int, Label] | None = None,
                      open_nodes: Iterable[int] = (), partial: bool = False) -> bool:
    feas = feasible_labels(pi, g, fixed, open_nodes, partial)
    return all(feas[r] for r in g.roots())


def complete_labeling(pi: RootedLcl, g: Graph, fixed: Mapping[int, Label] | None = None,
                      open_nodes: Iterable[int] = (), partial: bool = False) -> dict[int, Label] | None:
    """A completion of ``fixed``, choosing labels top-down; None if none exists."""
    fixed = dict(fixed or {})
    opened = set(open_nodes)
    feas = feasible_labels(pi, g, fixed, opened, partial)
    assert g.parent is not None
    out: dict[int, Label] = {}
    kids: list[list[int]] = [[] for _ in range(g.n)]
    for v, p in enumerate(g.parent):
        if p >= 0:
            kids[p].append(v)
    stack = []
    for r in g.roots():
        if not feas[r]:
            return None
        out[r] = min(feas[r], key=pi.labels.index)
        stack.append(r)
    while stack:
        v = stack.pop()
        ks = kids[v]
        if not ks:
            continue
        assign = _assign_children(pi, out[v], [feas[c] for c in ks])
        assert assign is not None
        for c, b in zip(ks, assign):
            out[c] = b
            stack.append(c)
    return out


def _assign_children(pi: RootedLcl, a: Label, kid_options: Sequence[frozenset[Label]]) -> list[Label] | None:
    for conf in pi.by_label.get(a, ()):
        slots = sorted(conf.elements())
        for perm in permutations(range(len(slots)), len(kid_options)):
            if all(slots[p] in opts for p, opts in zip(perm, kid_options)):
                return [slots[p] for p in perm]
    return None


def completion_exists_bruteforce(pi: RootedLcl, g: Graph, fixed: Mapping[int, Label] | None = None,
                                 open_nodes: Iterable[int] = (), partial: bool = False) -> bool:
    """Independent oracle: enumerate every child-label tuple at every node
    (no matching shortcut), bottom-up."""
    fixed = fixed or {}
    opened = set(open_nodes)
    assert g.parent is not None
    kids: list[list[int]] = [[] for _ in range(g.n)]
    for v, p in enumerate(g.parent):
        if p >= 0:
            kids[p].append(v)
    memo: dict[int, set[Label]] = {}
    order = sorted(range(g.n), key=lambda v: -_depth(g, v))
    for v in order:
        cands = [fixed[v]] if v in fixed else list(pi.labels)
        ks = kids[v]
        good = set()
        for a in cands:
            if a not in pi.labels:
                continue
            if not ks:
                if v not in opened or pi.by_label.get(a):
                    good.add(a)
                continue
            lenient = v in opened or (partial and len(ks) < pi.delta)
            for choice in product(*[sorted(memo[c]) for c in ks]):
                if lenient:
                    if pi.allows(a, choice):
                        good.add(a)
                        break
                elif len(choice) == pi.delta and (a, tuple(sorted(choice))) in pi.configs:
                    good.add(a)
                    break
        memo[v] = good
    return all(memo[r] for r in g.roots())


def _depth(g: Graph, v: int) -> int:
    assert g.parent is not None
    d = 0
    while g.parent[v] >= 0:
        v = g.parent[v]
        d += 1
    return d


# --- certificates --------------------------------------------------------


@dataclass
class Certificate:
    """Two sequences of labelled complete delta-ary trees (labels in BFS order)."""

    delta: int
    gamma_t: tuple[Label, ...]
    depths: tuple[int, int]
    trees: tuple[list[list[Label]], list[list[Label]]]

    def to_text(self) -> str:
        out = [f"certificate delta={self.delta} depths={self.depths[0]},{self.depths[1]}",
               "gamma " + " ".join(self.gamma_t)]
        for s in range(2):
            for i, t in enumerate(self.trees[s]):
                out.append(f"tree {s + 1} {i} " + json.dumps(_nest(t, self.delta)))
        return "\n".join(out) + "\n"

    @staticmethod
    def from_text(text: str) -> "Certificate":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = dict(p.split("=") for p in lines[0].split()[1:])
        delta = int(head["delta"])
        d1, d2 = (int(x) for x in head["depths"].split(","))
        gamma = tuple(lines[1].split()[1:])
        seqs: tuple[list, list] = ([], [])
        for ln in lines[2:]:
            _, s, _i, body = ln.split(" ", 3)
            seqs[int(s) - 1].append(_flatten(json.loads(body)))
        return Certificate(delta, gamma, (d1, d2), seqs)


def _nest(bfs: list[Label], delta: int, v: int = 0):
    kids = [delta * v + 1 + i for i in range(delta)]
    if kids[0] >= len(bfs):
        return [bfs[v]]
    return [bfs[v]] + [_nest(bfs, delta, c) for c in kids]


def _flatten(nested) -> list[Label]:
    out: list[Label] = []
    level = [nested]
    while level:
        nxt = []
        for node in level:
            out.append(node[0])
            nxt.extend(node[1:])
        level = nxt
    return out


def _tree_size(delta: int, depth: int) -> int:
    return sum(delta**i for i in range(depth + 1))


def check_certificate(pi: RootedLcl, cert: Certificate) -> tuple[bool, str]:
    d1, d2 = cert.depths
    if math.gcd(d1, d2) != 1:
        return False, f"condition 1: depths {d1} and {d2} are not coprime"
    t = len(cert.gamma_t)
    if cert.delta != pi.delta:
        return False, "condition 2: arity differs from the problem"
    for s, depth in ((0, d1), (1, d2)):
        trees = cert.trees[s]
        if len(trees) != t:
            return False, f"condition 2: sequence {s + 1} has {len(trees)} trees, expected {t}"
        for i, tree in enumerate(trees):
            if len(tree) != _tree_size(pi.delta, depth):
                return False, f"condition 2: tree {s + 1}.{i} is not a complete tree of depth {depth}"
    for s, depth in ((0, d1), (1, d2)):
        shape = gen_complete_tree(pi.delta, depth)
        depths = complete_tree_depths(pi.delta, depth)
        codes = set()
        for i, tree in enumerate(cert.trees[s]):
            bad = verify_rooted(pi, shape, tree)
            if bad:
                return False, f"condition 3: tree {s + 1}.{i} invalid at node {bad[0].node}: {bad[0].reason}"
            leaves = [tree[v] if depths[v] == depth else None for v in range(shape.n)]
            if any(lab not in cert.gamma_t for lab in leaves if lab is not None):
                return False, f"condition 4: tree {s + 1}.{i} has a leaf label outside the certificate label set"
            codes.add(canonical_code(shape, leaves))
        if len(codes) > 1:
            return False, f"condition 4: leaf labelings of sequence {s + 1} are not isomorphic"
        for i, tree in enumerate(cert.trees[s]):
            if tree[0] != cert.gamma_t[i]:
                return False, f"condition 5: root of tree {s + 1}.{i} is {tree[0]}, expected {cert.gamma_t[i]}"
    return True, "ok"


@dataclass
class ExtractionReport:
    ok: bool
    certificate: Certificate | None
    reason: str
    details: dict = field(default_factory=dict)


def extract_certificate(pi: RootedLcl, alg, T: int, budget: int | None = None) -> ExtractionReport:
    """Run the certificate-extraction adversary against an online algorithm."""
    from .adversaries import certificate_extraction

    return certificate_extraction(pi, alg, T, budget if budget is not None else node_budget())


@dataclass
class Classification:
    decomposition: Decomposition
    tier: str
    evidence: str
    certificate: Certificate | None = None


def classify_rooted(pi: RootedLcl, search_certificate: bool = True, T: int = 1) -> Classification:
    dec = inflexible_decomposition(pi)
    if dec.terminal == "empty":
        k = dec.k
        return Classification(dec, "n^Omega(1)", f"terminal problem empty after k={k} steps; locality Omega(n^(1/{k}))")
    cert = None
    tier = "O(log n)"
    evidence = "terminal restriction all-flexible (upper bound evidence only)"
    if search_certificate:
        from .adversaries import greedy_completion

        try:
            rep = extract_certificate(pi, greedy_completion(pi), T)
        except ResourceError:
            rep = None
        if rep is not None and rep.ok:
            cert = rep.certificate
            tier = "O(log* n)"
            evidence = "certificate extracted and checked"
    return Classification(dec, tier, evidence, cert)
