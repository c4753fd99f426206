"""Online-LOCAL 3-coloring of bipartite graphs at locality 3*ceil(log2 n).

Revealed regions are grouped into connected components ("groups"), each
2-colored with colors 0/1. When two groups with clashing 2-colorings meet,
the one with the smaller border count is wrapped in a 1/2/0 barrier that
flips its parity. Commitments to not-yet-revealed nodes live in the
engine's global memory.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import Graph, bipartition
from .models import OnlineEngine, OnlineView


class CommitmentEscape(RuntimeError):
    """A barrier step would have to commit a node outside the visible region."""


class NonBipartiteInput(ValueError):
    def __init__(self, cycle: list[int]):
        super().__init__(f"input is not bipartite; odd cycle {cycle}")
        self.cycle = cycle


class ParityContradiction(RuntimeError):
    """A group's 2-coloring disagrees with itself; impossible on bipartite input."""


def locality(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return 3 * math.ceil(math.log2(n))


@dataclass
class GroupInfo:
    border: int
    size: int
    parity: int
    anchor: int
    colored: list[int] = field(default_factory=list)


class ColoringSession:
    """Algorithm state. Node handles are the engine's first-seen indices."""

    def __init__(self, n: int, T: int | None = None, check: bool = True):
        self.n = n
        self.T = locality(n) if T is None else T
        self.check = check
        self.color = np.full(n, -1, dtype=np.int8)
        self.revealed = np.zeros(n, dtype=bool)
        self.rdist = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        self.node_group = np.full(n, -1, dtype=np.int64)
        self.gparent: list[int] = []
        self.groups: dict[int, GroupInfo] = {}
        # union-find with parity for the bipartition of the visible graph
        self.sparent = np.arange(n, dtype=np.int64)
        self.sparity = np.zeros(n, dtype=np.int8)
        self.seen_count = 0
        self.max_border = 0
        self.max_commit_radius = 0
        self.commitments = 0
        self.border_violations: list[str] = []
        self.cases = [0, 0, 0]

    # -- union-find helpers --
    def _sfind(self, x: int) -> tuple[int, int]:
        par = 0
        path = []
        while self.sparent[x] != x:
            path.append(x)
            par ^= int(self.sparity[x])
            x = int(self.sparent[x])
        root = x
        # compress: recompute parity to root for each node on the path
        acc = par
        for y in path:
            p = int(self.sparity[y])
            self.sparent[y] = root
            self.sparity[y] = acc
            acc ^= p
        return root, par

    def _sunion(self, u: int, w: int, view: OnlineView) -> None:
        ru, pu = self._sfind(u)
        rw, pw = self._sfind(w)
        if ru == rw:
            if pu == pw:
                g = view.graph()
                _, cyc = bipartition(g)
                raise NonBipartiteInput(cyc or [u, w])
            return
        self.sparent[rw] = ru
        self.sparity[rw] = pu ^ pw ^ 1

    def rel(self, x: int, y: int) -> int:
        rx, px = self._sfind(x)
        ry, py = self._sfind(y)
        if rx != ry:
            raise ParityContradiction(f"nodes {x} and {y} are not in one visible component")
        return px ^ py

    def group_of(self, u: int) -> int:
        g = int(self.node_group[u])
        return -1 if g < 0 else self._groot(g)

    def _groot(self, g: int) -> int:
        root = g
        while self.gparent[root] != root:
            root = self.gparent[root]
        while self.gparent[g] != root:
            self.gparent[g], g = root, self.gparent[g]
        return root

    def parity_color(self, gid: int, x: int) -> int:
        info = self.groups[gid]
        return (info.parity + self.rel(x, info.anchor)) % 2

    # -- the algorithm --
    def __call__(self, view: OnlineView) -> int:
        return self.reveal(view)

    def reveal(self, view: OnlineView) -> int:
        T = self.T
        v = view.v
        new = view.new_nodes
        newset = set(new)
        for u in new:
            for w in view.neighbors(u):
                if w < u or w not in newset:
                    self._sunion(u, w, view)
        self.seen_count += len(new)
        locs, dists = view.ball_distances(T + 1)
        inner = dists <= T
        np.minimum.at(self.rdist, locs[inner], dists[inner])
        # new nodes carry the largest first-seen ids
        old = locs[locs < new[0]] if new else locs
        reps = np.unique(self.node_group[old])
        touched = sorted({self._groot(int(r)) for r in reps if r >= 0})
        if not touched:
            self.cases[0] += 1
            gid = len(self.gparent)
            self.gparent.append(gid)
            self.groups[gid] = GroupInfo(border=0, size=0, parity=0, anchor=v)
            col = 0
        else:
            self.cases[1 if len(touched) == 1 else 2] += 1
            gid = touched[0]
            for other in touched[1:]:
                gid = self.join_groups(gid, other, view)
            col = int(self.color[v]) if self.color[v] >= 0 else self.parity_color(gid, v)
        info = self.groups[gid]
        for u in new:
            self.node_group[u] = gid
        info.size += len(new)
        if self.color[v] < 0:
            self.color[v] = col
            info.colored.append(v)
        self.revealed[v] = True
        if self.check:
            self._check_invariants(gid)
        return col

    def join_groups(self, a: int, b: int, view: OnlineView) -> int:
        A, B = self.groups[a], self.groups[b]
        compatible = (A.parity ^ B.parity) == self.rel(A.anchor, B.anchor)
        if not compatible:
            s = a if A.border <= B.border else b
            S = self.groups[s]
            limit = 3 * (S.border + 1)
            for src, dst in ((0, 1), (1, 2), (2, 0)):
                for x in list(S.colored):
                    if self.color[x] != src:
                        continue
                    nbrs = [w for w in view.neighbors(x) if self.color[w] < 0]
                    if self.rdist[x] > self.T - 1:
                        # x may have neighbors outside the visible region
                        raise CommitmentEscape(
                            f"node {x} at distance {self.rdist[x]} from revealed nodes is not interior (T={self.T})"
                        )
                    for w in nbrs:
                        self.color[w] = dst
                        S.colored.append(w)
                        self.commitments += 1
                        r = int(self.rdist[w])
                        self.max_commit_radius = max(self.max_commit_radius, r)
                        if r > limit:
                            self.border_violations.append(f"commitment at distance {r} > {limit}")
            S.border += 1
            S.parity ^= 1
            if (A.parity ^ B.parity) != self.rel(A.anchor, B.anchor):
                raise ParityContradiction("barrier did not flip the group parity")
        keep, drop = (a, b)
        K, D = self.groups[keep], self.groups.pop(drop)
        self.gparent[drop] = keep
        K.border = max(K.border, D.border)
        K.size += D.size
        K.colored.extend(D.colored)
        self.max_border = max(self.max_border, K.border)
        return keep

    def _check_invariants(self, gid: int) -> None:
        # only the group touched by this reveal can have changed
        info = self.groups[gid]
        if info.size < 2**info.border:
            self.border_violations.append(f"group {gid} has {info.size} nodes but border {info.border}")

    def frontier_consistent(self, view: OnlineView) -> bool:
        """Every colored node with an uncolored neighbor follows its group parity."""
        for gid, info in self.groups.items():
            for x in info.colored:
                if self.color[x] == 2:
                    continue
                if any(self.color[w] < 0 for w in view.neighbors(x)):
                    if self.color[x] != self.parity_color(gid, x):
                        return False
        return True


def new_session(n: int) -> ColoringSession:
    return ColoringSession(n)


@dataclass
class ColoringResult:
    labels: dict[int, int]
    committed: dict[int, int]
    max_border: int
    max_commit_radius: int
    T: int
    border_violations: list[str]
    session: ColoringSession
    engine: OnlineEngine


def color_online(g: Graph, order, T: int | None = None, check: bool = True, reject_nonbipartite: bool = True,
                 dist: np.ndarray | None = None) -> ColoringResult:
    """Run the coloring session under the online engine on g with the given
    reveal order."""
    if reject_nonbipartite:
        side, cyc = bipartition(g)
        if side is None:
            raise NonBipartiteInput(cyc)
    sess = ColoringSession(max(g.n, 1), T, check)
    eng = OnlineEngine(sess, max(g.n, 1), sess.T, g, dist=dist)
    for v in order:
        eng.reveal(int(v))
    committed = {eng.global_of[x]: int(sess.color[x]) for x in range(len(eng.global_of)) if sess.color[x] >= 0}
    return ColoringResult(dict(eng.labels), committed, sess.max_border, sess.max_commit_radius, sess.T,
                          sess.border_violations, sess, eng)


@dataclass
class SweepResult:
    labels: np.ndarray
    committed: np.ndarray
    max_border: int
    max_commit_radius: int
    commitments: int
    violations: int
    escaped: bool
    T: int


class SweepRunner:
    """Fast replay of ``color_online`` for many orders on one bipartite graph.

    Precomputes the distance matrix and bipartition once; each ``run`` goes
    through the compiled kernel and produces the same labels, commitments
    and border counts as the engine-driven session.
    """

    def __init__(self, g: Graph, T: int | None = None):
        side, cyc = bipartition(g)
        if side is None:
            raise NonBipartiteInput(cyc)
        self.g = g
        self.T = locality(max(g.n, 1)) if T is None else T
        self.indptr, self.indices = _kernels.csr(g.adj)
        self.dist = _kernels.all_pairs_distances(g.adj)
        self.side = np.asarray(side, dtype=np.int64)

    def run(self, order) -> SweepResult:
        labels, committed, st = _kernels.color_sweep(self.indptr, self.indices, self.dist, self.side,
                                                     np.asarray(list(order), dtype=np.int64), self.T)
        return SweepResult(labels, committed, int(st[0]), int(st[1]), int(st[2]), int(st[3]), bool(st[4]), self.T)


def is_proper(g: Graph, colors) -> bool:
    for u, v in g.edges():
        cu, cv = colors.get(u), colors.get(v)
        if cu is not None and cv is not None and cu == cv:
            return False
    return True


# --- reveal orders ---------------------------------------------------------

ORDER_KINDS = ("random", "farthest-first", "bit-reversal", "doubling-clash")


def _walk_sequence(g: Graph) -> list[int]:
    """DFS preorder from the smallest id of each component, smaller
    neighbors first; follows paths and cycles along their length."""
    seen = [False] * g.n
    out: list[int] = []
    for s in range(g.n):
        if seen[s]:
            continue
        stack = [s]
        while stack:
            v = stack.pop()
            if seen[v]:
                continue
            seen[v] = True
            out.append(v)
            stack.extend(w for w in reversed(g.adj[v]) if not seen[w])
    return out


def _ruler(i: int) -> int:
    """Trailing zeros of i+1: gap 0, 2, 4... get level 0, then 1, 5, 9... level 1."""
    x = i + 1
    return (x & -x).bit_length() - 1


def _clash_order(g: Graph, seq: list[int], stride: int | None) -> list[int]:
    """Adaptive balanced merging along the DFS sequence. A level-b block is
    two level-(b-1) blocks plus the gap between them; the right block is
    shifted by one position whenever its 2-coloring would agree with the
    left one, so every merge needs a barrier."""
    n = g.n
    if n == 0:
        return []
    side, _ = bipartition(g)
    if side is None:
        side = [0] * n
    T = locality(max(n, 2))
    s = stride if stride is not None else 2 * T + 3
    levels = 0
    while (2 ** (levels + 1)) * s + 1 <= n:
        levels += 1
    sess = ColoringSession(max(n, 1), T, check=False)
    eng = OnlineEngine(sess, max(n, 1), T, g)

    def rev(e: OnlineEngine, v: int) -> None:
        if v not in e.labels:
            e.reveal(v)

    def colour_key(e: OnlineEngine, v: int) -> int:
        ss = e.alg
        loc = int(e.local_of_arr[v])
        gid = ss.group_of(loc)
        return ss.parity_color(gid, loc) ^ side[v]

    def build(e: OnlineEngine, b: int, pos: int) -> tuple[int, int]:
        """Reveal a level-b block starting at sequence position pos; returns
        the first and last revealed positions."""
        if b == 0:
            rev(e, seq[pos])
            return pos, pos
        lo, lhi = build(e, b - 1, pos)
        base = pos + (2 ** (b - 1)) * s
        trial = copy.deepcopy(e)
        rlo, rhi = build(trial, b - 1, base)
        if colour_key(trial, seq[lo]) == colour_key(trial, seq[rlo]) and base + 1 + (2 ** (b - 1)) * s <= n:
            trial = copy.deepcopy(e)
            rlo, rhi = build(trial, b - 1, base + 1)
        e.__dict__.update(trial.__dict__)
        for p in range(lhi + 1, rlo):
            rev(e, seq[p])
        return lo, rhi

    build(eng, levels, 0)
    order = list(eng.revealed)
    done = set(order)
    return order + [v for v in seq if v not in done]


def reveal_order(g: Graph, kind: str = "random", rng: np.random.Generator | None = None,
                 stride: int | None = None) -> list[int]:
    """A reveal order for the coloring tests.

    ``farthest-first`` keeps revealing the node farthest from everything shown
    so far; ``bit-reversal`` walks the DFS sequence in bit-reversed index
    order; ``doubling-clash`` places far-apart anchors on alternating sides of
    the bipartition and then closes the gaps pairwise, pairs of pairs next,
    so clashing groups merge in a balanced binary pattern.
    """
    n = g.n
    if kind == "random":
        rng = rng if rng is not None else np.random.default_rng(0)
        return [int(v) for v in rng.permutation(n)]
    if kind == "farthest-first":
        if n == 0:
            return []
        INF = 1 << 30
        dist = _kernels.all_pairs_distances(g.adj).astype(np.int64)
        dist[dist < 0] = INF
        best = np.full(n, INF, dtype=np.int64)
        order: list[int] = []
        v = 0
        for _ in range(n):
            order.append(v)
            np.minimum(best, dist[v], out=best)
            best[v] = -1
            # argmax takes the smallest id among ties; unreachable nodes keep INF
            v = int(np.argmax(best))
            if best[v] < 0:
                break
        return order
    seq = _walk_sequence(g)
    if kind == "bit-reversal":
        bits = max(1, (n - 1).bit_length())
        key = [int(format(i, f"0{bits}b")[::-1], 2) for i in range(n)]
        return [seq[i] for i in sorted(range(n), key=lambda i: key[i])]
    if kind == "doubling-clash":
        return _clash_order(g, seq, stride)
    raise ValueError(f"unknown order kind {kind!r}; choose from {', '.join(ORDER_KINDS)}")
