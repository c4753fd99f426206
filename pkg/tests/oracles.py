"""Brute-force reference implementations used only by the tests. Nothing here
imports the package's analysis code, so agreement is a real cross-check."""
from __future__ import annotations

import itertools
import math
from collections import deque


def walk_sets(states, edges, max_len):
    """reach[d] = set of (a, b) with a walk a -> b of length exactly d."""
    succ = {s: set() for s in states}
    for a, b in edges:
        succ[a].add(b)
    reach = [{(s, s) for s in states}]
    for _ in range(max_len):
        nxt = set()
        for a, b in reach[-1]:
            for c in succ[b]:
                nxt.add((a, c))
        reach.append(nxt)
    return reach


def flexible_by_lengths(reach, a, b=None, k_max=None):
    """Some K <= k_max with walks a -> b and b -> a (self-walks when b is None)
    of every length in [K, len(reach) - 1]."""
    b = a if b is None else b
    top = len(reach) - 1
    k_max = top // 2 if k_max is None else k_max
    for k in range(k_max + 1):
        if all((a, b) in reach[d] and (b, a) in reach[d] for d in range(k, top + 1)):
            return True
    return False


def self_walk_gcd(reach, a):
    g = 0
    for d in range(1, len(reach)):
        if (a, a) in reach[d]:
            g = math.gcd(g, d)
    return g


def scc_of(states, edges):
    """Component id per state by mutual reachability (quadratic BFS)."""
    succ = {s: set() for s in states}
    for a, b in edges:
        succ[a].add(b)

    def reach_from(s):
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in succ[u]:
                if w not in seen:
                    seen.add(w)
                    q.append(w)
        return seen

    r = {s: reach_from(s) for s in states}
    comp = {}
    for s in states:
        comp[s] = min((t for t in states if t in r[s] and s in r[t]), key=list(states).index)
    return comp


def path_labelings_ok(win_ok, n, gamma, cycle=False):
    """All labelings of a path/cycle of n nodes accepted by a window predicate
    (exhaustive; tiny n only)."""
    out = []
    for lab in itertools.product(gamma, repeat=n):
        if win_ok(lab, cycle):
            out.append(lab)
    return out


def proper(g, labels):
    return all(labels[u] != labels[v] for u, v in g.edges())


def maximal_independent(g, in_set):
    for u, v in g.edges():
        if in_set[u] and in_set[v]:
            return False
    return all(in_set[v] or any(in_set[u] for u in g.adj[v]) for v in range(g.n))


def bfs_dist(g, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in g.adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def rooted_tree_valid(delta, configs, parent, labels):
    """Every node with children has exactly delta of them and its (label :
    sorted child labels) is an allowed configuration."""
    kids = {v: [] for v in range(len(parent))}
    for v, p in enumerate(parent):
        if p >= 0:
            kids[p].append(v)
    for v, ks in kids.items():
        if not ks:
            continue
        if len(ks) != delta:
            return False
        if (labels[v], tuple(sorted(labels[c] for c in ks))) not in configs:
            return False
    return True


def rooted_completion_exists(configs, parent, fixed, labels):
    """Bottom-up feasible-label sets. A node with fewer children than its
    configurations needs its children to fit inside one of them (partial
    trees); leaves are free."""
    from collections import Counter

    kids = {v: [] for v in range(len(parent))}
    for v, p in enumerate(parent):
        if p >= 0:
            kids[p].append(v)
    confs = [(a, Counter(ks)) for a, ks in configs]
    order = []
    stack = [v for v, p in enumerate(parent) if p < 0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kids[v])
    feas = {}
    for v in reversed(order):
        cand = [fixed[v]] if v in fixed else list(labels)
        ok = set()
        for a in cand:
            if not kids[v]:
                ok.add(a)
                continue
            for choice in itertools.product(*(sorted(feas[c]) for c in kids[v])):
                want = Counter(choice)
                if any(b == a and all(conf[x] >= y for x, y in want.items()) for b, conf in confs):
                    ok.add(a)
                    break
        feas[v] = ok
    return all(feas[v] for v, p in enumerate(parent) if p < 0)
