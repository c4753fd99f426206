"""Command-line harness: generators, engine runs, verifiers, analysis and
adversary suites. Reports are ``key: value`` lines; every report starts with
the command and seed so identical invocations give identical bytes."""
from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path
from typing import Any, Callable, Hashable, Mapping, Sequence

import numpy as np

from . import adversaries as adv
from .coloring import ORDER_KINDS, NonBipartiteInput, color_online, is_proper, locality, reveal_order
from .graph import (
    Graph,
    GraphBuilder,
    LayeredTreeSpec,
    ParseError,
    ResourceError,
    from_edges,
    from_text,
    gen_complete_tree,
    gen_cycle,
    gen_grid,
    gen_layered_tree,
    gen_path,
    numbered_lines,
    to_text,
)
from .lcl import (
    BUILTIN_PATH,
    BUILTIN_ROOTED,
    PathLcl,
    RootedLcl,
    classify_rooted,
    extract_certificate,
    inflexible_decomposition,
    parse_lcl,
    verify_path,
    verify_rooted,
)
from .models import (
    ContractViolation,
    coloring_verifier,
    edits_for_graph,
    gather_greedy_coloring_local,
    gather_greedy_mis_local,
    greedy_coloring_dynamic,
    greedy_coloring_online,
    greedy_coloring_slocal,
    greedy_mis_slocal,
    lift_slocal_to_online,
    mis_ok,
    run_dynamic,
    run_local,
    run_online,
    run_slocal,
)

MODELS = ("local", "slocal", "dynamic", "dynamic-pm", "online")
GRAPH_PROBLEMS = ("coloring", "mis")


class UsageError(Exception):
    pass


# --- inputs --------------------------------------------------------------


def random_bipartite(n: int, p: float, rng: np.random.Generator) -> Graph:
    side = rng.integers(0, 2, size=n)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if side[u] != side[v] and rng.random() < p]
    return from_edges(n, edges)


_SPECS = [
    (re.compile(r"path(\d+)$"), lambda m, rng: gen_path(int(m[1]))),
    (re.compile(r"cycle(\d+)$"), lambda m, rng: gen_cycle(int(m[1]))),
    (re.compile(r"grid(\d+)x(\d+)$"), lambda m, rng: gen_grid(int(m[1]), int(m[2]))),
    (re.compile(r"tree(\d+)x(\d+)$"), lambda m, rng: gen_complete_tree(int(m[1]), int(m[2]))),
    (re.compile(r"layered(\d+),(\d+),(\d+)$"),
     lambda m, rng: gen_layered_tree(LayeredTreeSpec(int(m[1]), int(m[2]), int(m[3]))).graph),
    (re.compile(r"bipartite(\d+)$"), lambda m, rng: random_bipartite(int(m[1]), 4.0 / max(int(m[1]), 1), rng)),
]


def load_graph(spec: str, seed: int = 0) -> Graph:
    """A graph file, or one of path<n>, cycle<n>, grid<a>x<b>, tree<delta>x<depth>,
    layered<k>,<x>,<delta>, bipartite<n>."""
    p = Path(spec)
    if p.is_file():
        return from_text(p.read_text())
    for rx, make in _SPECS:
        m = rx.match(spec)
        if m:
            return make(m, np.random.default_rng(seed))
    raise UsageError(f"no graph file or generator named {spec!r}")


def load_problem(spec: str) -> RootedLcl | PathLcl | str:
    p = Path(spec)
    if p.is_file():
        return parse_lcl(p.read_text())
    name = spec[:-4] if spec.endswith(".lcl") else spec
    # rooted and path builtins share names such as 3col; a prefix picks one
    if name.startswith("path:") and name[5:] in BUILTIN_PATH:
        return BUILTIN_PATH[name[5:]]()
    name = name.removeprefix("rooted:")
    if name in BUILTIN_ROOTED:
        pi = BUILTIN_ROOTED[name]()
        return pi if pi.name else RootedLcl(pi.delta, pi.labels, pi.configs, name)
    if name in BUILTIN_PATH:
        return BUILTIN_PATH[name]()
    if name in GRAPH_PROBLEMS or name in adv.SUITES:
        return name
    raise UsageError(f"no problem file or builtin named {spec!r}")


def problem_name(pi: RootedLcl | PathLcl | str) -> str:
    return pi if isinstance(pi, str) else (pi.name or "unnamed")


def parse_labels(text: str) -> dict[int, str]:
    """``<node> <label>`` per line."""
    out: dict[int, str] = {}
    for no, ln in numbered_lines(text):
        parts = ln.split(None, 1)
        if len(parts) != 2:
            raise ParseError(no, "expected '<node> <label>'")
        try:
            v = int(parts[0])
        except ValueError:
            raise ParseError(no, f"node id {parts[0]!r} is not an integer") from None
        if v in out:
            raise ParseError(no, f"node {v} labelled twice")
        out[v] = parts[1].strip()
    return out


def format_labels(labels: Mapping[int, Hashable]) -> str:
    return "".join(f"{v} {labels[v]}\n" for v in sorted(labels))


def report(lines: Sequence[tuple[str, Any]]) -> str:
    return "".join(f"{k}: {v}\n" for k, v in lines)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _order(g: Graph, kind: str, seed: int) -> list[int]:
    if kind == "identity":
        return list(range(g.n))
    return reveal_order(g, kind, np.random.default_rng(seed))


# --- commands --------------------------------------------------------------


def cmd_gen(a: argparse.Namespace) -> int:
    rng = np.random.default_rng(a.seed)
    args = [int(x) if re.fullmatch(r"\d+", x) else x for x in a.args]
    kind = a.kind
    try:
        if kind == "path":
            g = gen_path(args[0])
        elif kind == "cycle":
            g = gen_cycle(args[0])
        elif kind == "grid":
            g = gen_grid(args[0], args[1])
        elif kind == "complete":
            g = gen_complete_tree(args[0], args[1])
        elif kind == "layered":
            g = gen_layered_tree(LayeredTreeSpec(args[0], args[1], args[2])).graph
        elif kind == "bipartite":
            p = float(args[1]) if len(args) > 1 else 4.0 / max(args[0], 1)
            g = random_bipartite(args[0], p, rng)
        else:
            raise UsageError(f"unknown generator {kind!r}")
    except IndexError:
        raise UsageError(f"too few arguments for generator {kind!r}") from None
    text = to_text(g)
    if a.out:
        Path(a.out).write_text(text)
        sys.stdout.write(report([("command", "gen"), ("seed", a.seed), ("kind", kind), ("nodes", g.n),
                                 ("edges", g.num_edges()), ("out", a.out)]))
    else:
        sys.stdout.write(text)
    return 0


def cmd_color3(a: argparse.Namespace) -> int:
    g = load_graph(a.graph, a.seed)
    order = _order(g, a.order, a.seed)
    T = a.T if a.T is not None else locality(max(g.n, 2))
    try:
        res = color_online(g, order, T)
    except NonBipartiteInput as e:
        sys.stdout.write(report([("command", "color3"), ("seed", a.seed), ("graph", a.graph),
                                 ("error", str(e))]))
        return 1
    proper = is_proper(g, res.labels) and len(res.labels) == g.n
    used = sorted(set(res.labels.values()))
    bound = max(1, (max(g.n, 2) - 1).bit_length())
    ok = proper and len(used) <= 3 and not res.border_violations and res.max_border <= bound
    lines = [("command", "color3"), ("seed", a.seed), ("graph", a.graph), ("n", g.n), ("order", a.order),
             ("T", T), ("proper", proper), ("colors_used", len(used)), ("max_border", res.max_border),
             ("border_bound", bound), ("border_violations", len(res.border_violations)),
             ("max_commit_radius", res.max_commit_radius), ("result", "ok" if ok else "violation")]
    sys.stdout.write(report(lines))
    if a.out:
        Path(a.out).write_text(format_labels(res.labels))
    return 0 if ok else 1


def _graph_problem_run(name: str, g: Graph, model: str, T: int, order: list[int]) -> dict[int, Hashable]:
    if model == "local":
        alg = gather_greedy_coloring_local if name == "coloring" else gather_greedy_mis_local
        return run_local(alg, g, None, T)
    slocal = greedy_coloring_slocal if name == "coloring" else greedy_mis_slocal
    if model == "slocal":
        return run_slocal(slocal, g, order, T)[0]
    if model == "online":
        alg = greedy_coloring_online if name == "coloring" else lift_slocal_to_online(slocal)
        return run_online(alg, g, order, T)[0]
    if name != "coloring":
        raise UsageError("dynamic runs are available for the coloring problem only")
    hist, _, _ = run_dynamic(greedy_coloring_dynamic, edits_for_graph(g, order), T, model == "dynamic-pm")
    return hist[-1] if hist else {}


def _violations(pi: RootedLcl | PathLcl | str, g: Graph, labels: Mapping[int, Hashable]) -> list[str]:
    if isinstance(pi, RootedLcl):
        # nodes with fewer than delta children (layered trees) are checked for containment
        return [f"node {x.node}: {x.reason}" for x in verify_rooted(pi, g, labels, partial=True)]
    if isinstance(pi, PathLcl):
        return [f"node {x.node}: {x.reason}" for x in verify_path(pi, g, labels)]
    if pi == "coloring":
        ok = coloring_verifier()(g, {v: _as_int(labels.get(v)) for v in range(g.n)})
        return [] if ok else ["not a proper coloring"]
    if pi == "mis":
        return [] if mis_ok(g, {v: _as_int(labels.get(v)) for v in range(g.n)}) else ["not a maximal independent set"]
    raise UsageError(f"no verifier for {pi!r}")


def _as_int(x: Any) -> Any:
    try:
        return int(x)
    except (TypeError, ValueError):
        return x


def cmd_run(a: argparse.Namespace) -> int:
    g = load_graph(a.graph, a.seed)
    pi = load_problem(a.problem)
    order = _order(g, a.order, a.seed)
    T = a.T if a.T is not None else 1
    if isinstance(pi, str):
        if pi not in GRAPH_PROBLEMS:
            raise UsageError(f"{pi!r} is a separation suite; use 'separate'")
        labels = _graph_problem_run(pi, g, a.model, T, order)
    elif isinstance(pi, RootedLcl):
        if a.model != "online":
            raise UsageError("rooted-tree problems run in the online model")
        if not g.rooted:
            raise UsageError("rooted-tree problems need a rooted graph")
        labels = run_online(adv.greedy_completion(pi), g, order, T)[0]
    else:
        from .paths import build_canonical_map, logstar_local, lookahead_online, speedup_online

        if a.model == "online":
            labels = run_online(lookahead_online(pi), g, order, T)[0]
        elif a.model == "local":
            sp = speedup_online(pi, lookahead_online(pi), T)
            loc = logstar_local(pi, build_canonical_map(pi, sp, sp.locality))
            labels = loc.run(g, list(range(g.n)))
        else:
            raise UsageError("path problems run in the online or local model")
    bad = _violations(pi, g, labels)
    lines = [("command", "run"), ("seed", a.seed), ("graph", a.graph), ("problem", problem_name(pi)),
             ("model", a.model), ("T", T), ("n", g.n), ("violations", len(bad))]
    lines += [("violation", b) for b in bad[:20]]
    lines.append(("result", "ok" if not bad else "violation"))
    sys.stdout.write(report(lines))
    if a.out:
        Path(a.out).write_text(format_labels(labels))
    return 0 if not bad else 1


def cmd_verify(a: argparse.Namespace) -> int:
    g = load_graph(a.graph, a.seed)
    pi = load_problem(a.problem)
    labels: dict[int, Any] = parse_labels(Path(a.labels).read_text())
    bad_ids = [v for v in labels if not 0 <= v < g.n]
    if bad_ids:
        raise ParseError(0, f"labels name nodes outside the graph: {bad_ids[:5]}")
    missing = [v for v in range(g.n) if v not in labels]
    bad = [f"node {v}: unlabelled" for v in missing[:20]]
    if not missing:
        bad = _violations(pi, g, labels)
    lines = [("command", "verify"), ("seed", a.seed), ("graph", a.graph), ("problem", problem_name(pi)),
             ("n", g.n), ("violations", len(bad))]
    lines += [("violation", b) for b in bad[:20]]
    lines.append(("result", "ok" if not bad else "violation"))
    sys.stdout.write(report(lines))
    return 0 if not bad else 1


def _set(labels) -> str:
    return "{" + ",".join(map(str, labels)) + "}"


def cmd_analyze(a: argparse.Namespace) -> int:
    pi = load_problem(a.problem)
    lines: list[tuple[str, Any]] = [("command", "analyze"), ("seed", a.seed), ("problem", problem_name(pi))]
    if isinstance(pi, RootedLcl):
        dec = inflexible_decomposition(pi)
        lines += [("kind", "rooted"), ("delta", pi.delta), ("labels", _set(pi.labels)), ("k", dec.k)]
        for i, layer in enumerate(dec.layers, 1):
            lines.append((f"Γ{i}", _set(x for x in pi.labels if x in layer)))
        lines.append(("terminal", dec.terminal))
        if dec.terminal != "empty":
            lines.append(("surviving", _set(dec.problems[-1].labels)))
        cls = classify_rooted(pi, search_certificate=a.certificate, T=a.T if a.T is not None else 1)
        lines += [("class", cls.tier), ("evidence", cls.evidence)]
    elif isinstance(pi, PathLcl):
        from .paths import pumping_constant

        lines += [("kind", "path"), ("r", pi.r), ("labels", _set(pi.gamma)), ("windows", len(pi.windows))]
        lines.append(("pumping_constant", pumping_constant(pi)))
    else:
        raise UsageError(f"{pi!r} is not an LCL")
    sys.stdout.write(report(lines))
    return 0


def cmd_certificate(a: argparse.Namespace) -> int:
    pi = load_problem(a.problem)
    if not isinstance(pi, RootedLcl):
        raise UsageError("certificates exist for rooted-tree problems only")
    T = a.T if a.T is not None else 1
    rep = extract_certificate(pi, adv.greedy_completion(pi), T)
    lines = [("command", "certificate"), ("seed", a.seed), ("problem", problem_name(pi)), ("T", T),
             ("algorithm", f"greedy-completion[{problem_name(pi)}]"), ("ok", rep.ok), ("reason", rep.reason)]
    if rep.certificate is not None:
        lines.append(("depths", ",".join(map(str, rep.certificate.depths))))
        lines.append(("labels", _set(rep.certificate.gamma_t)))
    sys.stdout.write(report(lines))
    if rep.certificate is not None and a.out:
        Path(a.out).write_text(rep.certificate.to_text())
    return 0 if rep.ok else 1


def _expected(r: adv.SeparationReport) -> bool:
    """Positive algorithms should succeed; baselines should lose with a
    certified witness."""
    if r.witness is None and r.outcome == adv.ALG_OK:
        return True
    return r.outcome == adv.ADV_WON and r.witness is not None and r.witness.certified


def _save_witness(base: Path, i: int, r: adv.SeparationReport) -> Path:
    w = r.witness
    assert w is not None
    safe = re.sub(r"[^A-Za-z0-9_.=-]+", "_", f"{i:02d}-{r.problem}-{r.model}-{r.algorithm}")
    d = base / safe
    d.mkdir(parents=True, exist_ok=True)
    (d / "graph.txt").write_text(to_text(w.graph))
    (d / "script.txt").write_text(w.script_text())
    (d / "labels.txt").write_text("".join(f"{v} {w.labels[v]!r}\n" for v in sorted(w.labels)))
    meta = [("problem", r.problem), ("model", w.model), ("algorithm", r.algorithm), ("T", w.T),
            ("n_claim", w.n_claim if w.n_claim is not None else ""),
            ("uids", " ".join(map(str, w.uids)) if w.uids is not None else "")]
    (d / "meta.txt").write_text(report(meta))
    (d / "report.txt").write_text(r.to_text())
    return d


def cmd_separate(a: argparse.Namespace) -> int:
    pi = load_problem(a.problem)
    T = a.T
    if isinstance(pi, RootedLcl):
        if a.model not in (None, "online"):
            raise UsageError("the layered-tree adversary targets the online model")
        T = 1 if T is None else T
        reports = [adv.superlog_adversary(pi, mk(pi), T, x=a.x) for mk in (adv.greedy_completion, adv.first_fit)]
    elif isinstance(pi, str) and pi in adv.SUITES:
        kw = {} if T is None else {"T": T}
        reports = adv.SUITES[pi](**kw)
        if a.model is not None:
            reports = [r for r in reports if r.model == a.model]
            if not reports:
                raise UsageError(f"suite {pi!r} has no run in model {a.model!r}")
    else:
        raise UsageError(f"no separation construction for {problem_name(pi)!r}")
    out = [report([("command", "separate"), ("seed", a.seed), ("problem", problem_name(pi)),
                   ("model", a.model or "all"), ("reports", len(reports))])]
    ok = True
    for i, r in enumerate(reports):
        good = _expected(r)
        ok &= good
        text = r.to_text() + f"expected: {good}\n"
        if a.out and r.witness is not None:
            d = _save_witness(Path(a.out), i, r)
            text += f"witness_dir: {d}\n"
        out.append("\n" + text)
    out.append(f"\nresult: {'ok' if ok else 'unexpected outcome'}\n")
    sys.stdout.write("".join(out))
    return 0 if ok else 1


def algorithm_by_name(name: str, problem: str) -> Callable:
    """Rebuild a baseline or positive algorithm from its report name."""
    m = re.fullmatch(r"([a-z-]+)(?:\[(.*)\])?", name)
    if not m:
        raise UsageError(f"unknown algorithm {name!r}")
    base, arg = m[1], m[2]
    Tm = re.fullmatch(r"T=(\d+)", arg or "")
    T = int(Tm[1]) if Tm else None
    if base in ("greedy-completion", "first-fit"):
        pi = load_problem(arg or problem)
        assert isinstance(pi, RootedLcl)
        return adv.greedy_completion(pi) if base == "greedy-completion" else adv.first_fit(pi)
    table: dict[str, Callable] = {
        "ball-reconstruction": lambda: adv.ball_reconstruction_slocal(T),
        "gossip-reconstruction": lambda: adv.gossip_reconstruction_slocal(T),
        "ball-cycle": lambda: adv.ball_cycle_slocal(T),
        "optimistic-cycle": lambda: adv.optimistic_cycle_slocal(T),
        "gossip-leader": lambda: adv.gossip_leader_slocal(T),
        "recompute-locally": lambda: adv.recompute_cycle_dynamic,
        "local-demotion": lambda: adv.local_demotion_dynamic,
        "recompute-id-order": lambda: adv.recompute_nested_dynamic,
        "nested-orientation": adv.nested_orientation_slocal,
    }
    if base not in table:
        raise UsageError(f"unknown algorithm {name!r}")
    return table[base]()


def cmd_replay(a: argparse.Namespace) -> int:
    d = Path(a.witness)
    meta = dict(ln.split(": ", 1) if ": " in ln else (ln.rstrip(":"), "") for _, ln in numbered_lines((d / "meta.txt").read_text()))
    g = from_text((d / "graph.txt").read_text())
    script = [ln for _, ln in numbered_lines((d / "script.txt").read_text())]
    want = {}
    for no, ln in numbered_lines((d / "labels.txt").read_text()):
        v, _, lab = ln.partition(" ")
        want[int(v)] = lab
    w = adv.Witness(g, script, {}, "", False, model=meta["model"], T=int(meta["T"]),
                    uids=[int(x) for x in meta.get("uids", "").split()] or None,
                    n_claim=int(meta["n_claim"]) if meta.get("n_claim") else None)
    alg = algorithm_by_name(meta["algorithm"], meta["problem"])
    labels = _replay_labels(w, alg)
    got = {v: repr(x) for v, x in labels.items()}
    same = got == want
    sys.stdout.write(report([("command", "replay"), ("seed", a.seed), ("witness", str(d)),
                             ("problem", meta["problem"]), ("model", meta["model"]),
                             ("algorithm", meta["algorithm"]), ("steps", len(script)), ("identical", same),
                             ("result", "ok" if same else "mismatch")]))
    return 0 if same else 1


def _replay_labels(w: adv.Witness, alg: Callable) -> dict[int, Hashable]:
    from .models import parse_edit

    if w.model == "online":
        order = [int(s.split()[1]) for s in w.script]
        return run_online(alg, w.graph, order, w.T, n=w.n_claim)[0]
    if w.model == "slocal":
        order = [int(s.split()[1]) for s in w.script]
        return run_slocal(alg, w.graph, order, w.T, w.uids)[0]
    hist, _, _ = run_dynamic(alg, [parse_edit(s) for s in w.script], w.T, w.model == "dynamic-pm")
    return hist[-1] if hist else {}


# --- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph file or generator spec such as grid8x8, path100, layered2,5,2")
    common.add_argument("--problem", help="LCL file or builtin name")
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--T", type=int, help="locality")
    common.add_argument("--order", default="random", choices=ORDER_KINDS + ("identity",))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget-nodes", type=int, help="node budget (overrides LOCALITY_LAB_BUDGET)")
    common.add_argument("--out", help="output file (directory for separate)")
    p = argparse.ArgumentParser(prog="localitylab", description=__doc__.split("Reports")[0].replace("\n", " ").strip())
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gen", parents=[common], help="write a generated graph")
    g.add_argument("kind", choices=("path", "cycle", "grid", "complete", "layered", "bipartite"))
    g.add_argument("args", nargs="*")
    g.set_defaults(func=cmd_gen)
    sub.add_parser("color3", parents=[common], help="online 3-coloring of a bipartite graph").set_defaults(func=cmd_color3)
    sub.add_parser("run", parents=[common], help="run a stock algorithm and verify it").set_defaults(func=cmd_run)
    v = sub.add_parser("verify", parents=[common], help="check a labelling")
    v.add_argument("--labels", required=True, help="file of '<node> <label>' lines")
    v.set_defaults(func=cmd_verify)
    an = sub.add_parser("analyze", parents=[common], help="path-inflexible decomposition / classification")
    an.add_argument("problem_pos", nargs="?", metavar="PROBLEM")
    an.add_argument("--certificate", action="store_true", help="also search for a log-star certificate")
    an.set_defaults(func=cmd_analyze)
    sub.add_parser("certificate", parents=[common], help="extract a certificate").set_defaults(func=cmd_certificate)
    s = sub.add_parser("separate", parents=[common], help="run an adversary or separation suite")
    s.add_argument("--x", type=int, help="core path length of the layered trees (default 2T+3)")
    s.set_defaults(func=cmd_separate)
    r = sub.add_parser("replay", parents=[common], help="replay a saved witness")
    r.add_argument("--witness", required=True, help="directory written by 'separate --out'")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    p = build_parser()
    a = p.parse_args(argv)
    if getattr(a, "problem_pos", None) and not a.problem:
        a.problem = a.problem_pos
    if a.budget_nodes is not None and a.budget_nodes <= 0:
        p.error("--budget-nodes must be positive")
    needs = {"color3": ["graph"], "run": ["graph", "problem", "model"], "verify": ["graph", "problem"],
             "analyze": ["problem"], "certificate": ["problem"], "separate": ["problem"]}
    for f in needs.get(a.command, []):
        if getattr(a, f) is None:
            p.error(f"{a.command} needs --{f}")
    saved = os.environ.get("LOCALITY_LAB_BUDGET")
    if a.budget_nodes is not None:
        os.environ["LOCALITY_LAB_BUDGET"] = str(a.budget_nodes)
    try:
        return a.func(a)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except (UsageError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ResourceError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return 3
    except ContractViolation as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return 1
    finally:
        # in-process callers keep their own budget
        if saved is None:
            os.environ.pop("LOCALITY_LAB_BUDGET", None)
        else:
            os.environ["LOCALITY_LAB_BUDGET"] = saved


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
