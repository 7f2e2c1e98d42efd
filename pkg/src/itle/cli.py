"""Command-line front end: ``itle <command> ...``.

Exit codes: 0 witness found or formula true, 1 search exhausted or formula
false, 2 usage, parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import gallery
from .decide import Verdict, classical_ltl_sat, decide_sat, decide_valid
from .formula import FormulaSyntaxError, parse_formula, print_formula, subformula_closure
from .labeled import (
    bound_B, bounds, check_condensation, find_immersion, greatest_simulation, load_tree,
    normalize_tree, save_tree, tree_key,
)
from .model import FrameClass, ModelError, load_model, save_model
from .semantics import evaluate
from .stratified import (
    LassoError, extract_finite_model, lasso_labels, load_lasso, save_lasso, stratify_prefix,
)

FRAMES = {c.name.lower(): c for c in FrameClass}


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _worlds(ws) -> str:
    return "{" + ", ".join(sorted(map(str, ws))) + "}"


def verdict_json(v: Verdict) -> dict:
    """The stable --json schema; see README."""
    witness = getattr(v, "model", None)
    tb = v.theoretical_bound
    return {
        "verdict": v.kind,
        "formula": print_formula(v.formula),
        "frame": v.frame.name.lower() if v.frame else None,
        "bound": v.bound,
        "world": getattr(v, "world", None),
        "witness": save_model(witness) if witness is not None else None,
        "theoretical_bound": {
            "exact": tb.exact,
            "value": str(tb.value) if tb.exact else None,
            "expression": tb.expression,
        },
        "stats": {"models_examined": v.stats.models_examined,
                  "elapsed_seconds": round(v.stats.elapsed, 6)},
    }


def _emit_verdict(v: Verdict, as_json: bool) -> int:
    if as_json:
        print(json.dumps(verdict_json(v), indent=2, sort_keys=True))
    else:
        print(v)
        if v.found:
            print(f"# world {v.world}")
            print(save_model(v.model), end="")
        else:
            tb = v.theoretical_bound
            note = "" if tb.exact else " (exceeds digit cap)"
            print(f"# completeness needs up to B = {tb}{note} worlds")
    return 0 if v.found else 1


# ---------------------------------------------------------------- commands

def cmd_check(a) -> int:
    m = load_model(_read(a.model))
    f = parse_formula(a.formula)
    t = evaluate(m, f)
    if a.world is not None:
        if a.world not in m.index:
            raise UsageError(f"unknown world {a.world!r}")
        ok = t.holds(a.world, f)
        print("true" if ok else "false")
        return 0 if ok else 1
    for g, ws in t.items():
        print(f"{print_formula(g)}: {_worlds(ws)}")
    return 0 if t.mask(f) else 1


def cmd_search(a) -> int:
    f = parse_formula(a.formula)
    frame = FRAMES[a.frame]
    run = decide_sat if a.command == "sat" else decide_valid
    return _emit_verdict(run(f, frame, a.max_worlds, jobs=a.jobs), a.json)


def cmd_ltl(a) -> int:
    return _emit_verdict(classical_ltl_sat(parse_formula(a.formula), a.max_lasso), a.json)


def cmd_normalize(a) -> int:
    t = load_tree(_read(a.tree))
    if a.pointed and t.point is None:
        raise UsageError("--pointed needs a 'point' line in the tree file")
    normal, c = normalize_tree(t, pointed=a.pointed)
    print(save_tree(normal), end="")
    for w in t.worlds:
        print(f"# rho {w} {c.rho[w]}")
    return 0


def cmd_simulate(a) -> int:
    ta, tb = load_tree(_read(a.a)), load_tree(_read(a.b))
    sim = greatest_simulation(ta, tb)
    if sim is None:
        print("simulation: none")
    else:
        print("simulation: " + " ".join(f"{x}->{y}" for x, y in sorted(sim, key=str)))
    ab, ba = find_immersion(ta, tb), find_immersion(tb, ta)
    for name, f in (("immersion a->b", ab), ("immersion b->a", ba)):
        print(f"{name}: " + ("none" if f is None else
                             " ".join(f"{x}->{f[x]}" for x in sorted(f, key=str))))
    print(f"bimersion: {'yes' if ab is not None and ba is not None else 'no'}")
    na, ca = normalize_tree(ta)
    nb, _ = normalize_tree(tb)
    if not check_condensation(ta, na, ca.rho, ca.iota):
        raise AssertionError("normalization produced an invalid condensation")
    same = tree_key(na) == tree_key(nb)
    print(f"same normal form: {'yes' if same else 'no'}")
    return 0 if ab is not None else 1


def cmd_bounds(a) -> int:
    if a.E:
        b = bounds("E", *a.E)
    elif a.Q:
        b = bounds("Q", *a.Q)
    else:
        b = bound_B(a.B)
    print(b.value if b.exact else f"{b.expression} (exceeds digit cap)")
    return 0


def cmd_extract(a) -> int:
    m = load_lasso(_read(a.lasso))
    sigma = subformula_closure(parse_formula(a.sigma))
    ex = extract_finite_model(m, sigma)
    print(save_lasso(ex.model), end="")
    print(f"# root {ex.root}")
    print(f"# input root Sigma-set preserved: "
          f"{lasso_labels(ex.model, sigma)[ex.root] == lasso_labels(m, sigma)[m.strata[0].root]}")
    if a.trace:
        for step in ex.steps:
            print("# " + " ".join(map(str, step)))
    return 0


def cmd_stratify(a) -> int:
    m = load_model(_read(a.model))
    if a.world not in m.index:
        raise UsageError(f"unknown world {a.world!r}")
    sigma = subformula_closure(parse_formula(a.sigma))
    frag = stratify_prefix(m, a.world, sigma, a.steps, a.depth)
    for node in sorted(frag.nodes):
        x, y = node
        par = frag.parent.get(node)
        tail = f" parent ({par[0]},{par[1]})" if par else ""
        print(f"node ({x},{y}) h {frag.h[node]}{tail}")
    for k, x, y, rank, v in frag.applied:
        print(f"# defect {k}: ({x},{y},{rank}) via {v}")
    return 0


def cmd_examples(a) -> int:
    if a.action == "list":
        for e in gallery.ENTRIES:
            print(f"{e.name}: {e.description}")
        return 0
    if a.name not in gallery.BY_NAME:
        raise UsageError(f"unknown example {a.name!r}; try 'itle examples list'")
    e = gallery.BY_NAME[a.name]
    if e.text:
        print(e.text, end="" if e.text.endswith("\n") else "\n")
    got = e.run()
    print(f"result: {got}")
    print(f"expected: {e.expected}")
    if got != e.expected:
        print("MISMATCH", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itle", description="Intuitionistic temporal logic toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="evaluate a formula on a model file")
    c.add_argument("-m", "--model", required=True)
    c.add_argument("-f", "--formula", required=True)
    c.add_argument("-w", "--world")
    c.set_defaults(func=cmd_check)

    for name, text in (("sat", "bounded satisfiability search"),
                       ("valid", "bounded search for a falsifying world")):
        s = sub.add_parser(name, help=text)
        s.add_argument("-f", "--formula", required=True)
        s.add_argument("--frame", choices=sorted(FRAMES), default="dynamic")
        s.add_argument("--max-worlds", type=int, default=3)
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--json", action="store_true")
        s.set_defaults(func=cmd_search)

    s = sub.add_parser("ltl", help="classical LTL lasso search")
    s.add_argument("-f", "--formula", required=True)
    s.add_argument("--max-lasso", type=int, default=8)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_ltl)

    s = sub.add_parser("normalize", help="normal form of a labeled tree")
    s.add_argument("-t", "--tree", required=True)
    s.add_argument("--pointed", action="store_true")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("simulate", help="simulations and immersions between two trees")
    s.add_argument("-a", required=True)
    s.add_argument("-b", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("bounds", help="E, Q and B bounds")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--E", nargs=2, type=int, metavar=("N", "K"))
    g.add_argument("--Q", nargs=2, type=int, metavar=("N", "K"))
    g.add_argument("--B", type=int, metavar="S")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("extract", help="finite-model extraction from a lasso file")
    s.add_argument("-l", "--lasso", required=True)
    s.add_argument("--sigma", required=True, help="formula whose closure is Sigma")
    s.add_argument("--trace", action="store_true")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("stratify", help="bounded prefix of the stratification")
    s.add_argument("-m", "--model", required=True)
    s.add_argument("-w", "--world", required=True)
    s.add_argument("--sigma", required=True)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--depth", type=int, default=6)
    s.set_defaults(func=cmd_stratify)

    s = sub.add_parser("examples", help="the example gallery")
    s.add_argument("action", choices=["list", "run"])
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.command == "examples" and args.action == "run" and not args.name:
        print("itle: examples run needs a name", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (FormulaSyntaxError, ModelError, LassoError, UsageError, OSError,
            ValueError, IndexError) as e:
        print(f"itle: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
