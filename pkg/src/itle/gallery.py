"""Worked examples with their expected results, replayed by ``itle examples run``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .decide import classical_ltl_sat, decide_sat, decide_valid
from .formula import parse_formula, subformula_closure
from .labeled import bound_B, load_tree, normalize_tree
from .model import FrameClass, load_model
from .semantics import holds
from .stratified import extract_finite_model, lasso_labels, load_lasso, validate_lasso

SEPARATION_MODEL = """\
model
worlds w v u
order v u
succ w v
succ v v
succ u u
val u p
"""

DIVERGENCE_MODEL = """\
model
worlds a x y
order a x
order a y
succ a a
succ x y
succ y y
val y p
"""

CHAIN_TREE = """\
tree
node r A
node s A parent r
node t B parent s
node t2 B parent r
"""

PERIODIC_LASSO = """\
lasso loop 1
stratum
node a0
node a1 parent a0
succ a0 b0
succ a1 b0
stratum
node b0
succ b0 c0
stratum
node c0
node c1 parent c0
succ c0 b0
succ c1 b0
val c1 p
val a1 p
"""

INTEGER_LINE = """\
W = Z u {r}; r lies below every integer and integers are pairwise
incomparable; succ(r) = r and succ(n) = n + 1; p holds exactly on [0, oo).
Every maximal world above r is an integer whose orbit enters [0, oo), so
F G p holds there and ~~F G p holds at r.  A negative integer n sits above r
and G p fails at n, so ~~G p fails at r; as succ(r) = r, F ~~G p fails at r.
The model is persistent but infinite.  No finite persistent model falsifies
the formula, which is why the bounded persistent sweep comes back exhausted.
"""

DIVERGENCE = "~~F G p -> F ~~G p"
SEPARATION = "~Xp & ~X~p"


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    description: str
    text: str
    formula: str
    expected: str
    run: Callable[[], str]


def _itl2_next() -> str:
    m = load_model(SEPARATION_MODEL)
    f = parse_formula(SEPARATION)
    here = "true" if holds(m, "w", f) else "false"
    dyn = decide_sat(f, FrameClass.DYNAMIC, 3)
    cls = decide_sat(f, FrameClass.CLASSICAL, 5)
    return f"w: {here}; dynamic<=3: {dyn.kind}; classical<=5: {cls}"


def _itl2_classical() -> str:
    return str(classical_ltl_sat(parse_formula(SEPARATION), 8))


def _divergence() -> str:
    m = load_model(DIVERGENCE_MODEL)
    f = parse_formula(DIVERGENCE)
    here = "true" if holds(m, "a", f) else "false"
    v = decide_valid(f, FrameClass.DYNAMIC, 3)
    return f"a: {here}; dynamic<=3: {v.kind}"


def _finite_persistent() -> str:
    return str(decide_valid(parse_formula(DIVERGENCE), FrameClass.PERSISTENT, 3))


def _normalize_chain() -> str:
    normal, _ = normalize_tree(load_tree(CHAIN_TREE))
    return f"{len(normal)} nodes"


def _extract_periodic() -> str:
    m = load_lasso(PERIODIC_LASSO)
    sigma = subformula_closure(parse_formula("F p | X p"))
    ex = extract_finite_model(m, sigma)
    same = lasso_labels(ex.model, sigma)[ex.root] == lasso_labels(m, sigma)[m.strata[0].root]
    valid = validate_lasso(ex.model).valid
    return f"valid: {valid}; root preserved: {same}"


def _bound_b1() -> str:
    b = bound_B(1)
    return "exact" if b.exact else f"symbolic {b.expression}"


ENTRIES = [
    GalleryEntry(
        "itl2-next",
        "~Xp & ~X~p holds at w of the three-world model; satisfiable over dynamic "
        "posets, unsatisfiable over classical models up to 5 worlds",
        SEPARATION_MODEL, SEPARATION,
        "w: true; dynamic<=3: satisfiable; classical<=5: ExhaustedUpTo(5)", _itl2_next),
    GalleryEntry(
        "itl2-classical",
        "the same formula against the independent classical lasso search",
        "", SEPARATION, "ExhaustedUpTo(8)", _itl2_classical),
    GalleryEntry(
        "persistent-vs-dynamic",
        "a three-world dynamic (not persistent) countermodel to ~~F G p -> F ~~G p",
        DIVERGENCE_MODEL, DIVERGENCE, "a: false; dynamic<=3: countermodel", _divergence),
    GalleryEntry(
        "finite-persistent-validity",
        "no persistent model with at most 3 worlds falsifies ~~F G p -> F ~~G p",
        "", DIVERGENCE, "ExhaustedUpTo(3)", _finite_persistent),
    GalleryEntry(
        "integer-line",
        "the infinite persistent countermodel on Z plus a root (prose only)",
        INTEGER_LINE, DIVERGENCE, "prose only", lambda: "prose only"),
    GalleryEntry(
        "normalize-chain",
        "A above A above B, plus a second B child, condenses to two nodes",
        CHAIN_TREE, "", "2 nodes", _normalize_chain),
    GalleryEntry(
        "extract-periodic",
        "finite-model extraction on a three-stratum lasso with a period of two",
        PERIODIC_LASSO, "F p | X p", "valid: True; root preserved: True", _extract_periodic),
    GalleryEntry(
        "bounds-b1",
        "the final-model bound for |Sigma| = 1 is beyond the digit cap",
        "", "", "symbolic Q^4_4*(2*E^2_2 + 1*Q^2_2*E^4_4)", _bound_b1),
]

BY_NAME = {e.name: e for e in ENTRIES}
