"""Labeled posets and trees: simulations, immersions, condensations, normal forms.

A normalized tree is a hereditary canonical form: a node carries a label and
a *set* of pairwise distinct normalized subtrees, none of which has the
parent's label.  Any finite labeled tree condenses onto its normal form, so
normal forms stand in for bimersion classes without ever building the
global graph of all such classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .formula import Atom, ClosureSet, Formula, Implies, print_formula
from .model import DynamicModel, reflexive_transitive_closure
from .semantics import sigma_labels

EXPONENT_CAP = 2 ** 20


def label_key(label) -> tuple:
    """Total-order key for labels of mixed shape."""
    if isinstance(label, Formula):
        return ("f", print_formula(label))
    if isinstance(label, (frozenset, set)):
        return ("set", tuple(sorted(label_key(x) for x in label)))
    if isinstance(label, tuple):
        return ("tuple", tuple(label_key(x) for x in label))
    if isinstance(label, bool):
        return ("bool", int(label))
    if isinstance(label, int):
        return ("int", label)
    if isinstance(label, str):
        return ("str", label)
    return ("repr", repr(label))


def format_label(label) -> str:
    if isinstance(label, str):
        return label
    if isinstance(label, (frozenset, set)):
        items = sorted(label, key=label_key)
        return "{" + ",".join(format_label(x) for x in items) + "}"
    if isinstance(label, Formula):
        return print_formula(label).replace(" ", "")
    if isinstance(label, tuple):
        return "(" + ",".join(format_label(x) for x in label) + ")"
    return str(label)


class LabeledPoset:
    def __init__(self, worlds: Iterable[Hashable], order: Iterable[tuple], label: Mapping,
                 *, point=None, close: bool = True):
        self.worlds = tuple(worlds)
        self.order = reflexive_transitive_closure(self.worlds, order) if close else frozenset(order)
        self.label = dict(label)
        self.point = point
        if point is not None and point not in self.label:
            raise ValueError(f"point {point!r} is not a world")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({len(self.worlds)} worlds)"

    def __len__(self) -> int:
        return len(self.worlds)

    @cached_property
    def up(self) -> dict:
        up = {w: set() for w in self.worlds}
        for a, b in self.order:
            up[a].add(b)
        return {w: frozenset(s) for w, s in up.items()}

    def leq(self, a, b) -> bool:
        return (a, b) in self.order

    def lab(self, w, pointed: bool = False):
        """Label, paired with the point flag when ``pointed``."""
        if pointed:
            return (self.label[w], w == self.point)
        return self.label[w]

    def labels_used(self, pointed: bool = False) -> set:
        return {label_key(self.lab(w, pointed)) for w in self.worlds}


class LabeledTree(LabeledPoset):
    """A labeled poset whose order is generated by a parent map with one root."""

    def __init__(self, nodes: Iterable[Hashable], parent: Mapping, label: Mapping, *, point=None):
        nodes = tuple(nodes)
        self.parent = {c: p for c, p in parent.items() if p is not None}
        roots = [w for w in nodes if w not in self.parent]
        if len(roots) != 1:
            raise ValueError(f"a tree needs exactly one root, found {roots}")
        self.root = roots[0]
        known = set(nodes)
        for c, p in self.parent.items():
            if c not in known or p not in known:
                raise ValueError(f"unknown node in parent edge {c!r} -> {p!r}")
        pairs = []
        for w in nodes:
            seen = {w}
            a = w
            while a in self.parent:
                a = self.parent[a]
                if a in seen:
                    raise ValueError(f"cycle through {w!r}")
                seen.add(a)
                pairs.append((a, w))
        super().__init__(nodes, pairs, label, point=point)

    @cached_property
    def children(self) -> dict:
        ch = {w: [] for w in self.worlds}
        for w in self.worlds:
            if w in self.parent:
                ch[self.parent[w]].append(w)
        return ch


# ---------------------------------------------------------------- level / depth

def _strict_above(a: LabeledPoset, w):
    return [v for v in a.up[w] if v != w]


def depth(a: LabeledPoset, w) -> int:
    memo: dict = {}

    def d(x):
        if x not in memo:
            memo[x] = 1 + max((d(v) for v in _strict_above(a, x)), default=0)
        return memo[x]
    return d(w)


def level_of(a: LabeledPoset, w, pointed: bool = False) -> int:
    memo: dict = {}

    def lv(x):
        if x not in memo:
            lx = a.lab(x, pointed)
            memo[x] = 1 + max(
                (lv(v) for v in _strict_above(a, x) if a.lab(v, pointed) != lx), default=0
            )
        return memo[x]
    return lv(w)


def level(a: LabeledPoset, pointed: bool = False) -> int:
    return max((level_of(a, w, pointed) for w in a.worlds), default=0)


# ---------------------------------------------------------------- simulations

def _simulation_fixpoint(a: LabeledPoset, b: LabeledPoset, pointed: bool) -> set:
    rel = {(x, y) for x in a.worlds for y in b.worlds if a.lab(x, pointed) == b.lab(y, pointed)}
    changed = True
    while changed:
        changed = False
        for x, y in list(rel):
            for x2 in a.up[x]:
                if not any((x2, y2) in rel for y2 in b.up[y]):
                    rel.discard((x, y))
                    changed = True
                    break
    return rel


def greatest_simulation(a: LabeledPoset, b: LabeledPoset, pointed: bool = False):
    """Largest simulation from a to b, or None when none has full domain."""
    rel = _simulation_fixpoint(a, b, pointed)
    if {x for x, _ in rel} != set(a.worlds):
        return None
    return frozenset(rel)


def find_immersion(a: LabeledTree, b: LabeledPoset, pointed: bool = False):
    """A functional simulation from the tree a into b, or None.

    Picks an image for the root, then for each daughter an image above its
    parent's image inside the greatest simulation.
    """
    rel = _simulation_fixpoint(a, b, pointed)
    images = {}
    for x, y in rel:
        images.setdefault(x, set()).add(y)
    first = [y for y in b.worlds if y in images.get(a.root, ())]
    if not first:
        return None
    sigma = {a.root: first[0]}
    stack = [a.root]
    while stack:
        x = stack.pop()
        above = b.up[sigma[x]]
        for c in a.children[x]:
            sigma[c] = next(y for y in b.worlds if y in above and y in images[c])
            stack.append(c)
    return sigma


def immerses(a: LabeledTree, b: LabeledPoset, pointed: bool = False) -> bool:
    return find_immersion(a, b, pointed) is not None


def is_immersion(a: LabeledPoset, b: LabeledPoset, f: Mapping, pointed: bool = False) -> bool:
    return not _immersion_problems(a, b, f, "map", pointed)


def _immersion_problems(a, b, f, name, pointed=False) -> list[str]:
    problems = []
    for x in a.worlds:
        if x not in f or f[x] not in b.label:
            problems.append(f"{name} undefined or out of range at {x!r}")
            return problems
    for x in a.worlds:
        if a.lab(x, pointed) != b.lab(f[x], pointed):
            problems.append(f"{name} label mismatch at {x!r}: "
                            f"{format_label(a.label[x])} vs {format_label(b.label[f[x]])}")
    for x, x2 in a.order:
        if not b.leq(f[x], f[x2]):
            problems.append(f"{name} breaks order: {x!r} <= {x2!r}")
    return problems


@dataclass
class Check:
    ok: bool
    problems: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class Condensation:
    rho: dict   # A -> B, surjective
    iota: dict  # B -> A, rho(iota(b)) == b


def check_condensation(a: LabeledPoset, b: LabeledPoset, rho: Mapping, iota: Mapping,
                       pointed: bool = False) -> Check:
    problems = _immersion_problems(a, b, rho, "rho", pointed)
    problems += _immersion_problems(b, a, iota, "iota", pointed)
    if not problems:
        missed = set(b.worlds) - set(rho.values())
        if missed:
            problems.append(f"rho not surjective: misses {sorted(map(str, missed))}")
        for y in b.worlds:
            if rho[iota[y]] != y:
                problems.append(f"rho(iota({y!r})) = {rho[iota[y]]!r}")
    return Check(not problems, problems)


# ---------------------------------------------------------------- normal forms

def tree_key(t: LabeledTree, node=None, pointed: bool = False) -> tuple:
    """Structural key: label plus the sorted multiset of child keys."""
    node = t.root if node is None else node
    kids = sorted(tree_key(t, c, pointed) for c in t.children[node])
    return (label_key(t.lab(node, pointed)), tuple(kids))


def is_normal_form(t: LabeledTree, pointed: bool = False) -> bool:
    for w in t.worlds:
        kids = t.children[w]
        if any(t.lab(c, pointed) == t.lab(w, pointed) for c in kids):
            return False
        keys = [tree_key(t, c, pointed) for c in kids]
        if len(set(keys)) != len(keys):
            return False
    return True


def normalize_tree(t: LabeledTree, pointed: bool = False, prefix: str = "n"):
    """Normal form of t and the condensation (rho, iota) from t onto it.

    With ``pointed`` the point flag is part of every label, so the point's
    image is the only flagged node of the result.
    """
    if pointed and t.point is None:
        raise ValueError("pointed normalization needs a point")
    lab = {w: t.lab(w, pointed) for w in t.worlds}

    # clusters: maximal same-label regions hanging off a cluster root
    frontier: dict = {}
    key: dict = {}
    post = []
    stack = [t.root]
    while stack:
        w = stack.pop()
        post.append(w)
        stack.extend(t.children[w])
    for u in reversed(post):
        out = []
        todo = list(t.children[u])
        while todo:
            c = todo.pop()
            if lab[c] == lab[u]:
                todo.extend(t.children[c])
            else:
                out.append(c)
        frontier[u] = out

    def compute_key(u):
        if u not in key:
            key[u] = (label_key(lab[u]), tuple(sorted({compute_key(c) for c in frontier[u]})))
        return key[u]
    for u in reversed(post):
        compute_key(u)

    # path of keys from the root identifies each node of the normal tree
    path: dict = {t.root: (key[t.root],)}
    cluster_root: dict = {t.root: t.root}
    for w in post:
        if w == t.root:
            continue
        p = t.parent[w]
        if lab[w] == lab[p]:
            cluster_root[w] = cluster_root[p]
        else:
            cluster_root[w] = w
            path[w] = path[cluster_root[p]] + (key[w],)
    rho_path = {w: path[cluster_root[w]] for w in t.worlds}

    # iota picks cluster roots top-down so each image sits above its parent's
    label_of_key = {}
    for w in t.worlds:
        label_of_key.setdefault(key[w], t.label[w])
    rep = {(key[t.root],): t.root}
    order = [(key[t.root],)]
    i = 0
    while i < len(order):
        P = order[i]
        i += 1
        u = rep[P]
        by_key = {}
        for c in frontier[u]:
            by_key.setdefault(key[c], c)
        for ck in P[-1][1]:
            Q = P + (ck,)
            rep[Q] = by_key[ck]
            order.append(Q)

    ids = {P: f"{prefix}{n}" for n, P in enumerate(order)}
    nodes = [ids[P] for P in order]
    parent = {ids[P]: ids[P[:-1]] for P in order if len(P) > 1}
    label = {ids[P]: label_of_key[P[-1]] for P in order}
    point = ids[rho_path[t.point]] if pointed else None
    normal = LabeledTree(nodes, parent, label, point=point)
    rho = {w: ids[rho_path[w]] for w in t.worlds}
    iota = {ids[P]: rep[P] for P in order}
    return normal, Condensation(rho, iota)


def normal_form_bound(t: LabeledTree, pointed: bool = False) -> "BoundValue":
    return bounds("Q", len(t.labels_used(pointed)), level(t, pointed))


# ---------------------------------------------------------------- quasimodels

def label_with_sigma(m: DynamicModel, sigma: ClosureSet) -> LabeledPoset:
    return LabeledPoset(m.worlds, m.order, sigma_labels(m, sigma), close=False)


def is_quasimodel(a: LabeledPoset, sigma: ClosureSet) -> Check:
    problems = []
    for w, v in a.order:
        if not a.label[w] <= a.label[v]:
            problems.append(f"labels not monotone: {w!r} <= {v!r}")
    for g in sigma.members:
        if not isinstance(g, Implies):
            continue
        for w in a.worlds:
            forced = all(g.left not in a.label[v] or g.right in a.label[v] for v in a.up[w])
            if (g in a.label[w]) != forced:
                problems.append(f"implication {print_formula(g)} misjudged at {w!r}")
    return Check(not problems, problems)


def to_model(a: LabeledPoset, succ: Mapping | None = None) -> DynamicModel:
    """Model whose valuation keeps the atoms of each label; succ defaults to identity."""
    succ = succ or {w: w for w in a.worlds}
    val = {w: {g.name for g in a.label[w] if isinstance(g, Atom)} for w in a.worlds}
    return DynamicModel(a.worlds, a.order, succ, val, close=False)


# ---------------------------------------------------------------- bounds

@dataclass(frozen=True)
class BoundValue:
    value: int | None
    expression: str

    @property
    def exact(self) -> bool:
        return self.value is not None

    def admits(self, size: int) -> bool:
        # a symbolic bound is at least 2**(2**20), beyond any tree built here
        return self.value is None or size <= self.value

    def __str__(self) -> str:
        return str(self.value) if self.exact else self.expression


def _e_series(n: int, k: int) -> list:
    """E^n_0..E^n_k, None once an exponent passes the cap."""
    out = [0]
    for _ in range(k):
        prev = out[-1]
        if prev is None or prev > EXPONENT_CAP:
            out.append(None)
        else:
            out.append(prev + n * 2 ** prev)
    return out


def bounds(kind: str, n: int, k: int) -> BoundValue:
    if kind not in ("E", "Q"):
        raise ValueError(f"unknown bound {kind!r}")
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    es = _e_series(n, k)
    if kind == "E":
        return BoundValue(es[k], f"E^{n}_{k}")
    q = 0
    for i in range(1, k + 1):
        q = None if q is None or es[i - 1] is None else 1 + es[i - 1] * q
    return BoundValue(q, f"Q^{n}_{k}")


def bound_B(s: int) -> BoundValue:
    """Size bound on the extracted finite model for |Sigma| = s."""
    if s < 1:
        raise ValueError("need s >= 1")
    a, b = 2 ** (s + 1), 2 ** s
    expr = f"Q^{a}_{s + 3}*(2*E^{b}_{s + 1} + {s}*Q^{b}_{s + 1}*E^{a}_{s + 3})"
    parts = [bounds("Q", a, s + 3), bounds("E", b, s + 1), bounds("Q", b, s + 1),
             bounds("E", a, s + 3)]
    if not all(p.exact for p in parts):
        return BoundValue(None, expr)
    q1, e2, q2, e3 = (p.value for p in parts)
    return BoundValue(q1 * (2 * e2 + s * q2 * e3), expr)


# ---------------------------------------------------------------- tree files

class TreeSyntaxError(ValueError):
    pass


def load_tree(text: str) -> LabeledTree:
    nodes, parent, label, point = [], {}, {}, None
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if not header:
            if toks != ["tree"]:
                raise TreeSyntaxError(f"line {lineno}: expected 'tree' header")
            header = True
            continue
        if toks[0] == "node" and len(toks) == 3:
            nodes.append(toks[1])
            label[toks[1]] = toks[2]
        elif toks[0] == "node" and len(toks) == 5 and toks[3] == "parent":
            nodes.append(toks[1])
            label[toks[1]] = toks[2]
            parent[toks[1]] = toks[4]
        elif toks[0] == "point" and len(toks) == 2:
            point = toks[1]
        else:
            raise TreeSyntaxError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if not header:
        raise TreeSyntaxError("expected 'tree' header")
    if len(set(nodes)) != len(nodes):
        raise TreeSyntaxError("duplicate node id")
    try:
        return LabeledTree(nodes, parent, label, point=point)
    except ValueError as e:
        raise TreeSyntaxError(str(e)) from None


def save_tree(t: LabeledTree) -> str:
    out = ["tree"]
    for w in t.worlds:
        line = f"node {w} {format_label(t.label[w])}"
        if w in t.parent:
            line += f" parent {t.parent[w]}"
        out.append(line)
    if t.point is not None:
        out.append(f"point {t.point}")
    return "\n".join(out) + "\n"
