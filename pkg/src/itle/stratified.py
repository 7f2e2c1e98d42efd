"""Lasso-stratified models, the stratum transformations, and finite-model extraction.

A lasso is a finite list of tree-shaped strata W_0..W_{m-1}; succ sends W_i
into W_{i+1} and the last stratum back into W_loop.  It presents the
eventually periodic stratified model obtained by unrolling the loop forever.

Stratum indices given to the transformations are positions in that
unrolling.  Before a stratum is modified the lasso is unrolled until the
stratum lies strictly before the loop, so exactly one stratum of the
infinite model is touched, never a whole periodic family of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Mapping

from .formula import Atom, ClosureSet, Eventually, Henceforth
from .labeled import (
    Check, LabeledTree, find_immersion, is_normal_form, normalize_tree,
)
from .model import DynamicModel, check_frame
from .semantics import sigma_labels

World = Hashable


class LassoError(ValueError):
    pass


class NoImmersionError(LassoError):
    pass


@dataclass
class Stratum:
    nodes: list          # root first
    parent: dict = field(default_factory=dict)

    @property
    def root(self):
        return self.nodes[0]

    def ancestors(self, w) -> list:
        out = []
        while w in self.parent:
            w = self.parent[w]
            out.append(w)
        return out


class LassoModel:
    def __init__(self, strata: list, succ: Mapping, valuation: Mapping, loop: int):
        self.strata = [Stratum(list(s.nodes), dict(s.parent)) for s in strata]
        self.succ = dict(succ)
        self.valuation = {w: frozenset(valuation.get(w, ())) for w in self.worlds}
        self.loop = loop

    def __repr__(self) -> str:
        sizes = [len(s.nodes) for s in self.strata]
        return f"LassoModel(strata={sizes}, loop={self.loop})"

    @property
    def worlds(self) -> list:
        return [w for s in self.strata for w in s.nodes]

    def stratum_index(self) -> dict:
        return {w: i for i, s in enumerate(self.strata) for w in s.nodes}

    def next_index(self, i: int) -> int:
        return i + 1 if i + 1 < len(self.strata) else self.loop

    def period(self) -> int:
        return len(self.strata) - self.loop

    def copy(self) -> "LassoModel":
        return LassoModel(self.strata, self.succ, self.valuation, self.loop)

    def order_pairs(self) -> list:
        pairs = []
        for s in self.strata:
            for w in s.nodes:
                pairs.append((w, w))
                pairs.extend((a, w) for a in s.ancestors(w))
        return pairs


@dataclass
class LassoReport:
    problems: list
    expanding: bool
    expanding_witness: tuple | None = None

    @property
    def valid(self) -> bool:
        return not self.problems


def validate_lasso(m: LassoModel) -> LassoReport:
    problems = []
    if not m.strata or not 0 <= m.loop < len(m.strata):
        problems.append(("loop", m.loop))
        return LassoReport(problems, False)
    seen = set()
    for i, s in enumerate(m.strata):
        if not s.nodes:
            problems.append(("empty stratum", i))
        for w in s.nodes:
            if w in seen:
                problems.append(("duplicate world", w))
            seen.add(w)
        members = set(s.nodes)
        for c, p in s.parent.items():
            if c not in members or p not in members:
                problems.append(("closed", i, c, p))
        if s.nodes and s.root in s.parent:
            problems.append(("tree", i, s.root))
        for w in s.nodes[1:]:
            if w not in s.parent:
                problems.append(("tree", i, w))
        for w in s.nodes:
            chain = {w}
            a = w
            while a in s.parent:
                a = s.parent[a]
                if a in chain:
                    problems.append(("tree", i, w))
                    break
                chain.add(a)
    if problems:
        return LassoReport(problems, False)
    where = m.stratum_index()
    for w in m.worlds:
        if w not in m.succ:
            problems.append(("succ undefined", w))
        elif where.get(m.succ[w]) != m.next_index(where[w]):
            problems.append(("succ", w, m.succ[w]))
    if problems:
        return LassoReport(problems, False)
    flat = _flatten_unchecked(m)
    report = check_frame(flat)
    if not report.is_confluent:
        problems.append(("confluence",) + report.confluence_witness)
    if not report.is_monotone:
        problems.append(("monotonicity",) + report.monotonicity_witness)
    witness = None
    for s in m.strata:
        for w, v in itertools.product(s.nodes, s.nodes):
            if flat.leq(m.succ[w], m.succ[v]) and not flat.leq(w, v):
                witness = (w, v)
                break
        if witness:
            break
    return LassoReport(problems, witness is None, witness)


def _flatten_unchecked(m: LassoModel) -> DynamicModel:
    return DynamicModel(m.worlds, m.order_pairs(), m.succ, m.valuation, close=False, validate=False)


def flatten(m: LassoModel) -> DynamicModel:
    report = validate_lasso(m)
    if not report.valid:
        raise LassoError(f"invalid lasso: {report.problems[0]}")
    return _flatten_unchecked(m)


def lasso_labels(m: LassoModel, sigma: ClosureSet) -> dict:
    return sigma_labels(_flatten_unchecked(m), sigma)


def stratum_tree(m: LassoModel, k: int, labels: Mapping, point=None) -> LabeledTree:
    s = m.strata[k]
    return LabeledTree(s.nodes, s.parent, {w: labels[w] for w in s.nodes}, point=point)


class _Fresh:
    def __init__(self, used):
        self.used = set(used)
        self.counter = itertools.count()

    def __call__(self) -> str:
        while True:
            name = f"n{next(self.counter)}"
            if name not in self.used:
                self.used.add(name)
                return name


def unroll(m: LassoModel) -> tuple[LassoModel, dict]:
    """Append one fresh copy of the loop and move the loop index onto it.

    Returns the new lasso and the map sending every world to the world of m
    it copies.
    """
    fresh = _Fresh(m.worlds)
    copy = {}
    new_strata = list(m.strata)
    for s in m.strata[m.loop:]:
        for w in s.nodes:
            copy[w] = fresh()
        new_strata.append(Stratum([copy[w] for w in s.nodes],
                                  {copy[c]: copy[p] for c, p in s.parent.items()}))
    last = set(m.strata[-1].nodes)
    succ = {}
    for w in m.worlds:
        succ[w] = copy[m.succ[w]] if w in last else m.succ[w]
    for w, c in copy.items():
        succ[c] = copy[m.succ[w]]
    val = dict(m.valuation)
    val.update({c: m.valuation[w] for w, c in copy.items()})
    back = {w: w for w in m.worlds}
    back.update({c: w for w, c in copy.items()})
    return LassoModel(new_strata, succ, val, len(m.strata)), back


def ensure_prefix(m: LassoModel, index: int) -> tuple[LassoModel, dict]:
    """Unroll until stratum ``index`` lies before the loop."""
    pi = {w: w for w in m.worlds}
    while m.loop <= index:
        m, back = unroll(m)
        pi = {w: pi[back[w]] for w in m.worlds}
    return m, pi


def _check_index(m: LassoModel, *indices: int) -> None:
    for k in indices:
        if not 0 <= k < len(m.strata):
            raise IndexError(f"stratum index {k} out of range 0..{len(m.strata) - 1}")


# ---------------------------------------------------------------- transformations
# The underscored versions assume every touched stratum is already before the loop.

def _normalize(m: LassoModel, k: int, sigma: ClosureSet, point=None, labels=None):
    labels = labels if labels is not None else lasso_labels(m, sigma)
    tree = stratum_tree(m, k, labels, point)
    normal, c = normalize_tree(tree, pointed=point is not None)
    fresh = _Fresh(m.worlds)
    rename = {x: fresh() for x in normal.worlds}
    rho = {w: rename[x] for w, x in c.rho.items()}
    iota = {rename[x]: w for x, w in c.iota.items()}
    old = set(m.strata[k].nodes)

    strata = list(m.strata)
    strata[k] = Stratum([rename[x] for x in normal.worlds],
                        {rename[a]: rename[b] for a, b in normal.parent.items()})
    succ, val = {}, {}
    for w in m.worlds:
        if w in old:
            continue
        x = m.succ[w]
        succ[w] = rho[x] if x in old else x
        val[w] = m.valuation[w]
    for x in normal.worlds:
        y = rename[x]
        s = m.succ[iota[y]]
        succ[y] = rho[s] if s in old else s
        val[y] = {g.name for g in normal.label[x] if isinstance(g, Atom)}
    pi = {w: w for w in m.worlds if w not in old}
    pi.update(iota)
    new_point = rho[point] if point is not None else None
    return LassoModel(strata, succ, val, m.loop), pi, new_point


def _collapse(m: LassoModel, k: int, l: int, sigma: ClosureSet, points=None, labels=None):
    labels = labels if labels is not None else lasso_labels(m, sigma)
    pk, pl = points if points else (None, None)
    tk = stratum_tree(m, k, labels, pk)
    tl = stratum_tree(m, l, labels, pl)
    sigma_map = find_immersion(tk, tl, pointed=points is not None)
    if sigma_map is None:
        raise NoImmersionError(f"no immersion from stratum {k} into stratum {l}")
    strata = m.strata[:k + 1] + m.strata[l + 1:]
    keep = {w for s in strata for w in s.nodes}
    in_k = set(m.strata[k].nodes)
    succ = {w: (m.succ[sigma_map[w]] if w in in_k else m.succ[w]) for w in keep}
    val = {w: m.valuation[w] for w in keep}
    pi = {w: (sigma_map[w] if w in in_k else w) for w in keep}
    return LassoModel(strata, succ, val, m.loop - (l - k)), pi


def _compose(pi_new: dict, pi_old: dict) -> dict:
    return {w: pi_old[v] for w, v in pi_new.items()}


def transform_normalize_stratum(m: LassoModel, k: int, sigma: ClosureSet):
    """Replace stratum k by a fresh copy of its normalized Sigma-labeled tree.

    Returns (m', pi) with Sigma_{m'}(w) == Sigma_m(pi(w)) for every world w of m'.
    """
    _check_index(m, k)
    work, pi0 = ensure_prefix(m, k)
    out, pi, _ = _normalize(work, k, sigma)
    return out, _compose(pi, pi0)


def transform_normalize_stratum_pointed(m: LassoModel, k: int, w: World, sigma: ClosureSet):
    """Pointed variant: returns (m', pi, w') where w' is the image of w."""
    _check_index(m, k)
    if w not in m.strata[k].nodes:
        raise LassoError(f"{w!r} is not in stratum {k}")
    work, pi0 = ensure_prefix(m, k)
    out, pi, point = _normalize(work, k, sigma, point=w)
    return out, _compose(pi, pi0), point


def transform_collapse(m: LassoModel, k: int, l: int, sigma: ClosureSet):
    """Drop strata k+1..l, routing succ out of W_k through an immersion W_k -> W_l."""
    if not k < l:
        raise IndexError("collapse needs k < l")
    _check_index(m, k, l)
    work, pi0 = ensure_prefix(m, l)
    out, pi = _collapse(work, k, l, sigma)
    return out, _compose(pi, pi0)


def transform_collapse_connect(m: LassoModel, k: int, l: int, wk: World, wl: World,
                               sigma: ClosureSet):
    """As transform_collapse, with a pointed immersion sending wk to wl."""
    if not k < l:
        raise IndexError("collapse needs k < l")
    _check_index(m, k, l)
    if wk not in m.strata[k].nodes or wl not in m.strata[l].nodes:
        raise LassoError("connected worlds must lie in strata k and l")
    work, pi0 = ensure_prefix(m, l)
    out, pi = _collapse(work, k, l, sigma, points=(wk, wl))
    return out, _compose(pi, pi0)


# ---------------------------------------------------------------- extraction

@dataclass
class Extraction:
    model: LassoModel
    root: World
    points: dict          # stratum index -> point, for strata normalized pointed
    j: int
    steps: list


def extract_finite_model(m: LassoModel, sigma: ClosureSet) -> Extraction:
    """Three-phase extraction of a small lasso with the same Sigma-set at the root.

    Every stratum of the result is a normalized (pointed, where recorded)
    Sigma-quasimodel.  Strata are unrolled from the input only when the
    procedure reaches them.
    """
    report = validate_lasso(m)
    if not report.valid:
        raise LassoError(f"invalid lasso: {report.problems[0]}")
    work = m.copy()
    points: dict = {}
    steps: list = []
    sizes = sum(len(s.nodes) for s in m.strata)
    cap = 100 + 20 * (len(m.strata) + 1) * (sizes + 1) * (len(sigma) + 1)
    budget = itertools.count()

    def tick():
        if next(budget) > cap:
            raise RuntimeError(f"extraction exceeded {cap} steps; last: {steps[-6:]}")

    def prefix(i):
        nonlocal work
        work, _ = ensure_prefix(work, i)
        return lasso_labels(work, sigma)

    def tree(k, labels, point=None):
        return stratum_tree(work, k, labels, point)

    def immerses(k, l, labels, pk=None, pl=None) -> bool:
        pointed = pk is not None
        return find_immersion(tree(k, labels, pk), tree(l, labels, pl), pointed=pointed) is not None

    def normalize(i, labels, point=None):
        nonlocal work
        work, _, new_point = _normalize(work, i, sigma, point=point, labels=labels)
        points.pop(i, None)
        if point is not None:
            points[i] = new_point
        steps.append(("normalize", i) if point is None else ("normalize-pointed", i))

    def collapse(k, i, labels, pk=None, pi_=None):
        nonlocal work
        pts = (pk, pi_) if pk is not None else None
        work, _ = _collapse(work, k, i, sigma, points=pts, labels=labels)
        for x in [x for x in points if x > k]:
            points.pop(x)
        steps.append(("collapse", k, i) if pts is None else ("collapse-connect", k, i))

    # first phase.  Recurrence is tested before the backward collapse: on a
    # periodic tail the collapse alone can fire forever, each time eating
    # one more copy of the loop.
    i = 0
    while True:
        tick()
        labels = prefix(i)
        if any(immerses(y, i, labels) for y in range(work.loop, len(work.strata))):
            normalize(i, labels)
            j = ell = i
            i += 1
            break
        back = next((k for k in range(i) if immerses(k, i, labels)), None)
        if back is not None:
            collapse(back, i, labels)
            i = back + 1
        else:
            normalize(i, labels)
            i += 1
    steps.append(("phase2", i, j))

    # second phase
    current = None  # (world in W_j, formula)
    while True:
        tick()
        labels = prefix(i)
        path = None
        if current is not None:
            path = _fulfillment_path(work, labels, *current)
            if j + len(path) - 1 <= i:
                current = None
                ell = i
                continue
        if current is None:
            current = _choose_eventuality(work, labels, sigma, j, i)
            if current is None:
                break
            path = _fulfillment_path(work, labels, *current)
        w_i = path[i - j]
        back = next(
            (k for k in range(ell + 1, i) if immerses(k, i, labels, path[k - j], w_i)), None
        )
        if back is not None:
            collapse(back, i, labels, path[back - j], w_i)
            i = back + 1
        else:
            normalize(i, labels, point=w_i)
            i += 1
    steps.append(("phase3", i, ell))

    # third phase
    while True:
        tick()
        labels = prefix(i)
        if immerses(i, j, labels):
            break
        back = next((k for k in range(ell + 1, i) if immerses(k, i, labels)), None)
        if back is not None:
            collapse(back, i, labels)
            i = back + 1
        else:
            normalize(i, labels)
            i += 1

    # final step: close the loop from W_{i-1} through an immersion W_i -> W_j
    sigma_map = find_immersion(tree(i, labels), tree(j, labels))
    strata = work.strata[:i]
    keep = {w for s in strata for w in s.nodes}
    last = set(work.strata[i - 1].nodes)
    succ = {w: (sigma_map[work.succ[w]] if w in last else work.succ[w]) for w in keep}
    val = {w: work.valuation[w] for w in keep}
    final = LassoModel(strata, succ, val, j)
    steps.append(("final", i, j))
    return Extraction(final, strata[0].root, {k: p for k, p in points.items() if k < i}, j, steps)


def _fulfillment_path(m: LassoModel, labels: Mapping, w, formula) -> list:
    target = isinstance(formula, Eventually)
    path = [w]
    while (formula.sub in labels[path[-1]]) != target:
        path.append(m.succ[path[-1]])
        if len(path) > len(labels):
            raise AssertionError("fulfillment longer than the model")
    return path


def _choose_eventuality(m: LassoModel, labels, sigma: ClosureSet, j: int, i: int):
    for w in m.strata[j].nodes:
        for g in sigma.members:
            if isinstance(g, Eventually) and g in labels[w]:
                pass
            elif isinstance(g, Henceforth) and g not in labels[w]:
                pass
            else:
                continue
            if j + len(_fulfillment_path(m, labels, w, g)) - 1 > i:
                return (w, g)
    return None


def strata_normal(ex: Extraction, sigma: ClosureSet) -> bool:
    """Every stratum of the extracted lasso is in (pointed) normal form."""
    labels = lasso_labels(ex.model, sigma)
    for k in range(len(ex.model.strata)):
        point = ex.points.get(k)
        t = stratum_tree(ex.model, k, labels, point)
        if not is_normal_form(t, pointed=point is not None):
            return False
    return True


# ---------------------------------------------------------------- stratification prefix

def defect_order(sigma_size: int):
    """Triples (x, y, rank) by ascending x + y + rank, ties lexicographic."""
    limit = 2 ** sigma_size
    for total in itertools.count():
        for x in range(total + 1):
            for y in range(total - x + 1):
                r = total - x - y
                if r < limit:
                    yield (x, y, r)


def subset_of_rank(sigma: ClosureSet, rank: int) -> frozenset:
    return frozenset(g for b, g in enumerate(sigma.members) if rank >> b & 1)


@dataclass
class StratifyFragment:
    nodes: list            # (column, time) pairs
    parent: dict           # child -> parent, both at the same time
    h: dict                # node -> world of the base model
    valuation: dict
    steps: int
    position: int          # next index into the defect order
    applied: list          # (k, x, y, rank, v) for every defect that spawned a column
    base: DynamicModel = field(repr=False)

    def below(self, node) -> list:
        out = []
        while node in self.parent:
            node = self.parent[node]
            out.append(node)
        return out


def stratify_prefix(m: DynamicModel, w: World, sigma: ClosureSet, defect_steps: int,
                    time_depth: int) -> StratifyFragment:
    """First ``defect_steps`` steps of the stratification, truncated at ``time_depth``."""
    labels = sigma_labels(m, sigma)
    h = {}
    x = w
    for y in range(time_depth):
        h[(0, y)] = x
        x = m.succ[x]
    nodes = list(h)
    parent: dict = {}
    applied = []
    order = defect_order(len(sigma))
    for k in range(defect_steps):
        x, y, rank = next(order)
        assert x <= k, "defect order must put column x no later than step x"
        if (x, y) not in h:
            continue
        S = subset_of_rank(sigma, rank)
        base = h[(x, y)]
        if labels[base] == S:
            continue
        v = next((u for u in m.worlds if m.leq(base, u) and labels[u] == S), None)
        if v is None:
            continue
        col = k + 1
        u = v
        for d in range(y, time_depth):
            h[(col, d)] = u
            parent[(col, d)] = (x, d)
            nodes.append((col, d))
            u = m.succ[u]
        applied.append((k, x, y, rank, v))
    val = {n: m.valuation[h[n]] for n in nodes}
    frag = StratifyFragment(nodes, parent, h, val, defect_steps, defect_steps, applied, m)
    report = check_fragment(frag)
    assert report.ok, report.problems
    return frag


def check_fragment(frag: StratifyFragment) -> Check:
    problems = []
    m = frag.base
    for node in frag.nodes:
        for anc in frag.below(node):
            (x, y), (x2, y2) = anc, node
            if not (x <= x2 and y == y2):
                problems.append(f"{anc} <= {node} breaks column/time order")
            if not m.leq(frag.h[anc], frag.h[node]):
                problems.append(f"h not monotone on {anc} <= {node}")
            if not frag.valuation[anc] <= frag.valuation[node]:
                problems.append(f"valuation not monotone on {anc} <= {node}")
        if frag.valuation[node] != m.valuation[frag.h[node]]:
            problems.append(f"valuation at {node} is not pulled back from h")
        col, t = node
        if (col, t + 1) in frag.h and frag.h[(col, t + 1)] != m.succ[frag.h[node]]:
            problems.append(f"h does not follow succ along column {col}")
    for child, par in frag.parent.items():
        up = ((child[0], child[1] + 1), (par[0], par[1] + 1))
        if up[0] in frag.h and frag.parent.get(up[0]) != up[1]:
            problems.append(f"edge {par}->{child} not repeated one step later")
    return Check(not problems, problems)


# ---------------------------------------------------------------- lasso files

def load_lasso(text: str) -> LassoModel:
    strata: list = []
    succ, val = {}, {}
    loop = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if loop is None:
            if len(toks) != 3 or toks[:2] != ["lasso", "loop"] or not toks[2].isdigit():
                raise LassoError(f"line {lineno}: expected 'lasso loop <j>'")
            loop = int(toks[2])
            continue
        kw = toks[0]
        if kw == "stratum" and len(toks) == 1:
            strata.append(Stratum([], {}))
        elif kw == "node" and len(toks) in (2, 4):
            if not strata:
                raise LassoError(f"line {lineno}: node before any stratum")
            strata[-1].nodes.append(toks[1])
            if len(toks) == 4:
                if toks[2] != "parent":
                    raise LassoError(f"line {lineno}: expected 'parent'")
                strata[-1].parent[toks[1]] = toks[3]
        elif kw == "succ" and len(toks) == 3:
            if toks[1] in succ:
                raise LassoError(f"line {lineno}: succ({toks[1]}) defined twice")
            succ[toks[1]] = toks[2]
        elif kw == "val" and len(toks) >= 2:
            val.setdefault(toks[1], set()).update(toks[2:])
        else:
            raise LassoError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if loop is None:
        raise LassoError("empty lasso file")
    for s in strata:
        roots = [w for w in s.nodes if w not in s.parent]
        if len(roots) == 1:
            s.nodes.remove(roots[0])
            s.nodes.insert(0, roots[0])
    known = {w for s in strata for w in s.nodes}
    for w in list(succ) + list(val):
        if w not in known:
            raise LassoError(f"unknown world {w!r}")
    m = LassoModel(strata, succ, val, loop)
    report = validate_lasso(m)
    if not report.valid:
        raise LassoError(f"invalid lasso: {report.problems[0]}")
    return m


def save_lasso(m: LassoModel) -> str:
    out = [f"lasso loop {m.loop}"]
    for s in m.strata:
        out.append("stratum")
        for w in s.nodes:
            out.append(f"node {w} parent {s.parent[w]}" if w in s.parent else f"node {w}")
        for w in s.nodes:
            out.append(f"succ {w} {m.succ[w]}")
    for w in m.worlds:
        if m.valuation[w]:
            out.append(f"val {w} " + " ".join(sorted(m.valuation[w])))
    return "\n".join(out) + "\n"
