"""Seeded random models, lassos, trees and formulas for tests and experiments."""

from __future__ import annotations

import random

from .formula import (
    FALSUM, And, Atom, ClosureSet, Eventually, Formula, Henceforth, Implies, Next, Or,
    size, subformula_closure,
)
from .labeled import LabeledTree
from .model import DynamicModel, reflexive_transitive_closure
from .stratified import LassoModel, Stratum

_BINARY = (And, Or, Implies)
_UNARY = (Next, Eventually, Henceforth)


def random_formula(rng: random.Random, atoms: list[str], max_size: int = 8) -> Formula:
    """A formula with at most ``max_size`` AST nodes."""
    budget = rng.randint(1, max_size)

    def build(n: int) -> Formula:
        if n <= 1:
            return FALSUM if rng.random() < 0.1 else Atom(rng.choice(atoms))
        if n == 2 or rng.random() < 0.4:
            op = rng.choice(_UNARY) if n == 2 else rng.choice(_UNARY + (Implies,))
            if op is Implies:
                return Implies(build(n - 2), FALSUM)
            return op(build(n - 1))
        left = rng.randint(1, n - 2)
        return rng.choice(_BINARY)(build(left), build(n - 1 - left))

    f = build(budget)
    assert size(f) <= max_size
    return f


def random_sigma(rng: random.Random, atoms: list[str], max_card: int = 7) -> ClosureSet:
    while True:
        sigma = subformula_closure(random_formula(rng, atoms, max_card))
        if len(sigma) <= max_card:
            return sigma


def random_poset(rng: random.Random, n: int, density: float = 0.35) -> list[tuple]:
    """Order pairs of a random partial order on 0..n-1 (closed)."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    perm = list(range(n))
    rng.shuffle(perm)
    pairs = [(perm[i], perm[j]) for i, j in pairs]
    return sorted(reflexive_transitive_closure(range(n), pairs))


def confluent_successor(rng: random.Random, n: int, order: set) -> list[int]:
    """A random succ on 0..n-1 with w <= v implying succ(w) <= succ(v).

    Backtracking; a constant map always succeeds, so this never fails.
    """
    succ: list = [None] * n

    def ok(w, s) -> bool:
        for v in range(n):
            if succ[v] is None:
                continue
            if (w, v) in order and (s, succ[v]) not in order:
                return False
            if (v, w) in order and (succ[v], s) not in order:
                return False
        return True

    def go(w) -> bool:
        if w == n:
            return True
        choices = list(range(n))
        rng.shuffle(choices)
        for s in choices:
            if ok(w, s):
                succ[w] = s
                if go(w + 1):
                    return True
                succ[w] = None
        return False

    assert go(0)
    return succ


def random_up_set(rng: random.Random, up: dict, worlds: list, p: float = 0.3) -> set:
    out = set()
    for w in worlds:
        if rng.random() < p:
            out |= up[w]
    return out


def random_model(rng: random.Random, max_worlds: int = 6, atoms=("p", "q"),
                 density: float = 0.35) -> DynamicModel:
    n = rng.randint(1, max_worlds)
    order = set(random_poset(rng, n, density))
    succ = confluent_successor(rng, n, order)
    names = [f"w{i}" for i in range(n)]
    up = {names[i]: {names[j] for (a, j) in order if a == i} for i in range(n)}
    val = {w: set() for w in names}
    for a in atoms:
        for w in random_up_set(rng, up, names):
            val[w].add(a)
    return DynamicModel(names, [(names[a], names[b]) for a, b in order],
                        {names[i]: names[succ[i]] for i in range(n)}, val, close=False)


def random_classical_model(rng: random.Random, max_worlds: int = 6, atoms=("p", "q")):
    n = rng.randint(1, max_worlds)
    names = [f"w{i}" for i in range(n)]
    succ = {w: rng.choice(names) for w in names}
    val = {w: {a for a in atoms if rng.random() < 0.5} for w in names}
    return DynamicModel(names, [], succ, val)


def random_tree(rng: random.Random, max_nodes: int = 12, labels=("A", "B", "C")) -> LabeledTree:
    n = rng.randint(1, max_nodes)
    nodes = [f"t{i}" for i in range(n)]
    parent = {nodes[i]: nodes[rng.randrange(i)] for i in range(1, n)}
    label = {w: rng.choice(labels) for w in nodes}
    return LabeledTree(nodes, parent, label)


def _random_stratum(rng: random.Random, prefix: str, max_nodes: int) -> Stratum:
    n = rng.randint(1, max_nodes)
    nodes = [f"{prefix}{i}" for i in range(n)]
    return Stratum(nodes, {nodes[i]: nodes[rng.randrange(i)] for i in range(1, n)})


def random_lasso(rng: random.Random, max_strata: int = 4, max_nodes: int = 4,
                 atoms=("p", "q")) -> LassoModel:
    """A valid lasso: succ between strata respects the tree orders."""
    m = rng.randint(1, max_strata)
    strata = [_random_stratum(rng, "abcdefgh"[i], max_nodes) for i in range(m)]
    loop = rng.randrange(m)
    succ = {}
    for i, s in enumerate(strata):
        target = strata[i + 1] if i + 1 < m else strata[loop]
        above = {w: {w} for w in target.nodes}
        for w in target.nodes:
            for a in target.ancestors(w):
                above[a].add(w)
        for w in s.nodes:  # parents come first
            if w in s.parent:
                succ[w] = rng.choice(sorted(above[succ[s.parent[w]]]))
            else:
                succ[w] = rng.choice(target.nodes)
    val = {}
    for s in strata:
        up = {w: {w} for w in s.nodes}
        for w in s.nodes:
            for a in s.ancestors(w):
                up[a].add(w)
        for a in atoms:
            for w in random_up_set(rng, up, s.nodes):
                val.setdefault(w, set()).add(a)
    return LassoModel(strata, succ, val, loop)
