"""Satisfaction over finite dynamic models.

Truth sets are computed bottom-up over the subformula closure as bitmasks on
world indices.  On a finite model every successor orbit is eventually
periodic, so F and G are least and greatest fixpoints on the functional
graph of ``succ``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .formula import (
    And, Atom, ClosureSet, Eventually, Falsum, Formula, Henceforth, Implies, Next, Or,
    subformula_closure,
)
from .model import DynamicModel, Kernel, World, worlds_of_mask

ATOM, FALSE, AND, OR, IMP, NEXT, EV, HB = range(8)

_OPCODE = {And: AND, Or: OR, Implies: IMP, Next: NEXT, Eventually: EV, Henceforth: HB}


class Plan:
    """A closure set compiled to a list of (opcode, arg, arg) steps."""

    def __init__(self, sigma: ClosureSet):
        self.sigma = sigma
        steps = []
        for g in sigma.members:
            if isinstance(g, Atom):
                steps.append((ATOM, g.name, None))
            elif isinstance(g, Falsum):
                steps.append((FALSE, None, None))
            else:
                kids = [sigma.index[c] for c in g.children()]
                steps.append((_OPCODE[type(g)], kids[0], kids[1] if len(kids) > 1 else None))
        self.steps = steps


def run_plan(plan: Plan, k: Kernel) -> list[int]:
    n = k.n
    full = (1 << n) - 1
    up, succ = k.up, k.succ
    out = [0] * len(plan.steps)
    for idx, (op, a, b) in enumerate(plan.steps):
        if op == ATOM:
            m = k.val.get(a, 0)
        elif op == FALSE:
            m = 0
        elif op == AND:
            m = out[a] & out[b]
        elif op == OR:
            m = out[a] | out[b]
        elif op == IMP:
            bad = out[a] & ~out[b] & full
            m = 0
            for i in range(n):
                if not up[i] & bad:
                    m |= 1 << i
        elif op == NEXT:
            s = out[a]
            m = 0
            for i in range(n):
                if s >> succ[i] & 1:
                    m |= 1 << i
        elif op == EV:
            m = out[a]
            while True:
                grown = m
                for i in range(n):
                    if m >> succ[i] & 1:
                        grown |= 1 << i
                if grown == m:
                    break
                m = grown
        else:  # HB
            m = out[a]
            while True:
                shrunk = m
                for i in range(n):
                    if not m >> succ[i] & 1:
                        shrunk &= ~(1 << i)
                if shrunk == m:
                    break
                m = shrunk
        out[idx] = m
    return out


class TruthAssignment:
    """Truth sets of every member of a closure set on one model."""

    def __init__(self, model: DynamicModel, sigma: ClosureSet, masks: list[int]):
        self.model = model
        self.sigma = sigma
        self.masks = masks

    def mask(self, f: Formula) -> int:
        return self.masks[self.sigma.index[f]]

    def __getitem__(self, f: Formula) -> frozenset:
        return worlds_of_mask(self.model, self.mask(f))

    def holds(self, w: World, f: Formula) -> bool:
        return bool(self.mask(f) >> self.model.index[w] & 1)

    def items(self):
        for g in self.sigma.members:
            yield g, self[g]

    def label(self, w: World) -> frozenset:
        i = self.model.index[w]
        return frozenset(g for g, m in zip(self.sigma.members, self.masks) if m >> i & 1)


def evaluate(m: DynamicModel, f: Formula | ClosureSet) -> TruthAssignment:
    sigma = f if isinstance(f, ClosureSet) else subformula_closure(f)
    return TruthAssignment(m, sigma, run_plan(Plan(sigma), m.kernel))


def holds(m: DynamicModel, w: World, f: Formula) -> bool:
    if w not in m.index:
        raise KeyError(f"unknown world {w!r}")
    return evaluate(m, f).holds(w, f)


def sigma_set(m: DynamicModel, sigma: ClosureSet, w: World) -> frozenset:
    return evaluate(m, sigma).label(w)


def sigma_labels(m: DynamicModel, sigma: ClosureSet) -> dict:
    """sigma_set for every world at once."""
    t = evaluate(m, sigma)
    return {w: t.label(w) for w in m.worlds}


# ---------------------------------------------------------------- eventualities

@dataclass(frozen=True)
class Eventuality:
    world: World
    formula: Formula  # Eventually(...) holding, or Henceforth(...) failing

    @property
    def positive(self) -> bool:
        return isinstance(self.formula, Eventually)


def eventualities(m: DynamicModel, sigma: ClosureSet) -> list[Eventuality]:
    t = evaluate(m, sigma)
    out = []
    for w in m.worlds:
        for g in sigma.members:
            if isinstance(g, Eventually) and t.holds(w, g):
                out.append(Eventuality(w, g))
            elif isinstance(g, Henceforth) and not t.holds(w, g):
                out.append(Eventuality(w, g))
    return out


def fulfillment(m: DynamicModel, e: Eventuality) -> list:
    """The successor path from e.world up to the first world discharging e."""
    f = e.formula
    if not isinstance(f, (Eventually, Henceforth)):
        raise ValueError(f"not an eventuality formula: {f}")
    t = evaluate(m, f)
    if t.holds(e.world, f) != isinstance(f, Eventually):
        raise ValueError(f"({e.world}, {f}) is not an eventuality of the model")
    target = isinstance(f, Eventually)
    path = [e.world]
    while t.holds(path[-1], f.sub) != target:
        path.append(m.succ[path[-1]])
        if len(path) > len(m.worlds):
            raise AssertionError("fulfillment longer than the model")
    return path


# ---------------------------------------------------------------- classical oracle

def classical_evaluate(m: DynamicModel, f: Formula) -> dict:
    """Truth sets under classical clauses, computed world by world.

    Independent of :func:`evaluate`: temporal operators unroll the successor
    orbit explicitly and implication is material.
    """
    if not m.is_classical():
        raise ValueError("classical evaluation needs the identity order")
    sigma = subformula_closure(f)
    memo: dict = {}

    def orbit(w):
        seen = []
        while w not in seen:
            seen.append(w)
            w = m.succ[w]
        return seen

    def sat(w, g) -> bool:
        key = (w, g)
        if key in memo:
            return memo[key]
        if isinstance(g, Atom):
            r = g.name in m.valuation[w]
        elif isinstance(g, Falsum):
            r = False
        elif isinstance(g, And):
            r = sat(w, g.left) and sat(w, g.right)
        elif isinstance(g, Or):
            r = sat(w, g.left) or sat(w, g.right)
        elif isinstance(g, Implies):
            r = (not sat(w, g.left)) or sat(w, g.right)
        elif isinstance(g, Next):
            r = sat(m.succ[w], g.sub)
        elif isinstance(g, Eventually):
            r = any(sat(v, g.sub) for v in orbit(w))
        elif isinstance(g, Henceforth):
            r = all(sat(v, g.sub) for v in orbit(w))
        else:
            raise TypeError(g)
        memo[key] = r
        return r

    return {g: frozenset(w for w in m.worlds if sat(w, g)) for g in sigma.members}


def upward_closed(m: DynamicModel, worlds: Iterable) -> bool:
    s = set(worlds)
    return all(v in s for w in s for v in m.up[w])
