"""Bounded satisfiability and validity search, and a classical LTL lasso oracle.

The search scans every admissible model up to a world bound, smallest first.
A found witness is re-checked with the evaluator before it is reported.  An
exhausted search is only evidence: completeness needs the size bound
B(|sff|), which is reported next to every verdict.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .formula import (
    And, Atom, Eventually, Falsum, Formula, Henceforth, Implies, Next, Or, atoms,
    subformula_closure,
)
from .labeled import BoundValue, bound_B
from .model import DynamicModel, FrameClass, Kernel, enumerate_kernels, kernel_to_model
from .semantics import Plan, holds, run_plan


class VerificationError(AssertionError):
    """A witness failed re-verification; the search has a bug."""


@dataclass
class SearchStats:
    models_examined: int = 0
    elapsed: float = 0.0


@dataclass(frozen=True)
class Verdict:
    formula: Formula
    frame: FrameClass | None
    bound: int
    theoretical_bound: BoundValue
    stats: SearchStats = field(compare=False, default_factory=SearchStats)

    kind = "verdict"
    found = False


@dataclass(frozen=True)
class Satisfiable(Verdict):
    model: DynamicModel | None = None
    world: str | None = None
    kind = "satisfiable"
    found = True

    def __str__(self) -> str:
        return f"Satisfiable(world={self.world}, worlds={len(self.model.worlds)})"


@dataclass(frozen=True)
class CounterModel(Verdict):
    model: DynamicModel | None = None
    world: str | None = None
    kind = "countermodel"
    found = True

    def __str__(self) -> str:
        return f"CounterModel(world={self.world}, worlds={len(self.model.worlds)})"


@dataclass(frozen=True)
class ExhaustedUpTo(Verdict):
    kind = "exhausted"

    def __str__(self) -> str:
        return f"ExhaustedUpTo({self.bound})"


# ---------------------------------------------------------------- model search

@lru_cache(maxsize=32)
def _kernels(n: int, atom_names: tuple, frame: FrameClass) -> tuple:
    return tuple(enumerate_kernels(n, list(atom_names), frame))


def _kernels_for(n: int, atom_names: tuple, frame: FrameClass):
    # small slices are cached; the 4+ world dynamic slices are streamed
    if n <= 3:
        return _kernels(n, atom_names, frame)
    return enumerate_kernels(n, list(atom_names), frame)


def _first_hit(kernels, plan: Plan, index: int, want: bool, start: int = 0, step: int = 1):
    """Position and world index of the first kernel where the formula's truth is ``want``."""
    count = 0
    for pos, k in enumerate(kernels):
        if pos % step != start:
            continue
        count += 1
        mask = run_plan(plan, k)[index]
        if not want:
            mask = ~mask & ((1 << k.n) - 1)
        if mask:
            return pos, (mask & -mask).bit_length() - 1, count
    return None, None, count


def _worker(args):
    n, atom_names, frame, f, want, start, step = args
    sigma = subformula_closure(f)
    plan = Plan(sigma)
    return _first_hit(_kernels_for(n, atom_names, frame), plan, sigma.index[f], want, start, step)


def _search(f: Formula, frame: FrameClass, max_worlds: int, want: bool, jobs: int):
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    t0 = time.perf_counter()
    sigma = subformula_closure(f)
    plan = Plan(sigma)
    index = sigma.index[f]
    names = tuple(atoms(f))
    stats = SearchStats()
    for n in range(1, max_worlds + 1):
        if jobs > 1:
            with ProcessPoolExecutor(jobs) as pool:
                results = list(pool.map(_worker, [(n, names, frame, f, want, j, jobs)
                                                  for j in range(jobs)]))
            stats.models_examined += sum(r[2] for r in results)
            hits = [r for r in results if r[0] is not None]
            if hits:
                # lowest stream position wins, whatever the worker timing
                pos, world, _ = min(hits)
                kernel = next(itertools.islice(_kernels_for(n, names, frame), pos, None))
                stats.elapsed = time.perf_counter() - t0
                return kernel, world, stats
        else:
            pos, world, count = _first_hit(_kernels_for(n, names, frame), plan, index, want)
            stats.models_examined += count
            if pos is not None:
                kernel = next(itertools.islice(_kernels_for(n, names, frame), pos, None))
                stats.elapsed = time.perf_counter() - t0
                return kernel, world, stats
    stats.elapsed = time.perf_counter() - t0
    return None, None, stats


def _verdict(f, frame, max_worlds, want, jobs):
    kernel, world, stats = _search(f, frame, max_worlds, want, jobs)
    theory = bound_B(len(subformula_closure(f)))
    if kernel is None:
        return ExhaustedUpTo(f, frame, max_worlds, theory, stats)
    model = kernel_to_model(kernel)
    w = model.worlds[world]
    model.validate()
    if holds(model, w, f) != want:
        raise VerificationError(f"witness for {f} at {w} failed re-verification")
    cls = Satisfiable if want else CounterModel
    return cls(f, frame, max_worlds, theory, stats, model, w)


def decide_sat(f: Formula, frame: FrameClass = FrameClass.DYNAMIC, max_worlds: int = 3,
               *, jobs: int = 1) -> Verdict:
    """Look for a model of the class with at most ``max_worlds`` worlds where f holds somewhere."""
    return _verdict(f, frame, max_worlds, True, jobs)


def decide_valid(f: Formula, frame: FrameClass = FrameClass.DYNAMIC, max_worlds: int = 3,
                 *, jobs: int = 1) -> Verdict:
    """Look for a world where f fails (not a world where ~f holds)."""
    return _verdict(f, frame, max_worlds, False, jobs)


# ---------------------------------------------------------------- classical oracle

def _reach(i: int, length: int, loop: int) -> range:
    return range(min(i, loop), length)


def _trace_holds(f: Formula, vals: tuple, loop: int) -> bool:
    """Classical LTL truth of f at position 0 of the lasso trace."""
    length = len(vals)
    memo: dict = {}

    def sat(i: int, g: Formula) -> bool:
        key = (i, g)
        if key in memo:
            return memo[key]
        if isinstance(g, Atom):
            r = g.name in vals[i]
        elif isinstance(g, Falsum):
            r = False
        elif isinstance(g, And):
            r = sat(i, g.left) and sat(i, g.right)
        elif isinstance(g, Or):
            r = sat(i, g.left) or sat(i, g.right)
        elif isinstance(g, Implies):
            r = not sat(i, g.left) or sat(i, g.right)
        elif isinstance(g, Next):
            r = sat(i + 1 if i + 1 < length else loop, g.sub)
        elif isinstance(g, Eventually):
            r = any(sat(x, g.sub) for x in _reach(i, length, loop))
        elif isinstance(g, Henceforth):
            r = all(sat(x, g.sub) for x in _reach(i, length, loop))
        else:
            raise TypeError(g)
        memo[key] = r
        return r

    return sat(0, f)


def lasso_to_model(vals: tuple, loop: int) -> DynamicModel:
    names = [f"t{i}" for i in range(len(vals))]
    succ = {names[i]: names[i + 1] if i + 1 < len(vals) else names[loop]
            for i in range(len(vals))}
    return DynamicModel(names, [], succ, {names[i]: vals[i] for i in range(len(vals))})


def classical_ltl_sat(f: Formula, max_lasso: int = 8) -> Verdict:
    """Search ultimately periodic traces of length <= max_lasso under classical LTL."""
    if max_lasso < 1:
        raise ValueError("max_lasso must be at least 1")
    t0 = time.perf_counter()
    names = atoms(f)
    letters = [frozenset(c) for r in range(len(names) + 1)
               for c in itertools.combinations(names, r)]
    stats = SearchStats()
    theory = bound_B(len(subformula_closure(f)))
    for length in range(1, max_lasso + 1):
        for loop in range(length):
            for vals in itertools.product(letters, repeat=length):
                stats.models_examined += 1
                if _trace_holds(f, vals, loop):
                    model = lasso_to_model(vals, loop)
                    if not holds(model, "t0", f):
                        raise VerificationError(f"lasso for {f} failed re-verification")
                    stats.elapsed = time.perf_counter() - t0
                    return Satisfiable(f, FrameClass.CLASSICAL, max_lasso, theory, stats,
                                       model, "t0")
    stats.elapsed = time.perf_counter() - t0
    return ExhaustedUpTo(f, FrameClass.CLASSICAL, max_lasso, theory, stats)
