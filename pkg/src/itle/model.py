"""Finite dynamic posets with valuations.

A model is a finite partial order with a total successor function that is
forward confluent (``w <= v`` implies ``succ(w) <= succ(v)``) and a valuation
that is monotone along the order.  Worlds are arbitrary hashable ids; the text
format restricts them to identifiers.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Mapping

from .formula import Atom, Formula, Next

World = Hashable


class ModelError(ValueError):
    """Base class for malformed models and model files."""


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownWorldError(ModelError):
    pass


class SuccessorError(ModelError):
    pass


class AntisymmetryError(ModelError):
    def __init__(self, witness):
        super().__init__(f"order is not antisymmetric: {witness[0]} <= {witness[1]} <= {witness[0]}")
        self.witness = witness


class ConfluenceError(ModelError):
    def __init__(self, witness, succ):
        w, v = witness
        super().__init__(
            f"confluence fails at ({w}, {v}): {w} <= {v} but succ({w})={succ[w]} "
            f"is not below succ({v})={succ[v]}"
        )
        self.witness = witness


class MonotonicityError(ModelError):
    def __init__(self, witness):
        super().__init__(f"valuation not monotone: {witness[0]} <= {witness[1]}")
        self.witness = witness


class FrameClass(enum.Enum):
    DYNAMIC = "dynamic"
    PERSISTENT = "persistent"
    CLASSICAL = "classical"


def reflexive_transitive_closure(worlds: Iterable[World], pairs: Iterable[tuple]) -> frozenset:
    worlds = list(worlds)
    up = {w: {w} for w in worlds}
    for a, b in pairs:
        up[a].add(b)
    changed = True
    while changed:
        changed = False
        for w in worlds:
            reach = set(up[w])
            for v in up[w]:
                reach |= up[v]
            if len(reach) != len(up[w]):
                up[w] = reach
                changed = True
    return frozenset((w, v) for w in worlds for v in up[w])


class DynamicModel:
    """A finite world set with order, successor map and valuation.

    ``order`` is kept as a set of pairs (a, b) meaning a <= b.  With
    ``close=True`` the given pairs are treated as generators and closed
    reflexively and transitively.  ``validate=False`` builds the structure
    without checking any frame condition; use :func:`check_frame` on it.
    """

    def __init__(
        self,
        worlds: Iterable[World],
        order: Iterable[tuple],
        succ: Mapping,
        valuation: Mapping | None = None,
        *,
        close: bool = True,
        validate: bool = True,
    ):
        self.worlds: tuple = tuple(worlds)
        if len(set(self.worlds)) != len(self.worlds):
            raise ModelError("duplicate world id")
        known = set(self.worlds)
        pairs = list(order)
        for a, b in pairs:
            for x in (a, b):
                if x not in known:
                    raise UnknownWorldError(f"unknown world {x!r} in order")
        self.order: frozenset = (
            reflexive_transitive_closure(self.worlds, pairs) if close else frozenset(pairs)
        )
        self.succ: dict = dict(succ)
        for a, b in self.succ.items():
            for x in (a, b):
                if x not in known:
                    raise UnknownWorldError(f"unknown world {x!r} in succ")
        missing = [w for w in self.worlds if w not in self.succ]
        if missing:
            raise SuccessorError(f"succ undefined at {missing[0]!r}")
        valuation = valuation or {}
        for w in valuation:
            if w not in known:
                raise UnknownWorldError(f"unknown world {w!r} in valuation")
        self.valuation: dict = {w: frozenset(valuation.get(w, ())) for w in self.worlds}
        if validate:
            self.validate()

    def validate(self) -> None:
        report = check_frame(self)
        if report.antisymmetry_witness is not None:
            raise AntisymmetryError(report.antisymmetry_witness)
        if not report.is_partial_order:
            raise ModelError(f"order is not a partial order: {report.order_witness}")
        if not report.is_confluent:
            raise ConfluenceError(report.confluence_witness, self.succ)
        if not report.is_monotone:
            raise MonotonicityError(report.monotonicity_witness)

    def __repr__(self) -> str:
        return f"DynamicModel(worlds={list(self.worlds)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DynamicModel)
            and self.worlds == other.worlds
            and self.order == other.order
            and self.succ == other.succ
            and self.valuation == other.valuation
        )

    def __hash__(self):
        return hash((self.worlds, self.order))

    def leq(self, a: World, b: World) -> bool:
        return (a, b) in self.order

    @cached_property
    def index(self) -> dict:
        return {w: i for i, w in enumerate(self.worlds)}

    @cached_property
    def up(self) -> dict:
        up = {w: set() for w in self.worlds}
        for a, b in self.order:
            up[a].add(b)
        return {w: frozenset(s) for w, s in up.items()}

    @cached_property
    def kernel(self) -> "Kernel":
        """Index/bitmask form used by the evaluator."""
        idx = self.index
        up = [0] * len(self.worlds)
        for a, b in self.order:
            up[idx[a]] |= 1 << idx[b]
        succ = [idx[self.succ[w]] for w in self.worlds]
        val: dict = {}
        for w, atoms in self.valuation.items():
            for p in atoms:
                val[p] = val.get(p, 0) | (1 << idx[w])
        return Kernel(len(self.worlds), tuple(up), tuple(succ), val)

    def atoms(self) -> list[str]:
        return sorted(set().union(*self.valuation.values())) if self.worlds else []

    def is_classical(self) -> bool:
        return all(a == b for a, b in self.order)

    def generators(self) -> list[tuple]:
        """Covering pairs of the order (the Hasse diagram)."""
        strict = {(a, b) for a, b in self.order if a != b}
        return sorted(
            ((a, b) for a, b in strict
             if not any((a, c) in strict and (c, b) in strict for c in self.worlds)),
            key=lambda p: (self.index[p[0]], self.index[p[1]]),
        )


@dataclass(frozen=True)
class Kernel:
    n: int
    up: tuple  # up[i]: bitmask of worlds >= i
    succ: tuple
    val: dict = field(hash=False)  # atom -> bitmask


def worlds_of_mask(m: DynamicModel, mask: int) -> frozenset:
    return frozenset(w for i, w in enumerate(m.worlds) if mask >> i & 1)


# ---------------------------------------------------------------- frame checks

@dataclass
class FrameReport:
    is_partial_order: bool
    is_confluent: bool
    is_backward_confluent: bool
    is_monotone: bool
    order_witness: tuple | None = None
    antisymmetry_witness: tuple | None = None
    confluence_witness: tuple | None = None
    backward_witness: tuple | None = None
    monotonicity_witness: tuple | None = None

    @property
    def is_persistent(self) -> bool:
        return self.is_confluent and self.is_backward_confluent

    def admits(self, frame_class: FrameClass, identity_order: bool) -> bool:
        if not (self.is_partial_order and self.is_confluent and self.is_monotone):
            return False
        if frame_class is FrameClass.PERSISTENT:
            return self.is_backward_confluent
        if frame_class is FrameClass.CLASSICAL:
            return identity_order
        return True


def check_frame(m: DynamicModel) -> FrameReport:
    """Check every frame condition exhaustively; never raises.

    Witnesses are the first failures in world enumeration order.  The
    backward witness (w, v) means v >= succ(w) but no u >= w has succ(u) = v.
    """
    W = m.worlds
    rel = m.order
    order_witness = antisym = None
    for w in W:
        if (w, w) not in rel:
            order_witness = ("reflexivity", w)
            break
    if order_witness is None:
        for a, b in itertools.product(W, W):
            if a != b and (a, b) in rel and (b, a) in rel:
                antisym = (a, b)
                order_witness = ("antisymmetry", a, b)
                break
    if order_witness is None:
        for a, b, c in itertools.product(W, W, W):
            if (a, b) in rel and (b, c) in rel and (a, c) not in rel:
                order_witness = ("transitivity", a, b, c)
                break

    succ = m.succ
    conf = None
    for w, v in itertools.product(W, W):
        if (w, v) in rel and (succ[w], succ[v]) not in rel:
            conf = (w, v)
            break

    back = None
    for w, v in itertools.product(W, W):
        if (succ[w], v) in rel and not any((w, u) in rel and succ[u] == v for u in W):
            back = (w, v)
            break

    mono = None
    for w, v in itertools.product(W, W):
        if (w, v) in rel and not m.valuation[w] <= m.valuation[v]:
            mono = (w, v)
            break

    return FrameReport(
        is_partial_order=order_witness is None,
        is_confluent=conf is None,
        is_backward_confluent=back is None,
        is_monotone=mono is None,
        order_witness=order_witness,
        antisymmetry_witness=antisym,
        confluence_witness=conf,
        backward_witness=back,
        monotonicity_witness=mono,
    )


def confluence_witness(w0: World, v0: World, frame: DynamicModel, atom: str = "p"):
    """Valuation and formula showing that a non-confluent frame breaks upward closure.

    The valuation puts ``atom`` exactly on the worlds above succ(w0); then
    ``X atom`` holds at w0 but fails at v0 even though w0 <= v0.

    Returns (valuation, formula, w0, v0).
    """
    if not frame.leq(w0, v0):
        raise ValueError(f"{w0} is not below {v0}")
    s = frame.succ
    if frame.leq(s[w0], s[v0]):
        raise ValueError(f"frame is confluent at ({w0}, {v0})")
    valuation = {u: frozenset({atom}) if frame.leq(s[w0], u) else frozenset() for u in frame.worlds}
    return valuation, Next(Atom(atom)), w0, v0


def with_valuation(m: DynamicModel, valuation: Mapping, validate: bool = True) -> DynamicModel:
    return DynamicModel(m.worlds, m.order, m.succ, valuation, close=False, validate=validate)


# ---------------------------------------------------------------- file format

def load_model(text: str) -> DynamicModel:
    lines = _content_lines(text)
    if not lines or lines[0][1] != ["model"]:
        raise ModelSyntaxError("expected 'model' header", lines[0][0] if lines else 1)
    worlds: list = []
    order: list = []
    succ: dict = {}
    val: dict = {}
    for lineno, toks in lines[1:]:
        kw, args = toks[0], toks[1:]
        if kw == "worlds":
            if not args:
                raise ModelSyntaxError("'worlds' needs at least one id", lineno)
            worlds.extend(args)
        elif kw == "order":
            if len(args) != 2:
                raise ModelSyntaxError("'order' takes two worlds", lineno)
            order.append(tuple(args))
        elif kw == "succ":
            if len(args) != 2:
                raise ModelSyntaxError("'succ' takes two worlds", lineno)
            if args[0] in succ:
                raise SuccessorError(f"line {lineno}: succ({args[0]}) defined twice")
            succ[args[0]] = args[1]
        elif kw == "val":
            if not args:
                raise ModelSyntaxError("'val' needs a world", lineno)
            val.setdefault(args[0], set()).update(args[1:])
        else:
            raise ModelSyntaxError(f"unknown keyword {kw!r}", lineno)
    if not worlds:
        raise ModelSyntaxError("no worlds declared", 1)
    return DynamicModel(worlds, order, succ, val)


def save_model(m: DynamicModel) -> str:
    out = ["model", "worlds " + " ".join(map(str, m.worlds))]
    out += sorted(f"order {a} {b}" for a, b in m.generators())
    out += [f"succ {w} {m.succ[w]}" for w in m.worlds]
    out += [
        f"val {w} " + " ".join(sorted(m.valuation[w]))
        for w in m.worlds if m.valuation[w]
    ]
    return "\n".join(out) + "\n"


def _content_lines(text: str) -> list[tuple[int, list[str]]]:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        if toks:
            lines.append((lineno, toks))
    return lines


# ---------------------------------------------------------------- enumeration

def labeled_posets(n: int) -> Iterator[tuple]:
    """All partial orders on 0..n-1 as tuples of up-set bitmasks.

    Elements are added one at a time; each new element picks, for every
    earlier element, one of below/above/incomparable, and the result is kept
    only if it is transitive.
    """
    def extend(k, up):
        if k == n:
            yield tuple(up)
            return
        for choice in itertools.product((0, 1, 2), repeat=k):
            new_up = list(up) + [1 << k]
            for i, c in enumerate(choice):
                if c == 1:  # i < k
                    new_up[i] |= 1 << k
                elif c == 2:  # k < i
                    new_up[k] |= 1 << i
            if _transitive(new_up, k + 1):
                yield from extend(k + 1, new_up)
    yield from extend(0, [])


def _transitive(up, n) -> bool:
    for i in range(n):
        reach = up[i]
        for j in range(n):
            if reach >> j & 1 and up[j] & ~reach:
                return False
    return True


def _confluent(up, succ, n) -> bool:
    for w in range(n):
        sw = up[succ[w]]
        m = up[w]
        for v in range(n):
            if m >> v & 1 and not sw >> succ[v] & 1:
                return False
    return True


def _backward_confluent(up, succ, n) -> bool:
    for w in range(n):
        reachable = 0
        for u in range(n):
            if up[w] >> u & 1:
                reachable |= 1 << succ[u]
        if up[succ[w]] & ~reachable:
            return False
    return True


def up_sets(up, n) -> list[int]:
    return [s for s in range(1 << n)
            if all(not (s >> i & 1) or (up[i] & ~s) == 0 for i in range(n))]


def enumerate_kernels(n: int, atoms: list[str], frame_class: FrameClass) -> Iterator[Kernel]:
    """Every admissible model on exactly n worlds, in index form."""
    atoms = list(atoms)
    if frame_class is FrameClass.CLASSICAL:
        posets = [tuple(1 << i for i in range(n))]
    else:
        posets = labeled_posets(n)
    for up in posets:
        ups = up_sets(up, n)
        vals = list(itertools.product(ups, repeat=len(atoms)))
        for succ in itertools.product(range(n), repeat=n):
            if not _confluent(up, succ, n):
                continue
            if frame_class is FrameClass.PERSISTENT and not _backward_confluent(up, succ, n):
                continue
            for masks in vals:
                yield Kernel(n, up, succ, dict(zip(atoms, masks)))


def kernel_to_model(k: Kernel, names=None) -> DynamicModel:
    names = names or [f"w{i + 1}" for i in range(k.n)]
    order = [(names[i], names[j]) for i in range(k.n) for j in range(k.n) if k.up[i] >> j & 1]
    succ = {names[i]: names[k.succ[i]] for i in range(k.n)}
    val = {names[i]: {p for p, m in k.val.items() if m >> i & 1} for i in range(k.n)}
    return DynamicModel(names, order, succ, val, close=False, validate=False)


def canonical_key(k: Kernel) -> tuple:
    """Smallest relabelling of the kernel; equal keys mean isomorphic models."""
    best = None
    atoms = sorted(k.val)
    for perm in itertools.permutations(range(k.n)):
        # perm[i] is the new index of old world i
        up = [0] * k.n
        succ = [0] * k.n
        for i in range(k.n):
            m = 0
            for j in range(k.n):
                if k.up[i] >> j & 1:
                    m |= 1 << perm[j]
            up[perm[i]] = m
            succ[perm[i]] = perm[k.succ[i]]
        vals = []
        for p in atoms:
            m = 0
            for i in range(k.n):
                if k.val[p] >> i & 1:
                    m |= 1 << perm[i]
            vals.append(m)
        key = (tuple(up), tuple(succ), tuple(vals))
        if best is None or key < best:
            best = key
    return best


def enumerate_models(
    max_worlds: int,
    atoms: list[str],
    frame_class: FrameClass = FrameClass.DYNAMIC,
    *,
    prune_isomorphic: bool = False,
) -> Iterator[DynamicModel]:
    """Yield every model with 1..max_worlds worlds (named w1..wn) of the class.

    Order: by world count, then poset, then successor map, then valuation.
    ``prune_isomorphic`` skips models isomorphic to one already yielded.
    """
    for k in iter_kernels(max_worlds, atoms, frame_class, prune_isomorphic=prune_isomorphic):
        yield kernel_to_model(k)


def iter_kernels(max_worlds, atoms, frame_class, *, prune_isomorphic=False) -> Iterator[Kernel]:
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    for n in range(1, max_worlds + 1):
        seen = set()
        for k in enumerate_kernels(n, atoms, frame_class):
            if prune_isomorphic:
                key = canonical_key(k)
                if key in seen:
                    continue
                seen.add(key)
            yield k
