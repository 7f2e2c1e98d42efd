import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from itle.formula import Atom, Implies, Next, parse_formula, subformula_closure
from itle.generators import random_model, random_tree
from itle.labeled import (
    LabeledPoset, LabeledTree, TreeSyntaxError, bound_B, bounds, check_condensation, depth,
    find_immersion, greatest_simulation, is_immersion, is_normal_form, is_quasimodel,
    label_with_sigma, level, load_tree, normal_form_bound, normalize_tree, save_tree, to_model,
)
from itle.model import load_model

SECTION2 = "model\nworlds w v u\norder v u\nsucc w v\nsucc v v\nsucc u u\nval u p\n"


def chain(*labels):
    nodes = [f"c{i}" for i in range(len(labels))]
    return LabeledTree(nodes, {nodes[i]: nodes[i - 1] for i in range(1, len(nodes))},
                       dict(zip(nodes, labels)))


def tree(spec):
    """spec: list of (node, label, parent or None)."""
    return LabeledTree([n for n, _, _ in spec], {n: p for n, _, p in spec if p},
                       {n: lab for n, lab, _ in spec})


def brute_immersions(a, b, pointed=False):
    for images in itertools.product(b.worlds, repeat=len(a.worlds)):
        f = dict(zip(a.worlds, images))
        if is_immersion(a, b, f, pointed):
            yield f


def test_level_and_depth():
    single = chain("L")
    assert level(single) == 1 and depth(single, "c0") == 1
    llm = chain("L", "L", "M")
    assert depth(llm, "c0") == 3 and level(llm) == 2
    assert level(chain("L", "M", "L")) == 3


def test_simulation_examples():
    one = chain("L")
    assert greatest_simulation(one, one) == {("c0", "c0")}
    assert greatest_simulation(chain("L", "M"), chain("L")) is None
    assert greatest_simulation(chain("L"), chain("L", "M")) == {("c0", "c0")}


def test_immersion_examples():
    a = tree([("r", "L", None), ("x", "M", "r"), ("y", "M", "r")])
    b = tree([("s", "L", None), ("z", "M", "s")])
    assert find_immersion(a, b) == {"r": "s", "x": "z", "y": "z"}
    a2 = tree([("r", "L", None), ("x", "M", "r"), ("y", "N", "r")])
    assert find_immersion(a2, b) is None
    assert not list(brute_immersions(a2, b))
    t = random_tree(random.Random(1))
    assert is_immersion(t, t, find_immersion(t, t))


def test_condensation_examples():
    t = random_tree(random.Random(4))
    ident = {w: w for w in t.worlds}
    assert check_condensation(t, t, ident, ident)
    ll = chain("L", "L")
    one = chain("L")
    assert check_condensation(ll, one, {"c0": "c0", "c1": "c0"}, {"c0": "c0"})
    bad = check_condensation(chain("L", "M"), one, {"c0": "c0", "c1": "c0"}, {"c0": "c0"})
    assert not bad
    assert any("label mismatch" in p for p in bad.problems)


def test_normalize_examples():
    same = tree([("r", "A", None), ("x", "A", "r"), ("y", "A", "x"), ("z", "A", "r")])
    normal, c = normalize_tree(same)
    assert len(normal) == 1 and check_condensation(same, normal, c.rho, c.iota)

    aab = chain("A", "A", "B")
    normal, c = normalize_tree(aab)
    assert sorted(normal.label.values()) == ["A", "B"]
    assert check_condensation(aab, normal, c.rho, c.iota)

    twin = tree([("r", "A", None), ("b1", "B", "r"), ("c1", "C", "b1"),
                 ("b2", "B", "r"), ("c2", "C", "b2")])
    normal, c = normalize_tree(twin)
    assert len(normal) == 3
    assert list(brute_immersions(twin, normal)) and list(brute_immersions(normal, twin))


def test_pointed_normal_form_keeps_point():
    t = LabeledTree(["r", "a", "b"], {"a": "r", "b": "r"}, {"r": "A", "a": "B", "b": "B"},
                    point="b")
    normal, c = normalize_tree(t, pointed=True)
    assert len(normal) == 3
    assert normal.point == c.rho["b"] and normal.label[normal.point] == "B"
    assert check_condensation(t, normal, c.rho, c.iota, pointed=True)
    assert is_normal_form(normal, pointed=True)
    plain, _ = normalize_tree(t)
    assert len(plain) == 2


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_find_immersion_agrees_with_brute_force(rng):
    a = random_tree(rng, 4, ("A", "B"))
    b = random_tree(rng, 4, ("A", "B"))
    found = find_immersion(a, b)
    exists = next(brute_immersions(a, b), None) is not None
    assert (found is not None) == exists
    if found is not None:
        assert is_immersion(a, b, found)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False), st.booleans())
def test_normalization_properties(rng, pointed):
    t = random_tree(rng, 10)
    if pointed:
        t = LabeledTree(t.worlds, t.parent, t.label, point=rng.choice(t.worlds))
    normal, c = normalize_tree(t, pointed=pointed)
    assert check_condensation(t, normal, c.rho, c.iota, pointed=pointed)
    assert is_normal_form(normal, pointed=pointed)
    assert normal_form_bound(t, pointed).admits(len(normal))
    again, _ = normalize_tree(normal, pointed=pointed)
    assert save_tree(again) == save_tree(normal)


def test_quasimodel_examples():
    rng = random.Random(8)
    for _ in range(100):
        m = random_model(rng)
        sigma = subformula_closure(parse_formula("(p -> q) | X ~p & F q"))
        a = label_with_sigma(m, sigma)
        assert is_quasimodel(a, sigma)
        assert all(a.label[x] <= a.label[y] for x, y in a.order)

    p, q = Atom("p"), Atom("q")
    sigma = subformula_closure(Implies(p, q))
    two = LabeledPoset(["x", "y"], [], {"x": frozenset({Implies(p, q), q}),
                                        "y": frozenset({p})})
    assert is_quasimodel(two, sigma)
    broken = LabeledPoset(["x", "y"], [("x", "y")], {"x": frozenset({p}), "y": frozenset()})
    check = is_quasimodel(broken, sigma)
    assert not check and any("monotone" in s for s in check.problems)


def test_section2_sigma_labels():
    a = label_with_sigma(load_model(SECTION2), subformula_closure(Atom("p")))
    assert a.label == {"w": frozenset(), "v": frozenset(), "u": {Atom("p")}}


def test_to_model():
    p = Atom("p")
    a = LabeledPoset(["x", "y"], [], {"x": frozenset({p, Next(p)}), "y": frozenset()})
    m = to_model(a)
    assert m.valuation == {"x": {"p"}, "y": frozenset()}


def test_bounds():
    assert bounds("E", 2, 2).value == 10
    assert bounds("E", 2, 1).value == 2
    assert bounds("Q", 1, 3).value == 7
    assert bounds("E", 1, 2).value == 3
    assert bounds("Q", 2, 2).value == 3
    assert bounds("E", 3, 0).value == 0 and bounds("Q", 3, 0).value == 0
    b = bound_B(1)
    assert not b.exact
    assert b.expression == "Q^4_4*(2*E^2_2 + 1*Q^2_2*E^4_4)"
    with pytest.raises(ValueError):
        bounds("Z", 1, 1)


def test_tree_file_round_trip():
    text = "tree\nnode r A\nnode s B parent r\nnode t B parent r\npoint t\n"
    t = load_tree(text)
    assert t.point == "t" and t.root == "r"
    assert save_tree(t) == text
    for bad in ("node r A\n", "tree\nnode r\n", "tree\nnode r A parent\n",
                "tree\nnode a A\nnode b B\n"):
        with pytest.raises(TreeSyntaxError):
            load_tree(bad)
