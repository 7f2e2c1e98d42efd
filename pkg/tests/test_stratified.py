import random

import pytest

from itle.formula import Atom, parse_formula, subformula_closure
from itle.generators import random_lasso, random_model, random_sigma
from itle.labeled import find_immersion
from itle.model import check_frame, load_model
from itle.semantics import sigma_labels
from itle.stratified import (
    LassoError, LassoModel, NoImmersionError, Stratum, check_fragment, ensure_prefix,
    extract_finite_model, flatten, lasso_labels, load_lasso, save_lasso, strata_normal,
    stratify_prefix, stratum_tree, transform_collapse, transform_collapse_connect,
    transform_normalize_stratum, transform_normalize_stratum_pointed, unroll, validate_lasso,
)

SECTION2 = "model\nworlds w v u\norder v u\nsucc w v\nsucc v v\nsucc u u\nval u p\n"


def sig(text):
    return subformula_closure(parse_formula(text))


def preserved(m, m2, pi, sigma):
    assert validate_lasso(m2).valid, validate_lasso(m2).problems
    before, after = lasso_labels(m, sigma), lasso_labels(m2, sigma)
    return all(after[w] == before[pi[w]] for w in m2.worlds)


def self_loop(val=()):
    return LassoModel([Stratum(["r"])], {"r": "r"}, {"r": set(val)}, 0)


def two_strata(leq_pulls_back: bool):
    # stratum 0 = a < b mapped onto the chain c < d
    succ = {"a": "c", "b": "d", "c": "c", "d": "d"} if leq_pulls_back else \
        {"a": "c", "b": "c", "c": "c", "d": "d"}
    return LassoModel([Stratum(["a", "b"], {"b": "a"}), Stratum(["c", "d"], {"d": "c"})],
                      succ, {}, 1)


def test_validate_examples():
    r = validate_lasso(self_loop())
    assert r.valid and r.expanding

    chainy = LassoModel([Stratum(["s"]), Stratum(["c", "d"], {"d": "c"})],
                        {"s": "c", "c": "c", "d": "d"}, {}, 1)
    r = validate_lasso(chainy)
    assert r.valid and r.expanding
    r = validate_lasso(two_strata(True))
    assert r.valid and r.expanding
    # c <= d but succ(d) = d is not below succ(c) = c
    r = validate_lasso(two_strata(False))
    assert r.valid and not r.expanding and r.expanding_witness == ("b", "a")

    skip = LassoModel([Stratum(["a"]), Stratum(["b"]), Stratum(["c"])],
                      {"a": "c", "b": "c", "c": "c"}, {}, 2)
    r = validate_lasso(skip)
    assert not r.valid and r.problems[0] == ("succ", "a", "c")


def test_validate_catches_bad_structure():
    assert not validate_lasso(LassoModel([Stratum(["a"])], {"a": "a"}, {}, 3)).valid
    dup = LassoModel([Stratum(["a"]), Stratum(["a"])], {"a": "a"}, {}, 0)
    assert not validate_lasso(dup).valid
    nonconf = LassoModel([Stratum(["a", "b"], {"b": "a"}), Stratum(["c", "d"], {"d": "c"})],
                         {"a": "d", "b": "c", "c": "c", "d": "d"}, {}, 1)
    assert validate_lasso(nonconf).problems[0][0] == "confluence"
    nonmono = LassoModel([Stratum(["a", "b"], {"b": "a"})], {"a": "a", "b": "b"},
                         {"a": {"p"}}, 0)
    assert validate_lasso(nonmono).problems[0][0] == "monotonicity"
    with pytest.raises(LassoError):
        flatten(nonmono)


def test_flatten_examples():
    f = flatten(self_loop(["p"]))
    assert f.worlds == ("r",) and f.succ == {"r": "r"} and f.valuation["r"] == {"p"}

    m = LassoModel([Stratum(["a"]), Stratum(["b"]), Stratum(["c"])],
                   {"a": "b", "b": "c", "c": "b"}, {}, 1)
    f = flatten(m)
    assert len(f.worlds) == 3
    assert f.succ[f.succ["b"]] == "b" and f.succ["b"] != "b"

    rng = random.Random(0)
    for _ in range(100):
        assert check_frame(flatten(random_lasso(rng))).is_confluent


def unrolled_truth(m, sigma, times):
    """Sigma-sets read off a lasso unrolled ``times`` more periods."""
    work, pi = m, {w: w for w in m.worlds}
    for _ in range(times):
        work, back = unroll(work)
        pi = {w: pi[back[w]] for w in work.worlds}
    return lasso_labels(work, sigma), pi


def test_unrolling_preserves_truth():
    rng = random.Random(3)
    for _ in range(60):
        m = random_lasso(rng)
        sigma = random_sigma(rng, ["p", "q"])
        base = lasso_labels(m, sigma)
        labels, pi = unrolled_truth(m, sigma, 2)
        assert all(labels[w] == base[pi[w]] for w in labels)


def test_normalize_stratum_examples():
    m = LassoModel([Stratum(["a", "b"], {"b": "a"})], {"a": "a", "b": "b"}, {}, 0)
    sigma = sig("p")
    m2, pi = transform_normalize_stratum(m, 0, sigma)
    assert len(m2.strata[0].nodes) == 1
    assert preserved(m, m2, pi, sigma)

    rng = random.Random(1)
    for _ in range(20):
        m = random_lasso(rng)
        sigma = random_sigma(rng, ["p", "q"])
        m2, pi = transform_normalize_stratum(m, 0, sigma)
        m3, _ = transform_normalize_stratum(m2, 0, sigma)
        assert len(m3.strata[0].nodes) == len(m2.strata[0].nodes)
        assert preserved(m, m2, pi, sigma)

    with pytest.raises(IndexError):
        transform_normalize_stratum(m, 9, sigma)


def test_pointed_normalization_keeps_leaf():
    m = LassoModel([Stratum(["r", "x", "y"], {"x": "r", "y": "r"})],
                   {"r": "r", "x": "x", "y": "y"}, {"y": {"p"}}, 0)
    sigma = sig("p")
    m2, pi, point = transform_normalize_stratum_pointed(m, 0, "y", sigma)
    assert pi[point] == "y"
    assert Atom("p") in lasso_labels(m2, sigma)[point]
    assert preserved(m, m2, pi, sigma)
    with pytest.raises(LassoError):
        transform_normalize_stratum_pointed(m, 0, "nope", sigma)


def test_collapse_identical_strata():
    m = LassoModel([Stratum(["a"]), Stratum(["b"]), Stratum(["c"])],
                   {"a": "b", "b": "c", "c": "c"}, {"c": {"p"}}, 2)
    sigma = sig("F p")
    m2, pi = transform_collapse(m, 0, 1, sigma)
    assert len(m2.worlds) == 2 and m2.loop == 1
    assert preserved(m, m2, pi, sigma)
    with pytest.raises(NoImmersionError):
        transform_collapse(m, 1, 2, sig("p"))


def test_collapse_connect_isomorphic_strata():
    s = lambda k: Stratum([f"{k}0", f"{k}1"], {f"{k}1": f"{k}0"})
    m = LassoModel([s("a"), s("b")], {"a0": "b0", "a1": "b1", "b0": "b0", "b1": "b1"},
                   {"a1": {"p"}, "b1": {"p"}}, 1)
    sigma = sig("X p")
    m2, pi = transform_collapse_connect(m, 0, 1, "a1", "b1", sigma)
    assert pi["a1"] == "b1"
    assert preserved(m, m2, pi, sigma)


def test_transformations_on_random_lassos():
    rng = random.Random(7)
    for _ in range(40):
        m = random_lasso(rng)
        sigma = random_sigma(rng, ["p", "q"])
        mu, _ = ensure_prefix(m, len(m.strata))
        labels = lasso_labels(mu, sigma)
        n = len(mu.strata)
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)
                 if find_immersion(stratum_tree(mu, a, labels), stratum_tree(mu, b, labels))]
        assert pairs  # the unrolled copy always immerses into itself
        a, b = rng.choice(pairs)
        m2, pi = transform_collapse(mu, a, b, sigma)
        assert preserved(mu, m2, pi, sigma)


def test_extract_self_loop_is_fixed():
    m = self_loop(["p"])
    ex = extract_finite_model(m, sig("G p"))
    assert len(ex.model.worlds) == 1 and ex.model.loop == 0
    assert ex.model.valuation[ex.root] == {"p"}


def test_extract_collapses_equivalent_strata():
    m = LassoModel([Stratum(["a"]), Stratum(["b"]), Stratum(["c"]), Stratum(["d"])],
                   {"a": "b", "b": "c", "c": "d", "d": "d"}, {"b": {"p"}, "d": {"p"}}, 3)
    sigma = sig("X p")
    ex = extract_finite_model(m, sigma)
    assert len(ex.model.strata) <= 2
    assert lasso_labels(ex.model, sigma)[ex.root] == lasso_labels(m, sigma)["a"]


def test_extract_terminates_on_periodic_tail():
    # stratum 0 immerses into every later stratum; collapsing first would never stop
    m = load_lasso("lasso loop 1\nstratum\nnode a0\nsucc a0 b1\nstratum\nnode b0\n"
                   "node b1 parent b0\nsucc b0 b1\nsucc b1 b1\nval b1 p q\n")
    sigma = sig("q & q | X p")
    ex = extract_finite_model(m, sigma)
    assert validate_lasso(ex.model).valid
    assert lasso_labels(ex.model, sigma)[ex.root] == lasso_labels(m, sigma)["a0"]


def test_extract_random():
    rng = random.Random(12)
    for _ in range(30):
        m = random_lasso(rng)
        sigma = random_sigma(rng, ["p", "q"])
        ex = extract_finite_model(m, sigma)
        assert validate_lasso(ex.model).valid
        assert lasso_labels(ex.model, sigma)[ex.root] == \
            lasso_labels(m, sigma)[m.strata[0].root]
        assert strata_normal(ex, sigma)


def test_stratify_single_world():
    m = load_model("model\nworlds r\nsucc r r\nval r p\n")
    frag = stratify_prefix(m, "r", sig("F p -> X p"), 50, 5)
    assert frag.nodes == [(0, y) for y in range(5)]
    assert set(frag.h.values()) == {"r"}


def test_stratify_section2_spawns_column_into_u():
    m = load_model(SECTION2)
    sigma = sig("~Xp & ~X~p")
    frag = stratify_prefix(m, "w", sigma, 70000, 4)
    k, x, y, rank, v = frag.applied[0]
    assert (x, y, v) == (0, 1, "u")
    labels = {g for b, g in enumerate(sigma.members) if rank >> b & 1}
    assert labels == set(sigma_labels(m, sigma)["u"])
    column = [n for n in frag.nodes if n[0] == k + 1]
    assert column == [(k + 1, d) for d in range(1, 4)]
    assert all(frag.h[n] == "u" for n in column)


def test_stratify_random_invariants():
    rng = random.Random(9)
    for _ in range(50):
        m = random_model(rng)
        frag = stratify_prefix(m, rng.choice(m.worlds), random_sigma(rng, ["p", "q"]), 10, 6)
        assert check_fragment(frag)


def test_lasso_file_round_trip():
    rng = random.Random(6)
    for _ in range(30):
        m = random_lasso(rng)
        again = load_lasso(save_lasso(m))
        assert save_lasso(again) == save_lasso(m)
    with pytest.raises(LassoError):
        load_lasso("lasso loop 0\nstratum\nnode a\nsucc a b\n")
    with pytest.raises(LassoError):
        load_lasso("stratum\nnode a\n")
