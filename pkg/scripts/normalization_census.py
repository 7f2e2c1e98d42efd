"""Count normal forms of random labeled trees and compare sizes with the Q bound.

    python scripts/normalization_census.py --seed 7 --trees 2000
"""

from __future__ import annotations

import argparse
import random
from collections import Counter
from dataclasses import dataclass

from itle.labeled import bounds, level, normalize_tree, tree_key
from itle.generators import random_tree


@dataclass
class Config:
    seed: int = 0
    trees: int = 1000
    max_nodes: int = 12
    labels: tuple = ("A", "B", "C")


def run(cfg: Config) -> dict:
    rng = random.Random(cfg.seed)
    forms = set()
    worst: dict = {}
    sizes = Counter()
    for _ in range(cfg.trees):
        t = random_tree(rng, cfg.max_nodes, cfg.labels)
        normal, _ = normalize_tree(t)
        forms.add(tree_key(normal))
        sizes[(len(t), len(normal))] += 1
        key = (len(t.labels_used()), level(t))
        worst[key] = max(worst.get(key, 0), len(normal))
    return {"distinct": len(forms), "sizes": sizes, "worst": worst}


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--trees", type=int, default=Config.trees)
    p.add_argument("--max-nodes", type=int, default=Config.max_nodes)
    p.add_argument("--labels", default=",".join(Config.labels))
    a = p.parse_args()
    cfg = Config(a.seed, a.trees, a.max_nodes, tuple(a.labels.split(",")))
    out = run(cfg)
    print(f"distinct normal forms: {out['distinct']} of {cfg.trees} trees")
    by_input: dict = {}
    for (n, m), c in out["sizes"].items():
        by_input.setdefault(n, Counter())[m] += c
    print("input size -> mean normal size")
    for n in sorted(by_input):
        tot = sum(by_input[n].values())
        mean = sum(m * c for m, c in by_input[n].items()) / tot
        print(f"  {n:>3} -> {mean:5.2f}  ({tot} trees)")
    print("labels level  largest normal form  Q bound")
    for (n, k), big in sorted(out["worst"].items()):
        b = bounds("Q", n, k)
        shown = b.value if b.exact and b.value < 10**9 else f"~10^{len(str(b.value)) - 1}" \
            if b.exact else b.expression
        print(f"{n:>6} {k:>5}  {big:>19}  {shown}")


if __name__ == "__main__":
    main()
