"""Run finite-model extraction on seeded random lassos and report output sizes.

    python scripts/extraction_stats.py --seed 1 --lassos 200
"""

from __future__ import annotations

import argparse
import random
from dataclasses import dataclass

from itle.generators import random_lasso, random_sigma
from itle.stratified import extract_finite_model, lasso_labels, strata_normal, validate_lasso


@dataclass
class Config:
    seed: int = 0
    lassos: int = 100
    max_strata: int = 4
    max_nodes: int = 4
    max_sigma: int = 7


def run(cfg: Config) -> list[tuple]:
    rng = random.Random(cfg.seed)
    rows = []
    for _ in range(cfg.lassos):
        m = random_lasso(rng, cfg.max_strata, cfg.max_nodes)
        sigma = random_sigma(rng, ["p", "q"], cfg.max_sigma)
        ex = extract_finite_model(m, sigma)
        ok = (validate_lasso(ex.model).valid and strata_normal(ex, sigma)
              and lasso_labels(ex.model, sigma)[ex.root]
              == lasso_labels(m, sigma)[m.strata[0].root])
        rows.append((len(m.worlds), len(sigma), len(ex.model.strata), len(ex.model.worlds),
                     len(ex.steps), ok))
    return rows


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--lassos", type=int, default=Config.lassos)
    p.add_argument("--max-strata", type=int, default=Config.max_strata)
    p.add_argument("--max-nodes", type=int, default=Config.max_nodes)
    a = p.parse_args()
    rows = run(Config(a.seed, a.lassos, a.max_strata, a.max_nodes))
    good = sum(r[5] for r in rows)
    print(f"{good}/{len(rows)} extractions valid with root Sigma-set preserved")
    print(f"mean input worlds {sum(r[0] for r in rows) / len(rows):.2f}, "
          f"mean output worlds {sum(r[3] for r in rows) / len(rows):.2f}, "
          f"max output worlds {max(r[3] for r in rows)}, "
          f"max steps {max(r[4] for r in rows)}")


if __name__ == "__main__":
    main()
