"""Sweep the divergence formula over dynamic and persistent frames of growing size.

    python scripts/persistent_vs_dynamic.py --max-worlds 3
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from itle import FrameClass, decide_valid, parse_formula


@dataclass
class Config:
    formula: str = "~~F G p -> F ~~G p"
    max_worlds: int = 3
    jobs: int = 1


def run(cfg: Config) -> list[tuple]:
    f = parse_formula(cfg.formula)
    rows = []
    for frame in (FrameClass.DYNAMIC, FrameClass.PERSISTENT):
        for n in range(1, cfg.max_worlds + 1):
            v = decide_valid(f, frame, n, jobs=cfg.jobs)
            rows.append((frame.name.lower(), n, str(v), v.stats.models_examined,
                         v.stats.elapsed))
    return rows


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--formula", default=Config.formula)
    p.add_argument("--max-worlds", type=int, default=Config.max_worlds)
    p.add_argument("--jobs", type=int, default=Config.jobs)
    a = p.parse_args()
    cfg = Config(a.formula, a.max_worlds, a.jobs)
    print(f"{'frame':<11}{'n':>3}  {'verdict':<32}{'models':>9}{'seconds':>10}")
    for frame, n, verdict, count, secs in run(cfg):
        print(f"{frame:<11}{n:>3}  {verdict:<32}{count:>9}{secs:>10.3f}")


if __name__ == "__main__":
    main()
