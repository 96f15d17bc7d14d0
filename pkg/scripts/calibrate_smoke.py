"""Run the smoke configuration over several seeds and report the best raw fitness per seed.

Used once to pin the threshold in the evolution smoke test:

    python3 scripts/calibrate_smoke.py --seeds 42..51
"""

import argparse
import time
from dataclasses import replace

from pathlib import Path

from sasoca.cli import build_config, parse_config, parse_scales
from sasoca.evolve import run_ea


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(Path(__file__).resolve().parent.parent / "configs" / "smoke.cfg"))
    ap.add_argument("--seeds", type=parse_scales, default=list(range(42, 52)))
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    base = build_config(parse_config(Path(args.config).read_text(), args.config))
    print("seed,best_raw,first_update_ge_0.55,final_max_eff,dominant_eff,seconds")
    for seed in args.seeds:
        t0 = time.perf_counter()
        log, dom = run_ea(replace(base, seed=seed), jobs=args.jobs)
        best = max(r.max_raw_fitness for r in log.records)
        first = next((r.update for r in log.records if r.max_raw_fitness >= 0.55), "")
        print(f"{seed},{best},{first},{log.records[-1].max_eff_fitness:.4f},{dom.effective_fitness:.4f},"
              f"{time.perf_counter() - t0:.1f}", flush=True)


if __name__ == "__main__":
    main()
