"""Regenerate scaling_majority5.csv from the rule-table oracle (not the library).

    python3 tests/golden/make_scaling_golden.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from oracles import binomial_ics, classify, majority5, moore_offsets, roll_ca

SEED, N, SCALES = 2024, 1000, (1, 3, 9)


def main() -> None:
    table = [majority5([(i >> k) & 1 for k in range(5)]) for i in range(32)]
    lines = ["s,cells,fraction_correct"]
    for s in SCALES:
        cells = 35 * s
        ics = binomial_ics(cells, N, SEED)
        finals = roll_ca(table, moore_offsets(1, 2), (cells,), ics, 2 * cells)[:, -1]
        lines.append(f"{s},{cells},{int(classify(ics, finals).sum()) / N!r}")
    (Path(__file__).parent / "scaling_majority5.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
