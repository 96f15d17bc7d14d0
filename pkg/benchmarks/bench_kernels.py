"""Compare the compiled and numpy kernels on the workloads the EA and analyses run.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--csv out.csv]

Each case checks that both backends return identical results before timing.
"""

import argparse
import csv
import sys
import time

import numpy as np

from sasoca import _kernels
from sasoca import genome as gn
from sasoca.ca import gen_ics, simulate, topology_lattice
from sasoca.fsm import StateLayout, compile_genome


def evolved_like(topology: str, seed: int):
    lat = topology_lattice(topology)
    layout = StateLayout(lat.n_neighbors)
    g = gn.random_genome(10_000, 16, layout.total, np.random.default_rng(seed))
    return lat, compile_genome(g, layout)


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    for topo, n in (("1d", 100), ("2d", 100), ("3d", 100)):
        lat, f = evolved_like(topo, 1)
        ics = gen_ics(lat, "uniform", n, np.random.default_rng(2))
        yield f"simulate {topo} {n} ICs", lambda k, f=f, lat=lat, ics=ics: simulate(f, lat, ics, backend=k)[0], \
            n * lat.steps * lat.cells
    lat, f = evolved_like("1d", 3)
    words = np.random.default_rng(4).integers(0, 1 << 22, 200_000, dtype=np.uint64)
    yield "outputs 200k words", lambda k: k.outputs(*f.packed, words, f.layout.output_index), len(words)
    yield "count_outputs 2^20", lambda k: k.count_outputs_range(*f.packed, 0, 1 << 20, f.layout.output_index), 1 << 20


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv")
    args = ap.parse_args()

    fast, slow = _kernels.compiled_backend, _kernels.python_backend
    if fast is None:
        print("compiled backend not built; install with `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    rows = []
    print(f"{'case':<24}{'cython s':>10}{'python s':>10}{'speedup':>9}{'ns/unit':>9}")
    for name, fn, units in cases():
        a, b = fn(fast), fn(slow)
        if not np.array_equal(np.asarray(a), np.asarray(b)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 2
        tf, ts = best_of(lambda: fn(fast), args.repeat), best_of(lambda: fn(slow), args.repeat)
        rows.append(dict(case=name, cython_s=tf, python_s=ts, speedup=ts / tf, ns_per_unit=1e9 * tf / units))
        print(f"{name:<24}{tf:>10.4f}{ts:>10.4f}{ts / tf:>8.1f}x{1e9 * tf / units:>9.1f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
