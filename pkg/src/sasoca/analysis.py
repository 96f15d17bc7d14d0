"""Post-hoc measurements of evolved FSMs.

Accuracy measurements draw ICs (Binomial unless told otherwise) from
``default_rng(seed)``, so paired comparisons (normal vs knockout, scale 1 vs
``test_dominant``) see the same configurations.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .ca import Lattice, Scheme, count_correct, gen_ics
from .fsm import Fsm, KnockoutMask

EXACT_CAP_BITS = 26
DEFAULT_SAMPLES = 1_000_000


class ExactTooLarge(ValueError):
    pass


class _Report:
    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def rows(self) -> list[dict]:
        return [asdict(self)]

    def to_csv(self) -> str:
        rows = self.rows()
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()


@dataclass(frozen=True)
class RuleDensityReport(_Report):
    mode: str
    density: float
    states_evaluated: int
    ones: int


@dataclass(frozen=True)
class KnockoutReport(_Report):
    w_normal: float
    w_knockout: float
    n: int

    @property
    def delta_w(self) -> float:
        return self.w_normal - self.w_knockout

    def rows(self) -> list[dict]:
        return [dict(asdict(self), delta_w=self.delta_w)]

    def to_json(self) -> str:
        return json.dumps(self.rows()[0], indent=2, sort_keys=True) + "\n"


def sop_value(f: float, f_nc: float) -> float:
    """Operational self-organisation ``(f - f_nc) / (f + f_nc)``; 0 when both are 0."""
    denom = f + f_nc
    return 0.0 if denom == 0 else (f - f_nc) / denom


@dataclass(frozen=True)
class SopReport(_Report):
    f: float
    f_nc: float
    n: int

    @property
    def s_op(self) -> float:
        return sop_value(self.f, self.f_nc)

    def rows(self) -> list[dict]:
        return [dict(asdict(self), s_op=self.s_op)]

    def to_json(self) -> str:
        return json.dumps(self.rows()[0], indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class ScalingRow:
    s: int
    cells: int
    fraction_correct: float


@dataclass(frozen=True)
class ScalingReport(_Report):
    rows_: tuple[ScalingRow, ...] = field(default=())

    def rows(self) -> list[dict]:
        return [asdict(r) for r in self.rows_]

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows()}, indent=2, sort_keys=True) + "\n"


def rule_density(
    f: Fsm,
    exact: bool = True,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    cap_bits: int = EXACT_CAP_BITS,
) -> RuleDensityReport:
    """Fraction of full state-variable assignments whose one-step output is 1.

    Every variable, including the output slot, is taken from the enumerated or
    sampled word as-is.
    """
    kern = _kernels.backend
    bits = f.layout.total
    slot = f.layout.output_index
    if exact:
        if bits > cap_bits:
            raise ExactTooLarge(
                f"exact enumeration of 2^{bits} states exceeds the 2^{cap_bits} cap; "
                f"use sampling (e.g. --samples {DEFAULT_SAMPLES})"
            )
        n = 1 << bits
        ones = kern.count_outputs_range(*f.packed, 0, n, slot)
        return RuleDensityReport("exact", ones / n, n, int(ones))
    rng = np.random.default_rng(seed)
    ones = 0
    chunk = 1 << 18
    for lo in range(0, samples, chunk):
        m = min(chunk, samples - lo)
        words = rng.integers(0, 1 << bits, m, dtype=np.uint64) if bits < 64 else rng.integers(
            0, np.iinfo(np.uint64).max, m, dtype=np.uint64, endpoint=True)
        ones += int(kern.outputs(*f.packed, words, slot).sum())
    return RuleDensityReport(f"sampled({samples})", ones / samples, samples, ones)


def _ics(lattice: Lattice, n: int, seed: int, scheme=Scheme.BINOMIAL) -> np.ndarray:
    return gen_ics(lattice, scheme, n, np.random.default_rng(seed))


def knockout_hidden(
    f: Fsm, lattice: Lattice, n: int = 1000, seed: int = 0, jobs: int = 1, scheme=Scheme.BINOMIAL
) -> KnockoutReport:
    """Paired accuracy with and without hidden variables held at 0."""
    ics = _ics(lattice, n, seed, scheme)
    normal = count_correct(f, lattice, ics, jobs=jobs)
    ko = count_correct(f, lattice, ics, KnockoutMask(hold_hidden_zero=True), jobs=jobs)
    return KnockoutReport(normal / n, ko / n, n)


def s_op(
    f: Fsm, lattice: Lattice, n: int = 1000, seed: int = 0, jobs: int = 1, scheme=Scheme.BINOMIAL
) -> SopReport:
    """Paired accuracy with communication on, then with non-self inputs held at 0."""
    ics = _ics(lattice, n, seed, scheme)
    with_comm = count_correct(f, lattice, ics, jobs=jobs)
    without = count_correct(f, lattice, ics, KnockoutMask(hold_neighbor_inputs_zero=True), jobs=jobs)
    return SopReport(with_comm / n, without / n, n)


def scaling_sweep(
    f: Fsm, base: Lattice, scales=range(1, 10), n: int = 1000, seed: int = 0, jobs: int = 1
) -> ScalingReport:
    """Accuracy with every lattice extent multiplied by ``s``; each scale reuses ``seed``."""
    rows = []
    for s in scales:
        lat = base.scaled(int(s))
        acc = count_correct(f, lat, _ics(lat, n, seed), jobs=jobs) / n
        rows.append(ScalingRow(int(s), lat.cells, acc))
    return ScalingReport(tuple(rows))
