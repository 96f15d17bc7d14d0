"""Periodic Moore-neighbourhood lattices, initial configurations and CA runs.

Configurations are flat ``uint8`` arrays in C order over ``Lattice.dims``.
Neighbour lists enumerate offsets from ``(-r, ..., -r)`` to ``(r, ..., r)``
with the last dimension varying fastest, so the cell itself sits in the
middle slot.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .fsm import NO_KNOCKOUT, Fsm, KnockoutMask, read_mask

ORDERING = "moore-raster-last-fastest"


class TieError(ValueError):
    """Raised when a configuration has exactly as many 1s as 0s."""


class Scheme(str, enum.Enum):
    UNIFORM_FULL = "uniform"
    UNIFORM_LOW = "uniform-low"
    UNIFORM_HIGH = "uniform-high"
    BINOMIAL = "binomial"


class Verdict(str, enum.Enum):
    ALL_ONES = "all-ones"
    ALL_ZEROS = "all-zeros"
    UNSETTLED = "unsettled"


@dataclass(frozen=True, eq=False)
class Lattice:
    dims: tuple[int, ...]
    radius: int
    neighbors: np.ndarray = field(repr=False)

    @property
    def cells(self) -> int:
        return int(np.prod(self.dims))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_neighbors(self) -> int:
        return int(self.neighbors.shape[1])

    @property
    def self_slot(self) -> int:
        return self.n_neighbors // 2

    @property
    def steps(self) -> int:
        """Evaluation budget M."""
        return 2 * self.cells

    def scaled(self, s: int) -> "Lattice":
        return make_lattice(tuple(d * s for d in self.dims), self.radius)


def moore_offsets(ndim: int, radius: int) -> list[tuple[int, ...]]:
    return list(itertools.product(range(-radius, radius + 1), repeat=ndim))


def make_lattice(dims, radius: int) -> Lattice:
    dims = (int(dims),) if np.isscalar(dims) else tuple(int(d) for d in dims)
    if not 1 <= len(dims) <= 3:
        raise ValueError(f"lattice must have 1 to 3 dimensions, got {len(dims)}")
    if radius < 1:
        raise ValueError("radius must be positive")
    for d in dims:
        if d < 2 * radius + 1:
            raise ValueError(f"extent {d} < 2r+1 = {2 * radius + 1}; neighbourhood would self-overlap")
    coords = np.indices(dims).reshape(len(dims), -1).T  # (cells, ndim)
    offs = np.array(moore_offsets(len(dims), radius))  # (k, ndim)
    shifted = (coords[:, None, :] + offs[None, :, :]) % np.array(dims)
    nb = np.ravel_multi_index(tuple(np.moveaxis(shifted, -1, 0)), dims)
    return Lattice(dims, radius, np.ascontiguousarray(nb, dtype=np.int32))


LATTICE_1D = dict(dims=(35,), radius=2)
LATTICE_2D = dict(dims=(7, 7), radius=2)
LATTICE_3D = dict(dims=(3, 3, 5), radius=1)
TOPOLOGIES = {"1d": LATTICE_1D, "2d": LATTICE_2D, "3d": LATTICE_3D}


def topology_lattice(name: str) -> Lattice:
    return make_lattice(**TOPOLOGIES[name])


def majority(ic: np.ndarray) -> int:
    ones = int(np.count_nonzero(ic))
    if 2 * ones == ic.size:
        raise TieError(f"{ones} ones of {ic.size} cells is a tie")
    return int(2 * ones > ic.size)


def ic_with_density(cells: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    ic = np.zeros(cells, dtype=np.uint8)
    ic[: int(round(rho * cells))] = 1
    return rng.permutation(ic)


def gen_ic(lattice: Lattice, scheme: Scheme | str, rng: np.random.Generator) -> np.ndarray:
    """One initial configuration; exact ties are rejected and redrawn."""
    scheme = Scheme(scheme)
    cells = lattice.cells
    while True:
        if scheme is Scheme.BINOMIAL:
            ic = rng.integers(0, 2, cells, dtype=np.uint8)
        else:
            rho = rng.random()
            if scheme is Scheme.UNIFORM_LOW:
                while rho >= 0.5:
                    rho = rng.random()
            elif scheme is Scheme.UNIFORM_HIGH:
                while rho <= 0.5:
                    rho = rng.random()
            ic = ic_with_density(cells, rho, rng)
        if 2 * int(ic.sum()) != cells:
            return ic


def gen_ics(lattice: Lattice, scheme, n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 0:
        return np.empty((0, lattice.cells), dtype=np.uint8)
    return np.stack([gen_ic(lattice, scheme, rng) for _ in range(n)])


@dataclass(frozen=True)
class CaOutcome:
    final: np.ndarray
    steps_run: int
    verdict: Verdict
    correct: bool
    trajectory: np.ndarray | None = None


def verdict_of(config: np.ndarray) -> Verdict:
    if config.all():
        return Verdict.ALL_ONES
    if not config.any():
        return Verdict.ALL_ZEROS
    return Verdict.UNSETTLED


def _check(f: Fsm, lattice: Lattice) -> None:
    if f.layout.n_inputs != lattice.n_neighbors:
        raise ValueError(
            f"FSM expects {f.layout.n_inputs} inputs but lattice neighbourhood has {lattice.n_neighbors}"
        )


def simulate(
    f: Fsm,
    lattice: Lattice,
    ics: np.ndarray,
    mask: KnockoutMask = NO_KNOCKOUT,
    steps: int | None = None,
    record: bool = False,
    backend=None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Run a batch of ICs for ``steps`` (default M) synchronous steps.

    Returns final configurations ``(n, cells)`` and, if ``record``, the full
    trajectories ``(n, steps + 1, cells)``.
    """
    _check(f, lattice)
    ics = np.ascontiguousarray(np.atleast_2d(ics), dtype=np.uint8)
    if ics.shape[1] != lattice.cells:
        raise ValueError(f"IC has {ics.shape[1]} cells, lattice has {lattice.cells}")
    kern = backend or _kernels.backend
    return kern.simulate(
        *f.packed,
        lattice.neighbors,
        ics,
        np.uint64(read_mask(f.layout, mask)),
        f.layout.n_inputs,
        lattice.steps if steps is None else int(steps),
        bool(record),
    )


def correct_mask(ics: np.ndarray, finals: np.ndarray) -> np.ndarray:
    """Per-IC correctness: the final configuration is homogeneous at the IC's majority."""
    cells = ics.shape[1]
    ones = ics.sum(axis=1, dtype=np.int64)
    if np.any(2 * ones == cells):
        raise TieError("tie IC in batch")
    target = (2 * ones > cells)[:, None]
    return np.all(finals.astype(bool) == target, axis=1)


def run_ic(
    f: Fsm,
    lattice: Lattice,
    ic: np.ndarray,
    mask: KnockoutMask = NO_KNOCKOUT,
    record_trajectory: bool = False,
) -> CaOutcome:
    finals, traj = simulate(f, lattice, ic, mask, record=record_trajectory)
    final = finals[0]
    v = verdict_of(final)
    maj = majority(np.asarray(ic))
    correct = (v is Verdict.ALL_ONES and maj == 1) or (v is Verdict.ALL_ZEROS and maj == 0)
    return CaOutcome(final, lattice.steps, v, correct, None if traj is None else traj[0])


def count_correct(
    f: Fsm,
    lattice: Lattice,
    ics: np.ndarray,
    mask: KnockoutMask = NO_KNOCKOUT,
    jobs: int = 1,
) -> int:
    """Number of ICs classified correctly; ``jobs`` splits the batch over threads."""
    if len(ics) == 0:
        return 0
    chunks = [c for c in np.array_split(ics, max(1, min(jobs, len(ics)))) if len(c)]
    if len(chunks) == 1:
        return int(correct_mask(ics, simulate(f, lattice, ics, mask)[0]).sum())
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(len(chunks)) as pool:
        parts = pool.map(lambda c: int(correct_mask(c, simulate(f, lattice, c, mask)[0]).sum()), chunks)
        return sum(parts)
