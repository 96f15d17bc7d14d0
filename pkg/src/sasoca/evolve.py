"""Steady-state evolutionary algorithm over FSM genomes.

Each update re-evaluates every individual on one shared, freshly drawn IC set,
appends the result to its lineage window, culls the lowest 10% by window mean
and refills by fitness-proportional asexual reproduction.  All randomness is
drawn from streams keyed by ``(seed, purpose, update, id)``, so results do not
depend on how evaluations are scheduled.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from . import genome as gn
from .ca import ORDERING, Lattice, Scheme, count_correct, gen_ics, make_lattice, TOPOLOGIES
from .fsm import Fsm, StateLayout, compile_genome

log = logging.getLogger(__name__)

# Stream purposes for derived RNGs.
_INIT, _ICS, _SELECT, _MUTATE = range(4)

LOG_HEADER = ["update", "max_eff_fitness", "mean_eff_fitness", "max_raw_fitness", "mean_genome_len"]


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


@dataclass(frozen=True)
class EaConfig:
    population_size: int = 500
    replacement_rate: float = 0.1
    samples_per_eval: int = 100
    updates: int = 10_000
    mutation: gn.MutationConfig = field(default_factory=gn.MutationConfig)
    topology: str = "1d"
    dims: tuple[int, ...] | None = None
    radius: int | None = None
    ic_scheme: str = Scheme.UNIFORM_FULL.value
    seed: int = 0
    window: int = 10
    initial_genome_size: int = 10_000
    initial_genes: int = 16
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 1 <= self.n_replace < self.population_size:
            raise ValueError("replacement count must lie in [1, population_size)")
        if self.samples_per_eval < 1 or self.window < 1 or self.updates < 0:
            raise ValueError("samples_per_eval and window must be positive, updates non-negative")
        Scheme(self.ic_scheme)

    @property
    def n_replace(self) -> int:
        return int(round(self.replacement_rate * self.population_size))

    def lattice(self) -> Lattice:
        base = TOPOLOGIES[self.topology]
        return make_lattice(self.dims or base["dims"], self.radius or base["radius"])

    def layout(self) -> StateLayout:
        return StateLayout(self.lattice().n_neighbors)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mutation"]["indel_size_range"] = list(self.mutation.indel_size_range)
        if self.dims is not None:
            d["dims"] = list(self.dims)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EaConfig":
        d = dict(d)
        m = dict(d.pop("mutation", {}))
        if "indel_size_range" in m:
            m["indel_size_range"] = tuple(m["indel_size_range"])
        if d.get("dims") is not None:
            d["dims"] = tuple(d["dims"])
        return cls(mutation=gn.MutationConfig(**m), **d)


@dataclass(eq=False)
class Individual:
    id: int
    genome: gn.Genome
    parent_id: int | None = None
    lineage_window: tuple[float, ...] = ()
    raw_fitness: float | None = None

    @property
    def effective_fitness(self) -> float:
        w = self.lineage_window
        return sum(w) / len(w) if w else 0.0

    def fsm(self, layout: StateLayout) -> Fsm:
        cache = self.__dict__.setdefault("_fsm_cache", {})
        if layout not in cache:
            cache[layout] = compile_genome(self.genome, layout)
        return cache[layout]


@dataclass
class Population:
    individuals: list[Individual]
    next_id: int

    def __len__(self) -> int:
        return len(self.individuals)

    def best(self) -> Individual:
        # Highest window mean; the youngest wins ties.
        return max(self.individuals, key=lambda i: (i.effective_fitness, i.id))


@dataclass(frozen=True)
class UpdateRecord:
    update: int
    max_eff_fitness: float
    mean_eff_fitness: float
    max_raw_fitness: float
    mean_genome_len: float

    def row(self) -> list[str]:
        return [str(self.update)] + [repr(float(v)) for v in asdict(self).values()][1:]


@dataclass
class RunLog:
    records: list[UpdateRecord] = field(default_factory=list)
    dominant: Individual | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for r in self.records:
            w.writerow(r.row())
        return buf.getvalue()

    @staticmethod
    def records_from_csv(text: str) -> list[UpdateRecord]:
        rows = list(csv.DictReader(io.StringIO(text)))
        return [
            UpdateRecord(int(r["update"]), *(float(r[k]) for k in LOG_HEADER[1:]))
            for r in rows
        ]


def evaluate(
    f: Fsm, lattice: Lattice, scheme, n_samples: int, rng: np.random.Generator, jobs: int = 1
) -> float:
    """Fraction of ``n_samples`` fresh ICs classified correctly (no partial credit)."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    ics = gen_ics(lattice, scheme, n_samples, rng)
    return count_correct(f, lattice, ics, jobs=jobs) / n_samples


def test_dominant(ind, lattice: Lattice, n: int = 1000, seed: int = 0, scheme=Scheme.BINOMIAL, jobs: int = 1) -> float:
    """Accuracy on ``n`` Binomial ICs drawn from ``default_rng(seed)``."""
    f = ind if isinstance(ind, Fsm) else ind.fsm(StateLayout(lattice.n_neighbors))
    return evaluate(f, lattice, scheme, n, np.random.default_rng(seed), jobs=jobs)


test_dominant.__test__ = False  # not a pytest test


def initial_population(cfg: EaConfig) -> Population:
    total = cfg.layout().total
    inds = [
        Individual(i, gn.random_genome(cfg.initial_genome_size, cfg.initial_genes, total, stream(cfg.seed, _INIT, i)))
        for i in range(cfg.population_size)
    ]
    return Population(inds, cfg.population_size)


def _evaluate_all(pop: Population, cfg: EaConfig, lattice: Lattice, ics: np.ndarray, jobs: int) -> list[float]:
    layout = StateLayout(lattice.n_neighbors)
    n = len(ics)

    def score(ind: Individual) -> float:
        return count_correct(ind.fsm(layout), lattice, ics) / n

    if jobs <= 1:
        return [score(i) for i in pop.individuals]
    with ThreadPoolExecutor(jobs) as ex:
        return list(ex.map(score, pop.individuals))


def evaluate_population(pop: Population, cfg: EaConfig, update_index: int, lattice: Lattice, jobs: int = 1) -> None:
    """Score everyone on the update's shared IC set and extend their lineage windows."""
    ics = gen_ics(lattice, cfg.ic_scheme, cfg.samples_per_eval, stream(cfg.seed, _ICS, update_index))
    for ind, raw in zip(pop.individuals, _evaluate_all(pop, cfg, lattice, ics, jobs)):
        ind.raw_fitness = raw
        ind.lineage_window = (ind.lineage_window + (raw,))[-cfg.window :]


def _record(pop: Population, update_index: int) -> UpdateRecord:
    eff = [i.effective_fitness for i in pop.individuals]
    return UpdateRecord(
        update_index,
        max(eff),
        float(np.mean(eff)),
        max(i.raw_fitness for i in pop.individuals),
        float(np.mean([len(i.genome) for i in pop.individuals])),
    )


def ea_update(
    pop: Population, cfg: EaConfig, update_index: int, lattice: Lattice | None = None, jobs: int = 1
) -> tuple[Population, UpdateRecord]:
    if len(pop) != cfg.population_size:
        raise ValueError(f"population has {len(pop)} individuals, expected {cfg.population_size}")
    lattice = lattice or cfg.lattice()
    evaluate_population(pop, cfg, update_index, lattice, jobs)
    rec = _record(pop, update_index)

    ranked = sorted(pop.individuals, key=lambda i: (i.effective_fitness, i.id))
    survivors = ranked[cfg.n_replace :]
    survivors.sort(key=lambda i: i.id)

    weights = np.array([i.effective_fitness for i in survivors])
    total = weights.sum()
    p = weights / total if total > 0 else None
    rng = stream(cfg.seed, _SELECT, update_index)
    parents = rng.choice(len(survivors), size=cfg.n_replace, p=p)

    children = []
    next_id = pop.next_id
    for pi in parents:
        parent = survivors[pi]
        child_genome = gn.mutate(parent.genome, cfg.mutation, stream(cfg.seed, _MUTATE, update_index, next_id))
        children.append(Individual(next_id, child_genome, parent.id, parent.lineage_window))
        next_id += 1
    return Population(survivors + children, next_id), rec


# -- checkpoints ---------------------------------------------------------

def save_checkpoint(path: Path, pop: Population, cfg: EaConfig, next_update: int, records: list[UpdateRecord]) -> None:
    """Write the population atomically: build in a sibling temp dir, then swap."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir(parents=True)
    total = cfg.layout().total
    members = []
    for ind in pop.individuals:
        fname = f"ind_{ind.id}.genome"
        gn.save(tmp / fname, ind.genome, total)
        members.append(
            dict(id=ind.id, parent_id=ind.parent_id, lineage_window=list(ind.lineage_window),
                 raw_fitness=ind.raw_fitness, genome=fname)
        )
    manifest = dict(
        version=__version__, next_update=next_update, next_id=pop.next_id,
        config=cfg.to_dict(), individuals=members,
    )
    (tmp / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    (tmp / "runlog.csv").write_text(RunLog(records).to_csv())
    if path.exists():
        old = path.with_name(path.name + ".old")
        if old.exists():
            shutil.rmtree(old)
        os.replace(path, old)
        os.replace(tmp, path)
        shutil.rmtree(old)
    else:
        os.replace(tmp, path)


def load_checkpoint(path: Path) -> tuple[Population, EaConfig, int, list[UpdateRecord]]:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    cfg = EaConfig.from_dict(manifest["config"])
    inds = []
    for m in manifest["individuals"]:
        g, _ = gn.load(path / m["genome"])
        inds.append(Individual(m["id"], g, m["parent_id"], tuple(m["lineage_window"]), m["raw_fitness"]))
    records = RunLog.records_from_csv((path / "runlog.csv").read_text())
    return Population(inds, manifest["next_id"]), cfg, manifest["next_update"], records


def run_ea(
    cfg: EaConfig,
    jobs: int = 1,
    checkpoint_dir: Path | None = None,
    resume: bool = False,
    progress: Callable[[UpdateRecord], None] | None = None,
) -> tuple[RunLog, Individual]:
    """Run ``cfg.updates`` updates, then one final evaluation to pick the dominant."""
    lattice = cfg.lattice()
    start, records = 0, []
    if resume and checkpoint_dir is not None and (Path(checkpoint_dir) / "manifest.json").exists():
        pop, saved_cfg, start, records = load_checkpoint(checkpoint_dir)
        if replace(saved_cfg, updates=cfg.updates, checkpoint_every=cfg.checkpoint_every) != cfg:
            raise ValueError("checkpoint was written with a different configuration")
        log.info("resuming at update %d", start)
    else:
        pop = initial_population(cfg)

    for u in range(start, cfg.updates):
        pop, rec = ea_update(pop, cfg, u, lattice, jobs)
        records.append(rec)
        if progress:
            progress(rec)
        if checkpoint_dir is not None and cfg.checkpoint_every and (u + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(checkpoint_dir, pop, cfg, u + 1, records)

    evaluate_population(pop, cfg, cfg.updates, lattice, jobs)
    dominant = pop.best()
    return RunLog(records, dominant), dominant


def dominant_metadata(ind: Individual, cfg: EaConfig) -> dict:
    lat = cfg.lattice()
    return dict(
        topology=cfg.topology, dims=list(lat.dims), radius=lat.radius, ordering=ORDERING,
        total_states=cfg.layout().total, seed=cfg.seed, id=ind.id,
        effective_fitness=ind.effective_fitness, lineage_window=list(ind.lineage_window),
        genome_length=len(ind.genome), version=__version__,
    )
