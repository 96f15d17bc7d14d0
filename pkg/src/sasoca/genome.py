"""Circular integer genomes, gene scanning and mutation operators.

A genome is a circular sequence of codons in ``[0, 255]``.  A gene starts at
every occurrence of the start codon ``(42, 213)`` and is laid out as::

    42 213 | fan-in | fan-out | input ids ... | output ids ... | table ...

with ``n_in = 1 + fan_in % 4``, ``n_out = 1 + fan_out % 4``, every id taken
modulo the number of state variables and ``2**n_in`` truth-table codons.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

START_CODON = (42, 213)
CODON_MAX = 255
MIN_LENGTH = 1_000
MAX_LENGTH = 40_000  # exclusive
MAX_FAN = 4
FILE_MAGIC = "sasoca-genome v1"


class GenomeError(ValueError):
    """Raised for malformed genomes or genome files."""


def _as_codons(codons) -> np.ndarray:
    arr = np.asarray(codons.codons if isinstance(codons, Genome) else codons)
    if arr.ndim != 1:
        raise GenomeError("codons must be a 1-D sequence")
    if arr.size and (arr.min() < 0 or arr.max() > CODON_MAX):
        raise GenomeError(f"codons must lie in [0, {CODON_MAX}]")
    return arr.astype(np.uint8)


class Genome:
    """Immutable circular codon sequence with length in [1000, 40000)."""

    __slots__ = ("_codons",)

    def __init__(self, codons: Iterable[int]):
        arr = _as_codons(codons if hasattr(codons, "__len__") else list(codons))
        if not MIN_LENGTH <= arr.size < MAX_LENGTH:
            raise GenomeError(
                f"genome length {arr.size} outside [{MIN_LENGTH}, {MAX_LENGTH})"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        self._codons = arr

    @property
    def codons(self) -> np.ndarray:
        return self._codons

    def __len__(self) -> int:
        return int(self._codons.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, Genome) and np.array_equal(self._codons, other._codons)

    def __hash__(self) -> int:
        return hash(self._codons.tobytes())

    def __repr__(self) -> str:
        return f"Genome(len={len(self)})"


@dataclass(frozen=True)
class GeneSpan:
    start_index: int
    n_in: int
    n_out: int
    input_ids: tuple[int, ...]
    output_ids: tuple[int, ...]
    table_codons: tuple[int, ...]

    @property
    def length(self) -> int:
        return 4 + self.n_in + self.n_out + 2**self.n_in


@dataclass(frozen=True)
class MutationConfig:
    point_rate: float = 0.01
    indel_rate: float = 0.05
    indel_size_range: tuple[int, int] = (16, 512)
    min_length: int = MIN_LENGTH
    max_length: int = MAX_LENGTH

    def __post_init__(self):
        for name in ("point_rate", "indel_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")
        lo, hi = self.indel_size_range
        if not 1 <= lo < hi:
            raise ValueError(f"indel size range [{lo}, {hi}) is empty")


def start_positions(codons) -> np.ndarray:
    """Indices ``i`` where ``codons[i], codons[i+1]`` (circularly) is the start codon."""
    c = _as_codons(codons)
    if c.size == 0:
        return np.empty(0, dtype=np.int64)
    hits = (c == START_CODON[0]) & (np.roll(c, -1) == START_CODON[1])
    if c.size == 1:
        hits[:] = False
    return np.flatnonzero(hits)


def decode_gene(codons, start: int, total_states: int) -> GeneSpan:
    c = _as_codons(codons)
    n = c.size
    pos = start + 2

    def take(k: int) -> list[int]:
        nonlocal pos
        out = [int(c[(pos + j) % n]) for j in range(k)]
        pos += k
        return out

    fan_in, fan_out = take(2)
    n_in = 1 + fan_in % MAX_FAN
    n_out = 1 + fan_out % MAX_FAN
    inputs = tuple(v % total_states for v in take(n_in))
    outputs = tuple(v % total_states for v in take(n_out))
    table = tuple(take(2**n_in))
    return GeneSpan(int(start), n_in, n_out, inputs, outputs, table)


def scan_genes(codons, total_states: int) -> list[GeneSpan]:
    """Decode one gene per start codon, in ascending start position.

    Genes may overlap and bodies wrap around the end of the genome.
    """
    if total_states < 1:
        raise ValueError("total_states must be positive")
    c = _as_codons(codons)
    return [decode_gene(c, int(i), total_states) for i in start_positions(c)]


def encode_gene(
    input_ids: Sequence[int], output_ids: Sequence[int], table: Sequence[int]
) -> list[int]:
    """Codons for a gene with the given wiring; inverse of :func:`decode_gene`."""
    n_in, n_out = len(input_ids), len(output_ids)
    if not (1 <= n_in <= MAX_FAN and 1 <= n_out <= MAX_FAN):
        raise GenomeError(f"fan-in/fan-out must lie in [1, {MAX_FAN}]")
    if len(table) != 2**n_in:
        raise GenomeError(f"table needs {2**n_in} entries, got {len(table)}")
    body = [*START_CODON, n_in - 1, n_out - 1, *input_ids, *output_ids, *table]
    if any(not 0 <= v <= CODON_MAX for v in body):
        raise GenomeError("gene codons must lie in [0, 255]")
    return body


def genome_from_genes(genes: Iterable[Sequence[int]], length: int = MIN_LENGTH) -> Genome:
    """Concatenate encoded genes and zero-pad up to ``length`` codons."""
    codons: list[int] = []
    for g in genes:
        codons.extend(g)
    if len(codons) > length:
        raise GenomeError(f"{len(codons)} gene codons do not fit in length {length}")
    codons.extend([0] * (length - len(codons)))
    return Genome(codons)


def random_gene(total_states: int, rng: np.random.Generator) -> list[int]:
    n_in = int(rng.integers(1, MAX_FAN + 1))
    n_out = int(rng.integers(1, MAX_FAN + 1))
    return encode_gene(
        rng.integers(0, total_states, n_in).tolist(),
        rng.integers(0, total_states, n_out).tolist(),
        rng.integers(0, CODON_MAX + 1, 2**n_in).tolist(),
    )


def random_genome(
    length: int, n_seed_genes: int, total_states: int, rng: np.random.Generator
) -> Genome:
    """Uniform random codons with ``n_seed_genes`` genes at non-overlapping offsets."""
    if not MIN_LENGTH <= length < MAX_LENGTH:
        raise GenomeError(f"genome length {length} outside [{MIN_LENGTH}, {MAX_LENGTH})")
    if n_seed_genes < 0:
        raise ValueError("n_seed_genes must be non-negative")
    codons = rng.integers(0, CODON_MAX + 1, length).astype(np.uint8)
    genes = [random_gene(total_states, rng) for _ in range(n_seed_genes)]
    sizes = [len(g) for g in genes]
    slack = length - sum(sizes)
    if slack < 0:
        raise GenomeError("seed genes do not fit in the genome")
    # Non-overlapping placement: split the slack into n+1 random gaps.
    cuts = np.sort(rng.integers(0, slack + 1, n_seed_genes))
    order = rng.permutation(n_seed_genes)
    pos = 0
    prev = 0
    for cut, gi in zip(cuts, order):
        pos += int(cut) - prev
        prev = int(cut)
        g = genes[gi]
        codons[pos : pos + len(g)] = g
        pos += len(g)
    return Genome(codons)


def point_mutate(g: Genome, cfg: MutationConfig, rng: np.random.Generator) -> Genome:
    codons = g.codons.copy()
    hit = rng.random(codons.size) < cfg.point_rate
    n = int(hit.sum())
    if n:
        codons[hit] = rng.integers(0, CODON_MAX + 1, n)
    return Genome(codons)


def circular_segment(codons: np.ndarray, start: int, size: int) -> np.ndarray:
    return codons[(start + np.arange(size)) % codons.size]


def insert_segment(codons: np.ndarray, src: int, size: int, dst: int) -> np.ndarray:
    """Insert a copy of the circular window ``[src, src+size)`` before index ``dst``."""
    seg = circular_segment(codons, src, size)
    return np.concatenate([codons[:dst], seg, codons[dst:]])


def delete_segment(codons: np.ndarray, start: int, size: int) -> np.ndarray:
    """Remove the circular window ``[start, start+size)``."""
    keep = np.ones(codons.size, dtype=bool)
    keep[(start + np.arange(size)) % codons.size] = False
    return codons[keep]


def indel_mutate(g: Genome, cfg: MutationConfig, rng: np.random.Generator) -> Genome:
    """One possible insertion then one possible deletion; out-of-bounds events are skipped."""
    codons = g.codons
    lo, hi = cfg.indel_size_range
    if rng.random() < cfg.indel_rate:
        size = int(rng.integers(lo, hi))
        src = int(rng.integers(0, codons.size))
        dst = int(rng.integers(0, codons.size + 1))
        if codons.size + size < cfg.max_length:
            codons = insert_segment(codons, src, size, dst)
    if rng.random() < cfg.indel_rate:
        size = int(rng.integers(lo, hi))
        start = int(rng.integers(0, codons.size))
        if codons.size - size >= cfg.min_length:
            codons = delete_segment(codons, start, size)
    return g if codons is g.codons else Genome(codons)


def mutate(g: Genome, cfg: MutationConfig, rng: np.random.Generator) -> Genome:
    return indel_mutate(point_mutate(g, cfg, rng), cfg, rng)


def dumps(g: Genome, total_states: int) -> str:
    return f"{FILE_MAGIC} total_states={total_states}\n" + " ".join(map(str, g.codons.tolist())) + "\n"


def loads(text: str) -> tuple[Genome, int]:
    """Parse the two-line genome text format; returns ``(genome, total_states)``."""
    lines = text.splitlines()
    if len(lines) < 2:
        raise GenomeError("genome file needs a header line and a codon line")
    head = lines[0].split()
    if " ".join(head[:2]) != FILE_MAGIC or len(head) != 3 or not head[2].startswith("total_states="):
        raise GenomeError(f"bad genome header: {lines[0]!r}")
    try:
        total = int(head[2].split("=", 1)[1])
        values = [int(tok) for tok in lines[1].split()]
    except ValueError as exc:
        raise GenomeError(f"non-integer field in genome file: {exc}") from None
    if total < 1:
        raise GenomeError("total_states must be positive")
    if any(not 0 <= v <= CODON_MAX for v in values):
        raise GenomeError(f"codon outside [0, {CODON_MAX}]")
    return Genome(values), total


def save(path: str | Path, g: Genome, total_states: int) -> None:
    Path(path).write_text(dumps(g, total_states))


def load(path: str | Path) -> tuple[Genome, int]:
    return loads(Path(path).read_text())
