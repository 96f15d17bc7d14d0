"""Gate networks over a fixed table of binary state variables.

State variable indices: neighbourhood inputs occupy ``[0, n_inputs)``, the
output is ``n_inputs`` and the 16 hidden variables follow it.  One step reads
the time-t vector, ORs every gate's outputs into a zeroed time-t+1 buffer and
returns the output and hidden slots of that buffer.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .genome import Genome, scan_genes

N_HIDDEN = 16


@dataclass(frozen=True)
class StateLayout:
    n_inputs: int

    def __post_init__(self):
        if self.n_inputs < 1:
            raise ValueError("layout needs at least one input")
        if self.total > 64:
            raise ValueError(f"{self.total} state variables exceed the 64-bit state word")

    n_output = 1
    n_hidden = N_HIDDEN

    @property
    def total(self) -> int:
        return self.n_inputs + 1 + N_HIDDEN

    @property
    def output_index(self) -> int:
        return self.n_inputs

    @property
    def hidden_ids(self) -> range:
        return range(self.n_inputs + 1, self.total)

    @property
    def self_slot(self) -> int:
        # Raster-ordered Moore neighbourhoods put the zero offset in the middle.
        return self.n_inputs // 2


LAYOUT_1D = StateLayout(5)
LAYOUT_2D = StateLayout(25)
LAYOUT_3D = StateLayout(27)


@dataclass(frozen=True)
class LogicGate:
    input_ids: tuple[int, ...]
    output_ids: tuple[int, ...]
    truth_table: tuple[int, ...]

    def __post_init__(self):
        if len(self.truth_table) != 2 ** len(self.input_ids):
            raise ValueError("truth table length must be 2**fan_in")
        if not self.output_ids:
            raise ValueError("gate needs at least one output")


@dataclass(frozen=True)
class KnockoutMask:
    hold_hidden_zero: bool = False
    hold_neighbor_inputs_zero: bool = False


NO_KNOCKOUT = KnockoutMask()


def read_mask(layout: StateLayout, mask: KnockoutMask = NO_KNOCKOUT) -> int:
    """Bits of the time-t state word that gates may see.  The output slot is write-only."""
    bits = (1 << layout.total) - 1
    bits &= ~(1 << layout.output_index)
    if mask.hold_hidden_zero:
        for h in layout.hidden_ids:
            bits &= ~(1 << h)
    if mask.hold_neighbor_inputs_zero:
        for i in range(layout.n_inputs):
            if i != layout.self_slot:
                bits &= ~(1 << i)
    return bits


@dataclass(frozen=True)
class Fsm:
    layout: StateLayout
    gates: tuple[LogicGate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= i < self.layout.total for i in (*g.input_ids, *g.output_ids)):
                raise ValueError(f"gate ids out of range for {self.layout.total} state variables")

    @property
    def reads_hidden(self) -> bool:
        hidden = set(self.layout.hidden_ids)
        return any(i in hidden for g in self.gates for i in g.input_ids)

    @cached_property
    def packed(self) -> tuple[np.ndarray, ...]:
        """CSR-style arrays ``(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables)`` for the kernels."""
        gates = self.gates
        in_ptr = np.zeros(len(gates) + 1, dtype=np.int32)
        out_ptr = np.zeros(len(gates) + 1, dtype=np.int32)
        tab_ptr = np.zeros(len(gates) + 1, dtype=np.int64)
        for i, g in enumerate(gates):
            in_ptr[i + 1] = in_ptr[i] + len(g.input_ids)
            out_ptr[i + 1] = out_ptr[i] + len(g.output_ids)
            tab_ptr[i + 1] = tab_ptr[i] + len(g.truth_table)
        # Trailing pad element: the compiled core takes &arr[0] even with no gates.
        flat = lambda attr, dt: np.array(
            [v for g in gates for v in getattr(g, attr)] + [0], dtype=dt
        )
        return (
            in_ptr,
            flat("input_ids", np.int32),
            out_ptr,
            flat("output_ids", np.int32),
            tab_ptr,
            flat("truth_table", np.uint8),
        )


def compile_genome(g: Genome, layout: StateLayout) -> Fsm:
    """Translate a genome into its gate network, gates in scan order."""
    gates = [
        LogicGate(span.input_ids, span.output_ids, span.table_codons)
        for span in scan_genes(g, layout.total)
    ]
    return Fsm(layout, tuple(gates))


def apply_gates(f: Fsm, word: int) -> int:
    """One synchronous gate pass over an integer state word; returns the t+1 word."""
    nxt = 0
    for g in f.gates:
        r = 0
        for i in g.input_ids:
            r = (r << 1) | ((word >> i) & 1)
        val = g.truth_table[r]
        n_out = len(g.output_ids)
        for j, o in enumerate(g.output_ids):
            nxt |= ((val >> (n_out - 1 - j)) & 1) << o
    return nxt


def step(
    f: Fsm,
    input_bits: Sequence[int],
    hidden_bits: Sequence[int],
    mask: KnockoutMask = NO_KNOCKOUT,
) -> tuple[int, list[int]]:
    """Single-cell reference step: ``(output_bit, next_hidden_bits)``."""
    lay = f.layout
    if len(input_bits) != lay.n_inputs:
        raise ValueError(f"expected {lay.n_inputs} input bits, got {len(input_bits)}")
    if len(hidden_bits) != N_HIDDEN:
        raise ValueError(f"expected {N_HIDDEN} hidden bits, got {len(hidden_bits)}")
    word = 0
    for i, b in enumerate(input_bits):
        word |= (int(b) & 1) << i
    for h, b in zip(lay.hidden_ids, hidden_bits):
        word |= (int(b) & 1) << h
    nxt = apply_gates(f, word & read_mask(lay, mask))
    return (nxt >> lay.output_index) & 1, [(nxt >> h) & 1 for h in lay.hidden_ids]


def wolfram_table(rule: int, k: int = 3) -> list[int]:
    """Rule-number lookup: entry ``i`` is the output for neighbourhood ``i`` read MSB-first (left cell first)."""
    return [(rule >> i) & 1 for i in range(2**k)]


def majority_table(k: int) -> list[int]:
    return [int(bin(i).count("1") * 2 > k) for i in range(2**k)]


def rule_table_fsm(
    table: Sequence[int],
    k: int,
    layout: StateLayout,
    input_ids: Sequence[int] | None = None,
) -> Fsm:
    """Memoryless FSM computing ``output = table[neighbourhood]`` with one wide gate.

    By default the gate reads the ``k`` raster-contiguous inputs centred on the
    cell itself (all inputs when ``k == n_inputs``).
    """
    if k > layout.n_inputs:
        raise ValueError(f"k={k} exceeds the layout's {layout.n_inputs} inputs")
    if len(table) != 2**k:
        raise ValueError(f"rule table needs {2**k} entries")
    if input_ids is None:
        lo = layout.self_slot - k // 2
        input_ids = range(lo, lo + k)
    gate = LogicGate(tuple(input_ids), (layout.output_index,), tuple(int(b) & 1 for b in table))
    return Fsm(layout, (gate,))
