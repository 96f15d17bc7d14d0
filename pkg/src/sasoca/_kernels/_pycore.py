"""Pure numpy kernels, vectorised over cells and initial configurations.

Same signatures and bit-for-bit the same results as the compiled core.
"""

import numpy as np

NAME = "python"

_ONE = np.uint64(1)


def _unpack(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables):
    gates = []
    for g in range(len(in_ptr) - 1):
        ins = [np.uint64(v) for v in in_ids[in_ptr[g] : in_ptr[g + 1]]]
        outs = [int(v) for v in out_ids[out_ptr[g] : out_ptr[g + 1]]]
        table = np.asarray(tables[tab_ptr[g] : tab_ptr[g + 1]], dtype=np.uint64)
        gates.append((ins, outs, table))
    return gates


def _apply(words: np.ndarray, gates) -> np.ndarray:
    nxt = np.zeros_like(words)
    for ins, outs, table in gates:
        idx = np.zeros_like(words)
        for b in ins:
            idx = (idx << _ONE) | ((words >> b) & _ONE)
        val = table[idx]
        n_out = len(outs)
        for j, o in enumerate(outs):
            nxt |= ((val >> np.uint64(n_out - 1 - j)) & _ONE) << np.uint64(o)
    return nxt


def simulate(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables,
             neighbors, ics, read_mask, n_inputs, steps, record):
    gates = _unpack(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables)
    n, cells = ics.shape
    k = neighbors.shape[1]
    shifts = np.arange(k, dtype=np.uint64)
    read_mask = np.uint64(read_mask)
    out_shift = np.uint64(n_inputs)
    hidden_keep = ~np.uint64((2 << n_inputs) - 1)

    cur = ics.astype(np.uint8, copy=True)
    hid = np.zeros((n, cells), dtype=np.uint64)
    traj = None
    if record:
        traj = np.empty((n, steps + 1, cells), dtype=np.uint8)
        traj[:, 0] = cur
    active = np.arange(n)
    for t in range(1, steps + 1):
        if active.size == 0:
            break
        c, h = cur[active], hid[active]
        words = np.bitwise_or.reduce(c[:, neighbors].astype(np.uint64) << shifts, axis=-1)
        words = (words | h) & read_mask
        out = _apply(words, gates)
        new_c = ((out >> out_shift) & _ONE).astype(np.uint8)
        new_h = out & hidden_keep
        # Unchanged (configuration, hidden) is a fixed point; later steps repeat it.
        fixed = (new_c == c).all(axis=1) & (new_h == h).all(axis=1)
        cur[active] = new_c
        hid[active] = new_h
        if record:
            traj[active, t] = new_c
            done = active[fixed]
            traj[done, t + 1 :] = new_c[fixed][:, None, :]
        active = active[~fixed]
    return cur, traj


def outputs(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables, words, out_slot):
    gates = [(ins, outs, table) for ins, outs, table
             in _unpack(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables)
             if out_slot in outs]
    out = _apply(np.asarray(words, dtype=np.uint64), gates)
    return ((out >> np.uint64(out_slot)) & _ONE).astype(np.uint8)


def count_outputs_range(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables,
                        start, stop, out_slot, chunk=1 << 20):
    total = 0
    for lo in range(start, stop, chunk):
        words = np.arange(lo, min(lo + chunk, stop), dtype=np.uint64)
        total += int(outputs(in_ptr, in_ids, out_ptr, out_ids, tab_ptr, tables,
                             words, out_slot).sum())
    return total
