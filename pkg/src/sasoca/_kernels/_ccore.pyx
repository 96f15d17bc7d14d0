# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CA/FSM kernels.  Signatures mirror ``_pycore``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint8_t, int32_t, int64_t, uint64_t
from libc.string cimport memcmp

cnp.import_array()

NAME = "cython"


cdef inline uint64_t _gates(
    uint64_t word,
    const int32_t* in_ptr, const int32_t* in_ids,
    const int64_t* tab_ptr, const uint64_t* scatter,
    Py_ssize_t n_gates,
) noexcept nogil:
    cdef uint64_t nxt = 0
    cdef uint64_t idx
    cdef Py_ssize_t g, j
    for g in range(n_gates):
        idx = 0
        for j in range(in_ptr[g], in_ptr[g + 1]):
            idx = (idx << 1) | ((word >> in_ids[j]) & 1)
        nxt |= scatter[tab_ptr[g] + <int64_t>idx]
    return nxt


def _scatter_tables(out_ptr, out_ids, tab_ptr, tables, uint64_t keep=~(<uint64_t>0)):
    """Per table entry, the next-state bits it sets (outputs already placed)."""
    out_ptr = np.asarray(out_ptr)
    out_ids = np.asarray(out_ids)
    tab_ptr = np.asarray(tab_ptr)
    tables = np.asarray(tables).astype(np.uint64)
    scatter = np.zeros(len(tables), dtype=np.uint64)
    for g in range(len(tab_ptr) - 1):
        lo, hi = tab_ptr[g], tab_ptr[g + 1]
        outs = out_ids[out_ptr[g]:out_ptr[g + 1]]
        n_out = len(outs)
        for j, o in enumerate(outs):
            bit = (tables[lo:hi] >> np.uint64(n_out - 1 - j)) & np.uint64(1)
            scatter[lo:hi] |= bit << np.uint64(o)
    return scatter & np.uint64(keep)


def _compact(in_ptr, in_ids, tab_ptr, scatter):
    """Drop gates whose scatter masks are all zero."""
    in_ptr = np.asarray(in_ptr)
    in_ids = np.asarray(in_ids)
    tab_ptr = np.asarray(tab_ptr)
    keep = [g for g in range(len(in_ptr) - 1) if scatter[tab_ptr[g]:tab_ptr[g + 1]].any()]
    n_in = [in_ptr[g + 1] - in_ptr[g] for g in keep]
    c_in_ptr = np.zeros(len(keep) + 1, dtype=np.int32)
    c_in_ptr[1:] = np.cumsum(n_in, dtype=np.int64)
    c_in_ids = np.zeros(int(c_in_ptr[-1]) + 1, dtype=np.int32)
    c_tab_ptr = np.zeros(len(keep) + 1, dtype=np.int64)
    c_scatter = np.zeros(sum(1 << int(k) for k in n_in) + 1, dtype=np.uint64)
    for i, g in enumerate(keep):
        c_in_ids[c_in_ptr[i]:c_in_ptr[i + 1]] = in_ids[in_ptr[g]:in_ptr[g + 1]]
        size = tab_ptr[g + 1] - tab_ptr[g]
        c_tab_ptr[i + 1] = c_tab_ptr[i] + size
        c_scatter[c_tab_ptr[i]:c_tab_ptr[i + 1]] = scatter[tab_ptr[g]:tab_ptr[g + 1]]
    return c_in_ptr, c_in_ids, c_tab_ptr, c_scatter


def simulate(
    const int32_t[::1] in_ptr, const int32_t[::1] in_ids,
    const int32_t[::1] out_ptr, const int32_t[::1] out_ids,
    const int64_t[::1] tab_ptr, const uint8_t[::1] tables,
    const int32_t[:, ::1] neighbors, const uint8_t[:, ::1] ics,
    uint64_t read_mask, int n_inputs, int steps, bint record,
):
    cdef Py_ssize_t n = ics.shape[0], cells = ics.shape[1], k = neighbors.shape[1]
    cdef Py_ssize_t n_gates = in_ptr.shape[0] - 1
    cdef uint64_t hidden_keep = ~((<uint64_t>2 << n_inputs) - 1)
    cdef uint64_t word, out
    cdef Py_ssize_t i, c, j, t, s
    cdef bint fixed

    finals_arr = np.empty((n, cells), dtype=np.uint8)
    cdef uint8_t[:, ::1] finals = finals_arr
    if record:
        traj_arr = np.empty((n, steps + 1, cells), dtype=np.uint8)
    else:
        traj_arr = np.empty((1, 1, 1), dtype=np.uint8)
    cdef uint8_t[:, :, ::1] traj = traj_arr

    # One spare element keeps &buf[0] valid for empty lattices.
    cur_a = np.empty(cells + 1, dtype=np.uint8)
    nxt_a = np.empty(cells + 1, dtype=np.uint8)
    hid_a = np.empty(cells + 1, dtype=np.uint64)
    nhid_a = np.empty(cells + 1, dtype=np.uint64)
    cdef uint8_t[::1] cur = cur_a
    cdef uint8_t[::1] nxt = nxt_a
    cdef uint64_t[::1] hid = hid_a
    cdef uint64_t[::1] nhid = nhid_a
    cdef uint8_t* pcur = &cur[0]
    cdef uint8_t* pnxt = &nxt[0]
    cdef uint64_t* phid = &hid[0]
    cdef uint64_t* pnhid = &nhid[0]
    cdef uint8_t* ptmp
    cdef uint64_t* phtmp
    cdef const int32_t* nb = &neighbors[0, 0]

    scatter_a = _scatter_tables(out_ptr, out_ids, tab_ptr, tables)
    cdef const uint64_t[::1] scatter = scatter_a
    cdef const int32_t* p_in_ptr = &in_ptr[0]
    cdef const int32_t* p_in_ids = &in_ids[0]
    cdef const int64_t* p_tab_ptr = &tab_ptr[0]
    cdef const uint64_t* p_scatter = &scatter[0]

    with nogil:
        for i in range(n):
            for c in range(cells):
                pcur[c] = ics[i, c]
                phid[c] = 0
            if record:
                for c in range(cells):
                    traj[i, 0, c] = pcur[c]
            t = 0
            while t < steps:
                for c in range(cells):
                    word = phid[c]
                    for j in range(k):
                        word |= (<uint64_t>pcur[nb[c * k + j]]) << j
                    word &= read_mask
                    out = _gates(word, p_in_ptr, p_in_ids, p_tab_ptr, p_scatter, n_gates)
                    pnxt[c] = (out >> n_inputs) & 1
                    pnhid[c] = out & hidden_keep
                t += 1
                # A repeated (configuration, hidden) pair is a fixed point of
                # a deterministic map: every later step is identical.
                fixed = (memcmp(pcur, pnxt, cells) == 0
                         and memcmp(phid, pnhid, cells * sizeof(uint64_t)) == 0)
                ptmp = pcur; pcur = pnxt; pnxt = ptmp
                phtmp = phid; phid = pnhid; pnhid = phtmp
                if record:
                    for c in range(cells):
                        traj[i, t, c] = pcur[c]
                if fixed:
                    if record:
                        for s in range(t + 1, steps + 1):
                            for c in range(cells):
                                traj[i, s, c] = pcur[c]
                    break
            for c in range(cells):
                finals[i, c] = pcur[c]
    return finals_arr, (traj_arr if record else None)


def outputs(
    const int32_t[::1] in_ptr, const int32_t[::1] in_ids,
    const int32_t[::1] out_ptr, const int32_t[::1] out_ids,
    const int64_t[::1] tab_ptr, const uint8_t[::1] tables,
    const uint64_t[::1] words, int out_slot,
):
    """Output-slot bit of one gate pass for each raw state word (no masking)."""
    c_in_ptr, c_in_ids, c_tab_ptr, c_scatter = _compact(
        in_ptr, in_ids, tab_ptr, _scatter_tables(out_ptr, out_ids, tab_ptr, tables, <uint64_t>1 << out_slot))
    cdef const int32_t[::1] ip = c_in_ptr
    cdef const int32_t[::1] ii = c_in_ids
    cdef const int64_t[::1] tp = c_tab_ptr
    cdef const uint64_t[::1] sc = c_scatter
    cdef Py_ssize_t n = words.shape[0], i
    cdef Py_ssize_t n_gates = ip.shape[0] - 1
    res_arr = np.empty(n, dtype=np.uint8)
    cdef uint8_t[::1] res = res_arr
    with nogil:
        for i in range(n):
            res[i] = (_gates(words[i], &ip[0], &ii[0], &tp[0], &sc[0], n_gates) >> out_slot) & 1
    return res_arr


def count_outputs_range(
    const int32_t[::1] in_ptr, const int32_t[::1] in_ids,
    const int32_t[::1] out_ptr, const int32_t[::1] out_ids,
    const int64_t[::1] tab_ptr, const uint8_t[::1] tables,
    uint64_t start, uint64_t stop, int out_slot,
):
    """Number of words in ``[start, stop)`` whose output-slot bit is 1."""
    c_in_ptr, c_in_ids, c_tab_ptr, c_scatter = _compact(
        in_ptr, in_ids, tab_ptr, _scatter_tables(out_ptr, out_ids, tab_ptr, tables, <uint64_t>1 << out_slot))
    cdef const int32_t[::1] ip = c_in_ptr
    cdef const int32_t[::1] ii = c_in_ids
    cdef const int64_t[::1] tp = c_tab_ptr
    cdef const uint64_t[::1] sc = c_scatter
    cdef Py_ssize_t n_gates = ip.shape[0] - 1
    cdef uint64_t w, total = 0
    with nogil:
        w = start
        while w < stop:
            total += (_gates(w, &ip[0], &ii[0], &tp[0], &sc[0], n_gates) >> out_slot) & 1
            w += 1
    return int(total)
