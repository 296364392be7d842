# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Add-compare-select recursion and traceback for batched soft-decision Viterbi decoding."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def acs(const double[:, :, ::1] label_metric, const long long[:, ::1] out_label,
        const long long[:, ::1] pred_state, const long long[:, ::1] pred_input,
        const double[:, ::1] init):
    """Forward recursion.

    label_metric[b, t, c] is the cost of output label c in section t and
    out_label[state, input] the label a branch emits. pred_state/pred_input
    list the two predecessors of each state in branch-index order; the second
    one survives only with a strictly smaller metric. Returns the survivor
    choice per (b, t, state) and the final path metrics.
    """
    cdef Py_ssize_t B = label_metric.shape[0], T = label_metric.shape[1]
    cdef Py_ssize_t ns = pred_state.shape[0]
    cdef Py_ssize_t b, t, s, p0, p1
    cdef double m0, m1
    decisions = np.zeros((B, T, ns), dtype=np.uint8)
    final = np.empty((B, ns), dtype=np.float64)
    cdef unsigned char[:, :, ::1] dec = decisions
    cdef double[:, ::1] fin = final
    cdef double[::1] cur = np.empty(ns, dtype=np.float64)
    cdef double[::1] nxt = np.empty(ns, dtype=np.float64)
    cdef double[::1] tmp
    with nogil:
        for b in range(B):
            for s in range(ns):
                cur[s] = init[b, s]
            for t in range(T):
                for s in range(ns):
                    p0 = pred_state[s, 0]
                    p1 = pred_state[s, 1]
                    m0 = cur[p0] + label_metric[b, t, out_label[p0, pred_input[s, 0]]]
                    m1 = cur[p1] + label_metric[b, t, out_label[p1, pred_input[s, 1]]]
                    if m1 < m0:
                        nxt[s] = m1
                        dec[b, t, s] = 1
                    else:
                        nxt[s] = m0
                tmp = cur
                cur = nxt
                nxt = tmp
            for s in range(ns):
                fin[b, s] = cur[s]
    return decisions, final


def traceback(const unsigned char[:, :, ::1] dec, const long long[:, ::1] pred_state,
              const long long[:, ::1] pred_input, const long long[::1] start):
    """Follow survivors back from ``start`` states; returns the input bits."""
    cdef Py_ssize_t B = dec.shape[0], T = dec.shape[1]
    cdef Py_ssize_t b, t
    cdef long long s
    cdef unsigned char d
    bits = np.empty((B, T), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = bits
    with nogil:
        for b in range(B):
            s = start[b]
            for t in range(T - 1, -1, -1):
                d = dec[b, t, s]
                out[b, t] = <unsigned char> pred_input[s, d]
                s = pred_state[s, d]
    return bits
