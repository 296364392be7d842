"""Numpy reference implementation of the Viterbi kernels."""

import numpy as np


def acs(label_metric, out_label, pred_state, pred_input, init):
    B, T, _ = label_metric.shape
    ns = pred_state.shape[0]
    decisions = np.zeros((B, T, ns), dtype=np.uint8)
    cur = np.array(init, dtype=np.float64, copy=True)
    p0, p1 = pred_state[:, 0], pred_state[:, 1]
    c0 = out_label[p0, pred_input[:, 0]]
    c1 = out_label[p1, pred_input[:, 1]]
    for t in range(T):
        step = label_metric[:, t]
        m0 = cur[:, p0] + step[:, c0]
        m1 = cur[:, p1] + step[:, c1]
        pick = m1 < m0
        decisions[:, t] = pick
        cur = np.where(pick, m1, m0)
    return decisions, cur


def traceback(dec, pred_state, pred_input, start):
    B, T, _ = dec.shape
    bits = np.empty((B, T), dtype=np.uint8)
    rows = np.arange(B)
    state = np.array(start, dtype=np.int64)
    for t in range(T - 1, -1, -1):
        d = dec[rows, t, state]
        bits[:, t] = pred_input[state, d]
        state = pred_state[state, d]
    return bits
