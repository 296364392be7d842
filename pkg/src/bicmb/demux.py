"""Spatial de-multiplexers, per-stream bit interleavers and the bit location table."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (BudgetExhausted, DesignUnverifiable, MappingConstraintUnsatisfiable,
                     PeriodMismatch)
from .trellis import PunctureMatrix, TrellisGraph, error_events, free_distance


@dataclass(frozen=True)
class DemuxPattern:
    """Periodic map from coded-bit phase to a 1-based stream index."""

    S: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) for x in self.assignment)
        object.__setattr__(self, "assignment", a)
        if self.S < 1 or not a:
            raise ValueError("need S >= 1 and a non-empty assignment")
        if any(x < 1 or x > self.S for x in a):
            raise ValueError("stream indices must lie in 1..S")
        if len(a) % self.S:
            raise PeriodMismatch(f"period {len(a)} is not a multiple of S={self.S}")
        quota = len(a) // self.S
        counts = np.bincount(a, minlength=self.S + 1)[1:]
        if np.any(counts != quota):
            raise ValueError(f"each stream must appear {quota} times per period, got {counts.tolist()}")

    @property
    def period_bits(self) -> int:
        return len(self.assignment)

    def stream_of(self, l: int) -> int:
        return self.assignment[l % len(self.assignment)]


def rotating_demux(S: int, n_c: int) -> DemuxPattern:
    P = math.lcm(n_c, S)
    return DemuxPattern(S, tuple(j % S + 1 for j in range(P)))


def block_demux(S: int, block_len: int, n_c: int | None = None) -> DemuxPattern:
    assignment = tuple(s + 1 for s in range(S) for _ in range(block_len))
    if n_c is not None and len(assignment) % math.lcm(n_c, S):
        raise PeriodMismatch(f"block pattern of period {len(assignment)} does not cover "
                             f"a multiple of lcm({n_c}, {S})")
    return DemuxPattern(S, assignment)


def bits_per_period(trellis: TrellisGraph, puncture: PunctureMatrix | None = None) -> tuple[int, int]:
    """(sections, transmitted bits) of one puncture period."""
    if puncture is None:
        return 1, trellis.n_c
    return puncture.period, puncture.ones


def code_rate(trellis: TrellisGraph, puncture: PunctureMatrix | None = None) -> Fraction:
    sections, bits = bits_per_period(trellis, puncture)
    return Fraction(sections * trellis.k_c, bits)


@dataclass(frozen=True, eq=False)
class StreamMap:
    """Stream index of every mother-code bit over one joint period of
    puncturing and de-multiplexing; 0 marks a punctured bit."""

    sections: int
    streams: np.ndarray         # (sections, n_c)
    bit_index: np.ndarray       # (sections, n_c) transmitted index within the period, -1 if punctured
    bits: int


def stream_map(trellis: TrellisGraph, pattern: DemuxPattern,
               puncture: PunctureMatrix | None = None) -> StreamMap:
    pp, w = bits_per_period(trellis, puncture)
    P = pattern.period_bits
    if P % math.lcm(w, pattern.S):
        raise PeriodMismatch(f"de-multiplexer period {P} is not a multiple of lcm({w}, {pattern.S})")
    T = pp * (P // math.gcd(P, w))
    streams = np.zeros((T, trellis.n_c), dtype=np.int64)
    index = np.full((T, trellis.n_c), -1, dtype=np.int64)
    l = 0
    for t in range(T):
        for j in range(trellis.n_c):
            if puncture is None or puncture.keep(t, j):
                streams[t, j] = pattern.stream_of(l)
                index[t, j] = l
                l += 1
    streams.setflags(write=False)
    index.setflags(write=False)
    return StreamMap(T, streams, index, l)


def design_demux(trellis: TrellisGraph, S: int, n: int = 1, puncture: PunctureMatrix | None = None,
                 seed: int | None = 0, period_bits: int | None = None, verify: bool = True) -> DemuxPattern:
    """Greedy de-multiplexer design reaching Q_max = ceil(S * R_c).

    Each first branch (split from the zero state) of the period gets one of
    its error bits on the lowest stream that still has quota; the remaining
    positions are filled at random within each stream's quota.
    """
    pp, w = bits_per_period(trellis, puncture)
    if period_bits is None:
        period_bits = n * math.lcm(w, S)
    if period_bits % S or period_bits < S:
        raise BudgetExhausted(f"period of {period_bits} bits cannot give {S} streams an equal quota")
    if period_bits % w:
        raise BudgetExhausted(f"period of {period_bits} bits does not cover whole puncture periods")
    quota = [period_bits // S] * S
    sections = pp * period_bits // w
    assignment = [0] * period_bits
    l = 0
    first_bits = []
    for t in range(sections):
        kept = [j for j in range(trellis.n_c) if puncture is None or puncture.keep(t, j)]
        ones = [l + k for k, j in enumerate(kept) if trellis.outputs[0, 1, j]]
        first_bits.append(ones)
        l += len(kept)
    for ones in first_bits:
        if not ones:
            raise BudgetExhausted("a first branch has no transmitted error bit")
        if any(assignment[b] for b in ones):
            continue
        stream = next((s for s in range(S) if quota[s] > 0), None)
        if stream is None:
            raise BudgetExhausted("no stream has quota left for a first branch")
        assignment[ones[0]] = stream + 1
        quota[stream] -= 1
    rest = [s + 1 for s in range(S) for _ in range(quota[s])]
    rng = np.random.default_rng(seed)
    rng.shuffle(rest)
    it = iter(rest)
    assignment = [a or next(it) for a in assignment]
    pattern = DemuxPattern(S, tuple(assignment))
    if verify:
        from .spectrum import exact_q_max
        target = -(-S * code_rate(trellis, puncture).numerator // code_rate(trellis, puncture).denominator)
        achieved = exact_q_max(trellis, pattern, puncture)
        if achieved != target:
            raise DesignUnverifiable(f"designed pattern reaches Q_max={achieved}, expected {target}")
    return pattern


@dataclass(frozen=True, eq=False)
class BitLocationTable:
    """Packet-level map l -> (k, s, i): symbol time, 1-based stream, bit position."""

    entries: np.ndarray   # (n_bits, 3)
    m: int
    L: int
    S: int
    pattern: DemuxPattern
    seed: int | None = None
    symbol_id: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.entries.setflags(write=False)
        sid = self.entries[:, 0] * self.S + (self.entries[:, 1] - 1)
        sid.setflags(write=False)
        object.__setattr__(self, "symbol_id", sid)

    @property
    def n_bits(self) -> int:
        return self.entries.shape[0]

    def lookup(self, l: int) -> tuple[int, int, int]:
        k, s, i = self.entries[l]
        return int(k), int(s), int(i)


def _event_pairs(trellis, depth, puncture):
    """Per puncture phase: the offset pairs co-occurring in some event, and the max span."""
    period = puncture.period if puncture is not None else 1
    pairs = {p: set() for p in range(period)}
    span = 0
    for ev in error_events(trellis, depth, puncture):
        pos = ev.positions
        span = max(span, pos[-1] - pos[0])
        bucket = pairs[ev.phase]
        for a in range(len(pos)):
            for b in range(a + 1, len(pos)):
                bucket.add((pos[a], pos[b]))
    return pairs, span


def _section_bases(trellis, puncture, n_sections):
    pp, w = bits_per_period(trellis, puncture)
    prefix = [0]
    for t in range(pp):
        prefix.append(prefix[-1] + sum(1 for j in range(trellis.n_c)
                                       if puncture is None or puncture.keep(t, j)))
    t = np.arange(n_sections)
    return (t // pp) * w + np.array(prefix[:-1])[t % pp]


def validate_distinct_symbols(table: BitLocationTable, trellis: TrellisGraph, depth: int,
                              puncture: PunctureMatrix | None = None) -> bool:
    """True iff no error event of weight <= depth has two 1-bits in one symbol."""
    if depth <= 0:
        return True
    pairs, _ = _event_pairs(trellis, depth, puncture)
    pp, w = bits_per_period(trellis, puncture)
    n = table.n_bits
    sid = table.symbol_id
    bases = _section_bases(trellis, puncture, n * pp // w + pp)
    bases = bases[bases < n]
    for phase, pset in pairs.items():
        if not pset:
            continue
        arr = np.array(sorted(pset), dtype=np.int64)
        b = bases[phase::pp][:, None]
        i1 = b + arr[None, :, 0]
        i2 = b + arr[None, :, 1]
        ok = i2 < n
        if np.any(sid[i1[ok]] == sid[i2[ok]]):
            return False
    return True


def _spread_permutation(n: int, m: int, window: int, rng: np.random.Generator):
    """Random permutation of n slots such that inputs closer than ``window``
    never share a symbol (slot // m).  Returns None on a dead end.

    Symbols are drawn with weight (remaining slots)^3 among the eligible
    ones, which keeps the tail from piling up on a few symbols.
    """
    n_sym = -(-n // m)
    free = [list(range(k * m, min((k + 1) * m, n))) for k in range(n_sym)]
    for f in free:
        rng.shuffle(f)
    remaining = np.array([len(f) for f in free], dtype=np.float64)
    last = np.full(n_sym, -10**9, dtype=np.int64)
    perm = np.empty(n, dtype=np.int64)
    for j in range(n):
        ok = (last < j - window) & (remaining > 0)
        if not ok.any():
            return None
        w = np.where(ok, remaining ** 3, 0.0)
        k = int(rng.choice(n_sym, p=w / w.sum()))
        perm[j] = free[k].pop()
        remaining[k] -= 1
        last[k] = j
    return perm


def build_location_table(pattern: DemuxPattern, interleaver_seed: int | None, m: int, L: int,
                         trellis: TrellisGraph | None = None, puncture: PunctureMatrix | None = None,
                         depth: int | None = None, max_retries: int = 100) -> BitLocationTable:
    """De-multiplex a packet of S*L*m coded bits, interleave each stream and pack symbols.

    ``interleaver_seed=None`` gives identity interleavers.  When ``trellis`` is
    given the seeded interleavers are drawn so that every error event of
    weight <= ``depth`` (default d_free + 4) touches distinct symbols.
    """
    S = pattern.S
    n_bits = S * L * m
    if n_bits % pattern.period_bits:
        raise PeriodMismatch(f"packet of {n_bits} bits is not a multiple of the period {pattern.period_bits}")
    streams = np.array(pattern.assignment)[np.arange(n_bits) % pattern.period_bits]
    local = np.zeros(n_bits, dtype=np.int64)
    for s in range(1, S + 1):
        idx = np.flatnonzero(streams == s)
        local[idx] = np.arange(idx.size)
    per_stream = L * m

    window = 0
    if trellis is not None and interleaver_seed is not None:
        if depth is None:
            depth = free_distance(trellis, puncture) + 4
        _, span = _event_pairs(trellis, depth, puncture)
        # worst-case number of same-stream bits inside one event span
        P = pattern.period_bits
        a = np.array(pattern.assignment)
        for s in range(1, S + 1):
            hits = np.concatenate([a, a, np.tile(a, span // P + 1)]) == s
            csum = np.concatenate([[0], np.cumsum(hits)])
            window = max(window, int(np.max(csum[span + 1: span + 1 + P] - csum[1: 1 + P])))

    seq = np.random.SeedSequence(interleaver_seed) if interleaver_seed is not None else None
    for attempt in range(max_retries):
        perms = []
        for s in range(S):
            if seq is None:
                perms.append(np.arange(per_stream))
                continue
            rng = np.random.default_rng(seq.spawn(1)[0])
            if window:
                p = _spread_permutation(per_stream, m, window, rng)
            else:
                p = rng.permutation(per_stream)
            if p is None:
                break
            perms.append(p)
        if len(perms) < S:
            continue
        slot = np.empty(n_bits, dtype=np.int64)
        for s in range(1, S + 1):
            idx = np.flatnonzero(streams == s)
            slot[idx] = perms[s - 1][local[idx]]
        entries = np.stack([slot // m, streams, slot % m], axis=1)
        table = BitLocationTable(entries, m, L, S, pattern, interleaver_seed)
        if trellis is None or seq is None or validate_distinct_symbols(table, trellis, depth, puncture):
            return table
    raise MappingConstraintUnsatisfiable(
        f"no interleaver satisfying the distinct-symbol condition after {max_retries} attempts "
        f"(L={L}, m={m}, window={window})")
