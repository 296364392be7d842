"""Feed-forward convolutional encoders, puncturing and the trellis state graph.

Generators follow the usual octal convention: the most significant of the
``constraint_length`` bits taps the current input bit, the least significant
taps the oldest bit in the shift register.  A state is the integer formed by
the previous ``constraint_length - 1`` inputs, most recent input as MSB.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import CatastrophicCode, InvalidGenerator, PunctureValidationFailed


@dataclass(frozen=True)
class PunctureMatrix:
    """Periodic perforation pattern, one row per encoder output."""

    pattern: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(b) for b in row) for row in self.pattern)
        if not rows or not rows[0]:
            raise ValueError("empty puncture pattern")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("puncture rows must have equal length")
        if any(b not in (0, 1) for r in rows for b in r):
            raise ValueError("puncture pattern must be binary")
        for col in zip(*rows):
            if not any(col):
                raise ValueError("puncture pattern has an all-zero column")
        object.__setattr__(self, "pattern", rows)

    @classmethod
    def parse(cls, literal) -> "PunctureMatrix":
        """Accept a nested list or its JSON text, e.g. ``"[[1,1,0],[1,0,1]]"``."""
        if isinstance(literal, PunctureMatrix):
            return literal
        if isinstance(literal, str):
            if literal in DEFAULT_PUNCTURES:
                return DEFAULT_PUNCTURES[literal]
            literal = json.loads(literal)
        return cls(tuple(tuple(r) for r in literal))

    @property
    def n_rows(self) -> int:
        return len(self.pattern)

    @property
    def period(self) -> int:
        return len(self.pattern[0])

    @property
    def ones(self) -> int:
        return sum(map(sum, self.pattern))

    @property
    def effective_rate(self) -> Fraction:
        return Fraction(self.period, self.ones)

    def keep(self, section: int, output: int) -> bool:
        return bool(self.pattern[output][section % self.period])

    def as_list(self) -> list[list[int]]:
        return [list(r) for r in self.pattern]


# Perforation matrices for the (133,171) mother code.  They are checked
# against the known free distances (6 and 5) by ``validate_puncture``.
DEFAULT_PUNCTURES = {
    "2/3": PunctureMatrix(((1, 1), (1, 0))),
    "3/4": PunctureMatrix(((1, 1, 0), (1, 0, 1))),
}


@dataclass(frozen=True)
class CodeSpec:
    generators: tuple[int, ...]
    constraint_length: int
    k_c: int = 1
    puncture: PunctureMatrix | None = None

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(int(g) for g in self.generators))

    @classmethod
    def from_octal(cls, generators: str | Sequence, constraint_length: int | None = None,
                   puncture: PunctureMatrix | None = None) -> "CodeSpec":
        if isinstance(generators, str):
            generators = [g for g in generators.replace(" ", "").split(",") if g]
        gens = tuple(int(str(g), 8) for g in generators)
        if constraint_length is None:
            constraint_length = max(g.bit_length() for g in gens)
        return cls(gens, constraint_length, 1, puncture)

    @property
    def n_c(self) -> int:
        return len(self.generators)

    @property
    def rate(self) -> Fraction:
        if self.puncture is not None:
            return self.puncture.effective_rate * self.k_c
        return Fraction(self.k_c, self.n_c)

    def octal(self) -> str:
        return ",".join(format(g, "o") for g in self.generators)


@dataclass(frozen=True, eq=False)
class TrellisGraph:
    """Time-invariant trellis of a rate 1/n_c feed-forward encoder."""

    generators: tuple[int, ...]
    constraint_length: int
    next_state: np.ndarray      # (num_states, 2)
    outputs: np.ndarray         # (num_states, 2, n_c) of 0/1
    input_weight: np.ndarray    # (num_states, 2)
    k_c: int = 1
    out_weight: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ow = self.outputs.sum(axis=2).astype(np.int64)
        object.__setattr__(self, "out_weight", ow)
        for arr in (self.next_state, self.outputs, self.input_weight, ow):
            arr.setflags(write=False)

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def n_c(self) -> int:
        return len(self.generators)

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k_c, self.n_c)

    def octal(self) -> str:
        return ",".join(format(g, "o") for g in self.generators)


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def build_encoder(spec: CodeSpec) -> TrellisGraph:
    """Build the trellis of ``spec``; raises on bad generators or catastrophic codes."""
    if spec.k_c != 1:
        raise ValueError("only k_c = 1 mother codes are supported")
    if len(spec.generators) < 2:
        raise InvalidGenerator("need at least two generators")
    K = spec.constraint_length
    if K < 2:
        raise InvalidGenerator("constraint length must be >= 2")
    for g in spec.generators:
        if g <= 0 or g >= (1 << K):
            raise InvalidGenerator(f"generator {g:o} (octal) invalid for constraint length {K}")
    if spec.puncture is not None and spec.puncture.n_rows != len(spec.generators):
        raise ValueError("puncture matrix rows must equal the number of generators")

    n_states = 1 << (K - 1)
    n_c = len(spec.generators)
    nxt = np.zeros((n_states, 2), dtype=np.int64)
    out = np.zeros((n_states, 2, n_c), dtype=np.uint8)
    inw = np.zeros((n_states, 2), dtype=np.int64)
    for s in range(n_states):
        for u in (0, 1):
            reg = (u << (K - 1)) | s
            nxt[s, u] = reg >> 1
            inw[s, u] = u
            for j, g in enumerate(spec.generators):
                out[s, u, j] = _parity(reg & g)
    trellis = TrellisGraph(spec.generators, K, nxt, out, inw)
    cycle = find_zero_weight_cycle(trellis, spec.puncture)
    if cycle is not None:
        raise CatastrophicCode(f"zero-weight cycle through states {cycle}")
    return trellis


def section_weight(trellis: TrellisGraph, state: int, u: int, section: int,
                   puncture: PunctureMatrix | None) -> int:
    """Transmitted output weight of a branch at absolute section index ``section``."""
    if puncture is None:
        return int(trellis.out_weight[state, u])
    bits = trellis.outputs[state, u]
    return sum(int(bits[j]) for j in range(trellis.n_c) if puncture.keep(section, j))


def find_zero_weight_cycle(trellis: TrellisGraph, puncture: PunctureMatrix | None = None):
    """Return a list of (state, phase) nodes on a zero-weight cycle avoiding state 0, or None."""
    period = puncture.period if puncture is not None else 1
    nodes = [(s, p) for s in range(1, trellis.num_states) for p in range(period)]
    adj = {}
    for s, p in nodes:
        adj[(s, p)] = [
            (int(trellis.next_state[s, u]), (p + 1) % period)
            for u in (0, 1)
            if trellis.next_state[s, u] != 0 and section_weight(trellis, s, u, p, puncture) == 0
        ]
    color = dict.fromkeys(nodes, 0)
    for root in nodes:
        if color[root]:
            continue
        stack = [(root, iter(adj[root]))]
        path = [root]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                path.pop()
            elif color[nxt] == 1:
                return path[path.index(nxt):]
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(adj[nxt])))
                path.append(nxt)
    return None


def encode(trellis: TrellisGraph, info_bits, puncture: PunctureMatrix | None = None,
           terminate: bool = False) -> np.ndarray:
    """Encode from the zero state; ``terminate`` appends the zero tail.

    Output is section-major (all outputs of section 0, then section 1, ...),
    with punctured positions removed.
    """
    bits = np.asarray(info_bits, dtype=np.int64).ravel()
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ValueError("info bits must be 0/1")
    if terminate:
        bits = np.concatenate([bits, np.zeros(trellis.memory, dtype=np.int64)])
    K = trellis.constraint_length
    # reg[t] holds u_t ... u_{t-K+1} with u_t as MSB
    padded = np.concatenate([np.zeros(K - 1, dtype=np.int64), bits])
    reg = np.zeros(bits.size, dtype=np.int64)
    for d in range(K):
        reg |= padded[K - 1 - d: K - 1 - d + bits.size] << (K - 1 - d)
    coded = np.empty((bits.size, trellis.n_c), dtype=np.uint8)
    for j, g in enumerate(trellis.generators):
        x = reg & g
        par = np.zeros_like(x)
        while np.any(x):
            par ^= x & 1
            x >>= 1
        coded[:, j] = par
    if puncture is not None:
        return coded[puncture_mask(puncture, bits.size, trellis.n_c)]
    return coded.ravel()


def puncture_mask(puncture: PunctureMatrix, sections: int, n_c: int) -> np.ndarray:
    """Boolean (sections, n_c) mask of transmitted mother-code bits."""
    pat = np.array(puncture.pattern, dtype=bool).T   # (period, n_c)
    reps = -(-sections // puncture.period)
    return np.tile(pat, (reps, 1))[:sections]


def depuncture(received, puncture: PunctureMatrix | None, sections: int, n_c: int,
               fill=0) -> np.ndarray:
    """Scatter transmitted values back onto the (sections * n_c) mother-code grid."""
    received = np.asarray(received)
    if puncture is None:
        if received.shape[0] != sections * n_c:
            raise ValueError("length mismatch")
        return received.copy()
    mask = puncture_mask(puncture, sections, n_c)
    full = np.full((sections, n_c) + received.shape[1:], fill, dtype=np.result_type(received, type(fill)))
    if received.shape[0] != int(mask.sum()):
        raise ValueError("length mismatch")
    full[mask] = received
    return full.reshape((sections * n_c,) + received.shape[1:])


def free_distance(trellis: TrellisGraph, puncture: PunctureMatrix | None = None) -> int:
    """Minimum transmitted weight over all error events and all puncture phases."""
    cycle = find_zero_weight_cycle(trellis, puncture)
    if cycle is not None:
        raise CatastrophicCode(f"zero-weight cycle through states {cycle}")
    period = puncture.period if puncture is not None else 1
    heap = []
    for p in range(period):
        w = section_weight(trellis, 0, 1, p, puncture)
        heapq.heappush(heap, (w, int(trellis.next_state[0, 1]), (p + 1) % period))
    best = {}
    while heap:
        w, s, p = heapq.heappop(heap)
        if s == 0:
            return w
        if best.get((s, p), np.inf) <= w:
            continue
        best[(s, p)] = w
        for u in (0, 1):
            ns = int(trellis.next_state[s, u])
            heapq.heappush(heap, (w + section_weight(trellis, s, u, p, puncture), ns, (p + 1) % period))
    raise CatastrophicCode("no path back to the zero state")


def _weight_to_merge(trellis: TrellisGraph, puncture: PunctureMatrix | None = None) -> np.ndarray:
    """Least transmitted weight from (state, phase) back to the zero state; 0 at the zero state."""
    period = puncture.period if puncture is not None else 1
    ns = trellis.num_states
    cost = np.full((ns, period), np.iinfo(np.int64).max // 4, dtype=np.int64)
    cost[0, :] = 0
    w = np.array([[[section_weight(trellis, s, u, p, puncture) for u in (0, 1)] for p in range(period)]
                  for s in range(ns)])
    for _ in range(ns * period + 1):
        changed = False
        for p in range(period):
            cand = w[:, p, :] + cost[trellis.next_state, (p + 1) % period]
            best = cand.min(axis=1)
            best[0] = 0
            upd = best < cost[:, p]
            if upd.any():
                cost[upd, p] = best[upd]
                changed = True
        if not changed:
            break
    return cost


@dataclass(frozen=True)
class ErrorEvent:
    """A zero-to-zero path; ``positions`` are transmitted-bit offsets of its 1s
    counted from the first transmitted bit of the starting section."""

    phase: int
    inputs: tuple[int, ...]
    positions: tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.positions)


def error_events(trellis: TrellisGraph, max_weight: int, puncture: PunctureMatrix | None = None,
                 phases: Sequence[int] | None = None) -> Iterator[ErrorEvent]:
    """Enumerate every error event of transmitted weight <= ``max_weight``."""
    find_cycle = find_zero_weight_cycle(trellis, puncture)
    if find_cycle is not None:
        raise CatastrophicCode(f"zero-weight cycle through states {find_cycle}")
    period = puncture.period if puncture is not None else 1
    n_c = trellis.n_c
    if phases is None:
        phases = range(period)

    cols_at = [[j for j in range(n_c) if puncture is None or puncture.keep(t, j)] for t in range(period)]
    togo = _weight_to_merge(trellis, puncture)

    for phase in phases:
        # stack of (state, section, offset, inputs, positions)
        stack = [(0, phase, 0, (), ())]
        first = True
        while stack:
            s, t, off, ins, pos = stack.pop()
            cols = cols_at[t % period]
            for u in ((1,) if first else (1, 0)):
                bits = trellis.outputs[s, u]
                newpos = pos + tuple(off + k for k, j in enumerate(cols) if bits[j])
                ns = int(trellis.next_state[s, u])
                if len(newpos) + togo[ns, (t + 1) % period] > max_weight:
                    continue
                if ns == 0:
                    yield ErrorEvent(phase, ins + (u,), newpos)
                else:
                    stack.append((ns, t + 1, off + len(cols), ins + (u,), newpos))
            first = False


# Published free distances of the 64-state mother code and its punctured versions.
REFERENCE_FREE_DISTANCES = {
    ("133,171", Fraction(1, 2)): 10,
    ("133,171", Fraction(2, 3)): 6,
    ("133,171", Fraction(3, 4)): 5,
    ("133,145,175", Fraction(1, 3)): 15,
}


def check_reference_free_distance(trellis: TrellisGraph, puncture: PunctureMatrix | None = None):
    """Abort when a puncture choice misses the published free distance of its code and rate."""
    rate = puncture.effective_rate if puncture is not None else trellis.rate
    ref = REFERENCE_FREE_DISTANCES.get((trellis.octal(), rate))
    if ref is None:
        return None
    d = free_distance(trellis, puncture)
    if d != ref:
        raise PunctureValidationFailed(
            f"code ({trellis.octal()}) at rate {rate} has free distance {d}, expected {ref}; "
            f"check the puncture matrix {puncture.as_list() if puncture else None}")
    return d
