"""Alpha-spectra of a convolutional code combined with a spatial de-multiplexer.

Two independent routes compute the same quantity:

* ``transfer_series`` expands g (I - F)^-1 t over the labeled product graph
  (trellis state x period phase) by vector iteration, truncated in Z.
* ``brute_force_spectrum`` walks error events depth-first straight from the
  encoder tables, assigning streams from absolute bit positions.

Coefficients are exact: int64 with an overflow guard that falls back to
Python integers.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .demux import DemuxPattern, bits_per_period, stream_map
from .errors import AllZeroVector, CatastrophicCode, EmptySpectrum, NonTerminating
from .trellis import PunctureMatrix, TrellisGraph, find_zero_weight_cycle

STREAM_LETTERS = "abcdefgh"


class MonomialPoly:
    """Polynomial in stream variables, Z and I with non-negative integer coefficients.

    Keys are exponent tuples ``(phi_1, ..., phi_S, phi_Z, phi_I)``; every key
    satisfies ``phi_Z == sum(phi_s)``.
    """

    __slots__ = ("S", "terms")

    def __init__(self, S: int, terms: Mapping[tuple, int] | None = None):
        self.S = S
        self.terms: dict[tuple, int] = {}
        for k, c in (terms or {}).items():
            k = tuple(int(x) for x in k)
            if len(k) != S + 2:
                raise ValueError(f"exponent tuple {k} has wrong length for S={S}")
            if k[S] != sum(k[:S]):
                raise ValueError(f"Z exponent of {k} differs from the stream total")
            if c < 0:
                raise ValueError("coefficients must be non-negative")
            if c:
                self.terms[k] = self.terms.get(k, 0) + int(c)

    @classmethod
    def monomial(cls, S: int, streams: Iterable[int], input_weight: int = 0, coeff: int = 1):
        e = tuple(int(x) for x in streams)
        return cls(S, {e + (sum(e), input_weight): coeff})

    @classmethod
    def one(cls, S: int):
        return cls.monomial(S, [0] * S)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, MonomialPoly):
            return NotImplemented
        return self.S == other.S and self.terms == other.terms

    def __add__(self, other: "MonomialPoly") -> "MonomialPoly":
        out = MonomialPoly(self.S)
        out.terms = dict(self.terms)
        for k, c in other.terms.items():
            out.terms[k] = out.terms.get(k, 0) + c
        return out

    def mul(self, other: "MonomialPoly", max_z: int | None = None) -> "MonomialPoly":
        out: dict[tuple, int] = {}
        S = self.S
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                if max_z is not None and k1[S] + k2[S] > max_z:
                    continue
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + c1 * c2
        res = MonomialPoly(S)
        res.terms = out
        return res

    __mul__ = mul

    def min_z(self) -> int | None:
        return min((k[self.S] for k in self.terms), default=None)

    def drop_input_weight(self) -> "MonomialPoly":
        """Set I = 1."""
        out: dict[tuple, int] = {}
        for k, c in self.terms.items():
            k2 = k[:-1] + (0,)
            out[k2] = out.get(k2, 0) + c
        res = MonomialPoly(self.S)
        res.terms = out
        return res

    def by_z(self) -> dict[int, dict[tuple, int]]:
        """Group stream exponents (with I summed out) by Z-degree."""
        out: dict[int, dict[tuple, int]] = {}
        for k, c in self.terms.items():
            d = out.setdefault(k[self.S], {})
            d[k[:self.S]] = d.get(k[:self.S], 0) + c
        return out

    def format(self, letters: str = STREAM_LETTERS, with_input: bool = False) -> str:
        if not self.terms:
            return "0"
        parts = []
        for z, group in sorted(self.by_z().items()) if not with_input else []:
            mons = []
            for e, c in sorted(group.items(), reverse=True):
                body = " ".join(letters[s] + (f"^{x}" if x > 1 else "")
                                for s, x in enumerate(e) if x)
                mons.append((f"{c} " if c != 1 else "") + (body or "1"))
            parts.append(f"Z^{z} (" + " + ".join(mons) + ")")
        if with_input:
            for k, c in sorted(self.terms.items(), key=lambda kv: (kv[0][self.S], kv[0])):
                body = " ".join(letters[s] + (f"^{x}" if x > 1 else "")
                                for s, x in enumerate(k[:self.S]) if x)
                parts.append(f"{c} {body} Z^{k[self.S]} I^{k[-1]}")
        return " + ".join(parts)

    def __repr__(self):
        return f"MonomialPoly(S={self.S}, {self.format()})"


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """State equations x = F x + t X_i, X_o = g x over (non-zero state, phase) nodes."""

    S: int
    sections: int
    num_states: int
    nodes: tuple[tuple[int, int], ...]            # (trellis state, phase)
    F: dict[tuple[int, int], MonomialPoly]       # (dst, src) -> label
    t: dict[int, MonomialPoly]                   # dst -> label of split branches
    g: dict[int, MonomialPoly]                   # src -> label of merge branches
    branches: tuple[tuple, ...] = field(repr=False)  # (src, dst, streams, input, pred_bit); -1 = zero state

    @property
    def dimension(self) -> int:
        return len(self.nodes)

    def index(self, state: int, phase: int) -> int:
        return (state - 1) * self.sections + phase

    def matrices(self):
        """Dense F, t, g as nested lists of MonomialPoly (zero entries as empty polys)."""
        n = self.dimension
        zero = MonomialPoly(self.S)
        F = [[self.F.get((i, j), zero) for j in range(n)] for i in range(n)]
        t = [self.t.get(i, zero) for i in range(n)]
        g = [self.g.get(j, zero) for j in range(n)]
        return F, t, g


def labeled_product_graph(trellis: TrellisGraph, pattern: DemuxPattern,
                          puncture: PunctureMatrix | None = None) -> LabeledGraph:
    cycle = find_zero_weight_cycle(trellis, puncture)
    if cycle is not None:
        raise CatastrophicCode(f"zero-weight cycle through {cycle}")
    smap = stream_map(trellis, pattern, puncture)
    T = smap.sections
    S = pattern.S
    ns = trellis.num_states
    nodes = tuple((s, p) for s in range(1, ns) for p in range(T))
    idx = {node: i for i, node in enumerate(nodes)}
    F: dict = {}
    t: dict = {}
    g: dict = {}
    branches = []
    for p in range(T):
        for s in range(ns):
            for u in (0, 1):
                nxt = int(trellis.next_state[s, u])
                if s == 0 and nxt == 0:
                    continue
                e = [0] * S
                for j in range(trellis.n_c):
                    if trellis.outputs[s, u, j] and smap.streams[p, j]:
                        e[smap.streams[p, j] - 1] += 1
                label = MonomialPoly.monomial(S, e, int(trellis.input_weight[s, u]))
                src = -1 if s == 0 else idx[(s, p)]
                dst = -1 if nxt == 0 else idx[(nxt, (p + 1) % T)]
                branches.append((src, dst, tuple(e), int(trellis.input_weight[s, u]), s & 1))
                if src < 0 and dst < 0:
                    raise NonTerminating("split branch merges immediately")
                if src < 0:
                    t[dst] = t[dst] + label if dst in t else label
                elif dst < 0:
                    g[src] = g[src] + label if src in g else label
                else:
                    key = (dst, src)
                    F[key] = F[key] + label if key in F else label
    return LabeledGraph(S, T, ns, nodes, F, t, g, tuple(branches))


@dataclass(frozen=True)
class AlphaTerm:
    alpha: tuple[int, ...]
    multiplicity: int
    input_weight: int

    @property
    def d_H(self) -> int:
        return sum(self.alpha)


@dataclass(frozen=True, eq=False)
class AlphaSpectrum:
    """alpha-vectors by Hamming distance, each with path count and total input weight.

    ``phases`` is the number of trellis sections in one joint period; events
    starting at every phase are counted.
    """

    S: int
    by_distance: dict[int, tuple[AlphaTerm, ...]]
    truncation_dH: int
    phases: int = 1

    def __eq__(self, other):
        if not isinstance(other, AlphaSpectrum):
            return NotImplemented
        return (self.S == other.S and self.truncation_dH == other.truncation_dH
                and self.by_distance == other.by_distance)

    @classmethod
    def from_counts(cls, S: int, counts: Mapping[tuple, tuple[int, int]], truncation_dH: int,
                    phases: int = 1) -> "AlphaSpectrum":
        by_d: dict[int, list[AlphaTerm]] = {}
        for a, (c, w) in counts.items():
            if c:
                by_d.setdefault(sum(a), []).append(AlphaTerm(tuple(int(x) for x in a), int(c), int(w)))
        return cls(S, {d: tuple(sorted(v, key=lambda t: t.alpha)) for d, v in sorted(by_d.items())},
                   truncation_dH, phases)

    def terms(self) -> Iterable[AlphaTerm]:
        for d in sorted(self.by_distance):
            yield from self.by_distance[d]

    def vectors(self) -> set[tuple[int, ...]]:
        return {t.alpha for t in self.terms()}

    def restrict(self, max_dH: int) -> "AlphaSpectrum":
        return AlphaSpectrum(self.S, {d: v for d, v in self.by_distance.items() if d <= max_dH},
                             min(max_dH, self.truncation_dH), self.phases)

    @property
    def min_distance(self) -> int | None:
        return min(self.by_distance, default=None)

    def to_text(self) -> str:
        lines = [f"# S={self.S} truncation_dH={self.truncation_dH} phases={self.phases}",
                 "# d_H alpha multiplicity input_weight"]
        for t in self.terms():
            lines.append(f"{t.d_H} [{' '.join(map(str, t.alpha))}] {t.multiplicity} {t.input_weight}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "S": self.S,
            "truncation_dH": self.truncation_dH,
            "phases": self.phases,
            "terms": [{"d_H": t.d_H, "alpha": list(t.alpha), "multiplicity": t.multiplicity,
                       "input_weight": t.input_weight} for t in self.terms()],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "AlphaSpectrum":
        doc = json.loads(text)
        counts = {tuple(t["alpha"]): (t["multiplicity"], t["input_weight"]) for t in doc["terms"]}
        return cls.from_counts(doc["S"], counts, doc["truncation_dH"], doc.get("phases", 1))


_GUARD = 1 << 60


def _shift_slices(e, D):
    dst = tuple(slice(x, D + 1) for x in e)
    src = tuple(slice(0, D + 1 - x) for x in e)
    return dst, src


def transfer_series(graph: LabeledGraph, max_dH: int) -> AlphaSpectrum:
    """Exact Z-truncated expansion of g (I - F)^-1 t as an alpha-spectrum.

    Iterates v_{k+1} = F v_k from v_0 = t; each node carries a dense array
    over alpha-vectors holding path counts and summed input weights.
    """
    S, D = graph.S, int(max_dH)
    n = graph.dimension
    shape = (D + 1,) * S
    keep = np.indices(shape).sum(axis=0) <= D
    C = np.zeros((n,) + shape, dtype=np.int64)
    W = np.zeros_like(C)
    TC = np.zeros(shape, dtype=np.int64)
    TW = np.zeros_like(TC)

    groups: dict[tuple, list[tuple[int, int]]] = {}
    merges = []
    for src, dst, e, u, pred in graph.branches:
        if sum(e) > D:
            continue
        if src < 0:
            C[(dst,) + e] += 1
            W[(dst,) + e] += u
        elif dst < 0:
            merges.append((src, e, u))
        else:
            groups.setdefault((e, u, pred), []).append((src, dst))
    group_arrays = [(e, u, np.array([p[0] for p in v]), np.array([p[1] for p in v]))
                    for (e, u, _), v in groups.items()]

    limit = n * (D + 1) + 2
    for _ in range(limit):
        for src, e, u in merges:
            d_sl, s_sl = _shift_slices(e, D)
            TC[d_sl] += C[src][s_sl]
            TW[d_sl] += W[src][s_sl] + u * C[src][s_sl]
        newC = np.zeros_like(C)
        newW = np.zeros_like(W)
        for e, u, srcs, dsts in group_arrays:
            d_sl, s_sl = _shift_slices(e, D)
            block = C[(srcs,) + s_sl]
            newC[(dsts,) + d_sl] += block
            newW[(dsts,) + d_sl] += W[(srcs,) + s_sl] + u * block
        newC[:, ~keep] = 0
        newW[:, ~keep] = 0
        C, W = newC, newW
        if not C.any():
            break
        if C.dtype != object and max(W.max(), TW.max()) >= _GUARD:
            C, W, TC, TW = (a.astype(object) for a in (C, W, TC, TW))
    else:
        raise NonTerminating(f"series did not terminate within {limit} iterations")

    TC[~keep] = 0
    counts = {}
    for a in zip(*np.nonzero(TC)):
        counts[tuple(int(x) for x in a)] = (int(TC[a]), int(TW[a]))
    return AlphaSpectrum.from_counts(S, counts, D, graph.sections)


def transfer_polynomial(graph: LabeledGraph, max_dH: int) -> MonomialPoly:
    """Sparse exact expansion of T keeping the input-weight exponent; suited to small codes."""
    S = graph.S
    out = MonomialPoly(S)
    v = {i: p for i, p in graph.t.items() if p.min_z() <= max_dH}
    incoming: dict[int, list[tuple[int, MonomialPoly]]] = {}
    for (dst, src), lab in graph.F.items():
        incoming.setdefault(src, []).append((dst, lab))
    for _ in range(graph.dimension * (max_dH + 1) + 2):
        if not v:
            return out
        for i, p in v.items():
            if i in graph.g:
                out = out + p.mul(graph.g[i], max_dH)
        nv: dict[int, MonomialPoly] = {}
        for i, p in v.items():
            for dst, lab in incoming.get(i, ()):
                q = p.mul(lab, max_dH)
                if q:
                    nv[dst] = nv[dst] + q if dst in nv else q
        v = nv
    raise NonTerminating("series did not terminate")


def brute_force_spectrum(trellis: TrellisGraph, pattern: DemuxPattern,
                         puncture: PunctureMatrix | None = None, max_dH: int = 0,
                         memo: bool = True) -> AlphaSpectrum:
    """Enumerate every error event of weight <= max_dH from every period phase.

    With ``memo`` the depth-first walk caches the completions from a
    (state, phase, remaining budget) triple; without it every path is
    visited individually.
    """
    if find_zero_weight_cycle(trellis, puncture) is not None:
        raise CatastrophicCode("zero-weight cycle")
    S = pattern.S
    n_c = trellis.n_c
    pp, w = bits_per_period(trellis, puncture)
    P = pattern.period_bits
    phases = pp * P // math.gcd(P, w)
    kept_cols = [[j for j in range(n_c) if puncture is None or puncture.keep(t, j)] for t in range(pp)]
    col_start = [0]
    for cols in kept_cols:
        col_start.append(col_start[-1] + len(cols))

    def branch_streams(state, u, t):
        e = [0] * S
        base = (t // pp) * w + col_start[t % pp]
        for k, j in enumerate(kept_cols[t % pp]):
            if trellis.outputs[state, u, j]:
                e[pattern.stream_of(base + k) - 1] += 1
        return tuple(e)

    nxt = trellis.next_state
    inw = trellis.input_weight

    def combine(into, sub, e, u):
        for a, (c, wsum) in sub.items():
            key = tuple(x + y for x, y in zip(a, e))
            old = into.get(key)
            if old is None:
                into[key] = (c, wsum + u * c)
            else:
                into[key] = (old[0] + c, old[1] + wsum + u * c)

    @lru_cache(maxsize=None)
    def completions(state, t, budget):
        # all continuations from non-zero `state` at section t back to zero
        res: dict = {}
        for u in (0, 1):
            e = branch_streams(state, u, t)
            wt = sum(e)
            if wt > budget:
                continue
            ns = int(nxt[state, u])
            uu = int(inw[state, u])
            if ns == 0:
                combine(res, {(0,) * S: (1, 0)}, e, uu)
            else:
                combine(res, completions(ns, (t + 1) % phases, budget - wt), e, uu)
        return res

    def walk(state, t, budget, acc, uacc, out):
        for u in (0, 1):
            e = branch_streams(state, u, t)
            wt = sum(e)
            if wt > budget:
                continue
            a = tuple(x + y for x, y in zip(acc, e))
            uw = uacc + int(inw[state, u])
            ns = int(nxt[state, u])
            if ns == 0:
                c, ws = out.get(a, (0, 0))
                out[a] = (c + 1, ws + uw)
            else:
                walk(ns, (t + 1) % phases, budget - wt, a, uw, out)

    total: dict = {}
    for t0 in range(phases):
        e = branch_streams(0, 1, t0)
        wt = sum(e)
        if wt > max_dH:
            continue
        s1 = int(nxt[0, 1])
        if memo:
            combine(total, completions(s1, (t0 + 1) % phases, max_dH - wt), e, int(inw[0, 1]))
        else:
            walk(s1, (t0 + 1) % phases, max_dH - wt, e, int(inw[0, 1]), total)
    completions.cache_clear()
    return AlphaSpectrum.from_counts(S, total, max_dH, phases)


def weight_spectrum(spectrum: AlphaSpectrum) -> dict[int, tuple[int, int]]:
    """Collapse streams: d_H -> (path count, total input weight)."""
    out = {}
    for d, terms in spectrum.by_distance.items():
        out[d] = (sum(t.multiplicity for t in terms), sum(t.input_weight for t in terms))
    return dict(sorted(out.items()))


def q_of(alpha) -> int:
    for i, a in enumerate(alpha):
        if a:
            return i + 1
    raise AllZeroVector("alpha-vector has no non-zero entry")


def q_max(spectrum: AlphaSpectrum) -> int:
    qs = [q_of(t.alpha) for t in spectrum.terms()]
    if not qs:
        raise EmptySpectrum("spectrum has no terms up to its truncation depth")
    return max(qs)


def q_max_reachable(graph: LabeledGraph) -> int:
    """Exact Q_max: the largest q such that some error event avoids streams 1..q-1.

    Decided by reachability on the labeled graph, so no distance truncation
    is involved.
    """
    for q in range(graph.S, 0, -1):
        def allowed(e):
            return not any(e[:q - 1])
        adj: dict[int, list[int]] = {}
        starts, ends = set(), set()
        for src, dst, e, _, _ in graph.branches:
            if not allowed(e):
                continue
            if src < 0:
                starts.add(dst)
            elif dst < 0:
                ends.add(src)
            else:
                adj.setdefault(src, []).append(dst)
        seen = set(starts)
        queue = deque(starts)
        while queue:
            x = queue.popleft()
            if x in ends:
                return q
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    raise EmptySpectrum("no error event found")


def exact_q_max(trellis: TrellisGraph, pattern: DemuxPattern,
                puncture: PunctureMatrix | None = None) -> int:
    return q_max_reachable(labeled_product_graph(trellis, pattern, puncture))


def stream_free_witness(spectrum: AlphaSpectrum, q: int) -> AlphaTerm | None:
    """Lowest-distance term whose first non-zero stream is q."""
    for t in spectrum.terms():
        if q_of(t.alpha) == q:
            return t
    return None
