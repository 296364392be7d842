"""Monte-Carlo simulation of coded multiple beamforming over Rayleigh MIMO channels.

Each packet sees one channel draw. The beamformed link reduces to parallel
subchannels r = lambda_s * y + n, so only singular values are needed; the
explicit-SVD chain is kept as a cross-check.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .curves import BerCurve
from .demux import (BitLocationTable, DemuxPattern, block_demux, bits_per_period,
                    build_location_table, design_demux, rotating_demux, stream_map)
from .errors import ConfigInvalid, NoConvergence, TableMismatch
from .kernels import get_kernels
from .trellis import CodeSpec, PunctureMatrix, TrellisGraph, build_encoder, depuncture, puncture_mask


# -- channel -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChannelDraw:
    H: np.ndarray
    singular_values: np.ndarray


def _jacobi_eigvalsh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a batch of Hermitian matrices by cyclic complex Jacobi rotations."""
    A = np.array(A, dtype=np.complex128, copy=True)
    n = A.shape[-1]
    scale = np.maximum(np.linalg.norm(A, axis=(-2, -1)), np.finfo(float).tiny)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(A[..., offmask]) ** 2, axis=-1))
        if np.all(off <= tol * scale):
            return np.real(np.diagonal(A, axis1=-2, axis2=-1)).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[..., p, q]
                mag = np.abs(apq)
                live = mag > 0
                safe = np.where(live, mag, 1.0)
                ph = np.where(live, apq / safe, 1.0)
                theta = (A[..., q, q].real - A[..., p, p].real) / (2 * safe)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta ** 2 + 1))
                t = np.where(live, t, 0.0)
                c = 1 / np.sqrt(1 + t ** 2)
                s = t * c
                c_ = c[..., None]
                s_ = s[..., None]
                ph_ = ph[..., None]
                # A <- U^H A U with U = diag(1, conj(ph)) * [[c, s], [-s, c]]
                Ap = A[..., :, p].copy()
                Aq = A[..., :, q].copy()
                A[..., :, p] = c_ * Ap - s_ * np.conj(ph_) * Aq
                A[..., :, q] = s_ * Ap + c_ * np.conj(ph_) * Aq
                Rp = A[..., p, :].copy()
                Rq = A[..., q, :].copy()
                A[..., p, :] = c_ * Rp - s_ * ph_ * Rq
                A[..., q, :] = s_ * Rp + c_ * ph_ * Rq
    raise NoConvergence(f"Jacobi sweeps did not converge within {max_sweeps} sweeps")


def singular_values(H: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Descending singular values of H (or a batch of H) from its Gram matrix."""
    H = np.asarray(H, dtype=np.complex128)
    M, N = H.shape[-2:]
    Hh = np.conj(np.swapaxes(H, -1, -2))
    G = Hh @ H if N <= M else H @ Hh
    ev = _jacobi_eigvalsh(G, tol)
    return np.sqrt(np.clip(-np.sort(-ev, axis=-1), 0, None))


def draw_channels(M: int, N: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) entries, shape (count, M, N)."""
    re = rng.standard_normal((count, M, N))
    im = rng.standard_normal((count, M, N))
    return (re + 1j * im) * math.sqrt(0.5)


def sample_channel(M: int, N: int, rng: np.random.Generator) -> ChannelDraw:
    H = draw_channels(M, N, 1, rng)[0]
    return ChannelDraw(H, singular_values(H))


def sample_singular_values(M: int, N: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return singular_values(draw_channels(M, N, count, rng))


# -- modulation --------------------------------------------------------------

def _gray_pam(bits_per_axis: int) -> np.ndarray:
    """Amplitude of each Gray label (MSB first) on an odd-integer PAM grid."""
    n = 1 << bits_per_axis
    levels = np.empty(n)
    for label in range(n):
        g, b = label, 0
        while g:
            b ^= g
            g >>= 1
        levels[label] = 2 * b - (n - 1)
    return levels


@dataclass(frozen=True, eq=False)
class Constellation:
    """Gray-labelled square QAM (BPSK for m = 1) with unit average energy.

    ``points[label]`` is the symbol of integer label whose MSB is bit 0.
    ``subsets[i, b]`` lists labels whose bit i equals b.
    """

    m: int
    points: np.ndarray
    d_min: float
    subsets: np.ndarray     # (m, 2, 2^(m-1)) labels

    @classmethod
    def qam(cls, m: int) -> "Constellation":
        if m == 1:
            pts = np.array([-1.0, 1.0], dtype=complex)
        elif m % 2 == 0 and m > 0:
            h = m // 2
            pam = _gray_pam(h)
            labels = np.arange(1 << m)
            pts = pam[labels >> h] + 1j * pam[labels & ((1 << h) - 1)]
        else:
            raise ConfigInvalid(f"unsupported bits per symbol m={m}")
        pts = pts / math.sqrt(np.mean(np.abs(pts) ** 2))
        diff = np.abs(pts[:, None] - pts[None, :])
        d_min = float(np.min(diff[~np.eye(pts.size, dtype=bool)]))
        labels = np.arange(1 << m)
        subsets = np.stack([np.stack([labels[((labels >> (m - 1 - i)) & 1) == b] for b in (0, 1)])
                            for i in range(m)])
        pts.setflags(write=False)
        return cls(m, pts, d_min, subsets)

    def labels_of(self, bits: np.ndarray) -> np.ndarray:
        """Pack the last axis (length m, MSB first) into integer labels."""
        w = 1 << np.arange(self.m - 1, -1, -1)
        return np.asarray(bits, dtype=np.int64) @ w

    def hard_demap(self, r: np.ndarray) -> np.ndarray:
        lab = np.argmin(np.abs(np.asarray(r)[..., None] - self.points) ** 2, axis=-1)
        return (lab[..., None] >> np.arange(self.m - 1, -1, -1)) & 1


def _table_arrays(table: BitLocationTable):
    e = table.entries
    return e[:, 0], e[:, 1] - 1, e[:, 2]


def modulate(bits, constellation: Constellation, table: BitLocationTable) -> np.ndarray:
    """Route coded bits through the location table into a (..., L, S) symbol grid."""
    bits = np.asarray(bits, dtype=np.int64)
    if table.m != constellation.m:
        raise TableMismatch(f"table packs {table.m} bits per symbol, constellation has {constellation.m}")
    if bits.shape[-1] != table.n_bits:
        raise TableMismatch(f"{bits.shape[-1]} bits supplied, table expects {table.n_bits}")
    k, s, i = _table_arrays(table)
    labels = np.zeros(bits.shape[:-1] + (table.L, table.S), dtype=np.int64)
    for pos in range(constellation.m):
        sel = i == pos      # (k, s) pairs are unique within one bit position
        labels[..., k[sel], s[sel]] |= bits[..., sel] << (constellation.m - 1 - pos)
    return constellation.points[labels]


def bit_metric(r: complex, lam: float, constellation: Constellation, bit_position: int,
               bit_value: int) -> float:
    pts = constellation.points[constellation.subsets[bit_position, bit_value]]
    return float(np.min(np.abs(r - lam * pts) ** 2))


def symbol_bit_metrics(r: np.ndarray, lam: np.ndarray, constellation: Constellation) -> np.ndarray:
    """All bit metrics: r (..., L, S), lam (..., S) -> (..., L, S, m, 2)."""
    lam = np.asarray(lam)[..., None, :, None]
    d = np.abs(np.asarray(r)[..., None] - lam * constellation.points) ** 2
    return np.min(d[..., constellation.subsets], axis=-1)


def coded_bit_metrics(sym_metrics: np.ndarray, table: BitLocationTable) -> np.ndarray:
    """Gather per-coded-bit metrics (..., n_bits, 2) from symbol-level metrics."""
    k, s, i = _table_arrays(table)
    return sym_metrics[..., k, s, i, :]


# -- encoding and decoding ---------------------------------------------------

def encode_batch(trellis: TrellisGraph, info: np.ndarray, puncture: PunctureMatrix | None = None,
                 terminate: bool = True) -> np.ndarray:
    """Vectorized encoder over the leading axis; matches ``trellis.encode``."""
    info = np.asarray(info, dtype=np.uint8)
    B = info.shape[0]
    if terminate:
        info = np.concatenate([info, np.zeros((B, trellis.memory), dtype=np.uint8)], axis=1)
    T = info.shape[1]
    K = trellis.constraint_length
    padded = np.concatenate([np.zeros((B, K - 1), dtype=np.uint8), info], axis=1)
    out = np.zeros((B, T, trellis.n_c), dtype=np.uint8)
    for j, g in enumerate(trellis.generators):
        for d in range(K):
            if (g >> (K - 1 - d)) & 1:
                out[:, :, j] ^= padded[:, K - 1 - d: K - 1 - d + T]
    if puncture is not None:
        return out[:, puncture_mask(puncture, T, trellis.n_c)]
    return out.reshape(B, -1)


def predecessors(trellis: TrellisGraph):
    """(pred_state, pred_input), each (num_states, 2), ordered by branch index 2*p + u."""
    ns = trellis.num_states
    lists = [[] for _ in range(ns)]
    for p in range(ns):
        for u in (0, 1):
            lists[int(trellis.next_state[p, u])].append((p, u))
    if any(len(x) != 2 for x in lists):
        raise ValueError("trellis is not a two-predecessor shift register")
    ps = np.array([[a[0] for a in sorted(x)] for x in lists], dtype=np.int64)
    pu = np.array([[a[1] for a in sorted(x)] for x in lists], dtype=np.int64)
    return ps, pu


def label_metrics(metrics: np.ndarray, trellis: TrellisGraph, puncture: PunctureMatrix | None,
                  sections: int) -> np.ndarray:
    """(B, n_tx, 2) coded-bit metrics -> (B, sections, 2^n_c) cost of each output label.

    Label c has output j equal to bit (n_c - 1 - j) of c; punctured outputs cost 0.
    """
    B = metrics.shape[0]
    n_c = trellis.n_c
    full = np.zeros((B, sections, n_c, 2))
    if puncture is None:
        full[:] = metrics.reshape(B, sections, n_c, 2)
    else:
        full[:, puncture_mask(puncture, sections, n_c)] = metrics
    labels = np.arange(1 << n_c)
    lm = np.zeros((B, sections, labels.size))
    for j in range(n_c):
        lm += full[:, :, j, :][:, :, (labels >> (n_c - 1 - j)) & 1]
    return lm


def output_labels(trellis: TrellisGraph) -> np.ndarray:
    w = 1 << np.arange(trellis.n_c - 1, -1, -1)
    return (trellis.outputs.astype(np.int64) @ w).astype(np.int64)


def _sections_for(n_tx: int, trellis: TrellisGraph, puncture: PunctureMatrix | None) -> int:
    if puncture is None:
        return n_tx // trellis.n_c
    pp, w = bits_per_period(trellis, puncture)
    sections = (n_tx // w) * pp
    rem = n_tx % w
    t = 0
    while rem > 0:
        rem -= sum(1 for j in range(trellis.n_c) if puncture.keep(t, j))
        t += 1
    return sections + t


def viterbi_decode(metrics, trellis: TrellisGraph, puncture: PunctureMatrix | None = None,
                   sections: int | None = None, terminated: bool = True, backend: str | None = None):
    """Minimum-metric path search.

    ``metrics[..., l, b]`` is the cost of transmitted bit l being b; punctured
    positions are absent (they cost nothing either way). Returns the decoded
    information bits (tail removed when ``terminated``).
    """
    metrics = np.asarray(metrics, dtype=np.float64)
    single = metrics.ndim == 2
    if single:
        metrics = metrics[None]
    if sections is None:
        sections = _sections_for(metrics.shape[1], trellis, puncture)
    lm = np.ascontiguousarray(label_metrics(metrics, trellis, puncture, sections))
    ps, pu = predecessors(trellis)
    B = lm.shape[0]
    init = np.full((B, trellis.num_states), np.inf)
    init[:, 0] = 0.0
    acs, traceback = get_kernels(backend)
    dec, final = acs(lm, output_labels(trellis), ps, pu, init)
    start = np.zeros(B, dtype=np.int64) if terminated else np.argmin(np.asarray(final), axis=1)
    bits = np.asarray(traceback(np.asarray(dec), ps, pu, start))
    if terminated:
        bits = bits[:, :sections - trellis.memory]
    return bits[0] if single else bits


def exhaustive_decode(metrics, trellis: TrellisGraph, n_info: int,
                      puncture: PunctureMatrix | None = None) -> np.ndarray:
    """Arg-min over all 2^n_info terminated codewords (first minimum in label order)."""
    metrics = np.asarray(metrics, dtype=np.float64)
    cand = ((np.arange(1 << n_info)[:, None] >> np.arange(n_info - 1, -1, -1)) & 1).astype(np.uint8)
    cw = encode_batch(trellis, cand, puncture, terminate=True)
    cost = np.take_along_axis(metrics[None], cw[..., None].astype(np.int64), axis=2)[..., 0].sum(axis=1)
    return cand[int(np.argmin(cost))]


# -- configuration and the BER loop -----------------------------------------

def resolve_pattern(spec, trellis: TrellisGraph, S: int, puncture: PunctureMatrix | None = None,
                    seed: int = 0, n: int = 1) -> DemuxPattern:
    """'rotating', 'block:<len>', 'designed' or an explicit list of 1-based streams."""
    _, w = bits_per_period(trellis, puncture)
    if isinstance(spec, (list, tuple)):
        return DemuxPattern(S, tuple(int(x) for x in spec))
    if spec == "rotating":
        return rotating_demux(S, w)
    if spec == "designed":
        return design_demux(trellis, S, n=n, puncture=puncture, seed=seed)
    if isinstance(spec, str) and spec.startswith("block:"):
        return block_demux(S, int(spec.split(":", 1)[1]), w)
    raise ConfigInvalid(f"unknown de-multiplexer spec {spec!r}")


@dataclass
class SimConfig:
    generators: str = "5,7"
    constraint_length: int | None = None
    puncture: list | None = None
    pattern: object = "rotating"
    M: int = 2
    N: int = 2
    S: int = 2
    m: int = 2
    L: int = 512
    snr_db: list = field(default_factory=lambda: [0.0, 5.0, 10.0])
    target_bit_errors: int = 100
    max_packets: int = 100_000
    min_packets: int = 0
    batch_packets: int = 64
    seed: int = 0
    interleave: bool = True
    chain: str = "reduced"
    backend: str | None = None

    def validate(self):
        if not 1 <= self.S <= min(self.M, self.N):
            raise ConfigInvalid(f"need 1 <= S <= min(M, N), got S={self.S}, M={self.M}, N={self.N}")
        if self.L < 1 or self.batch_packets < 1 or self.max_packets < 1:
            raise ConfigInvalid("L, batch_packets and max_packets must be positive")
        if self.chain not in ("reduced", "full"):
            raise ConfigInvalid(f"unknown chain {self.chain!r}")
        if not self.snr_db:
            raise ConfigInvalid("empty SNR grid")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class _Link:
    cfg: SimConfig
    trellis: TrellisGraph
    puncture: PunctureMatrix | None
    table: BitLocationTable
    const: Constellation
    sections: int
    n_info: int


def build_link(cfg: SimConfig) -> _Link:
    cfg.validate()
    try:
        trellis = build_encoder(CodeSpec.from_octal(cfg.generators, cfg.constraint_length))
        puncture = PunctureMatrix.parse(cfg.puncture) if cfg.puncture is not None else None
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(str(exc)) from exc
    pattern = resolve_pattern(cfg.pattern, trellis, cfg.S, puncture, cfg.seed)
    smap = stream_map(trellis, pattern, puncture)
    n_tx = cfg.S * cfg.L * cfg.m
    if n_tx % smap.bits:
        raise ConfigInvalid(f"packet of {n_tx} coded bits is not a multiple of the joint period "
                            f"({smap.bits} bits)")
    sections = n_tx // smap.bits * smap.sections
    n_info = sections - trellis.memory
    if n_info < 1:
        raise ConfigInvalid("packet too short for the code memory")
    const = Constellation.qam(cfg.m)
    seed = cfg.seed if cfg.interleave else None
    table = build_location_table(pattern, seed, cfg.m, cfg.L, trellis if cfg.interleave else None, puncture)
    return _Link(cfg, trellis, puncture, table, const, sections, n_info)


def _batch_rng(seed: int, snr_idx: int, batch_idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, snr_idx, batch_idx]))


def simulate_batch(link: _Link, snr_idx: int, batch_idx: int) -> np.ndarray:
    """Per-packet bit error counts of one batch (deterministic in its indices)."""
    cfg = link.cfg
    rng = _batch_rng(cfg.seed, snr_idx, batch_idx)
    B = cfg.batch_packets
    info = rng.integers(0, 2, (B, link.n_info), dtype=np.uint8)
    coded = encode_batch(link.trellis, info, link.puncture, terminate=True)
    y = modulate(coded, link.const, link.table)                # (B, L, S)
    H = draw_channels(cfg.M, cfg.N, B, rng)
    N0 = cfg.N / 10 ** (cfg.snr_db[snr_idx] / 10)
    if cfg.chain == "reduced":
        lam = singular_values(H)[:, :cfg.S]
        noise = (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)) * math.sqrt(N0 / 2)
        r = lam[:, None, :] * y + noise
    else:
        U, lam, Vh = np.linalg.svd(H)
        lam = lam[:, :cfg.S]
        V = np.conj(np.swapaxes(Vh, -1, -2))[:, :, :cfg.S]
        x = np.einsum("bns,bls->bln", V, y)
        z = np.einsum("bmn,bln->blm", H, x)
        z = z + (rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)) * math.sqrt(N0 / 2)
        r = np.einsum("bms,blm->bls", np.conj(U[:, :, :cfg.S]), z)
    sm = symbol_bit_metrics(r, lam, link.const)
    cm = coded_bit_metrics(sm, link.table)
    dec = viterbi_decode(cm, link.trellis, link.puncture, link.sections, True, cfg.backend)
    return np.count_nonzero(dec != info, axis=1)


def _batch_task(args):
    link, snr_idx, batch_idx = args
    return simulate_batch(link, snr_idx, batch_idx)


def run_ber(cfg: SimConfig, workers: int = 1) -> BerCurve:
    """BER per SNR point; batches are consumed in index order, so the result
    does not depend on the worker count."""
    link = build_link(cfg)
    n_snr = len(cfg.snr_db)
    errs = np.zeros(n_snr, dtype=np.int64)
    bits = np.zeros(n_snr, dtype=np.int64)
    packets = np.zeros(n_snr, dtype=np.int64)
    stderr = np.zeros(n_snr)
    max_batches = -(-cfg.max_packets // cfg.batch_packets)
    min_batches = -(-cfg.min_packets // cfg.batch_packets)
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for si in range(n_snr):
            s1 = s2 = 0.0
            b = 0
            done = False
            while not done and b < max_batches:
                wave = range(b, min(b + max(workers, 1), max_batches))
                if pool is None:
                    results = [simulate_batch(link, si, j) for j in wave]
                else:
                    results = list(pool.map(_batch_task, [(link, si, j) for j in wave]))
                for res in results:
                    errs[si] += int(res.sum())
                    packets[si] += res.size
                    frac = res / link.n_info
                    s1 += float(frac.sum())
                    s2 += float((frac ** 2).sum())
                    b += 1
                    if errs[si] >= cfg.target_bit_errors and b >= min_batches:
                        done = True
                        break
            n = packets[si]
            bits[si] = n * link.n_info
            if n > 1:
                mean = s1 / n
                stderr[si] = math.sqrt(max(s2 / n - mean * mean, 0.0) * n / (n - 1) / n)
    finally:
        if pool is not None:
            pool.shutdown()
    ber = errs / np.maximum(bits, 1)
    meta = {"config": cfg.to_dict(), "info_bits_per_packet": link.n_info,
            "pattern": list(link.table.pattern.assignment)}
    return BerCurve(np.array(cfg.snr_db, dtype=float), ber, errs, bits, stderr, packets, meta)
