"""Diversity predictions from alpha-spectra, Monte-Carlo PEP curves and union bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .curves import BerCurve, PepCurve
from .errors import InsufficientPoints, QOutOfRange, ZeroProbability
from .spectrum import AlphaSpectrum, q_of, q_max

STANDARD_RATES = (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4),
                  Fraction(1))


def diversity_order(M: int, N: int, q_max: int) -> int:
    if not 1 <= q_max <= min(M, N):
        raise QOutOfRange(f"Q_max={q_max} outside 1..{min(M, N)}")
    return (M - q_max + 1) * (N - q_max + 1)


def singleton_floor(S: int, rate) -> int:
    """ceil(S * R_c) in exact arithmetic."""
    r = Fraction(rate)
    if not 0 < r <= 1 or S < 1:
        raise ValueError(f"need S >= 1 and 0 < R_c <= 1, got S={S}, R_c={r}")
    x = S * r
    return -(-x.numerator // x.denominator)


def max_achievable_order(M: int, N: int, S: int, rate) -> int:
    if S > min(M, N):
        raise QOutOfRange(f"S={S} exceeds min(M, N)={min(M, N)}")
    q = singleton_floor(S, rate)
    return (M - q + 1) * (N - q + 1)


@dataclass(frozen=True)
class DiversityReport:
    M: int
    N: int
    S: int
    rate: Fraction
    q_max: int
    order: int
    singleton_floor: int
    max_achievable_order: int

    @classmethod
    def build(cls, M: int, N: int, S: int, rate, q_max: int) -> "DiversityReport":
        rate = Fraction(rate)
        return cls(M, N, S, rate, q_max, diversity_order(M, N, q_max), singleton_floor(S, rate),
                   max_achievable_order(M, N, S, rate))

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["rate"] = str(self.rate)
        return d


def rate_region_table(M: int, N: int, rates: Sequence = STANDARD_RATES) -> list[tuple[int, Fraction, int]]:
    """(S, R_c, max achievable order) over S = 1..min(M, N) and the given rates."""
    return [(S, Fraction(r), max_achievable_order(M, N, S, r))
            for S in range(1, min(M, N) + 1) for r in rates]


def rate_region_csv(M: int, N: int, rates: Sequence = STANDARD_RATES) -> str:
    rates = [Fraction(r) for r in rates]
    lines = ["S," + ",".join(str(r) for r in rates)]
    for S in range(1, min(M, N) + 1):
        lines.append(f"{S}," + ",".join(str(max_achievable_order(M, N, S, r)) for r in rates))
    return "\n".join(lines) + "\n"


# -- PEP Monte-Carlo ----------------------------------------------------------

def _log_norm(m: int, n: int) -> float:
    """log of the normaliser of the ordered Wishart eigenvalue density."""
    return sum(math.lgamma(m - i + 1) + math.lgamma(n - i + 1) for i in range(1, n + 1))


def _log_wishart(mu: np.ndarray, m: int, n: int) -> np.ndarray:
    """Log joint density of ordered eigenvalues (descending along the last axis)."""
    out = (m - n) * np.log(mu).sum(axis=-1) - mu.sum(axis=-1) - _log_norm(m, n)
    for i in range(n):
        for j in range(i + 1, n):
            out = out + 2 * np.log(mu[..., i] - mu[..., j])
    return out


def _log_gamma_pdf(x, shape, scale):
    lg = np.array([math.lgamma(k) for k in np.ravel(shape)]).reshape(np.shape(shape))
    return (shape - 1) * np.log(x) - x / scale - lg - shape * np.log(scale)


def _pep_importance(alpha: np.ndarray, m: int, n: int, W: float, trials: int,
                    rng: np.random.Generator) -> tuple[float, float]:
    """Mean and standard error of exp(-W * sum(alpha * mu)) / 2.

    Samples the eigenvalue gaps (mu_i - mu_{i+1}, and mu_n itself) from
    Gamma proposals. Gaps from the first used subchannel onward are shrunk
    to the 1/W scale where the expectation concentrates; half of the draws
    use unit scales so the weights stay bounded.
    """
    q = q_of(alpha)
    a_min = float(alpha[alpha > 0].min())
    shapes = np.array([3.0] * (n - 1) + [float(m - n + 1)])
    wide = np.ones(n)
    narrow = np.where(np.arange(1, n + 1) >= q, 1.0 / (W * a_min), 1.0)
    pick = rng.random(trials) < 0.5
    scale = np.where(pick[:, None], narrow, wide)
    gaps = rng.gamma(shapes, scale, size=(trials, n))
    mu = np.cumsum(gaps[:, ::-1], axis=1)[:, ::-1]
    log_q = np.logaddexp(
        np.log(0.5) + _log_gamma_pdf(gaps, shapes, narrow).sum(axis=1),
        np.log(0.5) + _log_gamma_pdf(gaps, shapes, wide).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_f = math.log(0.5) - W * (mu @ alpha)
        vals = np.exp(log_f + _log_wishart(mu, m, n) - log_q)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))


def _pep_direct(alpha: np.ndarray, M: int, N: int, W: float, trials: int,
                rng: np.random.Generator, chunk: int = 100_000) -> tuple[float, float]:
    from .sim import sample_singular_values

    s1 = s2 = 0.0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        lam2 = sample_singular_values(M, N, b, rng) ** 2
        v = 0.5 * np.exp(-W * (lam2 @ alpha))
        s1 += float(v.sum())
        s2 += float((v * v).sum())
        done += b
    mean = s1 / trials
    var = max(s2 / trials - mean * mean, 0.0) * trials / max(trials - 1, 1)
    return mean, math.sqrt(var / trials)


def pep_mc_estimate(alpha, M: int, N: int, d_min: float, snr_grid, trials: int, seed: int = 0,
                    method: str = "importance") -> PepCurve:
    """E[exp(-d_min^2 * sum(alpha_s * lambda_s^2) / (4 N_0)) / 2] with N_0 = N / SNR.

    ``method="direct"`` averages over channels from the simulator's sampler;
    ``"importance"`` samples ordered eigenvalues directly and stays accurate
    deep into the high-SNR tail.
    """
    n = min(M, N)
    m = max(M, N)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size > n:
        raise QOutOfRange(f"alpha has {alpha.size} entries but only {n} subchannels exist")
    if not np.any(alpha > 0):
        q_of(alpha)   # raises AllZeroVector
    a = np.zeros(n)
    a[:alpha.size] = alpha
    snr_db = np.asarray(snr_grid, dtype=float)
    vals = np.empty(snr_db.size)
    errs = np.empty(snr_db.size)
    for k, s in enumerate(snr_db):
        N0 = N / 10 ** (s / 10)
        W = d_min ** 2 / (4 * N0)
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        if method == "importance":
            vals[k], errs[k] = _pep_importance(a, m, n, W, trials, rng)
        elif method == "direct":
            vals[k], errs[k] = _pep_direct(a, M, N, W, trials, rng)
        else:
            raise ValueError(f"unknown method {method!r}")
    meta = {"alpha": [int(x) for x in alpha], "M": M, "N": N, "d_min": d_min, "trials": trials,
            "seed": seed, "method": method}
    return PepCurve(snr_db, vals, np.full(snr_db.size, trials), errs, tuple(int(x) for x in alpha),
                    d_min, meta)


def slope_estimate(curve, snr_window_dB=(-np.inf, np.inf)) -> float:
    """Negated least-squares slope of log10(P) against log10(SNR) inside the window."""
    snr = np.asarray(curve.snr_db, dtype=float)
    val = np.asarray(curve.values, dtype=float)
    lo, hi = snr_window_dB
    sel = (snr >= lo) & (snr <= hi)
    if sel.sum() < 2:
        raise InsufficientPoints(f"{int(sel.sum())} point(s) inside window {snr_window_dB}")
    if np.any(val[sel] <= 0):
        raise ZeroProbability("zero probability inside the window; more trials are needed")
    slope = np.polyfit(snr[sel] / 10, np.log10(val[sel]), 1)[0]
    return float(-slope) + 0.0


def union_bound_ber(spectrum: AlphaSpectrum, M: int, N: int, d_min: float, k_c: int, snr_grid,
                    trials: int, seed: int = 0, method: str = "importance") -> BerCurve:
    """Truncated union bound on the bit error rate.

    Events are counted from every phase of the joint period, so the sum is
    divided by k_c times the number of phases to give a per-bit figure.
    """
    snr_db = np.asarray(snr_grid, dtype=float)
    total = np.zeros(snr_db.size)
    var = np.zeros(snr_db.size)
    for idx, term in enumerate(spectrum.terms()):
        pep = pep_mc_estimate(term.alpha, M, N, d_min, snr_db, trials, seed + idx, method)
        total += term.input_weight * pep.values
        var += (term.input_weight * pep.stderr) ** 2
    scale = k_c * spectrum.phases
    meta = {"bound": "truncated union bound", "truncation_dH": spectrum.truncation_dH,
            "M": M, "N": N, "d_min": d_min, "k_c": k_c, "trials": trials, "seed": seed,
            "q_max": q_max(spectrum) if spectrum.by_distance else None}
    zeros = np.zeros(snr_db.size, dtype=np.int64)
    return BerCurve(snr_db, total / scale, zeros, zeros, np.sqrt(var) / scale, None, meta)
