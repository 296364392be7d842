"""Exact check of the smallest-degree claim for the ordered-eigenvalue integrals.

Polynomials in mu_1..mu_N carry Fraction coefficients. The joint density
factor p is split as p = g * h_0 (g holds the factors of the used
subchannels), h_0 is integrated over the unused eigenvalues, and the lowest
total degree of r = g * h is compared with (M - l1 + 1)(N - l1 + 1) - K.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DimensionGuard, NonPolynomialRemainder

MAX_N = 5


class OrderedPoly:
    """Polynomial over mu_1 >= ... >= mu_N >= 0 (variables indexed 1..N)."""

    __slots__ = ("N", "terms")

    def __init__(self, N: int, terms: Mapping[tuple, object] | None = None):
        self.N = N
        self.terms: dict[tuple, Fraction] = {}
        for k, c in (terms or {}).items():
            if len(k) != N:
                raise ValueError(f"exponent {k} has wrong length for N={N}")
            c = Fraction(c)
            if c:
                k = tuple(k)
                v = self.terms.get(k, 0) + c
                if v:
                    self.terms[k] = v
                else:
                    self.terms.pop(k, None)

    @classmethod
    def const(cls, N: int, c=1) -> "OrderedPoly":
        return cls(N, {(0,) * N: c})

    @classmethod
    def var(cls, N: int, i: int) -> "OrderedPoly":
        e = [0] * N
        e[i - 1] = 1
        return cls(N, {tuple(e): 1})

    def _new(self, terms):
        out = OrderedPoly(self.N)
        out.terms = {k: v for k, v in terms.items() if v}
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = OrderedPoly.const(self.N, other)
        return isinstance(other, OrderedPoly) and self.N == other.N and self.terms == other.terms

    def __add__(self, other: "OrderedPoly") -> "OrderedPoly":
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return self._new(t)

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "OrderedPoly") -> "OrderedPoly":
        t: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                t[k] = t.get(k, 0) + c1 * c2
        return self._new(t)

    def __pow__(self, n: int) -> "OrderedPoly":
        out = OrderedPoly.const(self.N)
        for _ in range(n):
            out = out * self
        return out

    def degrees(self) -> list[int]:
        return [sum(k) for k in self.terms]

    @property
    def total_degree(self) -> int:
        return max(self.degrees(), default=-1)

    @property
    def min_degree(self) -> int:
        return min(self.degrees(), default=-1)

    def is_homogeneous(self) -> bool:
        return len(set(self.degrees())) <= 1

    def divmod(self, divisor: "OrderedPoly") -> tuple["OrderedPoly", "OrderedPoly"]:
        """Multivariate division in lexicographic order: self = q * divisor + r."""
        if not divisor:
            raise ZeroDivisionError("division by the zero polynomial")
        lead = max(divisor.terms)
        lc = divisor.terms[lead]
        rest = dict(self.terms)
        quot: dict = {}
        rem: dict = {}
        while rest:
            k = max(rest)
            c = rest[k]
            if all(a >= b for a, b in zip(k, lead)):
                qk = tuple(a - b for a, b in zip(k, lead))
                qc = c / lc
                quot[qk] = quot.get(qk, 0) + qc
                for dk, dc in divisor.terms.items():
                    kk = tuple(a + b for a, b in zip(qk, dk))
                    v = rest.get(kk, 0) - qc * dc
                    if v:
                        rest[kk] = v
                    else:
                        rest.pop(kk, None)
            else:
                rem[k] = c
                del rest[k]
        return self._new(quot), self._new(rem)

    def exact_div(self, divisor: "OrderedPoly") -> "OrderedPoly":
        q, r = self.divmod(divisor)
        if r:
            raise NonPolynomialRemainder(f"non-zero remainder with {len(r.terms)} term(s)")
        return q

    def integrate_to_previous(self, j: int) -> "OrderedPoly":
        """Integral over mu_j from 0 to mu_{j-1}."""
        if j < 2:
            raise ValueError("the upper limit needs a preceding variable")
        t: dict = {}
        for k, c in self.terms.items():
            e = k[j - 1] + 1
            kk = list(k)
            kk[j - 1] = 0
            kk[j - 2] += e
            kk = tuple(kk)
            t[kk] = t.get(kk, 0) + c / e
        return self._new(t)

    def integrate_exponential(self, j: int) -> "OrderedPoly":
        """Integral over mu_j in (0, inf) against exp(-mu_j): mu^n -> n!."""
        t: dict = {}
        for k, c in self.terms.items():
            kk = list(k)
            kk[j - 1] = 0
            kk = tuple(kk)
            t[kk] = t.get(kk, 0) + c * math.factorial(k[j - 1])
        return self._new(t)

    def variables(self) -> set[int]:
        return {i + 1 for k in self.terms for i, e in enumerate(k) if e}

    def __call__(self, *values) -> Fraction:
        total = Fraction(0)
        for k, c in self.terms.items():
            term = c
            for v, e in zip(values, k):
                term *= Fraction(v) ** e
            total += term
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"mu{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(k) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


@dataclass(frozen=True)
class AlphaPattern:
    """Support of an alpha-vector: the 1-based indices with alpha_i > 0."""

    N: int
    support: tuple[int, ...]

    def __post_init__(self):
        sup = tuple(sorted(set(int(i) for i in self.support)))
        if not sup or sup[0] < 1 or sup[-1] > self.N:
            raise ValueError(f"support must be a non-empty subset of 1..{self.N}")
        object.__setattr__(self, "support", sup)

    @classmethod
    def from_alpha(cls, alpha: Iterable[int]) -> "AlphaPattern":
        alpha = list(alpha)
        return cls(len(alpha), tuple(i + 1 for i, a in enumerate(alpha) if a > 0))

    @property
    def K(self) -> int:
        return len(self.support)

    @property
    def ell1(self) -> int:
        return self.support[0]


def _check_dims(M: int, N: int):
    if N < 1 or M < N:
        raise ValueError(f"need M >= N >= 1, got M={M}, N={N}")


def _vandermonde_part(N: int, indices, M: int) -> OrderedPoly:
    out = OrderedPoly.const(N)
    for k in indices:
        out = out * OrderedPoly.var(N, k) ** (M - N)
    for a, b in itertools.combinations(indices, 2):
        out = out * (OrderedPoly.var(N, a) - OrderedPoly.var(N, b)) ** 2
    return out


def joint_pdf_poly(M: int, N: int) -> OrderedPoly:
    """prod mu_i^(M-N) * prod_{i<j} (mu_i - mu_j)^2, normalisation omitted."""
    if M < N:
        M, N = N, M
    _check_dims(M, N)
    return _vandermonde_part(N, range(1, N + 1), M)


def compute_g(M: int, N: int, pattern: AlphaPattern) -> OrderedPoly:
    if M < N:
        M, N = N, M
    _check_dims(M, N)
    return _vandermonde_part(N, pattern.support, M)


def integration_order(pattern: AlphaPattern) -> list[tuple[int, str]]:
    """(variable, kind) in evaluation order; kind is 'upper' or 'exp'."""
    sup = set(pattern.support)
    steps = [(j, "upper") for j in range(pattern.N, pattern.ell1, -1) if j not in sup]
    steps += [(j, "upper") for j in range(pattern.ell1 - 1, 1, -1)]
    if pattern.ell1 > 1:
        steps.append((1, "exp"))
    return steps


def compute_h(M: int, N: int, pattern: AlphaPattern) -> OrderedPoly:
    """Integrate p / g over every eigenvalue outside the support."""
    if M < N:
        M, N = N, M
    _check_dims(M, N)
    if N > MAX_N:
        raise DimensionGuard(f"N={N} exceeds the symbolic limit {MAX_N}")
    h = joint_pdf_poly(M, N).exact_div(compute_g(M, N, pattern))
    for j, kind in integration_order(pattern):
        h = h.integrate_to_previous(j) if kind == "upper" else h.integrate_exponential(j)
    return h


def formula_degree(M: int, N: int, pattern: AlphaPattern) -> int:
    return (M - pattern.ell1 + 1) * (N - pattern.ell1 + 1) - pattern.K


def r_smallest_degree(M: int, N: int, pattern: AlphaPattern, formula_offset: int = 0) -> tuple[int, bool]:
    """(lowest total degree of g * h, whether it equals the closed form)."""
    if M < N:
        M, N = N, M
    r = compute_g(M, N, pattern) * compute_h(M, N, pattern)
    deg = r.min_degree
    return deg, deg == formula_degree(M, N, pattern) + formula_offset


@dataclass(frozen=True)
class AppendixCase:
    M: int
    N: int
    support: tuple[int, ...]
    computed_degree: int
    formula_degree: int
    g_degree_ok: bool
    quotient_degree_ok: bool

    @property
    def passed(self) -> bool:
        return (self.computed_degree == self.formula_degree and self.g_degree_ok
                and self.quotient_degree_ok)


def check_case(M: int, N: int, pattern: AlphaPattern, formula_offset: int = 0) -> AppendixCase:
    K = pattern.K
    g = compute_g(M, N, pattern)
    g_ok = g.is_homogeneous() and g.total_degree == K * (M - N) + K * (K - 1)
    quot = joint_pdf_poly(M, N).exact_div(g)
    q_ok = quot.total_degree == (N - K) * (M - N) + N * (N - 1) - K * (K - 1)
    r = g * compute_h(M, N, pattern)
    return AppendixCase(M, N, pattern.support, r.min_degree,
                        formula_degree(M, N, pattern) + formula_offset, g_ok, q_ok)


def verify_appendix(M_max: int, N_max: int, formula_offset: int = 0) -> list[AppendixCase]:
    """Every 1 <= N <= N_max, N <= M <= M_max and every non-empty support."""
    if M_max > MAX_N or N_max > MAX_N:
        raise DimensionGuard(f"sweep limited to dimensions <= {MAX_N}")
    cases = []
    for N in range(1, N_max + 1):
        for M in range(N, M_max + 1):
            for size in range(1, N + 1):
                for sup in itertools.combinations(range(1, N + 1), size):
                    cases.append(check_case(M, N, AlphaPattern(N, sup), formula_offset))
    return cases


def appendix_table(cases: Iterable[AppendixCase]) -> str:
    lines = ["M, N, support, computed_degree, formula_degree, pass"]
    for c in cases:
        sup = "{" + ",".join(map(str, c.support)) + "}"
        lines.append(f"{c.M}, {c.N}, {sup}, {c.computed_degree}, {c.formula_degree}, "
                     f"{'PASS' if c.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"
