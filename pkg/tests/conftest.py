import re
from functools import lru_cache

import pytest

from bicmb.demux import bits_per_period, block_demux, rotating_demux
from bicmb.spectrum import MonomialPoly
from bicmb.trellis import CodeSpec, PunctureMatrix, build_encoder

LETTERS = "abcd"


def parse_series(S, by_degree):
    """{Z-degree: "2 a^2 b c + ..."} -> {stream exponent tuple: coefficient}."""
    out = {}
    for z, text in by_degree.items():
        for mono in text.split("+"):
            mono = mono.strip()
            m = re.match(r"^(\d+)?\s*(.*)$", mono)
            coeff = int(m.group(1) or 1)
            exps = [0] * S
            for var, pw in re.findall(r"([a-d])(?:\^(\d+))?", m.group(2)):
                exps[LETTERS.index(var)] += int(pw or 1)
            assert sum(exps) == z, (z, mono)
            out[tuple(exps)] = out.get(tuple(exps), 0) + coeff
    return out


def series_of(poly: MonomialPoly):
    out = {}
    for k, c in poly.drop_input_weight().terms.items():
        out[k[:poly.S]] = out.get(k[:poly.S], 0) + c
    return out


@lru_cache(maxsize=None)
def code(generators, puncture=None):
    tr = build_encoder(CodeSpec.from_octal(generators))
    pu = PunctureMatrix.parse(puncture) if puncture else None
    return tr, pu


def rotating_for(tr, pu, S):
    return rotating_demux(S, bits_per_period(tr, pu)[1])


# (S, generators, puncture, listed alpha-vectors, Q_max) for the 64-state codes
TABLE_ROWS = [
    (2, "133,171", None, [(3, 7), (4, 6), (5, 5)], 1),
    (2, "133,171", "2/3", [(0, 12), (0, 14), (0, 15)], 2),
    (2, "133,171", "3/4", [(0, 8), (0, 10), (0, 12)], 2),
    (3, "133,145,175", None, [(3, 6, 6), (5, 4, 6), (4, 6, 6)], 1),
    (3, "133,171", None, [(0, 7, 7), (0, 8, 6), (0, 9, 7)], 2),
    (3, "133,171", "2/3", [(0, 4, 5), (0, 6, 3), (0, 4, 6)], 2),
    (3, "133,171", "3/4", [(0, 0, 13), (0, 0, 15), (0, 0, 17)], 3),
]

TABLE_FREE_DISTANCE = {("133,171", None): 10, ("133,171", "2/3"): 6, ("133,171", "3/4"): 5,
                       ("133,145,175", None): 15}


def shipped_pairs():
    """Every code / de-multiplexer combination the configs and docs use."""
    pairs = [
        ("5,7", None, "rotating", 2), ("5,7", None, "rotating", 3), ("5,7", None, "rotating", 4),
        ("5,7", None, "block:6", 3), ("5,7", None, "designed", 4), ("5,7", None, "designed", 3),
    ]
    for S in (2, 3):
        for pu in (None, "2/3", "3/4"):
            pairs.append(("133,171", pu, "rotating", S))
    pairs += [("133,145,175", None, "rotating", 3), ("133,145,175", None, "rotating", 2)]
    return pairs


@pytest.fixture
def code57():
    return code("5,7")[0]


ACCEPTANCE_LINES: list[str] = []


def report(number: int, title: str, passed: bool, detail: str = ""):
    """Record and print one acceptance verdict line."""
    line = f"criterion {number} [{title}]: {'PASS' if passed else 'FAIL'}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
