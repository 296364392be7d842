"""Curve containers shared by the simulator and the diversity analysis."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np


def _header(meta: dict) -> str:
    if not meta:
        return ""
    return "# " + json.dumps(meta, sort_keys=True, default=str) + "\n"


@dataclass
class PepCurve:
    """Pairwise-error-probability bound E[exp(-W * sum(alpha * lambda^2)) / 2] over SNR."""

    snr_db: np.ndarray
    values: np.ndarray
    trials: np.ndarray
    stderr: np.ndarray
    alpha: tuple[int, ...] = ()
    d_min: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(_header(self.meta))
        out.write("snr_db,value,trials,stderr\n")
        for row in zip(self.snr_db, self.values, self.trials, self.stderr):
            out.write(f"{row[0]:g},{row[1]:.10e},{int(row[2])},{row[3]:.10e}\n")
        return out.getvalue()


@dataclass
class BerCurve:
    snr_db: np.ndarray
    values: np.ndarray          # bit error rate
    bit_errors: np.ndarray
    bits: np.ndarray
    stderr: np.ndarray
    packets: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def ber(self):
        return self.values

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(_header(self.meta))
        out.write("snr_db,ber,bit_errors,bits_simulated,stderr\n")
        for s, v, e, b, se in zip(self.snr_db, self.values, self.bit_errors, self.bits, self.stderr):
            out.write(f"{s:g},{v:.10e},{int(e)},{int(b)},{se:.10e}\n")
        return out.getvalue()
