"""Inlet/outlet normal-stress data."""
import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, ParameterError

MMHG = 1333.22  # dyn/cm^2


def inlet_pressure_pulse(t, p_max, t_max):
    """Half-cosine pressure pulse, zero after ``t_max``."""
    t = np.asarray(t, dtype=float)
    value = np.where(t <= t_max,
                     0.5 * p_max * (1.0 - np.cos(2.0 * math.pi * t / t_max)),
                     0.0)
    value = np.where(t < 0, 0.0, value)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class Waveform:
    """One period of a sampled pressure signal, extended periodically."""

    t: tuple
    p: tuple

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if len(t) < 2 or len(t) != len(self.p):
            raise DataError("waveform needs at least two (t, p) samples")
        if np.any(np.diff(t) <= 0):
            raise DataError("waveform sample times must be strictly increasing")
        if not np.all(np.isfinite(self.p)):
            raise DataError("waveform contains non-finite pressure values")

    @property
    def period(self):
        return self.t[-1] - self.t[0]

    def __call__(self, t):
        tt = np.asarray(self.t)
        pp = np.asarray(self.p)
        # last sample closes the period; continuity is enforced by wrapping to the first
        tau = self.t[0] + np.mod(np.asarray(t, dtype=float) - self.t[0], self.period)
        value = np.interp(tau, tt, pp)
        return float(value) if np.ndim(value) == 0 else value

    @property
    def mean(self):
        return float(np.trapezoid(self.p, self.t) / self.period)

    @classmethod
    def read_csv(cls, path):
        """Read a two-column ``t,p`` CSV (header optional, ``#`` comments)."""
        ts, ps = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    t, p = float(row[0]), float(row[1])
                except ValueError:
                    if ts:
                        raise DataError(f"bad waveform row {row!r} in {path}")
                    continue  # header
                ts.append(t)
                ps.append(p)
        wf = cls(tuple(ts), tuple(ps))
        if not math.isclose(ps[0], ps[-1], rel_tol=1e-6, abs_tol=1e-6 * max(map(abs, ps))):
            raise DataError(f"waveform in {path} is not periodic (first != last sample)")
        return wf


@dataclass(frozen=True)
class BoundaryData:
    """Inlet and outlet normal-stress magnitudes ``p_in(t)``, ``p_out(t)``.

    kind
        ``'zero'``, ``'constant'`` (``p_in``/``p_out`` fixed), ``'pulse'``
        (half-cosine inlet pulse, zero outlet) or ``'waveform'`` (periodic
        sampled inlet signal; the outlet sees the same signal delayed by
        ``delay`` and lowered by ``mean_drop``).
    """

    kind: str = "zero"
    p_max: float = 0.0
    t_max: float = 1.0
    p_in_value: float = 0.0
    p_out_value: float = 0.0
    waveform: Waveform = None
    waveform_path: str = ""
    delay: float = 0.0
    mean_drop: float = 0.0

    KINDS = ("zero", "constant", "pulse", "waveform")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown boundary data kind {self.kind!r}")
        if self.kind == "pulse" and not self.t_max > 0:
            raise ParameterError("pulse duration t_max must be positive")
        if self.kind == "waveform" and self.waveform is None:
            raise ParameterError("waveform boundary data needs samples")

    def p_in(self, t):
        if self.kind == "pulse":
            return inlet_pressure_pulse(t, self.p_max, self.t_max)
        if self.kind == "constant":
            return self.p_in_value
        if self.kind == "waveform":
            return self.waveform(t)
        return 0.0

    def p_out(self, t):
        if self.kind == "constant":
            return self.p_out_value
        if self.kind == "waveform":
            return self.waveform(t - self.delay) - self.mean_drop
        return 0.0


def load_waveform(path):
    return Waveform.read_csv(Path(path))
