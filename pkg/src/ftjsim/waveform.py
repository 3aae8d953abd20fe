"""Piecewise-linear applied-bias schedules V_T(t)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FtjError


@dataclass(frozen=True)
class Waveform:
    """Continuous piecewise-linear V_T(t) given by strictly increasing
    breakpoint times [s] and voltages [V]. Held constant outside the span."""

    times: np.ndarray
    volts: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.volts, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise FtjError("waveform needs matching 1-D times/volts arrays")
        if np.any(np.diff(t) <= 0):
            raise FtjError("waveform times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "volts", v)

    def __call__(self, t):
        return np.interp(t, self.times, self.volts)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def dilated(self, factor: float) -> "Waveform":
        """Same shape, all durations scaled by `factor`."""
        return Waveform(self.times * factor, self.volts.copy())

    @staticmethod
    def from_segments(segments: list[tuple[float, float]],
                      t0: float = 0.0, v0: float = 0.0) -> "Waveform":
        """Build from (duration, target_voltage) ramp/hold segments."""
        t, v = [t0], [v0]
        for dur, target in segments:
            if dur <= 0:
                raise FtjError("segment durations must be > 0")
            t.append(t[-1] + dur)
            v.append(target)
        return Waveform(np.array(t), np.array(v))


def triangle(amplitude: float, period: float, cycles: int = 1,
             t0: float = 0.0) -> Waveform:
    """Symmetric triangular sweep 0 -> +A -> -A -> 0, repeated `cycles` times."""
    quarter = period / 4.0
    segs = []
    for _ in range(cycles):
        segs += [(quarter, amplitude), (2 * quarter, -amplitude), (quarter, 0.0)]
    return Waveform.from_segments(segs, t0=t0)
