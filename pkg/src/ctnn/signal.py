"""Sampled continuous-time signals.

A :class:`Signal` is a finite, strictly increasing set of ``(t, v)`` samples
together with an interpolation rule and a policy for queries outside the
sampled span.  Signals are immutable once built.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import FileFormatError, InvalidGrid, OutOfRange

INTERPOLATIONS = ("linear", "zoh")
OUT_OF_RANGE_POLICIES = ("error", "zero", "clamp")

# tolerance used when counting grid points, so 0:1:0.1 yields 11 points
_GRID_EPS = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid ``t_start, t_start + step, ...`` up to ``t_end``."""

    t_start: float
    t_end: float
    step: float

    def __post_init__(self):
        if not (self.step > 0) or not math.isfinite(self.step):
            raise InvalidGrid(f"grid step must be > 0, got {self.step!r}")
        if self.t_end < self.t_start:
            raise InvalidGrid(f"t_end {self.t_end!r} < t_start {self.t_start!r}")

    def __len__(self) -> int:
        return int(math.floor((self.t_end - self.t_start) / self.step + _GRID_EPS)) + 1

    def points(self) -> np.ndarray:
        return self.t_start + self.step * np.arange(len(self), dtype=float)

    @classmethod
    def parse(cls, text: str) -> "TimeGrid":
        """Parse ``start:end:step``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidGrid(f"grid must look like start:end:step, got {text!r}")
        try:
            start, end, step = (float(p) for p in parts)
        except ValueError as exc:
            raise InvalidGrid(f"non-numeric grid {text!r}") from exc
        return cls(start, end, step)


class Signal:
    """Real-valued function of time realised as samples plus interpolation.

    Args:
        times: strictly increasing sample times in seconds.
        values: sample values, same length as ``times``.
        interpolation: ``"linear"`` or ``"zoh"`` (zero-order hold).
        out_of_range: ``"error"``, ``"zero"`` or ``"clamp"``; what to return
            for queries before the first or after the last sample.
    """

    __slots__ = ("_t", "_v", "interpolation", "out_of_range")

    def __init__(self, times, values, interpolation="linear", out_of_range="zero"):
        t = np.array(times, dtype=float).ravel()
        v = np.array(values, dtype=float).ravel()
        if t.size == 0:
            raise ValueError("a signal needs at least one sample")
        if t.shape != v.shape:
            raise ValueError(f"times and values differ in length ({t.size} vs {v.size})")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(t)):
            raise ValueError("sample times must be finite")
        if interpolation not in INTERPOLATIONS:
            raise ValueError(f"interpolation must be one of {INTERPOLATIONS}")
        if out_of_range not in OUT_OF_RANGE_POLICIES:
            raise ValueError(f"out_of_range must be one of {OUT_OF_RANGE_POLICIES}")
        t.setflags(write=False)
        v.setflags(write=False)
        self._t = t
        self._v = v
        self.interpolation = interpolation
        self.out_of_range = out_of_range

    @property
    def times(self) -> np.ndarray:
        return self._t

    @property
    def values(self) -> np.ndarray:
        return self._v

    @property
    def span(self) -> tuple[float, float]:
        return float(self._t[0]), float(self._t[-1])

    def __len__(self):
        return self._t.size

    def __repr__(self):
        lo, hi = self.span
        return (f"Signal(n={len(self)}, span=[{lo:g}, {hi:g}], "
                f"interpolation={self.interpolation!r}, out_of_range={self.out_of_range!r})")

    def covers(self, t_lo: float, t_hi: float) -> bool:
        lo, hi = self.span
        return lo <= t_lo and t_hi <= hi

    def __call__(self, t) -> np.ndarray:
        """Vectorised evaluation; returns an array shaped like ``t``."""
        t = np.asarray(t, dtype=float)
        lo, hi = self._t[0], self._t[-1]
        outside = (t < lo) | (t > hi)
        if self.out_of_range == "error" and np.any(outside):
            bad = t[outside].flat[0]
            raise OutOfRange(f"t={bad!r} outside sampled span [{lo!r}, {hi!r}]")
        if self.interpolation == "linear":
            # np.interp clamps to the end values outside the span
            out = np.interp(t, self._t, self._v)
        else:
            idx = np.searchsorted(self._t, t, side="right") - 1
            out = self._v[np.clip(idx, 0, self._t.size - 1)]
        if self.out_of_range == "zero" and np.any(outside):
            out = np.where(outside, 0.0, out)
        return out

    def value_at(self, t: float) -> float:
        return float(self(np.float64(t)))

    def shifted(self, dt: float) -> "Signal":
        return Signal(self._t + dt, self._v, self.interpolation, self.out_of_range)

    def with_policy(self, out_of_range: str) -> "Signal":
        return Signal(self._t, self._v, self.interpolation, out_of_range)


def from_function(f: Callable, grid: TimeGrid, interpolation="linear", out_of_range="zero") -> Signal:
    """Sample ``f`` on every point of ``grid``.

    ``f`` is called once per grid point with a Python float, so it need not be
    vectorised.
    """
    if not isinstance(grid, TimeGrid):
        grid = TimeGrid(*grid)
    t = grid.points()
    v = np.array([f(float(ti)) for ti in t], dtype=float)
    return Signal(t, v, interpolation=interpolation, out_of_range=out_of_range)


def fmt(x: float) -> str:
    """17 significant digits; round-trips any double."""
    return f"{x:.17g}"


def read_csv(path, out_of_range="zero", interpolation="linear") -> tuple[list[str], list[Signal]]:
    """Read a ``t,value`` or ``t,x1,...,xn`` file.

    Returns:
        (channel names, one Signal per channel)
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise FileFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "t":
        raise FileFormatError(f"{path}: header must start with 't' and name at least one channel")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    if data.size == 0:
        raise FileFormatError(f"{path}: no samples")
    if data.shape[1] != len(header):
        raise FileFormatError(f"{path}: rows have {data.shape[1]} columns, header has {len(header)}")
    try:
        signals = [Signal(data[:, 0], data[:, j], interpolation, out_of_range)
                   for j in range(1, data.shape[1])]
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    return header[1:], signals


def write_csv(fh, times: Sequence[float], columns: dict[str, Sequence[float]]):
    """Write a multi-channel CSV to an open text handle."""
    names = list(columns)
    fh.write(",".join(["t", *names]) + "\n")
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    for i, t in enumerate(times):
        fh.write(",".join([fmt(float(t)), *(fmt(float(c[i])) for c in cols)]) + "\n")
