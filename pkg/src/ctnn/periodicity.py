"""Period-length detection by comb filtering.

A signal is compared with a copy of itself delayed by ``T`` and inverted;
the RMS of the difference over a window,

    E(T) = sqrt(1/W * integral_{t0}^{t0+W} (x(u) - x(u - T))^2 du),

is small when ``T`` is (close to) a period of the overall signal, including
periods whose fundamental is absent from the spectrum.  ``comb_energy`` runs
this through a two-edge network unit with integration switched on;
``comb_energy_direct`` is the plain quadrature used to check it.

Candidate periods for a two-tone signal can also be predicted from rational
approximations of the frequency ratio found by Stern-Brocot descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from ._parallel import pmap
from .core import Edge, Network, UnitConfig, evaluate
from .errors import OutOfRange
from .signal import Signal

INV_PHI = (math.sqrt(5) - 1) / 2
# energies at or below this count as exact cancellation when ranking minima
ZERO_ENERGY = 1e-3


def _default_quad_step(x: Signal) -> float:
    if len(x) < 2:
        return 0.01
    return float(np.min(np.diff(x.times)))


def comb_network(T: float, window: float) -> Network:
    """One unit: ``+1 * x(t) - 1 * x(t - T)``, RMS over the trailing ``window``."""
    return Network(
        units={"comb": UnitConfig(tau=float(window), alpha=None, omega=0.0)},
        inputs=("x",),
        output="comb",
        edges=[Edge("x", "comb", 1.0, 0.0), Edge("x", "comb", -1.0, float(T))],
    )


def _prepare(x: Signal, T: float, window: float, quad_step, t0):
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T!r}")
    if not window > 0:
        raise ValueError(f"window must be > 0, got {window!r}")
    if quad_step is None:
        quad_step = _default_quad_step(x)
    if t0 is None:
        t0 = x.span[0] + T
    lo, hi = x.span
    slack = 1e-9 * max(1.0, abs(lo), abs(hi))
    if t0 - T < lo - slack or t0 + window > hi + slack:
        raise OutOfRange(f"comb filter needs x on [{t0 - T!r}, {t0 + window!r}], "
                         f"signal covers [{lo!r}, {hi!r}]")
    # round-off at the window edges must not fall into zero padding
    return x.with_policy("clamp"), float(quad_step), float(t0)


def comb_energy(x: Signal, T: float, window: float, quad_step: Optional[float] = None,
                t0: Optional[float] = None) -> float:
    """Comb-filter energy evaluated through a CTNN unit.

    Args:
        x: the signal under analysis.
        T: candidate period (delay of the inverted copy).
        window: integration span ``W``.
        quad_step: trapezoid step; defaults to the signal's sample spacing.
        t0: start of the integration window; defaults to ``T`` past the first
            sample so the delayed copy stays inside the data.
    """
    xs, quad_step, t0 = _prepare(x, T, window, quad_step, t0)
    y = evaluate(comb_network(T, window), [xs], np.array([t0 + window]), quad_step)
    return float(y[0])


def comb_energy_direct(x: Signal, T: float, window: float, quad_step: Optional[float] = None,
                       t0: Optional[float] = None) -> float:
    xs, quad_step, t0 = _prepare(x, T, window, quad_step, t0)
    m = max(1, math.ceil(window / quad_step - 1e-9))
    u = np.linspace(t0, t0 + window, m + 1)
    d = xs(u) - xs(u - T)
    return math.sqrt(np.trapezoid(d * d, u) / window)


def comb_energy_limit(omegas, T):
    """Infinite-window value for ``x(t) = sum_j cos(omega_j t)``: ``sqrt(sum_j 1 - cos(omega_j T))``."""
    T = np.asarray(T, dtype=float)
    total = sum(1 - np.cos(w * T) for w in omegas)
    return np.sqrt(np.maximum(total, 0.0))


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float,
                   max_iter: int = 200) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]`` until the bracket is shorter than ``tol``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


@dataclass
class PeriodScan:
    """Comb energy over a grid of candidate periods.

    ``minima`` holds golden-section refined interior minima, best first.
    """

    T: np.ndarray
    E: np.ndarray
    minima: list = field(default_factory=list)
    window: float = 0.0
    grid_step: float = 0.0
    t0: float = 0.0

    @property
    def candidates(self) -> list[tuple[float, float]]:
        return list(zip(self.T.tolist(), self.E.tolist()))

    @property
    def best(self) -> Optional[tuple[float, float]]:
        return self.minima[0] if self.minima else None


def scan_periods(x: Signal, T_min: float, T_max: float, step: float, window: float,
                 quad_step: Optional[float] = None, t0: Optional[float] = None,
                 threads: Optional[int] = None) -> PeriodScan:
    """Evaluate ``comb_energy`` for ``T = T_min, T_min + step, ..., <= T_max``.

    Interior points strictly below both neighbours are refined by golden-section
    search on the bracketing interval to ``step / 100``.  All candidates share
    one window anchor ``t0`` (default: ``T_max`` past the first sample).

    Minima are ranked by energy; energies up to ``ZERO_ENERGY`` are treated as
    equal and ranked by period length, so a clean fundamental beats its
    multiples.
    """
    if not 0 < T_min < T_max:
        raise ValueError(f"need 0 < T_min < T_max, got {T_min!r}, {T_max!r}")
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step!r}")
    if quad_step is None:
        quad_step = _default_quad_step(x)
    if t0 is None:
        t0 = x.span[0] + T_max
    n = int(math.floor((T_max - T_min) / step + 1e-9)) + 1
    Ts = T_min + step * np.arange(n, dtype=float)

    def energy(T):
        return comb_energy(x, float(T), window, quad_step, t0)

    E = np.array(pmap(energy, Ts, threads), dtype=float)

    interior = [i for i in range(1, n - 1) if E[i] < E[i - 1] and E[i] < E[i + 1]]

    def refine(i):
        Tr, Er = golden_section(energy, Ts[i - 1], Ts[i + 1], step / 100)
        return (float(Tr), float(Er)) if Er <= E[i] else (float(Ts[i]), float(E[i]))

    minima = pmap(refine, interior, threads)
    # multiples of a period cancel equally well; prefer the shortest among those
    minima.sort(key=lambda m: (0.0 if m[1] <= ZERO_ENERGY else m[1], m[0]))
    return PeriodScan(T=Ts, E=E, minima=minima, window=float(window), grid_step=float(step),
                      t0=float(t0))


# --- rational approximation ----------------------------------------------------

@dataclass(frozen=True)
class RatioApprox:
    target: float
    convergents: tuple

    @property
    def best(self) -> tuple[int, int]:
        return self.convergents[-1]


def stern_brocot(target: float, max_denominator: int, max_steps: int = 1_000_000) -> RatioApprox:
    """Best rational approximations of ``target`` with denominator <= ``max_denominator``.

    Descends the Stern-Brocot tree from the bounds 0/1 and 1/0 by mediants.
    A node is recorded when it beats every earlier record in ``|q*x - p|``,
    which keeps exactly the continued-fraction convergents; ``floor(x)/1`` is
    always the first record.

    A float target is read as its shortest decimal representation, so
    ``0.3`` means 3/10 rather than the nearest binary fraction.  Pass a
    :class:`~fractions.Fraction` for full control.
    """
    if not target > 0 or not math.isfinite(target):
        raise ValueError(f"target must be a positive finite number, got {target!r}")
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    x = target if isinstance(target, Fraction) else Fraction(repr(float(target)))
    a0 = math.floor(x)
    records = [(a0, 1)]
    best_err = abs(x - a0)
    lp, lq, rp, rq = 0, 1, 1, 0
    for _ in range(max_steps):
        if best_err == 0:
            break
        p, q = lp + rp, lq + rq
        if q > max_denominator:
            break
        err = abs(q * x - p)
        if err < best_err:
            records.append((p, q))
            best_err = err
        if err == 0:
            break
        if Fraction(p, q) < x:
            lp, lq = p, q
        else:
            rp, rq = p, q
    return RatioApprox(float(target), tuple(records))


def predict_period_candidates(omega1: float, omega2: float, max_denominator: int) -> list[float]:
    """Period lengths ``q * 2*pi/omega1`` for each convergent ``p/q`` of ``omega2/omega1``."""
    if not (omega1 > 0 and omega2 > 0):
        raise ValueError("frequencies must be positive")
    base = 2 * math.pi / omega1
    out = []
    for _, q in stern_brocot(omega2 / omega1, max_denominator).convergents:
        T = q * base
        if T not in out:
            out.append(T)
    return out
