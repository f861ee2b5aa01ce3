"""CTNN units and feed-forward network evaluation.

Each computing unit runs up to four stages on its incoming values:

1. summation    ``y1(t) = sum_i w_i * x_i(t - delay_i)``
2. integration  ``y2(t) = sqrt(1/tau * integral_{t-tau}^{t} y1(u)^2 du)``
3. activation   ``y3(t) = tanh(alpha * y2(t)) / alpha``
4. oscillation  ``y4(t) = y3(t) * cos(omega * t + phi)``

Stages 2-4 can be switched off: ``tau=None`` / ``alpha=None`` (or 0) /
``omega=0``.  ``tau=0`` is *not* off; it yields ``|y1(t)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ArityMismatch, CyclicNetwork, InvalidNetwork
from .signal import Signal, TimeGrid

OFF = None


@dataclass(frozen=True)
class UnitConfig:
    """Parameters of one computing unit.

    ``tau`` and ``alpha`` accept ``None`` to switch the stage off.  ``alpha``
    defaults to 1 like a plain tanh unit; integration and oscillation default
    to off.
    """

    tau: Optional[float] = OFF
    alpha: Optional[float] = 1.0
    omega: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float
    delay: float = 0.0


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


@dataclass(frozen=True)
class Network:
    """Feed-forward CTNN.

    Attributes:
        units: computing units by id.
        inputs: ordered input-unit ids; ``eval_network`` binds signals by position.
        on_neurons: constant sources, id -> emitted value.
        output: id of the single output unit (must be a computing unit).
        edges: weighted, possibly delayed connections.
    """

    units: dict
    inputs: tuple
    output: str
    edges: tuple
    on_neurons: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "units", dict(self.units))
        object.__setattr__(self, "on_neurons", dict(self.on_neurons))

    def incoming(self, uid: str) -> list[tuple[int, Edge]]:
        return [(i, e) for i, e in enumerate(self.edges) if e.target == uid]

    def topological_order(self) -> list[str]:
        """Computing units ordered so every predecessor comes first."""
        ts = TopologicalSorter({u: set() for u in self.units})
        for e in self.edges:
            ts.add(e.target, e.source)
        try:
            order = list(ts.static_order())
        except CycleError as exc:
            raise CyclicNetwork(f"cycle through {exc.args[1]}") from exc
        return [u for u in order if u in self.units]

    def max_lookback(self) -> float:
        """Largest cumulative delay + integration window along any path to the output."""
        order = self.topological_order()
        reach = {u: 0.0 for u in (*self.inputs, *self.on_neurons)}
        for u in order:
            cfg = self.units[u]
            own = cfg.tau if cfg.tau else 0.0
            best = 0.0
            for _, e in self.incoming(u):
                best = max(best, reach.get(e.source, 0.0) + e.delay)
            reach[u] = best + own
        return reach.get(self.output, 0.0)


def validate(net: Network) -> list[Violation]:
    """Check every structural invariant; an empty list means the network is sound."""
    out: list[Violation] = []
    groups = {"unit": list(net.units), "input": list(net.inputs), "on_neuron": list(net.on_neurons)}
    seen: dict[str, str] = {}
    for kind, ids in groups.items():
        for uid in ids:
            if uid in seen:
                out.append(Violation("DuplicateId", f"{uid!r} declared as {seen[uid]} and {kind}"))
            seen.setdefault(uid, kind)

    if net.output not in net.units:
        out.append(Violation("MissingOutput", f"output {net.output!r} is not a computing unit"))

    for uid, cfg in net.units.items():
        for name in ("tau", "alpha"):
            v = getattr(cfg, name)
            if v is not None and (not math.isfinite(v) or v < 0):
                out.append(Violation("InvalidParameter", f"unit {uid!r}: {name}={v!r}"))
        for name in ("omega", "phi"):
            v = getattr(cfg, name)
            if not math.isfinite(v):
                out.append(Violation("InvalidParameter", f"unit {uid!r}: {name}={v!r}"))

    has_in = set()
    has_out = set()
    for i, e in enumerate(net.edges):
        tag = f"edge {i} ({e.source!r}->{e.target!r})"
        if e.source not in seen or e.target not in seen:
            missing = [x for x in (e.source, e.target) if x not in seen]
            out.append(Violation("UnknownUnit", f"{tag} references {missing}"))
        if e.source == e.target:
            out.append(Violation("SelfLoop", tag))
        if not (e.delay >= 0) or not math.isfinite(e.delay):
            out.append(Violation("NegativeDelay", f"{tag} delay={e.delay!r}"))
        if not math.isfinite(e.weight):
            out.append(Violation("InvalidParameter", f"{tag} weight={e.weight!r}"))
        has_in.add(e.target)
        has_out.add(e.source)

    for uid in net.inputs:
        if uid in has_in:
            out.append(Violation("InputHasIncoming", repr(uid)))
    for uid in net.on_neurons:
        if uid in has_in:
            out.append(Violation("OnNeuronHasIncoming", repr(uid)))
    if net.output in has_out:
        out.append(Violation("OutputHasOutgoing", repr(net.output)))
    for uid in net.units:
        if uid not in has_in:
            out.append(Violation("NoIncomingEdges", repr(uid)))
        if uid != net.output and uid not in has_out:
            out.append(Violation("MultipleOutputs", f"{uid!r} has no outgoing edges besides output {net.output!r}"))

    try:
        net.topological_order()
    except CyclicNetwork as exc:
        out.append(Violation("CyclicNetwork", str(exc)))
    return out


def check_network(net: Network):
    problems = validate(net)
    if not problems:
        return
    msg = "; ".join(str(p) for p in problems)
    if any(p.kind == "CyclicNetwork" for p in problems):
        raise CyclicNetwork(msg)
    raise InvalidNetwork(msg)


# --- the four sub-units ------------------------------------------------------

def eval_summation(incoming: Sequence[tuple[Callable, float, float]], t):
    """Weighted, delayed sum of the incoming value providers at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for provider, weight, delay in incoming:
        total = total + weight * np.asarray(provider(t - delay), dtype=float)
    return total


def _window_nodes(tau: float, quad_step: float) -> tuple[np.ndarray, float]:
    m = max(1, math.ceil(tau / quad_step - 1e-9))
    h = tau / m
    offsets = -tau + h * np.arange(m + 1, dtype=float)
    offsets[0] = -tau
    offsets[-1] = 0.0
    return offsets, h


def _rms_window(y1_fn: Callable, tau: float, times: np.ndarray, quad_step: float) -> np.ndarray:
    # composite trapezoid on a uniform mesh of the trailing window
    offsets, h = _window_nodes(tau, quad_step)
    nodes = times[:, None] + offsets[None, :]
    sq = np.asarray(y1_fn(nodes.ravel()), dtype=float).reshape(nodes.shape) ** 2
    integral = h * (sq.sum(axis=1) - 0.5 * (sq[:, 0] + sq[:, -1]))
    return np.sqrt(integral / tau)


def eval_integration(y1: Callable, tau: Optional[float], t, quad_step: float):
    """Trailing-window RMS of ``y1``; ``tau=None`` passes through, ``tau=0`` is ``|y1|``."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if tau is None:
        out = np.asarray(y1(t_arr), dtype=float)
    elif tau == 0:
        out = np.abs(np.asarray(y1(t_arr), dtype=float))
    else:
        if tau < 0:
            raise ValueError(f"tau must be >= 0, got {tau!r}")
        if not quad_step > 0:
            raise ValueError(f"quad_step must be > 0, got {quad_step!r}")
        out = _rms_window(y1, tau, t_arr, quad_step)
    return out.reshape(np.shape(t)) if np.ndim(t) else float(out[0])


def eval_activation(y2, alpha: Optional[float]):
    if not alpha:
        return y2
    return np.tanh(alpha * np.asarray(y2, dtype=float)) / alpha


def eval_oscillation(y3, omega: float, phi: float, t):
    if omega == 0:
        return y3
    return np.asarray(y3, dtype=float) * np.cos(omega * np.asarray(t, dtype=float) + phi)


# --- network evaluation --------------------------------------------------------

class NetworkEvaluator:
    """Evaluates unit values at arbitrary times, memoising per (unit, times).

    Delayed predecessors are evaluated exactly at ``t - delay`` (input signals
    interpolate), and integration windows evaluate ``y1`` on their quadrature
    nodes, so no intermediate resampling error is introduced.

    ``point_evals`` counts, per computing unit, how many time points were
    actually computed (cache hits excluded).
    """

    def __init__(self, net: Network, inputs: Sequence[Signal], quad_step: float):
        check_network(net)
        if len(inputs) != len(net.inputs):
            raise ArityMismatch(f"network has {len(net.inputs)} inputs, got {len(inputs)} signals")
        if not quad_step > 0:
            raise ValueError(f"quad_step must be > 0, got {quad_step!r}")
        self.net = net
        self.quad_step = float(quad_step)
        self._signals = dict(zip(net.inputs, inputs))
        self._incoming = {u: [e for _, e in net.incoming(u)] for u in net.units}
        self._cache: dict = {}
        self.point_evals = {u: 0 for u in net.units}

    def __call__(self, uid: str, times) -> np.ndarray:
        times = np.ascontiguousarray(times, dtype=float)
        if uid in self._signals:
            return self._signals[uid](times)
        if uid in self.net.on_neurons:
            return np.full(times.shape, float(self.net.on_neurons[uid]))
        key = (uid, times.shape, times.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        val = self._unit(uid, times)
        val.setflags(write=False)
        self._cache[key] = val
        return val

    def _y1(self, uid: str, times: np.ndarray) -> np.ndarray:
        incoming = [(lambda tt, s=e.source: self(s, tt), e.weight, e.delay)
                    for e in self._incoming[uid]]
        return eval_summation(incoming, times)

    def _unit(self, uid: str, times: np.ndarray) -> np.ndarray:
        cfg = self.net.units[uid]
        self.point_evals[uid] += times.size
        flat = times.ravel()
        if cfg.tau is None:
            y2 = self._y1(uid, flat)
        elif cfg.tau == 0:
            y2 = np.abs(self._y1(uid, flat))
        else:
            y2 = _rms_window(lambda tt: self._y1(uid, tt), cfg.tau, flat, self.quad_step)
        y3 = eval_activation(y2, cfg.alpha)
        y4 = eval_oscillation(y3, cfg.omega, cfg.phi, flat)
        return np.array(y4, dtype=float).reshape(times.shape)

    def output(self, times) -> np.ndarray:
        return np.array(self(self.net.output, times))


def evaluate(net: Network, inputs: Sequence[Signal], times, quad_step: float = 0.01) -> np.ndarray:
    """Output-unit values at the given times."""
    return NetworkEvaluator(net, inputs, quad_step).output(np.asarray(times, dtype=float))


def eval_network(net: Network, inputs: Sequence[Signal], grid: TimeGrid,
                 quad_step: Optional[float] = None) -> Signal:
    """Sample the output unit on ``grid``.

    ``quad_step`` defaults to the grid step.
    """
    if not isinstance(grid, TimeGrid):
        grid = TimeGrid(*grid)
    t = grid.points()
    y = evaluate(net, inputs, t, quad_step if quad_step is not None else grid.step)
    return Signal(t, y)
