"""Gradient-descent fitting of network parameters to sampled data.

The error is ``E = 1/2 * sum_k (target(t_k) - y(t_k))**2``.  Gradients are
central finite differences for every trainable parameter; for networks
without delays or integration an analytic back-propagated weight gradient
is available as an independent check.

Parameters are addressed by name:

``w[i]`` / ``delay[i]``
    weight / delay of ``net.edges[i]``
``tau[u]`` / ``alpha[u]`` / ``omega[u]`` / ``phi[u]``
    sub-unit parameters of computing unit ``u``
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._parallel import pmap
from .core import Network, check_network, evaluate
from .errors import Diverged
from .signal import Signal

EDGE_PARAMS = ("w", "delay")
UNIT_PARAMS = ("tau", "alpha", "omega", "phi")
NONNEGATIVE = ("delay", "tau", "alpha")
DIVERGENCE_LIMIT = 1e12

_NAME = re.compile(r"^(\w+)\[(.+)\]$")


@dataclass
class Dataset:
    inputs: Sequence[Signal]
    target: Signal
    sample_times: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.sample_times is None:
            self.sample_times = np.array(self.target.times)
        self.sample_times = np.asarray(self.sample_times, dtype=float).ravel()
        if self.sample_times.size == 0:
            raise ValueError("dataset needs at least one sample time")
        lo, hi = self.target.span
        if np.any(self.sample_times < lo) or np.any(self.sample_times > hi):
            raise ValueError("sample times must lie within the target's span")

    @property
    def targets(self) -> np.ndarray:
        return self.target(self.sample_times)


@dataclass
class TrainConfig:
    """Optimiser settings.

    ``fd_step`` is either one step for every parameter or a mapping from
    parameter name or kind (``"w"``, ``"omega"``...) to a step.
    """

    eta: float = 0.01
    max_iters: int = 100
    fd_step: Union[float, dict] = 1e-6
    param_mask: tuple = ("w",)
    tol: float = 0.0
    quad_step: float = 0.01
    threads: Optional[int] = None

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta!r}")
        steps = self.fd_step.values() if isinstance(self.fd_step, dict) else [self.fd_step]
        if not all(s > 0 for s in steps):
            raise ValueError("fd_step must be > 0")
        bad = set(self.param_mask) - set(EDGE_PARAMS + UNIT_PARAMS)
        if bad:
            raise ValueError(f"unknown parameter kinds {sorted(bad)}")

    def step_for(self, name: str) -> float:
        if not isinstance(self.fd_step, dict):
            return float(self.fd_step)
        if name in self.fd_step:
            return float(self.fd_step[name])
        return float(self.fd_step.get(_NAME.match(name).group(1), 1e-6))


# --- parameter addressing ------------------------------------------------------

def parameter_names(net: Network, mask: Sequence[str] = EDGE_PARAMS + UNIT_PARAMS) -> list[str]:
    """Trainable parameter names in a fixed order.

    Switched-off ``tau``/``alpha`` stages are not parameters.
    """
    names = []
    for i in range(len(net.edges)):
        names += [f"{k}[{i}]" for k in EDGE_PARAMS if k in mask]
    for uid, cfg in net.units.items():
        for k in UNIT_PARAMS:
            if k not in mask:
                continue
            if k in ("tau", "alpha") and getattr(cfg, k) is None:
                continue
            names.append(f"{k}[{uid}]")
    return names


def _split(name: str) -> tuple[str, str]:
    m = _NAME.match(name)
    if not m:
        raise KeyError(f"bad parameter name {name!r}")
    return m.group(1), m.group(2)


def get_param(net: Network, name: str) -> float:
    kind, key = _split(name)
    if kind in EDGE_PARAMS:
        e = net.edges[int(key)]
        return e.weight if kind == "w" else e.delay
    if kind in UNIT_PARAMS:
        v = getattr(net.units[key], kind)
        if v is None:
            raise KeyError(f"{name} is switched off")
        return float(v)
    raise KeyError(f"unknown parameter kind in {name!r}")


def set_params(net: Network, values: dict) -> Network:
    """Copy of ``net`` with the named parameters replaced."""
    edges = list(net.edges)
    units = dict(net.units)
    for name, v in values.items():
        kind, key = _split(name)
        v = float(v)
        if kind == "w":
            edges[int(key)] = dataclasses.replace(edges[int(key)], weight=v)
        elif kind == "delay":
            edges[int(key)] = dataclasses.replace(edges[int(key)], delay=v)
        elif kind in UNIT_PARAMS:
            units[key] = dataclasses.replace(units[key], **{kind: v})
        else:
            raise KeyError(f"unknown parameter kind in {name!r}")
    return dataclasses.replace(net, units=units, edges=tuple(edges))


# --- error and gradients -------------------------------------------------------

def predict(net: Network, data: Dataset, quad_step: float = 0.01) -> np.ndarray:
    return evaluate(net, data.inputs, data.sample_times, quad_step)


def error(net: Network, data: Dataset, quad_step: float = 0.01) -> float:
    r = data.targets - predict(net, data, quad_step)
    return 0.5 * float(np.dot(r, r))


def gradient(net: Network, data: Dataset, cfg: TrainConfig,
             names: Optional[Sequence[str]] = None) -> dict:
    """Central finite-difference gradient of ``error`` for the masked parameters.

    Parameters bounded below by zero fall back to a forward difference when the
    backward probe would go negative.
    """
    check_network(net)
    if names is None:
        names = parameter_names(net, cfg.param_mask)

    def one(name):
        z = get_param(net, name)
        h = cfg.step_for(name)
        kind, _ = _split(name)
        hi = error(set_params(net, {name: z + h}), data, cfg.quad_step)
        if kind in NONNEGATIVE and z - h < 0:
            return (hi - error(net, data, cfg.quad_step)) / h
        lo = error(set_params(net, {name: z - h}), data, cfg.quad_step)
        return (hi - lo) / (2 * h)

    vals = pmap(one, names, cfg.threads)
    return dict(zip(names, vals))


def analytic_weight_gradient(net: Network, data: Dataset) -> dict:
    """Back-propagated ``dE/dw`` for networks with no delays and integration off."""
    check_network(net)
    for i, e in enumerate(net.edges):
        if e.delay != 0:
            raise ValueError(f"edge {i} has a delay; analytic gradient needs delay 0")
    for uid, cfg in net.units.items():
        if cfg.tau is not None:
            raise ValueError(f"unit {uid!r} integrates; analytic gradient needs tau off")

    t = data.sample_times
    val = {u: s(t) for u, s in zip(net.inputs, data.inputs)}
    val.update({u: np.full(t.shape, float(c)) for u, c in net.on_neurons.items()})
    order = net.topological_order()
    incoming = {u: net.incoming(u) for u in order}
    slope, carrier = {}, {}
    for u in order:
        cfg = net.units[u]
        y1 = sum((e.weight * val[e.source] for _, e in incoming[u]), np.zeros_like(t))
        if cfg.alpha:
            th = np.tanh(cfg.alpha * y1)
            y3 = th / cfg.alpha
            slope[u] = 1 - th * th
        else:
            y3 = y1
            slope[u] = np.ones_like(t)
        carrier[u] = np.cos(cfg.omega * t + cfg.phi) if cfg.omega != 0 else np.ones_like(t)
        val[u] = y3 * carrier[u]

    grad_out = {u: np.zeros_like(t) for u in order}
    grad_out[net.output] = val[net.output] - data.targets
    dw = {}
    for u in reversed(order):
        g1 = grad_out[u] * carrier[u] * slope[u]
        for i, e in incoming[u]:
            dw[f"w[{i}]"] = float(np.dot(g1, val[e.source]))
            if e.source in grad_out:
                grad_out[e.source] = grad_out[e.source] + e.weight * g1
    return {f"w[{i}]": dw[f"w[{i}]"] for i in range(len(net.edges))}


@dataclass
class GradientEntry:
    name: str
    fd: float
    analytic: float
    rel_error: float
    flagged: bool


@dataclass
class GradientReport:
    entries: list = field(default_factory=list)
    threshold: float = 1e-4

    @property
    def ok(self) -> bool:
        return not any(e.flagged for e in self.entries)

    @property
    def max_rel_error(self) -> float:
        return max((e.rel_error for e in self.entries), default=0.0)


def gradient_check(net: Network, data: Dataset, analytic: dict, cfg: TrainConfig,
                   threshold: float = 1e-4) -> GradientReport:
    """Compare finite differences against supplied gradients.

    Relative error is ``|fd - analytic| / max(1, |analytic|)``.
    """
    fd = gradient(net, data, cfg, names=list(analytic))
    report = GradientReport(threshold=threshold)
    for name, g_an in analytic.items():
        rel = abs(fd[name] - g_an) / max(1.0, abs(g_an))
        report.entries.append(GradientEntry(name, fd[name], float(g_an), rel, rel > threshold))
    return report


# --- optimisation --------------------------------------------------------------

def _clamp(net: Network, names: Sequence[str]) -> Network:
    fixes = {}
    for name in names:
        kind, _ = _split(name)
        if kind in NONNEGATIVE and get_param(net, name) < 0:
            fixes[name] = 0.0
    return set_params(net, fixes) if fixes else net


def train_step(net: Network, data: Dataset, cfg: TrainConfig, eta: Optional[float] = None) -> Network:
    names = parameter_names(net, cfg.param_mask)
    g = gradient(net, data, cfg, names)
    eta = cfg.eta if eta is None else eta
    updated = set_params(net, {n: get_param(net, n) - eta * g[n] for n in names})
    return _clamp(updated, names)


def train(net: Network, data: Dataset, cfg: TrainConfig) -> tuple[Network, list[float]]:
    """Batch gradient descent ``z <- z - eta * dE/dz``.

    Stops once ``E <= cfg.tol`` or after ``cfg.max_iters`` updates.  The trace
    holds E before the first update and after each one.

    Raises:
        Diverged: E became non-finite or exceeded 1e12.
    """
    check_network(net)
    E = error(net, data, cfg.quad_step)
    trace = [E]
    for _ in range(cfg.max_iters):
        if E <= cfg.tol:
            break
        net = train_step(net, data, cfg)
        E = error(net, data, cfg.quad_step)
        trace.append(E)
        if not math.isfinite(E) or E > DIVERGENCE_LIMIT:
            raise Diverged(f"error reached {E!r} after {len(trace) - 1} iterations")
    return net, trace
