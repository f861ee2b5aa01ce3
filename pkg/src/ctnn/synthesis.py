"""Compiling target behaviours into networks.

Two demonstrators live here:

* the sawtooth trajectory of a robot arm that is raised linearly to height
  ``h`` over ``T`` seconds and dropped instantly, written as the truncated
  Fourier series ``h/2 - h/pi * sum_{k<=n} sin(2*pi*k*t/T) / k`` and realised
  by ``n`` oscillating units fed from one on-neuron;
* single-unit logic gates with sinusoidal activation ``c*sin(a*x + b)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Edge, Network, UnitConfig
from .errors import ArityMismatch, InvalidSpec, NonBooleanInput


@dataclass(frozen=True)
class SawtoothSpec:
    h: float
    T: float
    n: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidSpec(f"h must be > 0, got {self.h!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidSpec(f"T must be > 0, got {self.T!r}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpec(f"n must be a positive integer, got {self.n!r}")


def build_sawtooth_network(spec: SawtoothSpec) -> Network:
    """n oscillators ``osc1..oscn`` plus a summing output unit ``out``.

    Oscillator k receives the on-neuron through weight ``-h/(pi*k)`` and
    oscillates at ``2*pi*k/T`` with phase ``-pi/2`` (a sine).  The output adds
    ``h/2`` from the on-neuron.  No inputs are needed.
    """
    h, T, n = float(spec.h), float(spec.T), int(spec.n)
    units = {}
    edges = []
    for k in range(1, n + 1):
        uid = f"osc{k}"
        units[uid] = UnitConfig(tau=None, alpha=None, omega=2 * math.pi * k / T, phi=-math.pi / 2)
        edges.append(Edge("on", uid, -h / (math.pi * k)))
    units["out"] = UnitConfig(tau=None, alpha=None, omega=0.0)
    edges.append(Edge("on", "out", h / 2))
    edges.extend(Edge(f"osc{k}", "out", 1.0) for k in range(1, n + 1))
    return Network(units=units, inputs=(), output="out", edges=edges, on_neurons={"on": 1.0})


def sawtooth_partial_sum(t, spec: SawtoothSpec):
    """Closed-form truncated series, independent of the network path."""
    t = np.asarray(t, dtype=float)
    k = np.arange(1, int(spec.n) + 1, dtype=float)
    terms = np.sin(2 * np.pi * np.multiply.outer(t, k) / spec.T) / k
    return spec.h / 2 - spec.h / np.pi * terms.sum(axis=-1)


def ideal_sawtooth(t, h: float, T: float):
    return h * np.mod(np.asarray(t, dtype=float), T) / T


# --- Fourier logic gates -----------------------------------------------------

@dataclass(frozen=True)
class FourierLogicGate:
    """Single unit computing ``c * sin(a * sum(inputs) + b)``; true=+1, false=-1."""

    name: str
    arity: int
    a: float
    b: float
    c: float

    def __call__(self, inputs: Sequence[float]) -> float:
        return eval_fourier_gate(self, inputs)


def eval_fourier_gate(gate: FourierLogicGate, inputs: Sequence[float]) -> float:
    if len(inputs) != gate.arity:
        raise ArityMismatch(f"{gate.name} takes {gate.arity} inputs, got {len(inputs)}")
    for x in inputs:
        if x not in (1, -1):
            raise NonBooleanInput(f"inputs must be +1 or -1, got {x!r}")
    return gate.c * math.sin(gate.a * float(sum(inputs)) + gate.b)


def odd_gate(n: int) -> FourierLogicGate:
    if n < 1:
        raise InvalidSpec(f"ODD needs n >= 1, got {n}")
    return FourierLogicGate("ODD", n, math.pi / 2, (n - 1) * math.pi / 2, 1.0)


AND = FourierLogicGate("AND", 2, math.pi / 4, -math.pi / 4, math.sqrt(2))
# XOR preset as tabulated, b = -pi/2; under the +1/-1 encoding this computes XNOR.
XOR_AS_PRINTED = FourierLogicGate("XOR", 2, math.pi / 2, -math.pi / 2, 1.0)
# b flipped to +pi/2 gives true XOR; identical to odd_gate(2).
XOR_CORRECTED = FourierLogicGate("XOR_CORRECTED", 2, math.pi / 2, math.pi / 2, 1.0)


def gate_table(odd_arity: int = 2) -> list[FourierLogicGate]:
    """The AND, XOR and ODD presets, with ODD instantiated for ``odd_arity`` inputs."""
    return [AND, XOR_AS_PRINTED, odd_gate(odd_arity)]


def truth_table(gate: FourierLogicGate) -> list[tuple[tuple[int, ...], float]]:
    """All ``2**arity`` assignments, first input varying slowest, true first."""
    return [(xs, eval_fourier_gate(gate, xs))
            for xs in itertools.product((1, -1), repeat=gate.arity)]


def gates_to_csv(gates: Sequence[FourierLogicGate]) -> str:
    lines = ["name,arity,a,b,c"]
    lines += [f"{g.name},{g.arity},{g.a:.17g},{g.b:.17g},{g.c:.17g}" for g in gates]
    return "\n".join(lines) + "\n"
