"""Linear hybrid automata with exact event times.

Every state assigns a constant rate to each variable, so trajectories are
piecewise linear and the instant an invariant stops holding can be computed
in closed form.  At that instant exactly one transition must be enabled; its
reset is applied in zero time.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import Blocked, FileFormatError, NondeterministicChoice, UnknownVariable
from .signal import Signal, fmt

OPS = ("<=", ">=", "==", "<", ">")
RESET_EPS = 1e-9
_GUARD_TOL = 1e-9
_MAX_ZERO_TIME_JUMPS = 1000

_OP_RE = re.compile(r"(<=|>=|==|<|>)")
_IDENT = re.compile(r"[A-Za-z_]\w*")


def _parse_linear(expr: str) -> tuple[dict, float]:
    """``"2*h - x + 3"`` -> ({"h": 2, "x": -1}, 3)."""
    s = expr.replace(" ", "")
    if not s:
        raise ValueError("empty expression")
    coeffs: dict[str, float] = {}
    const = 0.0
    for term in re.split(r"(?<![eE])(?=[+-])", s):
        if term in ("", "+", "-"):
            if term:
                raise ValueError(f"dangling sign in {expr!r}")
            continue
        sign = -1.0 if term[0] == "-" else 1.0
        body = term.lstrip("+-")
        try:
            const += sign * float(body)
            continue
        except ValueError:
            pass
        m = _IDENT.search(body)
        if m is None:
            raise ValueError(f"cannot parse term {term!r}")
        name = m.group(0)
        if m.end() != len(body):
            raise ValueError(f"cannot parse term {term!r}")
        num = body[:m.start()].rstrip("*")
        coef = float(num) if num else 1.0
        coeffs[name] = coeffs.get(name, 0.0) + sign * coef
    return coeffs, const


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coeffs[v] * v) op rhs``."""

    coeffs: dict
    op: str
    rhs: float

    @classmethod
    def parse(cls, text: str) -> "LinearConstraint":
        parts = _OP_RE.split(text)
        if len(parts) != 3:
            raise ValueError(f"constraint needs exactly one comparison: {text!r}")
        (lc, lk), op, (rc, rk) = _parse_linear(parts[0]), parts[1], _parse_linear(parts[2])
        coeffs = dict(lc)
        for k, v in rc.items():
            coeffs[k] = coeffs.get(k, 0.0) - v
        return cls({k: v for k, v in coeffs.items() if v != 0}, op, rk - lk)

    def __str__(self):
        lhs = ""
        for v, a in self.coeffs.items():
            sign = "-" if a < 0 else "+"
            lhs += f" {sign} {fmt(abs(a))}*{v}" if lhs else f"{'-' if a < 0 else ''}{fmt(abs(a))}*{v}"
        return f"{lhs or '0'} {self.op} {fmt(self.rhs)}"

    @property
    def variables(self) -> set:
        return set(self.coeffs)

    def lhs(self, values: dict) -> float:
        return sum(a * values[v] for v, a in self.coeffs.items())

    def holds(self, values: dict, tol: float = 0.0) -> bool:
        x, b = self.lhs(values), self.rhs
        slack = tol * max(1.0, abs(b))
        if self.op == "<=":
            return x <= b + slack
        if self.op == ">=":
            return x >= b - slack
        if self.op == "<":
            return x < b + slack
        if self.op == ">":
            return x > b - slack
        return abs(x - b) <= slack

    def upper_form(self) -> list[tuple[dict, float]]:
        """Equivalent list of ``a.v <= b`` bounds (strictness dropped)."""
        neg = {v: -a for v, a in self.coeffs.items()}
        if self.op in ("<=", "<"):
            return [(self.coeffs, self.rhs)]
        if self.op in (">=", ">"):
            return [(neg, -self.rhs)]
        return [(self.coeffs, self.rhs), (neg, -self.rhs)]


def _constraints(spec) -> tuple:
    if spec is None:
        return ()
    if isinstance(spec, (str, LinearConstraint)):
        spec = [spec]
    return tuple(c if isinstance(c, LinearConstraint) else LinearConstraint.parse(c) for c in spec)


@dataclass(frozen=True)
class State:
    id: str
    flow: dict = field(default_factory=dict)
    invariant: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "invariant", _constraints(self.invariant))


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    guard: tuple = ()
    reset: dict = field(default_factory=dict)
    event: str = ""

    def __post_init__(self):
        object.__setattr__(self, "guard", _constraints(self.guard))


@dataclass(frozen=True)
class HybridAutomaton:
    variables: dict
    states: tuple
    transitions: tuple
    initial_state: str

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        ids = [s.id for s in self.states]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate state ids")
        if self.initial_state not in ids:
            raise ValueError(f"initial state {self.initial_state!r} is not declared")
        declared = set(self.variables)
        for s in self.states:
            used = set(s.flow).union(*(c.variables for c in s.invariant))
            if used - declared:
                raise UnknownVariable(f"state {s.id!r} uses undeclared {sorted(used - declared)}")
        for tr in self.transitions:
            if tr.source not in ids or tr.target not in ids:
                raise ValueError(f"transition {tr.source!r}->{tr.target!r} references unknown state")
            used = set(tr.reset).union(*(c.variables for c in tr.guard))
            if used - declared:
                raise UnknownVariable(f"transition {tr.event!r} uses undeclared {sorted(used - declared)}")

    def state(self, sid: str) -> State:
        return next(s for s in self.states if s.id == sid)


@dataclass
class Trajectory:
    """Samples ``(t, state, values)`` with non-decreasing t; a jump appears as
    two samples at the same instant (before and after the reset)."""

    variables: tuple
    samples: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def times(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    def column(self, var: str) -> np.ndarray:
        if var not in self.variables:
            raise UnknownVariable(f"no variable {var!r}; have {list(self.variables)}")
        return np.array([s[2][var] for s in self.samples])


def robot_arm_automaton(h_max: float = 1.0, T: float = 1.0) -> HybridAutomaton:
    """Arm raised at constant speed to ``h_max`` in ``T`` seconds, then lowered in zero time."""
    return HybridAutomaton(
        variables={"h": 0.0},
        states=[State("raise", flow={"h": h_max / T}, invariant=[f"h <= {h_max!r}"])],
        transitions=[Transition("raise", "raise", guard=[f"h >= {h_max!r}"], reset={"h": 0.0},
                                event="lower")],
        initial_state="raise",
    )


def _time_to_exit(state: State, values: dict) -> float:
    best = math.inf
    for c in state.invariant:
        for coeffs, b in c.upper_form():
            rate = sum(a * state.flow.get(v, 0.0) for v, a in coeffs.items())
            if rate > 0:
                x = sum(a * values[v] for v, a in coeffs.items())
                best = min(best, max(0.0, (b - x) / rate))
    return best


def simulate(ha: HybridAutomaton, t_end: float, step: float) -> Trajectory:
    """Run from t=0 to ``t_end``, sampling on the ``step`` grid plus every event.

    Raises:
        Blocked: an invariant fails and no transition is enabled.
        NondeterministicChoice: more than one transition is enabled.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be > 0, got {t_end!r}")
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step!r}")
    grid = step * np.arange(int(math.floor(t_end / step + 1e-9)) + 1, dtype=float)
    traj = Trajectory(variables=tuple(ha.variables))
    sid = ha.initial_state
    vals = {k: float(v) for k, v in ha.variables.items()}
    t = 0.0
    gi = 0
    zero_time_jumps = 0

    def record(tt, s, v):
        if traj.samples and traj.samples[-1][0] == tt and traj.samples[-1][1] == s \
                and traj.samples[-1][2] == v:
            return
        traj.samples.append((tt, s, dict(v)))

    while True:
        state = ha.state(sid)
        seg_t, seg_v = t, dict(vals)

        def at(tt):
            return {k: seg_v[k] + state.flow.get(k, 0.0) * (tt - seg_t) for k in seg_v}

        inside = all(c.holds(seg_v, _GUARD_TOL) for c in state.invariant)
        dt = _time_to_exit(state, seg_v) if inside else 0.0
        t_exit = seg_t + dt
        record(seg_t, sid, seg_v)
        while gi < grid.size and grid[gi] <= min(t_exit, t_end):
            if grid[gi] >= seg_t:
                record(float(grid[gi]), sid, at(float(grid[gi])))
            gi += 1
        if t_exit > t_end:
            if not traj.samples or traj.samples[-1][0] < t_end:
                record(float(t_end), sid, at(float(t_end)))
            break

        vals = at(t_exit)
        record(t_exit, sid, vals)
        enabled = [tr for tr in ha.transitions
                   if tr.source == sid and all(g.holds(vals, _GUARD_TOL) for g in tr.guard)]
        if not enabled:
            raise Blocked(f"state {sid!r} invariant ends at t={t_exit!r} with no enabled transition")
        if len(enabled) > 1:
            raise NondeterministicChoice(
                f"t={t_exit!r}: {len(enabled)} transitions enabled from {sid!r}: "
                + ", ".join(tr.event or f"{tr.source}->{tr.target}" for tr in enabled))
        tr = enabled[0]
        zero_time_jumps = zero_time_jumps + 1 if dt == 0 else 0
        if zero_time_jumps > _MAX_ZERO_TIME_JUMPS:
            raise Blocked(f"more than {_MAX_ZERO_TIME_JUMPS} jumps at t={t_exit!r} without time passing")
        vals = {**vals, **{k: float(v) for k, v in tr.reset.items()}}
        sid = tr.target
        t = t_exit
        traj.events.append((t_exit, tr.event))
        traj.samples.append((t_exit, sid, dict(vals)))
    return traj


def to_signal(traj: Trajectory, variable: str) -> Signal:
    """Time series of one variable.

    At a jump the pre-reset value keeps the event time and the post-reset value
    is placed ``RESET_EPS`` seconds later; samples that would then be out of
    order are dropped.
    """
    col = traj.column(variable)
    ts, vs = [], []
    prev = None
    for (t, _, _), v in zip(traj.samples, col):
        t_use = ts[-1] + RESET_EPS if ts and t == prev else t
        prev = t
        if ts and t_use <= ts[-1]:
            continue
        ts.append(t_use)
        vs.append(float(v))
    return Signal(ts, vs)


# --- file formats ---------------------------------------------------------------

def automaton_to_dict(ha: HybridAutomaton) -> dict:
    return {
        "format": "ctnn-hybrid",
        "version": 1,
        "variables": {k: float(v) for k, v in ha.variables.items()},
        "initial_state": ha.initial_state,
        "states": [{"id": s.id, "flow": dict(s.flow), "invariant": [str(c) for c in s.invariant]}
                   for s in ha.states],
        "transitions": [{"from": tr.source, "to": tr.target, "guard": [str(g) for g in tr.guard],
                         "reset": dict(tr.reset), "event": tr.event} for tr in ha.transitions],
    }


def automaton_from_dict(d: dict) -> HybridAutomaton:
    try:
        return HybridAutomaton(
            variables={k: float(v) for k, v in d["variables"].items()},
            states=[State(s["id"], {k: float(v) for k, v in s.get("flow", {}).items()},
                          s.get("invariant", ())) for s in d["states"]],
            transitions=[Transition(tr["from"], tr["to"], tr.get("guard", ()),
                                    {k: float(v) for k, v in tr.get("reset", {}).items()},
                                    tr.get("event", "")) for tr in d.get("transitions", [])],
            initial_state=d["initial_state"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"malformed automaton: {exc!r}") from exc


def load_automaton(path) -> HybridAutomaton:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: {exc}") from exc
    return automaton_from_dict(d)


def dumps_automaton(ha: HybridAutomaton) -> str:
    return json.dumps(automaton_to_dict(ha), indent=2) + "\n"


def trajectory_csv(traj: Trajectory) -> str:
    lines = [",".join(["t", "state", *traj.variables])]
    for t, s, v in traj.samples:
        lines.append(",".join([fmt(t), s, *(fmt(v[k]) for k in traj.variables)]))
    return "\n".join(lines) + "\n"


def events_csv(traj: Trajectory) -> str:
    return "\n".join(["t,event", *(f"{fmt(t)},{e}" for t, e in traj.events)]) + "\n"
