"""``ctnn`` command line.

Exit status: 0 success, 1 usage error (bad flag, missing file), 2 compute error.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
import tempfile

from . import hybrid, network_io, synthesis
from .core import eval_network
from .errors import CTNNError
from .periodicity import scan_periods
from .signal import TimeGrid, fmt, read_csv, write_csv
from .training import Dataset, TrainConfig, train


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def write_atomic(path: str, text: str):
    """Write via a temp file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _grid(text):
    try:
        return TimeGrid.parse(text)
    except CTNNError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctnn", description="Continuous-time neural network toolkit")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    e = sub.add_parser("eval", help="evaluate a network on a time grid")
    e.add_argument("--net", required=True, help="network file (.ctnn)")
    e.add_argument("--in", dest="inputs", help="input CSV t,x1,...,xn (omit for input-free networks)")
    e.add_argument("--grid", required=True, type=_grid, help="start:end:step")
    e.add_argument("--quad-step", type=_positive, help="quadrature step (default: grid step)")
    e.add_argument("--out", required=True, help="output CSV t,value")

    s = sub.add_parser("synth-sawtooth", help="build the n-harmonic sawtooth network")
    s.add_argument("--h", type=_positive, required=True, help="height")
    s.add_argument("--T", type=_positive, required=True, help="period in seconds")
    s.add_argument("--n", type=_positive_int, required=True, help="number of harmonics")
    s.add_argument("--out", required=True, help="network file to write")

    a = sub.add_parser("analyze-period", help="comb-filter period scan")
    a.add_argument("--in", dest="inputs", required=True, help="signal CSV t,value")
    a.add_argument("--tmin", type=_positive, required=True)
    a.add_argument("--tmax", type=_positive, required=True)
    a.add_argument("--step", type=_positive, required=True)
    a.add_argument("--window", type=_positive, required=True)
    a.add_argument("--quad-step", type=_positive, help="default: signal sample spacing")
    a.add_argument("--t0", type=float, help="window start (default: tmax past first sample)")
    a.add_argument("--out", required=True, help="scan CSV T,E")
    a.add_argument("--minima", help="minima CSV T,E,rank")

    t = sub.add_parser("train", help="gradient-descent training")
    t.add_argument("--net", required=True)
    t.add_argument("--in", dest="inputs", help="input CSV t,x1,...,xn")
    t.add_argument("--target", required=True, help="target CSV t,value; its times are the samples")
    t.add_argument("--eta", type=_positive, default=0.01)
    t.add_argument("--max-iters", type=int, default=100)
    t.add_argument("--fd-step", type=_positive, default=1e-6)
    t.add_argument("--params", default="w", help="comma list from w,delay,tau,alpha,omega,phi")
    t.add_argument("--tol", type=float, default=0.0)
    t.add_argument("--quad-step", type=_positive, default=0.01)
    t.add_argument("--out", required=True, help="trained network file")
    t.add_argument("--trace", help="trace CSV iter,E")

    g = sub.add_parser("logic-demo", help="truth tables of the sinusoidal logic gates")
    g.add_argument("--gate", default="all", choices=["all", "AND", "XOR", "XOR_CORRECTED", "ODD"])
    g.add_argument("--arity", type=_positive_int, default=3, help="inputs for ODD")
    g.add_argument("--out", help="truth-table CSV (default: stdout)")
    g.add_argument("--table", help="gate parameter CSV name,arity,a,b,c")

    h = sub.add_parser("hybrid-sim", help="simulate a linear hybrid automaton")
    h.add_argument("--automaton", help="automaton JSON (default: robot arm)")
    h.add_argument("--hmax", type=_positive, default=1.0, help="robot arm height")
    h.add_argument("--T", type=_positive, default=1.0, help="robot arm period")
    h.add_argument("--t-end", type=_positive, required=True)
    h.add_argument("--step", type=_positive, required=True)
    h.add_argument("--out", required=True, help="trajectory CSV t,state,<vars>")
    h.add_argument("--events", help="events CSV t,event")
    h.add_argument("--signal", help="write one variable as a t,value CSV (see --var)")
    h.add_argument("--var", default="h")
    return p


def _need_file(flag, path):
    if path is not None and not os.path.isfile(path):
        raise UsageError(f"{flag}: no such file {path!r}")


def _need_dir(flag, path):
    if path is None:
        return
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d):
        raise UsageError(f"{flag}: directory {d!r} does not exist")


def _check_paths(args):
    for flag, attr in (("--net", "net"), ("--in", "inputs"), ("--target", "target"),
                       ("--automaton", "automaton")):
        _need_file(flag, getattr(args, attr, None))
    for flag, attr in (("--out", "out"), ("--minima", "minima"), ("--trace", "trace"),
                       ("--table", "table"), ("--events", "events"), ("--signal", "signal")):
        _need_dir(flag, getattr(args, attr, None))


def _signal_csv(t, v) -> str:
    buf = io.StringIO()
    write_csv(buf, t, {"value": v})
    return buf.getvalue()


def _load_inputs(path, n_expected):
    if path is None:
        signals = []
    else:
        _, signals = read_csv(path)
    if len(signals) != n_expected:
        raise UsageError(f"--in: network expects {n_expected} input channels, file has {len(signals)}")
    return signals


def cmd_eval(args):
    net = network_io.load_network(args.net)
    inputs = _load_inputs(args.inputs, len(net.inputs))
    y = eval_network(net, inputs, args.grid, args.quad_step)
    write_atomic(args.out, _signal_csv(y.times, y.values))
    print(f"wrote {len(y)} samples to {args.out}")


def cmd_synth(args):
    net = synthesis.build_sawtooth_network(synthesis.SawtoothSpec(args.h, args.T, args.n))
    write_atomic(args.out, network_io.dumps(net))
    print(f"wrote {len(net.units)}-unit sawtooth network to {args.out}")


def cmd_analyze(args):
    if not args.tmin < args.tmax:
        raise UsageError("--tmin must be smaller than --tmax")
    _, signals = read_csv(args.inputs)
    if len(signals) != 1:
        raise UsageError(f"--in: expected one signal channel, got {len(signals)}")
    scan = scan_periods(signals[0], args.tmin, args.tmax, args.step, args.window,
                        quad_step=args.quad_step, t0=args.t0)
    lines = ["T,E", *(f"{fmt(T)},{fmt(E)}" for T, E in zip(scan.T, scan.E))]
    write_atomic(args.out, "\n".join(lines) + "\n")
    if args.minima:
        lines = ["T,E,rank", *(f"{fmt(T)},{fmt(E)},{r}" for r, (T, E) in enumerate(scan.minima, 1))]
        write_atomic(args.minima, "\n".join(lines) + "\n")
    for r, (T, E) in enumerate(scan.minima[:4], 1):
        print(f"minimum {r}: T={T:.6g} E={E:.6g}")


def cmd_train(args):
    net = network_io.load_network(args.net)
    inputs = _load_inputs(args.inputs, len(net.inputs))
    _, targets = read_csv(args.target)
    if len(targets) != 1:
        raise UsageError(f"--target: expected one channel, got {len(targets)}")
    mask = tuple(p.strip() for p in args.params.split(",") if p.strip())
    try:
        cfg = TrainConfig(eta=args.eta, max_iters=args.max_iters, fd_step=args.fd_step,
                          param_mask=mask, tol=args.tol, quad_step=args.quad_step)
    except ValueError as exc:
        raise UsageError(f"--params: {exc}")
    trained, trace = train(net, Dataset(inputs, targets[0]), cfg)
    write_atomic(args.out, network_io.dumps(trained))
    if args.trace:
        write_atomic(args.trace, "\n".join(["iter,E", *(f"{i},{fmt(E)}" for i, E in enumerate(trace))]) + "\n")
    print(f"E: {trace[0]:.6g} -> {trace[-1]:.6g} in {len(trace) - 1} iterations")


def cmd_logic(args):
    if args.gate == "all":
        gates = [synthesis.AND, synthesis.XOR_AS_PRINTED, synthesis.XOR_CORRECTED,
                 synthesis.odd_gate(args.arity)]
    elif args.gate == "ODD":
        gates = [synthesis.odd_gate(args.arity)]
    else:
        gates = [{"AND": synthesis.AND, "XOR": synthesis.XOR_AS_PRINTED,
                  "XOR_CORRECTED": synthesis.XOR_CORRECTED}[args.gate]]
    lines = ["gate,inputs,output,truth"]
    for g in gates:
        for xs, y in synthesis.truth_table(g):
            assignment = " ".join(f"{x:+d}" for x in xs)
            lines.append(f"{g.name},{assignment},{fmt(y)},{'true' if y > 0 else 'false'}")
    text = "\n".join(lines) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if args.table:
        write_atomic(args.table, synthesis.gates_to_csv(gates))


def cmd_hybrid(args):
    if args.automaton:
        ha = hybrid.load_automaton(args.automaton)
    else:
        ha = hybrid.robot_arm_automaton(args.hmax, args.T)
    traj = hybrid.simulate(ha, args.t_end, args.step)
    sig = hybrid.to_signal(traj, args.var) if args.signal else None
    write_atomic(args.out, hybrid.trajectory_csv(traj))
    if args.events:
        write_atomic(args.events, hybrid.events_csv(traj))
    if sig is not None:
        write_atomic(args.signal, _signal_csv(sig.times, sig.values))
    print(f"{len(traj.events)} events, {len(traj.samples)} samples")


COMMANDS = {
    "eval": cmd_eval,
    "synth-sawtooth": cmd_synth,
    "analyze-period": cmd_analyze,
    "train": cmd_train,
    "logic-demo": cmd_logic,
    "hybrid-sim": cmd_hybrid,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_paths(args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except CTNNError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
