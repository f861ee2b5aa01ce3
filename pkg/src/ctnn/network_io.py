"""Network file format (``.ctnn``): a JSON key/value tree.

Layout::

    {
      "format": "ctnn-network", "version": 1,
      "units":      [{"id": "u", "tau": "off" | float, "alpha": "off" | float,
                      "omega": float, "phi": float}, ...],
      "on_neurons": [{"id": "bias", "c": float}, ...],
      "inputs":     ["x1", ...],
      "output":     "u",
      "edges":      [{"source": "x1", "target": "u", "weight": float, "delay": float}, ...]
    }

Floats are written with ``repr`` so load/save is lossless.
"""

from __future__ import annotations

import json

from .core import Edge, Network, UnitConfig
from .errors import FileFormatError

FORMAT = "ctnn-network"


def _off(v):
    return "off" if v is None else float(v)


def _on(v, what):
    if v == "off" or v is None:
        return None
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{what}: expected number or 'off', got {v!r}") from exc


def network_to_dict(net: Network) -> dict:
    return {
        "format": FORMAT,
        "version": 1,
        "units": [
            {"id": uid, "tau": _off(c.tau), "alpha": _off(c.alpha),
             "omega": float(c.omega), "phi": float(c.phi)}
            for uid, c in net.units.items()
        ],
        "on_neurons": [{"id": uid, "c": float(c)} for uid, c in net.on_neurons.items()],
        "inputs": list(net.inputs),
        "output": net.output,
        "edges": [
            {"source": e.source, "target": e.target, "weight": float(e.weight), "delay": float(e.delay)}
            for e in net.edges
        ],
    }


def network_from_dict(d: dict) -> Network:
    if d.get("format", FORMAT) != FORMAT:
        raise FileFormatError(f"not a network file (format={d.get('format')!r})")
    try:
        units = {
            u["id"]: UnitConfig(
                tau=_on(u.get("tau", "off"), f"unit {u['id']} tau"),
                alpha=_on(u.get("alpha", 1.0), f"unit {u['id']} alpha"),
                omega=float(u.get("omega", 0.0)),
                phi=float(u.get("phi", 0.0)),
            )
            for u in d["units"]
        }
        on = {o["id"]: float(o["c"]) for o in d.get("on_neurons", [])}
        edges = [Edge(e["source"], e["target"], float(e["weight"]), float(e.get("delay", 0.0)))
                 for e in d.get("edges", [])]
        return Network(units=units, inputs=list(d.get("inputs", [])), output=d["output"],
                       edges=edges, on_neurons=on)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"malformed network: {exc!r}") from exc


def dumps(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def loads(text: str) -> Network:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"network file is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise FileFormatError("network file must hold a JSON object")
    return network_from_dict(d)


def load_network(path) -> Network:
    with open(path) as fh:
        return loads(fh.read())


def save_network(net: Network, path):
    with open(path, "w") as fh:
        fh.write(dumps(net))
