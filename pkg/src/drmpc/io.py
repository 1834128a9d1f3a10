"""JSON documents for instances, designs (gains plus tightened sets) and QPs.

Floats go through ``json``'s shortest round-trip repr, so a load of a dump
reproduces every array bit for bit and two dumps of equal objects are equal
byte strings.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .deadbeat import DeadbeatPolicy
from .errors import DimensionError
from .linsys import LinearSystem, ProblemInstance
from .polytope import HPolyhedron
from .tightening import TightenedSequences

FORMAT_VERSION = 1


def _poly(P: HPolyhedron) -> dict:
    return {"G": P.G.tolist(), "h": P.h.tolist()}


def _load_poly(d: dict) -> HPolyhedron:
    return HPolyhedron(np.array(d["G"], dtype=float), np.array(d["h"], dtype=float))


def _matrix(rows, name: str) -> np.ndarray:
    a = np.array(rows, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be a matrix")
    return a


def instance_to_dict(inst: ProblemInstance) -> dict:
    return {
        "format": FORMAT_VERSION,
        "n": inst.n,
        "m": inst.m,
        "seed": inst.seed,
        "A": inst.sys.A.tolist(),
        "B": inst.sys.B.tolist(),
        "U": _poly(inst.U),
        "X": _poly(inst.X),
        "D": _poly(inst.D),
    }


def instance_from_dict(d: dict) -> ProblemInstance:
    try:
        sys = LinearSystem(_matrix(d["A"], "A"), _matrix(d["B"], "B"))
        inst = ProblemInstance(sys, _load_poly(d["U"]), _load_poly(d["X"]), _load_poly(d["D"]), d.get("seed"))
    except KeyError as exc:
        raise DimensionError(f"instance document lacks field {exc}") from None
    if "n" in d and (d["n"], d["m"]) != (inst.n, inst.m):
        raise DimensionError("declared dimensions disagree with the matrices")
    return inst


def _chain(chain) -> dict:
    # every stage keeps the parent's facet normals; only offsets move
    return {"G": chain[0].G.tolist(), "h": [P.h.tolist() for P in chain]}


def _load_chain(d: dict) -> list:
    G = np.array(d["G"], dtype=float)
    return [HPolyhedron(G, np.array(h, dtype=float)) for h in d["h"]]


def design_to_dict(policy: DeadbeatPolicy, tight: TightenedSequences) -> dict:
    return {
        "format": FORMAT_VERSION,
        "M": policy.M,
        "N": tight.N,
        "K": [K.tolist() for K in policy.gains],
        "Phi": [P.tolist() for P in policy.aux],
        "residual": policy.residual,
        "cond": policy.cond,
        "lp_count": tight.lp_count,
        "inputs": _chain(tight.input_chain),
        "states": _chain(tight.state_chain),
        "empty_stages": [list(e) for e in tight.empty_stages],
    }


def design_from_dict(d: dict):
    """Inverse of :func:`design_to_dict`: ``(policy, tight)``."""
    gains = [np.array(K, dtype=float) for K in d["K"]]
    aux = [np.array(P, dtype=float) for P in d["Phi"]]
    policy = DeadbeatPolicy(M=int(d["M"]), gains=gains, aux=aux, residual=float(d["residual"]),
                            cond=float(d.get("cond", float("nan"))))
    tight = TightenedSequences(
        _load_chain(d["inputs"]),
        _load_chain(d["states"]),
        int(d["N"]),
        int(d.get("lp_count", 0)),
        tuple(tuple(e) for e in d.get("empty_stages", ())),
    )
    if tight.M != policy.M:
        raise DimensionError("set chains do not match the deadbeat horizon")
    return policy, tight


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=True) + "\n"


def write_json(doc: Any, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(doc))


def read_json(path) -> Any:
    with open(path) as fh:
        return json.load(fh)
