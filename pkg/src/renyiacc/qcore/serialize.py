"""JSON formats for states.

Dense state (schema ``renyiacc/state/v1``)::

    {"schema": "renyiacc/state/v1", "dims": [2, 2], "labels": ["A", "B"],
     "matrix": [[re, im], ...]}        # row-major, len = (prod dims)^2

Cq-state (schema ``renyiacc/cqstate/v1``) nests one dense block per classical
outcome tuple::

    {"schema": "renyiacc/cqstate/v1",
     "registers": [{"kind": "classical", "name": "B", "alphabet": ["0", "1"]},
                   {"kind": "quantum", "name": "E", "dim": 2}],
     "entries": [{"outcome": ["0"], "weight": 0.5, "matrix": [[re, im], ...]},
                 ...]}
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import BadShapeError
from .states import CqState, DensityOperator, creg, qreg

STATE_SCHEMA = "renyiacc/state/v1"
CQSTATE_SCHEMA = "renyiacc/cqstate/v1"


def matrix_to_json(m) -> list:
    a = np.asarray(m, dtype=complex).reshape(-1)
    return [[float(x.real), float(x.imag)] for x in a]


def matrix_from_json(pairs, d: int) -> np.ndarray:
    a = np.asarray(pairs, dtype=float)
    if a.shape != (d * d, 2):
        raise BadShapeError(f"matrix payload has shape {a.shape}, want ({d*d}, 2)")
    return (a[:, 0] + 1j * a[:, 1]).reshape(d, d)


def density_to_dict(rho: DensityOperator) -> dict:
    return {
        "schema": STATE_SCHEMA,
        "dims": list(rho.dims),
        "labels": list(rho.labels),
        "matrix": matrix_to_json(rho.matrix),
    }


def density_from_dict(doc: dict) -> DensityOperator:
    dims = tuple(int(x) for x in doc["dims"])
    d = int(np.prod(dims, initial=1))
    return DensityOperator(matrix_from_json(doc["matrix"], d), dims,
                           tuple(doc.get("labels") or ()))


def cq_to_dict(state: CqState) -> dict:
    regs = []
    for r in state.regs:
        if r.is_classical:
            regs.append({"kind": "classical", "name": r.name,
                         "alphabet": [str(a) for a in r.alphabet]})
        else:
            regs.append({"kind": "quantum", "name": r.name, "dim": r.dim})
    entries = []
    for _, out, p, c in state.outcomes():
        if c is None:
            continue
        entries.append({"outcome": [str(o) for o in out], "weight": p,
                        "matrix": matrix_to_json(c)})
    return {"schema": CQSTATE_SCHEMA, "registers": regs, "entries": entries}


def cq_from_dict(doc: dict) -> CqState:
    regs = []
    for r in doc["registers"]:
        if r["kind"] == "classical":
            regs.append(creg(r["name"], tuple(r["alphabet"])))
        elif r["kind"] == "quantum":
            regs.append(qreg(r["name"], int(r["dim"])))
        else:
            raise BadShapeError(f"unknown register kind {r['kind']!r}")
    cregs = [r for r in regs if r.is_classical]
    qdim = int(np.prod([r.dim for r in regs if not r.is_classical], initial=1))
    shape = tuple(len(r.alphabet) for r in cregs)
    w = np.zeros(shape)
    conds = np.empty(shape, dtype=object)
    for e in doc["entries"]:
        idx = tuple(cregs[i].alphabet.index(o)
                    for i, o in enumerate(e["outcome"]))
        w[idx] = float(e["weight"])
        conds[idx] = matrix_from_json(e["matrix"], qdim)
    return CqState(regs, w, conds)


def load_state(path: str):
    """Load either schema; returns DensityOperator or CqState."""
    with open(path) as fh:
        doc = json.load(fh)
    return state_from_dict(doc)


def state_from_dict(doc: dict):
    schema = doc.get("schema", "")
    if schema == STATE_SCHEMA:
        return density_from_dict(doc)
    if schema == CQSTATE_SCHEMA:
        return cq_from_dict(doc)
    raise BadShapeError(f"unrecognized state schema {schema!r}")


def dump_state(state, path: str) -> None:
    doc = cq_to_dict(state) if isinstance(state, CqState) else density_to_dict(state)
    with open(path, "w") as fh:
        json.dump(doc, fh)
