"""Self-describing snapshot files and columnar exports.

A snapshot is a first line ``VMSIAC-SNAPSHOT 1``, a second line holding a
JSON header (mesh axes, degree, system kind, time, case and the list of
stored arrays with their shapes), then the arrays as raw little-endian
``float64`` bytes in C order, in header order.  Values round-trip bitwise.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dg import Basis, DGField
from .errors import InputError
from .kinetic import SimulationState, SystemKind
from .mesh import AxisSpec, Mesh
from .siac import FilteredSample

MAGIC = "VMSIAC-SNAPSHOT 1"
_DTYPE = np.dtype("<f8")


def _axis_dict(a: AxisSpec) -> dict:
    return {"lo": a.lo, "hi": a.hi, "n_cells": a.n_cells, "periodic": a.periodic}


def _axis(d: dict) -> AxisSpec:
    return AxisSpec(float(d["lo"]), float(d["hi"]), int(d["n_cells"]), bool(d["periodic"]))


def save_snapshot(state: SimulationState, path: str | Path, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mesh = state.f.mesh
    header = {
        "x_axes": [_axis_dict(a) for a in mesh.x_axes],
        "v_axes": [_axis_dict(a) for a in mesh.v_axes],
        "k": state.f.degree,
        "kind": state.kind.value,
        "t": state.t,
        "fields": list(state.kind.field_names),
        "arrays": [["f", list(state.f.coeffs.shape)], ["fields", list(state.fields.coeffs.shape)]],
        "metadata": metadata or {},
    }
    with open(path, "wb") as fh:
        fh.write((MAGIC + "\n").encode())
        fh.write((json.dumps(header) + "\n").encode())
        for arr in (state.f.coeffs, state.fields.coeffs):
            fh.write(np.ascontiguousarray(arr, dtype=_DTYPE).tobytes())
    return path


def read_header(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        if fh.readline().decode(errors="replace").strip() != MAGIC:
            raise InputError(f"{path} is not a snapshot file")
        return json.loads(fh.readline().decode())


def load_snapshot(path: str | Path) -> tuple[SimulationState, dict]:
    """Read a snapshot; returns the state and the stored metadata."""
    with open(path, "rb") as fh:
        if fh.readline().decode(errors="replace").strip() != MAGIC:
            raise InputError(f"{path} is not a snapshot file")
        header = json.loads(fh.readline().decode())
        arrays = []
        for _, shape in header["arrays"]:
            count = int(np.prod(shape))
            data = np.frombuffer(fh.read(count * _DTYPE.itemsize), dtype=_DTYPE)
            if data.size != count:
                raise InputError(f"{path} is truncated")
            arrays.append(data.reshape(shape).astype(float))
    mesh = Mesh(tuple(_axis(a) for a in header["x_axes"]), tuple(_axis(a) for a in header["v_axes"]))
    k = int(header["k"])
    f = DGField(mesh, Basis(k, mesh.dim), arrays[0])
    xm = mesh.x_mesh()
    fields = DGField(xm, Basis(k, xm.dim), arrays[1])
    state = SimulationState(f, fields, float(header["t"]), SystemKind(header["kind"]))
    return state, header.get("metadata", {})


def export_sample(sample: FilteredSample, path: str | Path, names: list[str] | None = None) -> Path:
    """Write a filtered (or plain) sample as whitespace-separated columns.

    Columns are the physical coordinates followed by one column per
    component; rows run over the tensor grid with the last axis fastest.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = sample.mesh.dim
    axes = [sample.axis_coordinates(a).reshape(-1) for a in range(dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    ncomp = sample.values.shape[0]
    # (ncomp, n0, q0, n1, q1, ...) -> (ncomp, n0*q0, n1*q1, ...)
    vals = sample.values.reshape((ncomp,) + tuple(a.size for a in axes))
    names = names or [f"u{c}" for c in range(ncomp)]
    coord_names = ["x"] + [f"v{a}" for a in range(1, dim)] if dim > 1 else ["x"]
    cols = [g.reshape(-1) for g in grids] + [vals[c].reshape(-1) for c in range(ncomp)]
    np.savetxt(path, np.column_stack(cols), header=" ".join(coord_names + list(names)), fmt="%.16e")
    return path
