"""Error reports, conserved quantities and convergence tables."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dg import gauss_rule
from .kinetic import SimulationState

NOT_APPLICABLE = "-"


@dataclass
class Conserved:
    mass: float
    l2f: float
    energy: float


def conserved_quantities(state: SimulationState) -> Conserved:
    """Total mass, ``||f_h||`` and total energy of a state.

    ``energy = 1/2 int f |v|^2 + 1/2 int (|E|^2 + |B|^2)``, all integrals
    exact for the piecewise polynomials.
    """
    f = state.f
    mesh = f.mesh
    c = f.coeffs[0]
    jac = mesh.jacobian
    mass = float(c[..., 0].sum() * jac * 2.0 ** (mesh.dim / 2))
    l2f = float(np.sqrt(jac * np.sum(c * c)))

    rule = gauss_rule(f.degree + 3, mesh.dim)
    vals = c @ f.basis.eval(rule.nodes).T  # (*shape, nq)
    v2 = 0.0
    for a, spec in enumerate(mesh.axes[1:], start=1):
        shape = [1] * mesh.dim + [rule.n_points]
        shape[a] = spec.n_cells
        v = (spec.centers[:, None] + 0.5 * spec.width * rule.nodes[None, :, a]).reshape(shape)
        v2 = v2 + v * v
    kinetic = 0.5 * jac * float(np.sum((vals * v2) @ rule.weights))
    fld = 0.5 * state.fields.mesh.jacobian * float(np.sum(state.fields.coeffs ** 2))
    return Conserved(mass, l2f, kinetic + fld)


@dataclass
class QuantityError:
    l2: float
    linf: float
    l2_pp: float | None = None
    linf_pp: float | None = None


@dataclass
class ErrorReport:
    """Errors of one run against the reference solution."""

    case: str
    mesh: str
    k: int
    h: float
    errors: dict[str, QuantityError]
    runtime: float = 0.0
    t_final: float = 0.0
    steps: int = 0
    history: dict[str, list[float]] = field(default_factory=dict, repr=False)
    final_state: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name, e in self.errors.items():
            for attr in ("l2", "linf", "l2_pp", "linf_pp"):
                v = getattr(e, attr)
                if v is None:
                    continue
                if not (math.isfinite(v) and v >= 0.0):
                    raise ValueError(f"invalid error value for {name}: {v}")
                setattr(e, attr, float(v))
        self.h = float(self.h)

    @property
    def quantities(self) -> list[str]:
        return list(self.errors)


@dataclass
class ConvergenceTable:
    rows: list[ErrorReport] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def append(self, report: ErrorReport):
        if self.rows and not report.h < self.rows[-1].h:
            raise ValueError("meshes in a convergence table must strictly refine")
        self.rows.append(report)

    @property
    def quantities(self) -> list[str]:
        return self.rows[0].quantities if self.rows else []


def observed_order(e_coarse: float, e_fine: float, h_coarse: float, h_fine: float):
    """``log(e_c / e_f) / log(h_c / h_f)``, or ``None`` if an error is zero."""
    if e_coarse <= 0.0 or e_fine <= 0.0:
        return None
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


def convergence_orders(table: ConvergenceTable) -> dict[str, list]:
    """Per-column observed orders; the first row is ``None``.

    Columns are ``<q>`` and ``<q>_pp`` for each quantity ``q`` (L2 errors),
    and ``<q>_linf``/``<q>_linf_pp`` for the L-infinity errors.
    """
    if len(table.rows) < 2:
        raise ValueError("need at least two rows to compute orders")
    out: dict[str, list] = {}
    for col, series in error_columns(table).items():
        orders = [None]
        for i in range(1, len(series)):
            a, b = series[i - 1], series[i]
            if a is None or b is None:
                orders.append(None)
            else:
                orders.append(observed_order(a, b, table.rows[i - 1].h, table.rows[i].h))
        out[col] = orders
    return out


def error_columns(table: ConvergenceTable) -> dict[str, list]:
    cols: dict[str, list] = {}
    for q in table.quantities:
        cols[q] = [r.errors[q].l2 for r in table.rows]
        cols[q + "_linf"] = [r.errors[q].linf for r in table.rows]
        cols[q + "_pp"] = [r.errors[q].l2_pp for r in table.rows]
        cols[q + "_linf_pp"] = [r.errors[q].linf_pp for r in table.rows]
    return cols


def _fmt_err(v) -> str:
    return NOT_APPLICABLE if v is None else f"{v:.2E}"


def _fmt_ord(v) -> str:
    return NOT_APPLICABLE if v is None else f"{v:.2f}"


def table_header(quantities: Sequence[str]) -> list[str]:
    cols = ["mesh"]
    for q in quantities:
        cols += [f"err_{q}", f"ord_{q}"]
    for q in quantities:
        cols += [f"err_{q}_pp", f"ord_{q}_pp"]
    return cols


def emit_table(table: ConvergenceTable, destination: str | Path) -> tuple[Path, Path]:
    """Write the Table-style CSV and its full-precision sidecar.

    The CSV starts with ``# key=value`` metadata lines, then the header
    ``mesh,err_f,ord_f,err_E,ord_E,...,err_f_pp,ord_f_pp,...``.  Errors use
    three significant digits; the sidecar ``<stem>.full.txt`` holds one
    ``row.<i>.<column> = <repr>`` line per value.
    """
    dest = Path(destination)
    dest.parent.mkdir(parents=True, exist_ok=True)
    qs = table.quantities
    orders = convergence_orders(table) if len(table.rows) > 1 else {}
    lines = [f"# {k}={v}" for k, v in table.metadata.items()]
    lines.append(",".join(table_header(qs)))
    for i, row in enumerate(table.rows):
        cells = [row.mesh]
        for suffix in ("", "_pp"):
            for q in qs:
                err = row.errors[q].l2 if suffix == "" else row.errors[q].l2_pp
                cells += [_fmt_err(err), _fmt_ord(orders.get(q + suffix, [None] * (i + 1))[i])]
        lines.append(",".join(cells))
    dest.write_text("\n".join(lines) + "\n")

    side = dest.with_suffix(".full.txt")
    out = [f"{k} = {v}" for k, v in table.metadata.items()]
    cols = error_columns(table)
    for i, row in enumerate(table.rows):
        out += [f"row.{i}.mesh = {row.mesh}", f"row.{i}.k = {row.k}", f"row.{i}.h = {row.h!r}",
                f"row.{i}.runtime = {row.runtime!r}", f"row.{i}.steps = {row.steps}"]
        for col, series in cols.items():
            out.append(f"row.{i}.err_{col} = {series[i]!r}")
        for col, series in orders.items():
            out.append(f"row.{i}.ord_{col} = {series[i]!r}")
    side.write_text("\n".join(out) + "\n")
    return dest, side


def read_sidecar(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line and not line.lstrip().startswith("#"):
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
