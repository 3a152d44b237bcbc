"""Run orchestration: single runs, time-reversibility experiments and
convergence studies."""
from __future__ import annotations

import logging
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .cases import RunConfig, save_config, serialize_config
from .dg import Basis, DGField, l2_error, l2_project, linf_error
from .diagnostics import (ConvergenceTable, ErrorReport, QuantityError, conserved_quantities,
                          emit_table)
from .integrator import TimeControls, integrate
from .io import save_snapshot
from .kinetic import (SimulationState, SystemKind, compute_moments, full_rhs, gauss_law_init,
                      reflect_velocity)
from .siac import postprocess_field

log = logging.getLogger(__name__)


def initial_state(config: RunConfig) -> SimulationState:
    """Project the case's initial data onto the DG spaces.

    For Vlasov-Ampere runs ``E`` is obtained from Gauss's law applied to the
    projected charge density rather than projected from its formula; the ion
    background is the mean of that density, so the total charge vanishes.
    """
    ic = config.initial_condition()
    mesh = config.mesh()
    basis = Basis(config.k, mesh.dim)
    f = l2_project(ic.f, mesh, basis, n_points=config.projection_points)
    xmesh = mesh.x_mesh()
    xbasis = Basis(config.k, 1)
    if ic.kind is SystemKind.VLASOV_AMPERE:
        rho = compute_moments(f).rho
        fields = gauss_law_init(rho, background=float(rho.mean()[0]))
    else:
        fields = l2_project(list(ic.fields), xmesh, xbasis, n_points=config.projection_points)
    return SimulationState(f, fields, 0.0, ic.kind)


def time_controls(config: RunConfig) -> TimeControls:
    return TimeControls(cfl=config.effective_cfl, t_final=config.t_final,
                        dt_rule=config.dt_rule, dt_mode=config.dt_mode)


class History:
    """Per-step record of mass, ``||f_h||`` and the field means."""

    def __init__(self):
        self.data: dict[str, list[float]] = {"t": [], "dt": [], "mass": [], "l2f": [], "mean_E": []}

    def record(self, state: SimulationState, dt: float = 0.0):
        c = state.f.coeffs[0]
        mesh = state.f.mesh
        self.data["t"].append(state.t)
        self.data["dt"].append(dt)
        self.data["mass"].append(float(c[..., 0].sum() * mesh.jacobian * 2.0 ** (mesh.dim / 2)))
        self.data["l2f"].append(float(np.sqrt(mesh.jacobian * np.sum(c * c))))
        self.data["mean_E"].append(float(state.fields.mean()[0]))

    def __call__(self, state: SimulationState, dt: float):
        self.record(state, dt)


def _snapshotter(config: RunConfig, tag: str, history: History):
    if not config.out or config.snapshot_every <= 0:
        return history
    out = Path(config.out)
    counter = {"n": 0}

    def monitor(state, dt):
        history(state, dt)
        counter["n"] += 1
        if counter["n"] % config.snapshot_every == 0:
            save_snapshot(state, out / f"{tag}_{counter['n']:06d}.snap", {"case": config.case})

    return monitor


def run(config: RunConfig, state: SimulationState | None = None,
        history: History | None = None, tag: str = "run") -> SimulationState:
    """Integrate from the initial condition (or ``state``) to ``config.t_final``."""
    state = state if state is not None else initial_state(config)
    history = history if history is not None else History()
    if not history.data["t"]:
        history.record(state)
    monitor = _snapshotter(config, tag, history)
    controls = time_controls(config)
    t0 = state.t
    return integrate(state, controls, full_rhs, monitor=monitor, t_final=t0 + config.t_final)


def reverse_state(state: SimulationState) -> SimulationState:
    """``(f(x, -v), E, -B)``: the time-reversed initial data."""
    f = reflect_velocity(state.f)
    fields = state.fields.coeffs.copy()
    if state.kind is SystemKind.STREAMING_WEIBEL:
        fields[2] *= -1.0
    return SimulationState(f, DGField(state.fields.mesh, state.fields.basis, fields), 0.0, state.kind)


def reference_functions(config: RunConfig):
    """Analytic ``f(x, -v, 0)`` and the matching field references."""
    ic = config.initial_condition()
    if ic.kind is SystemKind.VLASOV_AMPERE:
        return (lambda x, v: ic.f(x, -v)), list(ic.fields)
    e1, e2, b3 = ic.fields
    return (lambda x, v1, v2: ic.f(x, -v1, -v2)), [e1, e2, lambda x: -b3(x)]


def reversibility_experiment(config: RunConfig) -> ErrorReport:
    """Run to ``T``, reverse velocities (and ``B``), run to ``T`` again and
    measure the distance to the reflected initial data.

    Errors are L2 and nodal L-infinity norms on ``k + 3`` Gauss points per
    axis, before and (if ``config.filter``) after SIAC filtering.  With
    ``error_norm='rms'`` the L2 errors are divided by the square root of the
    domain measure of each quantity (phase space for f, the x-interval for
    the fields).
    ``report.history`` holds per-step mass, ``||f_h||`` and mean ``E``.
    """
    start = time.perf_counter()
    history = History()
    state = run(config, history=history, tag="forward")
    steps_forward = len(history.data["t"]) - 1
    back = run(config, state=reverse_state(state), history=history, tag="backward")
    steps = len(history.data["t"]) - 1
    log.info("%s %s k=%d: %d steps (%d forward)", config.case, config.mesh_label(),
             config.k, steps, steps_forward)

    f_ref, field_refs = reference_functions(config)
    rms = config.error_norm == "rms"
    errors = {"f": _errors(back.f, [f_ref], config.filter, rms)}
    for i, name in enumerate(back.kind.field_names):
        errors[name] = _errors(back.fields.component(i), [field_refs[i]], config.filter, rms)
    end = conserved_quantities(back)
    history.data["energy_end"] = [end.energy]
    report = ErrorReport(case=config.case, mesh=config.mesh_label(), k=config.k,
                         h=back.f.mesh.axes[0].width, errors=errors,
                         runtime=time.perf_counter() - start, t_final=config.t_final,
                         steps=steps, history=history.data, final_state=back)
    return report


def _errors(field: DGField, refs, filtered: bool, rms: bool) -> QuantityError:
    scale = 1.0 / np.sqrt(field.mesh.volume) if rms else 1.0
    err = QuantityError(l2=scale * l2_error(field, refs), linf=linf_error(field, refs))
    if filtered:
        sample = postprocess_field(field)
        err.l2_pp = scale * sample.l2_error(refs)
        err.linf_pp = sample.linf_error(refs)
    return err


def mesh_sequence(base: RunConfig, meshes: Sequence[int | tuple[int, int]]) -> list[RunConfig]:
    out = []
    for m in meshes:
        nx, nv = (m, m) if isinstance(m, int) else m
        out.append(replace(base, nx=nx, nv=nv))
    return out


def run_convergence_study(base: RunConfig, meshes: Sequence[int | tuple[int, int]],
                          destination: str | Path | None = None) -> ConvergenceTable:
    """Reversibility experiments over a refinement sequence.

    After every mesh the table so far is written to ``destination`` (if
    given), so a failure part-way leaves the completed rows on disk.
    """
    configs = mesh_sequence(base, meshes)
    widths = [c.mesh().axes[0].width for c in configs]
    if any(not b < a for a, b in zip(widths, widths[1:])):
        raise ValueError("meshes must strictly refine")
    table = ConvergenceTable(metadata=_metadata(base))
    for cfg in configs:
        report = reversibility_experiment(cfg)
        table.append(report)
        if destination is not None:
            emit_table(table, destination)
    return table


def _metadata(config: RunConfig) -> dict[str, str]:
    meta = {}
    for line in serialize_config(config).splitlines():
        key, value = line.split(" = ", 1)
        if key not in ("nx", "nv"):
            meta[key] = value
    meta["cfl_effective"] = repr(config.effective_cfl)
    return meta


def write_config_copy(config: RunConfig, directory: str | Path) -> Path:
    return save_config(config, Path(directory) / "config.txt")
