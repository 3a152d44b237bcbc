"""Third-order SSP Runge-Kutta stepping and degree-dependent time steps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dg import DGField, gauss_rule, legendre_table
from .errors import ConfigurationError, DivergenceError
from .kinetic import SimulationState
from .mesh import Mesh

# dt = cfl / (V_c / dx**p + E_max / dv**p)
DT_EXPONENTS = {1: 1.0, 2: 5.0 / 3.0, 3: 7.0 / 3.0}


@dataclass
class TimeControls:
    cfl: float
    t_final: float
    dt_rule: str = "degree"  # "degree": degree-dependent exponent; "p1": exponent 1 for all k
    e_max_floor: float = 1e-8
    dt_mode: str = "adaptive"  # or "frozen"

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t_final < 0.0:
            raise ConfigurationError("t_final must be nonnegative")
        if self.dt_rule not in ("degree", "p1"):
            raise ConfigurationError(f"unknown dt rule {self.dt_rule!r}")
        if self.dt_mode not in ("adaptive", "frozen"):
            raise ConfigurationError(f"unknown dt mode {self.dt_mode!r}")
        if self.e_max_floor <= 0.0:
            raise ConfigurationError("e_max_floor must be positive")


def field_max(fields: DGField, v_max: float) -> float:
    """Largest acceleration magnitude over the x Gauss nodes.

    One component (E): ``max |E|``; three components (E1, E2, B3):
    ``max(|E1| + |E2| + v_max |B3|)``.
    """
    k = fields.degree
    table = legendre_table(gauss_rule(k + 2).nodes[:, 0], k)
    vals = np.abs(fields.coeffs @ table.T)
    if fields.n_components == 1:
        return float(vals.max())
    e1, e2, b3 = vals
    return float((e1 + e2 + v_max * b3).max())


def velocity_bound(mesh: Mesh) -> float:
    return max(max(abs(a.lo), abs(a.hi)) for a in mesh.v_axes)


def select_dt(k: int, controls: TimeControls, mesh: Mesh, fields: DGField | None = None,
              e_max: float | None = None) -> float:
    """Time step from the degree-dependent CFL rule.

    ``E_max`` is measured from ``fields`` unless given, and floored at
    ``controls.e_max_floor``.
    """
    if k not in DT_EXPONENTS:
        raise ConfigurationError(f"no time-step rule for degree {k}")
    p = 1.0 if controls.dt_rule == "p1" else DT_EXPONENTS[k]
    v_c = velocity_bound(mesh)
    dx = mesh.x_axes[0].width
    dv = min(a.width for a in mesh.v_axes)
    if e_max is None:
        e_max = field_max(fields, v_c) if fields is not None else 0.0
    e_max = max(e_max, controls.e_max_floor)
    return controls.cfl / (v_c / dx ** p + e_max / dv ** p)


def _arrays(u):
    if isinstance(u, SimulationState):
        return u.arrays()
    return (np.asarray(u, dtype=float),)


def _rebuild(u, arrays, t):
    if isinstance(u, SimulationState):
        return u.with_arrays(arrays, t)
    return arrays[0]


def _as_tuple(d):
    return tuple(d) if isinstance(d, (tuple, list)) else (d,)


def ssp_rk3_step(u, dt: float, rhs: Callable, t: float | None = None):
    """One Shu-Osher SSP-RK3 step.

    ``u`` is a :class:`SimulationState` (``rhs(state)`` returns
    ``(df, dfields)`` coefficient arrays; stage states carry their stage
    time) or a plain array (``rhs(u, t)`` returns an array).  The
    stages are evaluated in increment form
    ``u1 = u + dt L0``, ``u2 = u + dt/4 (L0 + L1)``,
    ``u3 = u + dt (L0/6 + L1/6 + 2 L2/3)``, algebraically identical to the
    convex-combination form, so that ``L = 0`` leaves ``u`` bitwise unchanged.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    t0 = u.t if isinstance(u, SimulationState) else (t or 0.0)
    base = _arrays(u)

    def call(arrays, stage_t):
        if isinstance(u, SimulationState):
            return _as_tuple(rhs(u.with_arrays(arrays, stage_t)))
        return _as_tuple(rhs(arrays[0], stage_t))

    def check(arrays, stage_t):
        for a in arrays:
            if not np.all(np.isfinite(a)):
                raise DivergenceError(stage_t, dt)
        return arrays

    l0 = call(base, t0)
    u1 = check(tuple(a + dt * d for a, d in zip(base, l0)), t0 + dt)
    l1 = call(u1, t0 + dt)
    u2 = check(tuple(a + (0.25 * dt) * (d0 + d1) for a, d0, d1 in zip(base, l0, l1)), t0 + 0.5 * dt)
    l2 = call(u2, t0 + 0.5 * dt)
    u3 = check(tuple(a + dt * ((d0 + d1) / 6.0 + (2.0 / 3.0) * d2)
                     for a, d0, d1, d2 in zip(base, l0, l1, l2)), t0 + dt)
    return _rebuild(u, u3, t0 + dt)


def integrate(state: SimulationState, controls: TimeControls, rhs: Callable,
              monitor: Callable[[SimulationState, float], None] | None = None,
              t_final: float | None = None) -> SimulationState:
    """Advance ``state`` from ``state.t`` to ``t_final`` (default ``controls.t_final``).

    ``monitor(state, dt)`` is called after every step.  In ``frozen`` mode the
    step computed from the initial field is reused throughout; the last step
    is shortened to land on ``t_final``.
    """
    t_end = controls.t_final if t_final is None else t_final
    k = state.f.degree
    mesh = state.f.mesh
    frozen = select_dt(k, controls, mesh, state.fields) if controls.dt_mode == "frozen" else None
    while state.t < t_end:
        dt = frozen if frozen is not None else select_dt(k, controls, mesh, state.fields)
        last = state.t + dt >= t_end * (1.0 - 1e-14)
        if last:
            dt = t_end - state.t
        state = ssp_rk3_step(state, dt, rhs)
        if last:
            state.t = t_end
        if monitor is not None:
            monitor(state, dt)
    return state
