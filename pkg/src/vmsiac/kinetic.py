"""Semi-discrete DG operators for the reduced Vlasov-Ampere and
Vlasov-Maxwell (streaming Weibel) systems.

Both systems are written as a phase-space transport
``f_t + d_x(v_x f) + div_v(alpha f) = 0`` with

* Vlasov-Ampere (1D1V): ``v_x = v``, ``alpha = E(x)``;
* streaming Weibel (1D2V, x is the x2 direction): ``v_x = v2``,
  ``alpha = (E1 + v2 B3, E2 - v1 B3)``.

Field components are stored as ``(E,)`` and ``(E1, E2, B3)`` respectively.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .dg import Basis, DGField, gauss_rule, legendre_table
from .errors import ConfigurationError, InputError, UsageError
from .mesh import Mesh


class SystemKind(enum.Enum):
    VLASOV_AMPERE = "VlasovAmpere1D1V"
    STREAMING_WEIBEL = "StreamingWeibel1D2V"

    @property
    def d_v(self) -> int:
        return 1 if self is SystemKind.VLASOV_AMPERE else 2

    @property
    def field_names(self) -> tuple[str, ...]:
        return ("E",) if self is SystemKind.VLASOV_AMPERE else ("E1", "E2", "B3")


@dataclass
class SimulationState:
    f: DGField
    fields: DGField
    t: float
    kind: SystemKind

    def __post_init__(self):
        if self.f.mesh.x_axes != self.fields.mesh.x_axes or self.fields.mesh.d_v:
            raise ConfigurationError("fields must live on the x-mesh of f")
        if self.f.degree != self.fields.degree:
            raise ConfigurationError("f and fields must share the polynomial degree")
        if self.f.mesh.d_v != self.kind.d_v:
            raise ConfigurationError(f"{self.kind.value} needs d_v={self.kind.d_v}")
        if self.fields.n_components != len(self.kind.field_names):
            raise ConfigurationError(f"{self.kind.value} needs fields {self.kind.field_names}")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.f.coeffs, self.fields.coeffs

    def with_arrays(self, arrays, t: float) -> SimulationState:
        fc, ec = arrays
        return replace(self, f=DGField(self.f.mesh, self.f.basis, fc),
                       fields=DGField(self.fields.mesh, self.fields.basis, ec), t=t)

    def copy(self) -> SimulationState:
        return replace(self, f=self.f.copy(), fields=self.fields.copy())

    def field(self, name: str) -> DGField:
        return self.fields.component(self.kind.field_names.index(name))


@dataclass
class Moments:
    rho: DGField
    J: DGField


# --------------------------------------------------------------------------
# moments


@lru_cache(maxsize=None)
def _reference_moments(k: int) -> tuple[np.ndarray, np.ndarray]:
    rule = gauss_rule(k + 2)
    p = legendre_table(rule.nodes[:, 0], k)
    i0 = rule.weights @ p
    i1 = (rule.weights * rule.nodes[:, 0]) @ p
    i0[np.abs(i0) < 1e-15] = 0.0
    i1[np.abs(i1) < 1e-15] = 0.0
    return i0, i1


def _moment_matrix(f_basis: Basis, x_basis: Basis, factors: list[np.ndarray]) -> np.ndarray:
    """``M[m, a]``: weight of f-mode ``m`` in x-mode ``a`` after v-integration."""
    deg = f_basis.axis_degrees
    out = np.zeros((f_basis.n_modes, x_basis.n_modes))
    for m in range(f_basis.n_modes):
        w = 1.0
        for r, fac in enumerate(factors):
            w *= fac[deg[m, r + 1]]
        out[m, deg[m, 0]] = w
    return out


def compute_moments(f: DGField) -> Moments:
    """Exact charge density and current of a DG distribution function."""
    mesh, k = f.mesh, f.degree
    xmesh = mesh.x_mesh()
    xb = Basis(k, 1)
    i0, i1 = _reference_moments(k)
    half = [0.5 * a.width for a in mesh.v_axes]
    c = f.coeffs[0]
    vaxes = tuple(range(1, mesh.dim))

    m0 = _moment_matrix(f.basis, xb, [h * i0 for h in half])
    zeroth = c @ m0  # (nx, nv..., nx_modes)
    rho = zeroth.sum(axis=vaxes)

    currents = []
    for r, spec in enumerate(mesh.v_axes):
        facs = [h * i0 for h in half]
        facs[r] = half[r] * half[r] * i1
        first = (c @ _moment_matrix(f.basis, xb, facs)).sum(axis=vaxes)
        shape = [1] * mesh.dim + [1]
        shape[r + 1] = spec.n_cells
        centered = (zeroth * spec.centers.reshape(shape)).sum(axis=vaxes)
        currents.append(first + centered)
    return Moments(DGField(xmesh, xb, rho[None]), DGField(xmesh, xb, np.stack(currents)))


# --------------------------------------------------------------------------
# Vlasov transport


class VlasovOperator:
    """Precomputed basis tables for the phase-space transport residual."""

    def __init__(self, mesh: Mesh, basis: Basis):
        self.mesh, self.basis = mesh, basis
        k, dim = basis.degree, mesh.dim
        n = k + 2
        self.vol = gauss_rule(n, dim)
        self.phi_vol = np.ascontiguousarray(basis.eval(self.vol.nodes))
        grad = basis.grad(self.vol.nodes)
        self.face_rule = gauss_rule(n, dim - 1)
        self.axes = []
        for d in range(dim):
            dphi_w = np.ascontiguousarray(self.vol.weights[:, None] * grad[:, :, d])
            lo = np.insert(self.face_rule.nodes, d, -1.0, axis=1)
            hi = np.insert(self.face_rule.nodes, d, 1.0, axis=1)
            shape = mesh.shape
            self.axes.append(dict(
                dphi_w=dphi_w,
                face_lo_nodes=lo,
                phi_lo=np.ascontiguousarray(basis.eval(lo)),
                phi_hi=np.ascontiguousarray(basis.eval(hi)),
                w_face=np.ascontiguousarray(self.face_rule.weights),
                split=(int(np.prod(shape[:d], dtype=int)), shape[d],
                       int(np.prod(shape[d + 1:], dtype=int))),
                periodic=mesh.axes[d].periodic,
            ))
        xb = legendre_table
        self.x_vol = xb(self.vol.nodes[:, 0], k)
        self.x_face = [xb(ax["face_lo_nodes"][:, 0], k) for ax in self.axes]

    def _coord(self, axis: int, nodes: np.ndarray) -> np.ndarray:
        """Coordinate of ``axis`` at reference ``nodes``, shaped for broadcasting."""
        spec = self.mesh.axes[axis]
        shape = [1] * self.mesh.dim + [nodes.shape[0]]
        shape[axis] = spec.n_cells
        return (spec.centers[:, None] + 0.5 * spec.width * nodes[None, :, axis]).reshape(shape)

    def _field_at(self, fields: np.ndarray, table: np.ndarray) -> list[np.ndarray]:
        shape = [self.mesh.shape[0]] + [1] * (self.mesh.dim - 1) + [table.shape[0]]
        return [(comp @ table.T).reshape(shape) for comp in fields]

    def speeds(self, axis: int, kind: SystemKind, fields: np.ndarray, nodes: np.ndarray,
               table: np.ndarray) -> np.ndarray:
        """Transport speed along ``axis`` at ``nodes``; size 1 along ``axis``."""
        coord = lambda a: self._coord(a, nodes)  # noqa: E731
        if axis == 0:
            speed = coord(self.mesh.dim - 1)
        elif kind is SystemKind.VLASOV_AMPERE:
            (speed,) = self._field_at(fields, table)
        else:
            e1, e2, b3 = self._field_at(fields, table)
            speed = e1 + coord(2) * b3 if axis == 1 else e2 - coord(1) * b3
        full = list(self.mesh.shape) + [nodes.shape[0]]
        full[axis] = 1
        return np.ascontiguousarray(np.broadcast_to(speed, full))

    def residual(self, f: np.ndarray, fields: np.ndarray, kind: SystemKind) -> np.ndarray:
        """``df/dt`` coefficients for coefficient array ``f`` of shape ``(*shape, nm)``."""
        f = np.ascontiguousarray(f)
        out = np.zeros_like(f)
        nm = f.shape[-1]
        for d, ax in enumerate(self.axes):
            nb, na, nc = ax["split"]
            scale = 2.0 / self.mesh.axes[d].width
            a_vol = scale * self.speeds(d, kind, fields, self.vol.nodes, self.x_vol)
            a_face = scale * self.speeds(d, kind, fields, ax["face_lo_nodes"], self.x_face[d])
            a_vol = np.broadcast_to(a_vol.reshape(nb, 1, nc, -1), (nb, na, nc, a_vol.shape[-1]))
            a_face = np.broadcast_to(a_face.reshape(nb, 1, nc, -1),
                                     (nb, na + 1, nc, a_face.shape[-1]))
            kernels.axis_rhs(f.reshape(nb, na, nc, nm), a_vol, a_face, self.phi_vol,
                             ax["dphi_w"], ax["phi_lo"], ax["phi_hi"], ax["w_face"],
                             ax["periodic"], out.reshape(nb, na, nc, nm))
        return out


@lru_cache(maxsize=16)
def vlasov_operator(mesh: Mesh, basis: Basis) -> VlasovOperator:
    return VlasovOperator(mesh, basis)


def vlasov_rhs(state: SimulationState, kind: SystemKind | None = None) -> DGField:
    """Time derivative of ``f`` from the upwind DG discretization."""
    kind = kind or state.kind
    if kind is not state.kind:
        raise ConfigurationError("state was built for a different system")
    op = vlasov_operator(state.f.mesh, state.f.basis)
    df = op.residual(state.f.coeffs[0], state.fields.coeffs, kind)
    return DGField(state.f.mesh, state.f.basis, df[None])


# --------------------------------------------------------------------------
# field equations


@lru_cache(maxsize=None)
def _field_tables(k: int):
    p_hi = legendre_table(np.array([1.0]), k)[0]
    p_lo = legendre_table(np.array([-1.0]), k)[0]
    rule = gauss_rule(k + 1)
    from .dg import legendre_derivative_table
    dp = legendre_derivative_table(rule.nodes[:, 0], k)
    p = legendre_table(rule.nodes[:, 0], k)
    stiff = (rule.weights[:, None] * dp).T @ p  # stiff[i, j] = int p_i' p_j
    return p_lo, p_hi, stiff


def maxwell_flux(u_minus, u_plus, w_minus, w_plus):
    """Upwind traces for ``u_t = w_x, w_t = u_x`` at a face.

    Returns ``(u_hat, w_hat)``; with ``u = E1`` and ``w = B3`` these are the
    tangential traces ``E~ = {E} + [B]_tau / 2`` and ``B~ = {B} - [E]_tau / 2``.
    """
    u_hat = 0.5 * (u_minus + u_plus) + 0.5 * (w_plus - w_minus)
    w_hat = 0.5 * (w_minus + w_plus) + 0.5 * (u_plus - u_minus)
    return u_hat, w_hat


def _wave_rhs(u: np.ndarray, w: np.ndarray, h: float, k: int):
    """DG residuals of ``du/dt = w_x`` and ``dw/dt = u_x`` on a periodic line."""
    p_lo, p_hi, stiff = _field_tables(k)
    u_hi, u_lo = u @ p_hi, u @ p_lo
    w_hi, w_lo = w @ p_hi, w @ p_lo
    # face i is the low face of element i; its minus side is element i-1
    u_hat, w_hat = maxwell_flux(np.roll(u_hi, 1), u_lo, np.roll(w_hi, 1), w_lo)
    du = -w @ stiff.T + np.outer(np.roll(w_hat, -1), p_hi) - np.outer(w_hat, p_lo)
    dw = -u @ stiff.T + np.outer(np.roll(u_hat, -1), p_hi) - np.outer(u_hat, p_lo)
    return du * (2.0 / h), dw * (2.0 / h)


def maxwell_rhs(state: SimulationState, moments: Moments) -> DGField:
    """``d/dt (E1, E2, B3)`` for the streaming Weibel field equations."""
    if state.kind is not SystemKind.STREAMING_WEIBEL:
        raise UsageError("maxwell_rhs applies to the streaming Weibel system only")
    e1, e2, b3 = state.fields.coeffs
    j1, j2 = moments.J.coeffs
    h = state.fields.mesh.axes[0].width
    de1, db3 = _wave_rhs(e1, b3, h, state.fields.degree)
    out = np.stack([de1 - j1, -j2, db3])
    return DGField(state.fields.mesh, state.fields.basis, out)


def ampere_rhs(moments: Moments) -> DGField:
    """``dE/dt = -(J - mean(J))`` for the Vlasov-Ampere system."""
    J = moments.J.coeffs[:1]
    out = -J.copy()
    mean = J[0, :, 0].mean()
    out[0, :, 0] += mean
    return DGField(moments.J.mesh, moments.J.basis, out)


def field_rhs(state: SimulationState, moments: Moments | None = None) -> DGField:
    moments = moments or compute_moments(state.f)
    if state.kind is SystemKind.VLASOV_AMPERE:
        return ampere_rhs(moments)
    return maxwell_rhs(state, moments)


def full_rhs(state: SimulationState) -> tuple[np.ndarray, np.ndarray]:
    """Coupled time derivative ``(df, dfields)`` as coefficient arrays."""
    df = vlasov_rhs(state)
    de = field_rhs(state)
    return df.coeffs, de.coeffs


def gauss_law_init(rho: DGField, background: float = 1.0, tol: float = 1e-10) -> DGField:
    """Zero-mean ``E`` with ``dE/dx = rho - background`` on a periodic line.

    The continuous piecewise antiderivative of ``rho - background`` is
    formed exactly and L2-projected back onto ``P^k``.
    """
    mesh, k = rho.mesh, rho.degree
    if mesh.dim != 1:
        raise ConfigurationError("Gauss law initialization is one-dimensional")
    h = mesh.axes[0].width
    c = rho.coeffs[0]
    cell_int = 0.5 * h * np.sqrt(2.0) * c[:, 0] - background * h
    net = cell_int.sum()
    if abs(net) > tol:
        raise InputError(f"charge is not neutral: integral(rho - background) = {net:.3e}")
    left = np.concatenate([[0.0], np.cumsum(cell_int)[:-1]])

    proj = gauss_rule(k + 2)
    sub = gauss_rule(k + 1)
    xi = proj.nodes[:, 0]
    # anti[q, n] = int_{-1}^{xi_q} p_n(s) ds
    s = -1.0 + np.outer(xi + 1.0, sub.nodes[:, 0] + 1.0) * 0.5
    anti = np.einsum("qs,qsn->qn", np.outer(0.5 * (xi + 1.0), sub.weights), legendre_table(s, k))
    vals = left[:, None] + 0.5 * h * (c @ anti.T) - background * 0.5 * h * (xi + 1.0)[None, :]
    coeffs = vals @ (proj.weights[:, None] * legendre_table(xi, k))
    coeffs[:, 0] -= coeffs[:, 0].mean()
    return DGField(mesh, rho.basis, coeffs[None])


def reflect_velocity(f: DGField) -> DGField:
    """Exact ``f(x, -v)`` for a v-symmetric mesh: mirror v elements, flip odd v modes."""
    mesh = f.mesh
    for spec in mesh.v_axes:
        if not np.isclose(spec.lo, -spec.hi, rtol=0, atol=1e-14 * abs(spec.hi)):
            raise ConfigurationError("velocity reflection needs a symmetric v domain")
    vdeg = f.basis.axis_degrees[:, 1:]
    sign = np.where(vdeg.sum(axis=1) % 2 == 0, 1.0, -1.0)
    flipped = np.flip(f.coeffs, axis=tuple(range(2, mesh.dim + 1)))
    return DGField(mesh, f.basis, flipped * sign)
