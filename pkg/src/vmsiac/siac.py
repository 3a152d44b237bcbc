"""Symmetric SIAC post-processing with B-spline kernels.

The one-dimensional kernel for degree ``k`` data is

    K_h(x) = (1/h) * sum_{g=-k..k} c_g * psi_{k+1}(x/h - g),

with ``psi_n`` the centered cardinal B-spline of order ``n`` and weights
chosen so that ``K_h`` reproduces polynomials of degree ``<= 2k``.  In
several dimensions the kernel is the tensor product of per-axis kernels,
each scaled by that axis' cell width.

Convolutions with DG fields are integrated exactly: the integration range
is split at kernel and element breakpoints and every polynomial piece is
integrated with Gauss rules.  All axes are treated as periodic.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .dg import DGField, gauss_rule, legendre_table
from .errors import ConfigurationError
from .mesh import Mesh


def bspline_eval(order: int, x) -> np.ndarray:
    """Centered cardinal B-spline of ``order`` (degree ``order - 1``).

    Built from the indicator of ``[-1/2, 1/2)`` by the recurrence
    ``psi_n(x) = ((n/2 + x) psi_{n-1}(x + 1/2) + (n/2 - x) psi_{n-1}(x - 1/2)) / (n - 1)``.
    """
    if order < 1:
        raise ValueError("B-spline order must be >= 1")
    x = np.asarray(x, dtype=float)
    # values of psi_1 on the shifted arguments x + j - (order-1)/2, j = 0..order-1
    shifts = np.arange(order) - 0.5 * (order - 1)
    vals = [((x + s >= -0.5) & (x + s < 0.5)).astype(float) for s in shifts]
    for n in range(2, order + 1):
        # vals[j] currently holds psi_{n-1}(x + t_j) with t_j = j - (order - n + 1)/2
        new = []
        for j in range(len(vals) - 1):
            y = x + (j - 0.5 * (order - n))
            new.append(((0.5 * n + y) * vals[j + 1] + (0.5 * n - y) * vals[j]) / (n - 1))
        vals = new
    return vals[0]


def bspline_breakpoints(order: int) -> np.ndarray:
    return np.arange(order + 1) - 0.5 * order


@lru_cache(maxsize=None)
def kernel_coefficients(k: int) -> np.ndarray:
    """Weights ``c_{-k..k}`` reproducing polynomials up to degree ``2k``."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    gammas = np.arange(-k, k + 1)
    A = moment_matrix(k)
    rhs = np.zeros(2 * k + 1)
    rhs[0] = 1.0
    try:
        c = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - cannot happen for k >= 0
        raise RuntimeError("singular SIAC moment system") from exc
    c = 0.5 * (c + c[::-1])
    c.setflags(write=False)
    assert c.size == gammas.size
    return c


@lru_cache(maxsize=None)
def moment_matrix(k: int) -> np.ndarray:
    """``A[j, g] = int y^j psi_{k+1}(y - gamma_g) dy`` for ``j = 0..2k``."""
    order = k + 1
    rule = gauss_rule(k + 2 + k)  # degree 3k integrands
    t, w = rule.nodes[:, 0], rule.weights
    breaks = bspline_breakpoints(order)
    A = np.zeros((2 * k + 1, 2 * k + 1))
    for gi, gamma in enumerate(range(-k, k + 1)):
        for a, b in zip(breaks[:-1], breaks[1:]):
            y = 0.5 * (a + b) + 0.5 * (b - a) * t
            psi = bspline_eval(order, y)
            for j in range(2 * k + 1):
                A[j, gi] += 0.5 * (b - a) * np.sum(w * psi * (y + gamma) ** j)
    A.setflags(write=False)
    return A


@dataclass(frozen=True)
class SiacKernel:
    """Symmetric kernel for degree ``k`` data on an axis of cell width ``h``."""

    k: int
    h: float

    @property
    def coefficients(self) -> np.ndarray:
        return kernel_coefficients(self.k)

    @property
    def order(self) -> int:
        return self.k + 1

    @property
    def half_support(self) -> float:
        """Half-width of the support in units of ``h``."""
        return self.k + 0.5 * (self.k + 1)

    def __call__(self, x) -> np.ndarray:
        y = np.asarray(x, dtype=float) / self.h
        out = np.zeros_like(y)
        for c, g in zip(self.coefficients, range(-self.k, self.k + 1)):
            out += c * bspline_eval(self.order, y - g)
        return out / self.h

    def unit_breakpoints(self) -> np.ndarray:
        """Breakpoints of the unscaled kernel ``K_1``."""
        return np.arange(-self.half_support, self.half_support + 0.5, 1.0)


def make_kernels(mesh: Mesh, k: int) -> tuple[SiacKernel, ...]:
    return tuple(SiacKernel(k, spec.width) for spec in mesh.axes)


def _check(field_mesh: Mesh, kernels: Sequence[SiacKernel]):
    if len(kernels) != field_mesh.dim:
        raise ConfigurationError("need one kernel per mesh axis")
    for spec, ker in zip(field_mesh.axes, kernels):
        if not np.isclose(ker.h, spec.width, rtol=1e-12, atol=0.0):
            raise ConfigurationError("kernel scaling must equal the uniform cell width")


def convolution_weights(kernel: SiacKernel, t: float, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact weights of ``(K_h * u)`` at offset ``t`` from an element center.

    ``t`` is measured in cell widths (``|t| <= 1/2`` inside the element).
    Returns ``(offsets, W)`` with ``W[m, a] = int_{e_m} K_1(t - s) p_a(2(s - m)) ds``
    over the element ``e_m = [m - 1/2, m + 1/2]``, so that the filtered value
    is ``sum_m sum_a W[m, a] * coeff[i + m, a]`` for orthonormal Legendre
    coefficients.
    """
    reach = kernel.half_support
    m_lo = int(np.floor(t - reach + 0.5))
    m_hi = int(np.ceil(t + reach - 0.5))
    offsets = np.arange(m_lo, m_hi + 1)
    kb = t - kernel.unit_breakpoints()  # kernel breakpoints in s
    n_gauss = kernel.k + degree // 2 + 2
    rule = gauss_rule(n_gauss)
    g, gw = rule.nodes[:, 0], rule.weights
    unit = SiacKernel(kernel.k, 1.0)
    W = np.zeros((offsets.size, degree + 1))
    for row, m in enumerate(offsets):
        lo, hi = m - 0.5, m + 0.5
        cuts = np.unique(np.concatenate([[lo, hi], kb[(kb > lo) & (kb < hi)]]))
        for a, b in zip(cuts[:-1], cuts[1:]):
            s = 0.5 * (a + b) + 0.5 * (b - a) * g
            vals = unit(t - s) * gw * 0.5 * (b - a)
            W[row] += vals @ legendre_table(2.0 * (s - m), degree)
    return offsets, W


@lru_cache(maxsize=256)
def _weights_table(k: int, degree: int, ts: tuple[float, ...]):
    kernel = SiacKernel(k, 1.0)
    per_t = [convolution_weights(kernel, t, degree) for t in ts]
    m_lo = min(o[0] for o, _ in per_t)
    m_hi = max(o[-1] for o, _ in per_t)
    offsets = np.arange(m_lo, m_hi + 1)
    table = np.zeros((len(ts), offsets.size, degree + 1))
    for q, (o, W) in enumerate(per_t):
        table[q, o[0] - m_lo:o[-1] - m_lo + 1] = W
    return offsets, table


def postprocess_point(dgfield: DGField, point: Sequence[float], kernels: Sequence[SiacKernel],
                      component: int = 0) -> float:
    """Filtered value at one physical point (periodic extension on every axis)."""
    mesh = dgfield.mesh
    _check(mesh, kernels)
    point = np.asarray(point, dtype=float).reshape(-1)
    deg = dgfield.basis.axis_degrees
    index_lists, weight_lists = [], []
    for a, (spec, ker) in enumerate(zip(mesh.axes, kernels)):
        s = (point[a] - spec.lo) / spec.width
        i = min(int(np.floor(s)), spec.n_cells - 1)
        offsets, W = convolution_weights(ker, s - i - 0.5, dgfield.degree)
        index_lists.append((i + offsets) % spec.n_cells)
        weight_lists.append(W)
    block = dgfield.coeffs[component][np.ix_(*index_lists)]  # (m0, m1, ..., nm)
    total = 0.0
    for mode in range(dgfield.basis.n_modes):
        vals = block[..., mode]
        for a in reversed(range(mesh.dim)):
            vals = vals @ weight_lists[a][:, deg[mode, a]]
        total += float(vals)
    return total


@dataclass
class FilteredSample:
    """Filtered values on a per-element tensor grid.

    ``values`` has shape ``(n_components, n0, q0, n1, q1, ...)``: element
    index then local point index per axis.  ``ref_points[a]`` are the local
    reference coordinates in ``[-1, 1]`` and ``weights[a]`` the matching
    quadrature weights (``None`` for plot grids).
    """

    mesh: Mesh
    ref_points: tuple[np.ndarray, ...]
    values: np.ndarray
    weights: tuple[np.ndarray, ...] | None = None

    def axis_coordinates(self, axis: int) -> np.ndarray:
        spec = self.mesh.axes[axis]
        return spec.centers[:, None] + 0.5 * spec.width * self.ref_points[axis][None, :]

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable physical coordinates matching ``values[c]``."""
        out = []
        for a in range(self.mesh.dim):
            shape = [1] * (2 * self.mesh.dim)
            shape[2 * a], shape[2 * a + 1] = self.mesh.axes[a].n_cells, self.ref_points[a].size
            out.append(self.axis_coordinates(a).reshape(shape))
        return out

    def l2_error(self, reference: Callable | Sequence[Callable], component: int | None = None) -> float:
        return _sample_norm(self, reference, component, 2)

    def linf_error(self, reference, component: int | None = None) -> float:
        return _sample_norm(self, reference, component, np.inf)


def _sample_norm(sample: FilteredSample, reference, component, p) -> float:
    if sample.weights is None:
        raise ValueError("sample has no quadrature weights")
    refs = [reference] if callable(reference) else list(reference)
    comps = [component] if component is not None else list(range(sample.values.shape[0]))
    if len(refs) != len(comps):
        raise ValueError("need one reference per component")
    coords = sample.coordinates()
    total = 0.0
    for c, ref in zip(comps, refs):
        diff = sample.values[c] - np.asarray(ref(*coords), dtype=float)
        if p == np.inf:
            total = max(total, float(np.max(np.abs(diff))))
        else:
            w = np.ones([1] * diff.ndim)
            for a, wa in enumerate(sample.weights):
                shape = [1] * diff.ndim
                shape[2 * a + 1] = wa.size
                w = w * wa.reshape(shape)
            total += float(np.sum(diff ** 2 * w))
    if p == np.inf:
        return total
    return float(np.sqrt(total * sample.mesh.jacobian))


def gauss_grid(n_points: int, dim: int):
    rule = gauss_rule(n_points)
    return tuple(rule.nodes[:, 0] for _ in range(dim)), tuple(rule.weights for _ in range(dim))


def uniform_grid(points_per_element: int, dim: int):
    ref = -1.0 + (2.0 * np.arange(points_per_element) + 1.0) / points_per_element
    return tuple(ref for _ in range(dim)), None


def postprocess_field(dgfield: DGField, kernels: Sequence[SiacKernel] | None = None,
                      grid: str = "gauss", n_points: int | None = None) -> FilteredSample:
    """Filter ``dgfield`` on a per-element grid.

    ``grid='gauss'`` uses ``n_points`` (default ``k + 3``) Gauss nodes per
    axis and carries quadrature weights for norms; ``grid='uniform'`` uses
    equispaced cell-centered points for plotting.
    """
    mesh, k = dgfield.mesh, dgfield.degree
    kernels = tuple(kernels) if kernels is not None else make_kernels(mesh, k)
    _check(mesh, kernels)
    if grid == "gauss":
        refs, weights = gauss_grid(n_points or k + 3, mesh.dim)
    elif grid == "uniform":
        refs, weights = uniform_grid(n_points or k + 1, mesh.dim)
    else:
        raise ValueError(f"unknown grid {grid!r}")

    deg = dgfield.basis.axis_degrees
    tables = [_weights_table(ker.k, k, tuple(0.5 * refs[a]))
              for a, ker in enumerate(kernels)]
    out = None
    for comp in dgfield.coeffs:
        total = 0.0
        for mode in range(dgfield.basis.n_modes):
            vals = comp[..., mode]
            for a in range(mesh.dim):
                vals = _convolve_axis(vals, tables[a], deg[mode, a], a)
            total = total + vals
        out = total[None] if out is None else np.concatenate([out, total[None]])
    return FilteredSample(mesh, refs, out, weights)


def _convolve_axis(vals: np.ndarray, table, degree: int, axis: int) -> np.ndarray:
    """Apply one axis of the tensor convolution.

    ``vals`` has the already-processed axes expanded as ``(n, q)`` pairs in
    front; ``axis`` counts original mesh axes.  The element axis of the
    current one sits at position ``2 * axis`` and gets a point axis after it.
    """
    offsets, W = table  # W: (nq, n_off, nm1)
    pos = 2 * axis
    w = W[:, :, degree]  # (nq, n_off)
    n = vals.shape[pos]
    shape = list(vals.shape)
    shape.insert(pos + 1, w.shape[0])
    result = np.zeros(shape)
    for j, m in enumerate(offsets):
        shifted = np.take(vals, (np.arange(n) + m) % n, axis=pos)
        col = w[:, j].reshape([-1] + [1] * (vals.ndim - pos - 1))
        result += np.expand_dims(shifted, pos + 1) * col
    return result


def convolve_function(kernel: SiacKernel, fn: Callable[[np.ndarray], np.ndarray], x) -> np.ndarray:
    """``(K_h * fn)(x)`` for a smooth 1D function by piecewise Gauss quadrature.

    Exact for polynomials of degree ``<= 2k + 2``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rule = gauss_rule(2 * kernel.k + 3)
    g, gw = rule.nodes[:, 0], rule.weights
    bp = kernel.unit_breakpoints() * kernel.h
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        total = 0.0
        for a, b in zip(bp[:-1], bp[1:]):
            y = 0.5 * (a + b) + 0.5 * (b - a) * g
            total += 0.5 * (b - a) * np.sum(gw * kernel(y) * fn(xi - y))
        out[i] = total
    return out


def divided_difference(w: Callable[..., np.ndarray], lam: Sequence[int], h: Sequence[float]):
    """Composed central difference quotient ``d_h^lam w``.

    ``w`` takes one coordinate array per axis; so does the returned function.
    Along axis ``i`` one application is ``(w(x + h_i/2 e_i) - w(x - h_i/2 e_i)) / h_i``.
    """
    if len(lam) != len(h):
        raise ValueError("lam and h must have the same length")
    func = w
    for axis, (times, hi) in enumerate(zip(lam, h)):
        for _ in range(int(times)):
            func = _central_quotient(func, axis, float(hi))
    return func


def _central_quotient(w, axis: int, h: float):
    def quotient(*coords):
        plus = list(coords)
        minus = list(coords)
        plus[axis] = np.asarray(coords[axis]) + 0.5 * h
        minus[axis] = np.asarray(coords[axis]) - 0.5 * h
        return (np.asarray(w(*plus)) - np.asarray(w(*minus))) / h
    return quotient
