"""Modal DG substrate: orthonormal P^k basis, Gauss rules, fields and norms.

The reference element is ``[-1, 1]^d``.  Basis functions are products of
orthonormal Legendre polynomials ``p_n = sqrt((2n+1)/2) P_n`` restricted to
total degree ``<= k``, so the reference mass matrix is the identity and the
physical mass matrix is ``J * I`` with ``J = prod(h/2)``.

Coefficient arrays are stored as ``(n_components, *mesh.shape, n_modes)`` in
C order, i.e. element-major with the mode index fastest.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import DomainError, InputError
from .mesh import Mesh

Function = Callable[..., np.ndarray]

_CHUNK_POINTS = 4_000_000


def legendre_table(x: np.ndarray, k: int) -> np.ndarray:
    """Orthonormal Legendre values ``p_0..p_k`` at ``x``; shape ``x.shape + (k+1,)``."""
    x = np.asarray(x, dtype=float)
    scale = np.sqrt(np.arange(k + 1) + 0.5)
    return npleg.legvander(x, k) * scale


def legendre_derivative_table(x: np.ndarray, k: int) -> np.ndarray:
    """Derivatives of the orthonormal Legendre polynomials at ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (k + 1,))
    for n in range(1, k + 1):
        coef = np.zeros(n + 1)
        coef[n] = np.sqrt(n + 0.5)
        out[..., n] = npleg.legval(x, npleg.legder(coef))
    return out


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray  # (n_points, d)
    weights: np.ndarray  # (n_points,)

    @property
    def n_points(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]


@lru_cache(maxsize=None)
def _gauss_1d(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = npleg.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_rule(n_points: int, d: int = 1) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on ``[-1, 1]^d``; first axis varies slowest."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    x, w = _gauss_1d(n_points)
    nodes = np.array(list(itertools.product(x, repeat=d)), dtype=float).reshape(-1, d)
    weights = np.array([np.prod(c) for c in itertools.product(w, repeat=d)], dtype=float)
    return QuadratureRule(nodes, weights)


@dataclass(frozen=True)
class Basis:
    """Orthonormal total-degree basis of ``P^k([-1, 1]^d)``."""

    degree: int
    dim: int

    def __post_init__(self):
        if self.degree < 0 or self.dim < 1:
            raise ValueError("need degree >= 0 and dim >= 1")

    @cached_property
    def modes(self) -> tuple[tuple[int, ...], ...]:
        ms = [m for m in itertools.product(range(self.degree + 1), repeat=self.dim)
              if sum(m) <= self.degree]
        return tuple(sorted(ms, key=lambda m: (sum(m), tuple(-a for a in m))))

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @cached_property
    def axis_degrees(self) -> np.ndarray:
        """Integer array ``(n_modes, dim)`` of per-axis polynomial degrees."""
        return np.array(self.modes, dtype=int).reshape(self.n_modes, self.dim)

    def eval(self, points: np.ndarray) -> np.ndarray:
        """Mode values at reference points ``(n, d)`` -> ``(n, n_modes)``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        tables = [legendre_table(points[:, a], self.degree) for a in range(self.dim)]
        deg = self.axis_degrees
        out = np.ones((points.shape[0], self.n_modes))
        for a in range(self.dim):
            out *= tables[a][:, deg[:, a]]
        return out

    def grad(self, points: np.ndarray) -> np.ndarray:
        """Reference gradients ``(n, n_modes, d)``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vals = [legendre_table(points[:, a], self.degree) for a in range(self.dim)]
        ders = [legendre_derivative_table(points[:, a], self.degree) for a in range(self.dim)]
        deg = self.axis_degrees
        out = np.ones((points.shape[0], self.n_modes, self.dim))
        for g in range(self.dim):
            for a in range(self.dim):
                table = ders[a] if a == g else vals[a]
                out[:, :, g] *= table[:, deg[:, a]]
        return out


def basis_eval(basis: Basis, point: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Values ``(n_modes,)`` and reference gradients ``(n_modes, d)`` at one point."""
    p = np.asarray(point, dtype=float).reshape(1, basis.dim)
    return basis.eval(p)[0], basis.grad(p)[0]


@dataclass
class DGField:
    """Piecewise polynomial on ``mesh`` with ``n_components`` components."""

    mesh: Mesh
    basis: Basis
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.basis.dim != self.mesh.dim:
            raise ValueError("basis dimension does not match mesh dimension")
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim == self.mesh.dim + 1:
            self.coeffs = self.coeffs[None]
        expected = self.mesh.shape + (self.basis.n_modes,)
        if self.coeffs.shape[1:] != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} does not match {expected}")

    @classmethod
    def zeros(cls, mesh: Mesh, basis: Basis, n_components: int = 1) -> DGField:
        return cls(mesh, basis, np.zeros((n_components,) + mesh.shape + (basis.n_modes,)))

    @property
    def n_components(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.basis.degree

    def component(self, i: int) -> DGField:
        return DGField(self.mesh, self.basis, self.coeffs[i:i + 1])

    def copy(self) -> DGField:
        return DGField(self.mesh, self.basis, self.coeffs.copy())

    def values_at(self, ref_nodes: np.ndarray) -> np.ndarray:
        """Values at the same reference nodes in every element: ``(ncomp, *shape, n)``."""
        return self.coeffs @ self.basis.eval(ref_nodes).T

    def mean(self) -> np.ndarray:
        """Domain average of each component."""
        phi0 = 2.0 ** (-self.mesh.dim / 2)
        axes = tuple(range(1, self.mesh.dim + 1))
        return self.coeffs[..., 0].mean(axis=axes) * phi0


def element_coordinates(mesh: Mesh, ref_nodes: np.ndarray, rows: slice = slice(None)) -> list[np.ndarray]:
    """Physical coordinates of reference nodes in every element.

    Returns one array per axis, each broadcastable to ``(*shape, n_nodes)``;
    ``rows`` restricts the first axis.
    """
    ref_nodes = np.atleast_2d(ref_nodes)
    out = []
    for a, spec in enumerate(mesh.axes):
        centers = spec.centers[rows] if a == 0 else spec.centers
        shape = [1] * mesh.dim + [ref_nodes.shape[0]]
        shape[a] = centers.size
        c = centers.reshape(shape[:-1] + [1])
        out.append(c + 0.5 * spec.width * ref_nodes[:, a])
    return out


def _row_blocks(mesh: Mesh, n_nodes: int):
    per_row = n_nodes * int(np.prod(mesh.shape[1:], dtype=int))
    step = max(1, _CHUNK_POINTS // max(per_row, 1))
    for start in range(0, mesh.shape[0], step):
        yield slice(start, min(start + step, mesh.shape[0]))


def _as_function_list(fn) -> list[Function]:
    if callable(fn):
        return [fn]
    return list(fn)


def l2_project(fn, mesh: Mesh, basis: Basis, n_points: int | None = None) -> DGField:
    """Element-wise L2 projection of ``fn(*coords)`` onto ``P^k``.

    ``fn`` may be a single callable or a sequence of callables (one per
    component).  ``n_points`` Gauss points per axis default to ``k + 2``.
    """
    fns = _as_function_list(fn)
    n = n_points or basis.degree + 2
    rule = gauss_rule(n, mesh.dim)
    wphi = rule.weights[:, None] * basis.eval(rule.nodes)
    coeffs = np.empty((len(fns),) + mesh.shape + (basis.n_modes,))
    for rows in _row_blocks(mesh, rule.n_points):
        coords = element_coordinates(mesh, rule.nodes, rows)
        for c, f in enumerate(fns):
            vals = np.broadcast_to(np.asarray(f(*coords), dtype=float),
                                   np.broadcast_shapes(*(x.shape for x in coords)))
            if not np.all(np.isfinite(vals)):
                raise InputError("projected function returned non-finite values")
            coeffs[c, rows] = vals @ wphi
    return DGField(mesh, basis, coeffs)


def locate(mesh: Mesh, point: Sequence[float], side: str = "high") -> tuple[tuple[int, ...], np.ndarray]:
    """Element multi-index and reference coordinates of a physical point.

    A point on an interior face belongs to the element on ``side`` of it.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.size != mesh.dim:
        raise DomainError(f"expected a {mesh.dim}-dimensional point")
    idx, ref = [], []
    for p, spec in zip(point, mesh.axes):
        if not spec.lo <= p <= spec.hi:
            raise DomainError(f"point coordinate {p} outside [{spec.lo}, {spec.hi}]")
        s = (p - spec.lo) / spec.width
        i = int(np.floor(s))
        if side == "low" and i == s and i > 0:
            i -= 1
        i = min(max(i, 0), spec.n_cells - 1)
        idx.append(i)
        ref.append(2.0 * (s - i) - 1.0)
    return tuple(idx), np.array(ref)


def eval_field(dgfield: DGField, point: Sequence[float], side: str = "high"):
    """Value(s) of the element polynomial containing ``point``."""
    idx, ref = locate(dgfield.mesh, point, side)
    phi = dgfield.basis.eval(ref[None])[0]
    vals = dgfield.coeffs[(slice(None),) + idx] @ phi
    return float(vals[0]) if dgfield.n_components == 1 else vals


def l2_norm(dgfield: DGField) -> float:
    """Exact L2 norm over all components (orthonormal basis)."""
    return float(np.sqrt(dgfield.mesh.jacobian * np.sum(dgfield.coeffs ** 2)))


def _error_samples(dgfield: DGField, reference, n_points: int | None):
    refs = _as_function_list(reference)
    if len(refs) != dgfield.n_components:
        raise ValueError("need one reference function per component")
    n = n_points or dgfield.degree + 3
    rule = gauss_rule(n, dgfield.mesh.dim)
    phi = dgfield.basis.eval(rule.nodes)
    for rows in _row_blocks(dgfield.mesh, rule.n_points):
        coords = element_coordinates(dgfield.mesh, rule.nodes, rows)
        vals = dgfield.coeffs[:, rows] @ phi.T
        for c, f in enumerate(refs):
            yield vals[c] - np.asarray(f(*coords), dtype=float), rule.weights


def l2_error(dgfield: DGField, reference, n_points: int | None = None) -> float:
    """Quadrature L2 distance to ``reference`` with ``k + 3`` points per axis."""
    total = 0.0
    for diff, w in _error_samples(dgfield, reference, n_points):
        total += float(np.sum(diff ** 2 @ w))
    return float(np.sqrt(total * dgfield.mesh.jacobian))


def linf_error(dgfield: DGField, reference, n_points: int | None = None) -> float:
    """Maximum pointwise difference over the norm quadrature nodes."""
    worst = 0.0
    for diff, _ in _error_samples(dgfield, reference, n_points):
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst
