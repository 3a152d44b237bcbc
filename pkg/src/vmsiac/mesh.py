"""Uniform tensor-product phase-space meshes.

Elements are ordered row-major over ``(x, v1[, v2])``; the flat element
index of ``(i, j)`` on an ``nx x nv`` mesh is ``i * nv + j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

BOUNDARY = None
"""Returned by :func:`neighbor` for a face on a non-periodic wall."""


@dataclass(frozen=True)
class AxisSpec:
    lo: float
    hi: float
    n_cells: int
    periodic: bool = False

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ConfigurationError(f"n_cells must be a positive integer, got {self.n_cells}")
        if not np.isfinite(self.lo) or not np.isfinite(self.hi) or not self.hi > self.lo:
            raise ConfigurationError(f"axis needs hi > lo, got [{self.lo}, {self.hi}]")

    @classmethod
    def from_nodes(cls, nodes: Sequence[float], periodic: bool = False, rtol: float = 1e-12) -> AxisSpec:
        """Build an axis from explicit breakpoints, rejecting non-uniform spacing."""
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ConfigurationError("need at least two breakpoints")
        widths = np.diff(nodes)
        if np.any(widths <= 0):
            raise ConfigurationError("breakpoints must be strictly increasing")
        if np.ptp(widths) > rtol * widths.mean():
            raise ConfigurationError("non-uniform axis; only uniform meshes are supported")
        return cls(float(nodes[0]), float(nodes[-1]), nodes.size - 1, periodic)

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.n_cells

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.n_cells) + 0.5) * self.width

    @property
    def faces(self) -> np.ndarray:
        return self.lo + np.arange(self.n_cells + 1) * self.width


@dataclass(frozen=True)
class Mesh:
    """Cartesian product of x axes and v axes.

    A mesh with no v axes is used for the field variables living on the
    spatial domain only.
    """

    x_axes: tuple[AxisSpec, ...]
    v_axes: tuple[AxisSpec, ...] = ()

    @property
    def axes(self) -> tuple[AxisSpec, ...]:
        return self.x_axes + self.v_axes

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def d_x(self) -> int:
        return len(self.x_axes)

    @property
    def d_v(self) -> int:
        return len(self.v_axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n_cells for a in self.axes)

    @property
    def n_elements(self) -> int:
        return int(np.prod(self.shape))

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(a.width for a in self.axes)

    @property
    def element_volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def volume(self) -> float:
        return float(np.prod([a.length for a in self.axes]))

    @property
    def jacobian(self) -> float:
        """Determinant of the affine map from the reference cube ``[-1, 1]^d``."""
        return float(np.prod([0.5 * h for h in self.widths]))

    def x_mesh(self) -> Mesh:
        return Mesh(self.x_axes, ())

    def flatten(self, index: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(index), self.shape))

    def unflatten(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))

    def element_center(self, index: Sequence[int]) -> tuple[float, ...]:
        return tuple(a.lo + (i + 0.5) * a.width for a, i in zip(self.axes, index))

    def describe(self) -> str:
        return "x".join(str(n) for n in self.shape)


def build_mesh(x_axes: Sequence[AxisSpec], v_axes: Sequence[AxisSpec]) -> Mesh:
    """Validate and assemble a phase-space mesh (d_x = 1, d_v in {1, 2})."""
    x_axes, v_axes = tuple(x_axes), tuple(v_axes)
    if len(x_axes) != 1:
        raise ConfigurationError(f"exactly one x axis is supported, got {len(x_axes)}")
    if len(v_axes) not in (1, 2):
        raise ConfigurationError(f"one or two v axes are supported, got {len(v_axes)}")
    if not all(a.periodic for a in x_axes):
        raise ConfigurationError("x axes must be periodic")
    if any(a.periodic for a in v_axes):
        raise ConfigurationError("v axes must be non-periodic")
    return Mesh(x_axes, v_axes)


def neighbor(mesh: Mesh, element: Sequence[int], axis: int, side: str):
    """Multi-index across the ``side`` ('low' or 'high') face of ``element``.

    Periodic axes wrap; a non-periodic outer face returns :data:`BOUNDARY`.
    """
    if side not in ("low", "high"):
        raise ValueError(f"side must be 'low' or 'high', got {side!r}")
    spec = mesh.axes[axis]
    idx = list(element)
    j = idx[axis] + (1 if side == "high" else -1)
    if 0 <= j < spec.n_cells:
        idx[axis] = j
    elif spec.periodic:
        idx[axis] = j % spec.n_cells
    else:
        return BOUNDARY
    return tuple(idx)
