"""Backend selection for the transport kernels.

The compiled extension ``_ckernels`` is used when importable; otherwise, or
when ``VMSIAC_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the numpy implementation in ``_kernels_py`` is used.

``axis_rhs(c, alpha_vol, alpha_face, phi_vol, dphi_w, phi_lo, phi_hi,
w_face, periodic, out)`` accumulates into ``out`` the reference-scaled
residual of ``d/dt f + d/dxi (alpha f) = 0`` along one mesh axis:

* ``c``: ``(nb, na, nc, nm)`` coefficients; ``na`` is the flux axis.
* ``alpha_vol``: ``(nb, na, nc, nq)`` speed at volume nodes.
* ``alpha_face``: ``(nb, na + 1, nc, nqf)`` speed at face nodes; face ``i``
  is the low face of element ``i``.  For periodic axes face ``na`` is unused.
* ``phi_vol`` ``(nq, nm)``, ``dphi_w`` ``(nq, nm)`` (weight times reference
  derivative along the axis), ``phi_lo``/``phi_hi`` ``(nqf, nm)`` traces,
  ``w_face`` ``(nqf,)``.

The caller multiplies the result by ``2 / h`` of the axis.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_force_python = os.environ.get("VMSIAC_PURE_PYTHON", "") not in ("", "0")

if not _force_python:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

axis_rhs = _impl.axis_rhs
upwind_flux = _kernels_py.upwind_flux

__all__ = ["BACKEND", "axis_rhs", "upwind_flux"]
