"""Pure-numpy reference implementation of the transport kernels.

Signatures match the compiled ``_ckernels`` module exactly; see
:mod:`vmsiac.kernels` for the array layout.
"""
from __future__ import annotations

import numpy as np


def upwind_flux(alpha, f_minus, f_plus):
    """Donor-cell flux ``alpha * f`` with ``f`` taken from the upstream side.

    ``f_minus`` is the trace on the low side of the face, ``f_plus`` on the
    high side.  Equals ``{alpha f} + |alpha|/2 (f_minus - f_plus)``.
    """
    return np.maximum(alpha, 0.0) * f_minus + np.minimum(alpha, 0.0) * f_plus


def axis_rhs(c, alpha_vol, alpha_face, phi_vol, dphi_w, phi_lo, phi_hi, w_face, periodic, out):
    na = c.shape[1]
    fq = c @ phi_vol.T
    out += (fq * alpha_vol) @ dphi_w

    f_hi = c @ phi_hi.T
    f_lo = c @ phi_lo.T
    if periodic:
        flux = upwind_flux(alpha_face[:, :na], np.roll(f_hi, 1, axis=1), f_lo) * w_face
        out += flux @ phi_lo
        out -= np.roll(flux, -1, axis=1) @ phi_hi
    else:
        pad = np.zeros_like(f_hi[:, :1])
        fm = np.concatenate([pad, f_hi], axis=1)
        fp = np.concatenate([f_lo, pad], axis=1)
        flux = upwind_flux(alpha_face, fm, fp) * w_face
        out += flux[:, :na] @ phi_lo
        out -= flux[:, 1:] @ phi_hi
    return out
