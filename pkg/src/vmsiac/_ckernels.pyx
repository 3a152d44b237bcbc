# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled transport kernels; mirrors ``_kernels_py``."""


cdef inline double _upwind(double a, double fm, double fp) noexcept nogil:
    if a > 0.0:
        return a * fm
    return a * fp


def upwind_flux(double alpha, double f_minus, double f_plus):
    return _upwind(alpha, f_minus, f_plus)


def axis_rhs(const double[:, :, :, ::1] c,
             const double[:, :, :, :] alpha_vol,
             const double[:, :, :, :] alpha_face,
             const double[:, ::1] phi_vol,
             const double[:, ::1] dphi_w,
             const double[:, ::1] phi_lo,
             const double[:, ::1] phi_hi,
             const double[::1] w_face,
             bint periodic,
             double[:, :, :, ::1] out):
    cdef Py_ssize_t nb = c.shape[0], na = c.shape[1], nc = c.shape[2], nm = c.shape[3]
    cdef Py_ssize_t nq = phi_vol.shape[0], nqf = phi_lo.shape[0]
    cdef Py_ssize_t b, a, k, q, m, f, left, right, n_faces
    cdef double s, g, fm, fp, flux
    n_faces = na if periodic else na + 1

    with nogil:
        for b in range(nb):
            for a in range(na):
                for k in range(nc):
                    for q in range(nq):
                        s = 0.0
                        for m in range(nm):
                            s = s + c[b, a, k, m] * phi_vol[q, m]
                        g = s * alpha_vol[b, a, k, q]
                        for m in range(nm):
                            out[b, a, k, m] += g * dphi_w[q, m]

            for f in range(n_faces):
                right = f if f < na else -1
                if f > 0:
                    left = f - 1
                elif periodic:
                    left = na - 1
                else:
                    left = -1
                for k in range(nc):
                    for q in range(nqf):
                        fm = 0.0
                        fp = 0.0
                        if left >= 0:
                            for m in range(nm):
                                fm = fm + c[b, left, k, m] * phi_hi[q, m]
                        if right >= 0:
                            for m in range(nm):
                                fp = fp + c[b, right, k, m] * phi_lo[q, m]
                        flux = _upwind(alpha_face[b, f, k, q], fm, fp) * w_face[q]
                        if left >= 0:
                            for m in range(nm):
                                out[b, left, k, m] -= flux * phi_hi[q, m]
                        if right >= 0:
                            for m in range(nm):
                                out[b, right, k, m] += flux * phi_lo[q, m]
    return out
