# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scaled odd theta series; same contract as ``_theta_py.theta_series``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, M_PI

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex csin(double complex)
    double complex ccos(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)

cnp.import_array()

cdef enum:
    MAX_TERMS = 200

cdef double REL_STOP = 1e-16


cdef inline void _ssc(double complex w, double complex* sn, double complex* cn) nogil:
    cdef double a = fabs(cimag(w))
    cdef double sg
    cdef double complex big
    if a < 20.0:
        sn[0] = csin(w) * exp(-a)
        cn[0] = ccos(w) * exp(-a)
    else:
        sg = 1.0 if cimag(w) >= 0.0 else -1.0
        big = 0.5 * cexp(-1j * sg * creal(w))
        sn[0] = big * (1j * sg)
        cn[0] = big


def theta_series(v, double complex tau):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] vv = np.ascontiguousarray(
        np.ravel(np.asarray(v, dtype=np.complex128)))
    cdef Py_ssize_t npts = vv.shape[0], i
    cdef int n, k, maxn = 0
    cdef bint failed = 0
    cdef double s, mag, ref
    cdef double complex amp, sn, cn, t0, t1, t2, t3, a0, a1, a2, a3, w
    out = np.empty((4, npts), dtype=np.complex128)
    sarr = np.empty(npts, dtype=np.float64)
    cdef cnp.complex128_t[:, ::1] o = out
    cdef double[::1] sv = sarr
    cdef double complex ipt = 1j * M_PI * tau
    with nogil:
        for i in range(npts):
            w = vv[i]
            s = fabs(cimag(w))
            a0 = 0; a1 = 0; a2 = 0; a3 = 0
            for n in range(MAX_TERMS):
                k = 2 * n + 1
                amp = cexp(ipt * (n * n + n) + (k - 1) * s)
                if n % 2:
                    amp = -amp
                _ssc(k * w, &sn, &cn)
                t0 = amp * sn
                t1 = amp * k * cn
                t2 = -amp * k * k * sn
                t3 = -amp * k * k * k * cn
                a0 += t0; a1 += t1; a2 += t2; a3 += t3
                mag = max(max(cabs(t0), cabs(t1)), max(cabs(t2), cabs(t3)))
                ref = max(max(cabs(a0), cabs(a1)), max(cabs(a2), cabs(a3)))
                if mag <= REL_STOP * ref:
                    break
            else:
                failed = 1
            if n + 1 > maxn:
                maxn = n + 1
            o[0, i] = a0; o[1, i] = a1; o[2, i] = a2; o[3, i] = a3
            sv[i] = s
    if failed:
        raise OverflowError("theta series did not converge within 200 terms")
    shp = np.shape(v)
    return (out[0].reshape(shp), out[1].reshape(shp), out[2].reshape(shp),
            out[3].reshape(shp), sarr.reshape(shp), maxn)
