# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled monomial kernel.

An odometer walks the occupations of every mode but the last; their ladder
factors multiply into a prefix that is fixed along the contiguous inner run
over the last mode. Complex data are scaled as interleaved real pairs, since
every coefficient is real. Target rank = source rank + a constant offset.
"""
import numpy as np


def apply_tables(src_arr, const Py_ssize_t[::1] dims, const double[:, ::1] tables,
                 const Py_ssize_t[::1] shifts):
    src_c = np.ascontiguousarray(src_arr, dtype=np.complex128)
    out = np.zeros_like(src_c)
    cdef const double[:, ::1] s = src_c.view(np.float64)
    cdef double[:, ::1] o = out.view(np.float64)
    cdef Py_ssize_t n = dims.shape[0]
    cdef Py_ssize_t width = s.shape[1]
    cdef Py_ssize_t last = dims[n - 1]
    cdef Py_ssize_t n_outer = src_c.shape[0] // last
    cdef Py_ssize_t q, m, i, j, r, t, base, offset = 0, stride = 1
    cdef double prefix, c

    occ_arr = np.zeros(max(n - 1, 1), dtype=np.intp)
    cdef Py_ssize_t[::1] occ = occ_arr

    for i in range(n - 1, -1, -1):
        offset += shifts[i] * stride
        stride *= dims[i]

    for q in range(n_outer):
        prefix = 1.0
        for i in range(n - 1):
            prefix *= tables[i, occ[i]]
            if prefix == 0.0:
                break
        if prefix != 0.0:
            base = q * last
            for m in range(last):
                c = prefix * tables[n - 1, m]
                if c != 0.0:
                    r = base + m
                    t = r + offset
                    for j in range(width):
                        o[t, j] = c * s[r, j]
        i = n - 2
        while i >= 0:
            occ[i] += 1
            if occ[i] < dims[i]:
                break
            occ[i] = 0
            i -= 1
    return out
