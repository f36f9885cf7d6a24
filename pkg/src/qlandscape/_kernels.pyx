# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled density-matrix kernels.

Same contract as ``_kernels_py``: four in-place operations on a
C-contiguous complex128 matrix of dimension 2**n, qubit 0 = least
significant bit of the basis index.
"""


cpdef void apply_1q(double complex[:, ::1] rho, double complex[:, ::1] u, Py_ssize_t q):
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t mask = 1 << q
    cdef Py_ssize_t step = mask << 1
    cdef Py_ssize_t base, off, i, i0, i1, j
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef double complex c00 = u00.conjugate(), c01 = u01.conjugate()
    cdef double complex c10 = u10.conjugate(), c11 = u11.conjugate()
    cdef double complex a, b

    for base in range(0, dim, step):
        for off in range(mask):
            i0 = base + off
            i1 = i0 + mask
            for j in range(dim):
                a = rho[i0, j]
                b = rho[i1, j]
                rho[i0, j] = u00 * a + u01 * b
                rho[i1, j] = u10 * a + u11 * b
    for i in range(dim):
        for base in range(0, dim, step):
            for off in range(mask):
                i0 = base + off
                i1 = i0 + mask
                a = rho[i, i0]
                b = rho[i, i1]
                rho[i, i0] = a * c00 + b * c01
                rho[i, i1] = a * c10 + b * c11


cpdef void apply_2q(double complex[:, ::1] rho, double complex[:, ::1] u,
                    Py_ssize_t q_hi, Py_ssize_t q_lo):
    """u is 4x4 in the (q_hi, q_lo) tensor basis, index 2*bit_hi + bit_lo."""
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t mh = 1 << q_hi
    cdef Py_ssize_t ml = 1 << q_lo
    cdef Py_ssize_t a_, b_, c_, j, i, k, r
    cdef Py_ssize_t idx[4]
    cdef double complex v[4]
    cdef double complex w[4]
    cdef double complex um[4][4]
    cdef double complex uc[4][4]

    for k in range(4):
        for r in range(4):
            um[k][r] = u[k, r]
            uc[k][r] = u[k, r].conjugate()

    for a_ in range(0, dim, 2 * mh):
        for b_ in range(0, mh, 2 * ml):
            for c_ in range(ml):
                idx[0] = a_ + b_ + c_
                idx[1] = idx[0] + ml
                idx[2] = idx[0] + mh
                idx[3] = idx[2] + ml
                for j in range(dim):
                    for k in range(4):
                        v[k] = rho[idx[k], j]
                    for k in range(4):
                        rho[idx[k], j] = (um[k][0] * v[0] + um[k][1] * v[1]
                                          + um[k][2] * v[2] + um[k][3] * v[3])
    for i in range(dim):
        for a_ in range(0, dim, 2 * mh):
            for b_ in range(0, mh, 2 * ml):
                for c_ in range(ml):
                    idx[0] = a_ + b_ + c_
                    idx[1] = idx[0] + ml
                    idx[2] = idx[0] + mh
                    idx[3] = idx[2] + ml
                    for k in range(4):
                        v[k] = rho[i, idx[k]]
                    for k in range(4):
                        w[k] = (v[0] * uc[k][0] + v[1] * uc[k][1]
                                + v[2] * uc[k][2] + v[3] * uc[k][3])
                        rho[i, idx[k]] = w[k]


cpdef void damp(double complex[:, ::1] rho, Py_ssize_t q, double keep, double coh):
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t mask = 1 << q
    cdef Py_ssize_t step = mask << 1
    cdef Py_ssize_t rb, ro, cb, co, i0, i1, j0, j1
    cdef double loss = 1.0 - keep

    for rb in range(0, dim, step):
        for ro in range(mask):
            i0 = rb + ro
            i1 = i0 + mask
            for cb in range(0, dim, step):
                for co in range(mask):
                    j0 = cb + co
                    j1 = j0 + mask
                    rho[i0, j0] = rho[i0, j0] + loss * rho[i1, j1]
                    rho[i1, j1] = keep * rho[i1, j1]
                    rho[i0, j1] = coh * rho[i0, j1]
                    rho[i1, j0] = coh * rho[i1, j0]


cpdef void depolarize(double complex[:, ::1] rho, Py_ssize_t q, double p):
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t mask = 1 << q
    cdef Py_ssize_t step = mask << 1
    cdef Py_ssize_t rb, ro, cb, co, i0, i1, j0, j1
    cdef double c_stay = 1.0 - 2.0 * p / 3.0
    cdef double c_swap = 2.0 * p / 3.0
    cdef double c_off = 1.0 - 4.0 * p / 3.0
    cdef double complex t0, t3

    for rb in range(0, dim, step):
        for ro in range(mask):
            i0 = rb + ro
            i1 = i0 + mask
            for cb in range(0, dim, step):
                for co in range(mask):
                    j0 = cb + co
                    j1 = j0 + mask
                    t0 = rho[i0, j0]
                    t3 = rho[i1, j1]
                    rho[i0, j0] = c_stay * t0 + c_swap * t3
                    rho[i1, j1] = c_swap * t0 + c_stay * t3
                    rho[i0, j1] = c_off * rho[i0, j1]
                    rho[i1, j0] = c_off * rho[i1, j0]
