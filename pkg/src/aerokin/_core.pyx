# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled particle kernels: cloud-in-cell deposit and gather, drift, drag kick.

Grid nodes sit at x = i/N on the unit torus; a field of shape (c, N, N, N)
is passed flattened to (c, N**3) in C order.
"""

from libc.math cimport floor


cdef inline void _cell(double x, int n, Py_ssize_t* lo, Py_ssize_t* hi, double* frac) noexcept nogil:
    cdef double s = x * n
    cdef double base = floor(s)
    cdef Py_ssize_t i = <Py_ssize_t>base
    frac[0] = s - base
    i = i % n
    if i < 0:
        i += n
    lo[0] = i
    hi[0] = i + 1 if i + 1 < n else 0


def deposit_chunk(const double[:, ::1] x, const double[:, ::1] v, const double[::1] w,
                  Py_ssize_t start, Py_ssize_t stop, int n,
                  double[::1] rho, double[:, ::1] flux):
    """Accumulate w_p and w_p v_p onto the 8 surrounding nodes, particles start..stop-1."""
    cdef Py_ssize_t p, a, b, c, node
    cdef Py_ssize_t ix[2]
    cdef Py_ssize_t iy[2]
    cdef Py_ssize_t iz[2]
    cdef double fx[2]
    cdef double fy[2]
    cdef double fz[2]
    cdef double f, wt, share
    with nogil:
        for p in range(start, stop):
            _cell(x[p, 0], n, &ix[0], &ix[1], &f)
            fx[0] = 1.0 - f
            fx[1] = f
            _cell(x[p, 1], n, &iy[0], &iy[1], &f)
            fy[0] = 1.0 - f
            fy[1] = f
            _cell(x[p, 2], n, &iz[0], &iz[1], &f)
            fz[0] = 1.0 - f
            fz[1] = f
            wt = w[p]
            for a in range(2):
                for b in range(2):
                    for c in range(2):
                        node = (ix[a] * n + iy[b]) * n + iz[c]
                        share = wt * fx[a] * fy[b] * fz[c]
                        rho[node] += share
                        flux[0, node] += share * v[p, 0]
                        flux[1, node] += share * v[p, 1]
                        flux[2, node] += share * v[p, 2]


def gather_chunk(const double[:, ::1] field, const double[:, ::1] x,
                 Py_ssize_t start, Py_ssize_t stop, int n, double[:, ::1] out):
    """Trilinear interpolation of each field component at particles start..stop-1."""
    cdef Py_ssize_t p, a, b, c, k, node
    cdef Py_ssize_t ncomp = field.shape[0]
    cdef Py_ssize_t ix[2]
    cdef Py_ssize_t iy[2]
    cdef Py_ssize_t iz[2]
    cdef double fx[2]
    cdef double fy[2]
    cdef double fz[2]
    cdef double f, share
    with nogil:
        for p in range(start, stop):
            _cell(x[p, 0], n, &ix[0], &ix[1], &f)
            fx[0] = 1.0 - f
            fx[1] = f
            _cell(x[p, 1], n, &iy[0], &iy[1], &f)
            fy[0] = 1.0 - f
            fy[1] = f
            _cell(x[p, 2], n, &iz[0], &iz[1], &f)
            fz[0] = 1.0 - f
            fz[1] = f
            for k in range(ncomp):
                out[p, k] = 0.0
            for a in range(2):
                for b in range(2):
                    for c in range(2):
                        node = (ix[a] * n + iy[b]) * n + iz[c]
                        share = fx[a] * fy[b] * fz[c]
                        for k in range(ncomp):
                            out[p, k] += share * field[k, node]


def drift(double[:, ::1] x, const double[:, ::1] v, double dt):
    """x <- (x + v dt) mod 1, kept inside [0, 1)."""
    cdef Py_ssize_t p, k
    cdef double s
    with nogil:
        for p in range(x.shape[0]):
            for k in range(3):
                s = x[p, k] + v[p, k] * dt
                s = s - floor(s)
                # tiny negatives round up to exactly 1.0
                if s >= 1.0:
                    s = 0.0
                x[p, k] = s


def kick(double[:, ::1] v, const double[:, ::1] u, double factor):
    """v <- u + (v - u) factor."""
    cdef Py_ssize_t p, k
    with nogil:
        for p in range(v.shape[0]):
            for k in range(3):
                v[p, k] = u[p, k] + (v[p, k] - u[p, k]) * factor
