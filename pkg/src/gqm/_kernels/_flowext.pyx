# cython: language_level=3
"""Compiled twin of the pure numpy flow kernel (see pure.py for the
semantics).  Scalar loops over small dense arrays; no BLAS needed."""

import numpy as np

cimport cython
cimport numpy as cnp

from libc.math cimport ceil, fabs, sqrt

cnp.import_array()

BACKEND = "cython"


@cython.boundscheck(False)
@cython.wraparound(False)
cdef double _velocity(const double complex[:, ::1] a, int power, double hbar,
                      int pivot, const double complex[::1] z,
                      double complex[::1] psi, double complex[::1] u,
                      double complex[::1] zdot) nogil:
    """Fill zdot with dz/dt at z; return the energy H = E**power."""
    cdef int dim = a.shape[0]
    cdef int n = dim - 1
    cdef int i, j, k
    cdef double complex acc, s
    cdef double nsq, e0n, e0, fp

    k = 0
    for j in range(dim):
        if j == pivot:
            psi[j] = 1.0
        else:
            psi[j] = z[k]
            k += 1
    for i in range(dim):
        acc = 0.0
        for j in range(dim):
            acc = acc + a[i, j] * psi[j]
        u[i] = acc

    s = 0.0
    nsq = 1.0
    k = 0
    for j in range(dim):
        if j != pivot:
            s = s + z[k].conjugate() * u[j]
            nsq += z[k].real * z[k].real + z[k].imag * z[k].imag
            k += 1
    e0n = (u[pivot] + s).real
    e0 = e0n / nsq

    fp = 1.0
    if power != 1:
        fp = power
        for i in range(power - 1):
            fp *= e0

    cdef double complex factor = -1j * fp / hbar
    k = 0
    for j in range(dim):
        if j != pivot:
            zdot[k] = factor * (u[j] + z[k] * s - e0n * z[k])
            k += 1

    cdef double energy = 1.0
    for i in range(power):
        energy *= e0
    return energy


def chart_velocity(a, int power, int pivot, coords, double hbar):
    """Real 2n chart velocity of the symplectic gradient flow, plus energy."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] amat = np.ascontiguousarray(a, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(coords, dtype=np.float64)
    cdef int dim = amat.shape[0]
    cdef int n = dim - 1
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] psi = np.empty(dim, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] u = np.empty(dim, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zdot = np.empty(n, dtype=np.complex128)
    cdef int i
    for i in range(n):
        z[i] = x[i] + 1j * x[n + i]
    cdef double energy = _velocity(amat, power, hbar, pivot, z, psi, u, zdot)
    out = np.empty(2 * n, dtype=np.float64)
    out[:n] = np.asarray(zdot).real
    out[n:] = np.asarray(zdot).imag
    return out, energy


@cython.boundscheck(False)
@cython.wraparound(False)
def rk4_chart_flow(a, int power, int pivot, coords, double t, double dt,
                   double hbar, double recenter=2.0, double drift_tol=1e-6,
                   int record_stride=1):
    """Fixed-step RK4 integration of the chart flow; see pure.rk4_chart_flow."""
    from ..errors import StepRejectionError

    cdef cnp.ndarray[cnp.complex128_t, ndim=2] amat = np.ascontiguousarray(a, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x0 = np.ascontiguousarray(coords, dtype=np.float64)
    cdef int dim = amat.shape[0]
    cdef int n = dim - 1
    if t < 0 or dt <= 0:
        raise ValueError("need t >= 0 and dt > 0")

    cdef long n_steps = 0
    if t > 0:
        n_steps = <long>ceil(t / dt - 1e-12)
        if n_steps < 1:
            n_steps = 1
    cdef double h = t / n_steps if n_steps > 0 else 0.0

    # preallocate the record arrays
    cdef long n_rec = 1
    cdef long k
    if n_steps > 0:
        if record_stride > 0:
            n_rec = 1 + n_steps // record_stride
            if n_steps % record_stride != 0:
                n_rec += 1
        else:
            n_rec = 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rec_t = np.empty(n_rec, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rec_p = np.empty(n_rec, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rec_x = np.empty((n_rec, 2 * n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rec_e = np.empty(n_rec, dtype=np.float64)

    cdef double complex[::1] z = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ztmp = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k1 = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k2 = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k3 = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] k4 = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] psi = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] u = np.empty(dim, dtype=np.complex128)

    cdef int i, j, m, new_pivot
    cdef long step
    cdef long rec_i = 0
    cdef double e_prev, e_now, best, mag
    cdef double complex piv_val

    for i in range(n):
        z[i] = x0[i] + 1j * x0[n + i]

    e_prev = _velocity(amat, power, hbar, pivot, z, psi, u, k1)
    rec_t[0] = 0.0
    rec_p[0] = pivot
    for i in range(n):
        rec_x[0, i] = z[i].real
        rec_x[0, n + i] = z[i].imag
    rec_e[0] = e_prev
    rec_i = 1

    for step in range(n_steps):
        _velocity(amat, power, hbar, pivot, z, psi, u, k1)
        for i in range(n):
            ztmp[i] = z[i] + 0.5 * h * k1[i]
        _velocity(amat, power, hbar, pivot, ztmp, psi, u, k2)
        for i in range(n):
            ztmp[i] = z[i] + 0.5 * h * k2[i]
        _velocity(amat, power, hbar, pivot, ztmp, psi, u, k3)
        for i in range(n):
            ztmp[i] = z[i] + h * k3[i]
        _velocity(amat, power, hbar, pivot, ztmp, psi, u, k4)
        for i in range(n):
            z[i] = z[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

        e_now = _velocity(amat, power, hbar, pivot, z, psi, u, k1)
        if fabs(e_now - e_prev) > drift_tol:
            raise StepRejectionError(
                f"energy moved by {fabs(e_now - e_prev):.3e} in one step "
                f"(> {drift_tol:.1e}); reduce dt={dt}"
            )
        e_prev = e_now

        # re-center on the largest homogeneous component when needed
        mag = 0.0
        for i in range(n):
            best = sqrt(z[i].real * z[i].real + z[i].imag * z[i].imag)
            if best > mag:
                mag = best
        if mag > recenter:
            m = 0
            for j in range(dim):
                if j == pivot:
                    psi[j] = 1.0
                else:
                    psi[j] = z[m]
                    m += 1
            new_pivot = 0
            best = 0.0
            for j in range(dim):
                mag = sqrt(psi[j].real * psi[j].real + psi[j].imag * psi[j].imag)
                if mag > best:
                    best = mag
                    new_pivot = j
            if new_pivot != pivot:
                piv_val = psi[new_pivot]
                m = 0
                for j in range(dim):
                    if j != new_pivot:
                        ztmp[m] = psi[j] / piv_val
                        m += 1
                for i in range(n):
                    z[i] = ztmp[i]
                pivot = new_pivot

        if (step == n_steps - 1) or (record_stride > 0 and (step + 1) % record_stride == 0):
            rec_t[rec_i] = (step + 1) * h
            rec_p[rec_i] = pivot
            for i in range(n):
                rec_x[rec_i, i] = z[i].real
                rec_x[rec_i, n + i] = z[i].imag
            rec_e[rec_i] = e_now
            rec_i += 1

    return rec_t[:rec_i], rec_p[:rec_i], rec_x[:rec_i], rec_e[:rec_i]
