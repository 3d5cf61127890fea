# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled fixed-step RK4 loop for a Lindblad generator with sparse operators.

The generator is ``L(rho) = K rho + rho K^dag + sum_k C_k rho C_k^dag`` with
``K(t) = base + sum_m coef_m(t) terms_m`` stored on one shared CSR pattern.
"""

import numpy as np

cdef extern from "complex.h" nogil:
    double complex conj(double complex)


cdef void _rhs(const double complex* rho, double complex* out,
               const int* indptr, const int* indices, const double complex* kd,
               const int* jrow, const int* jcol, const double complex* jval,
               const int* joff, Py_ssize_t njump, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k, l, p, q, r
    cdef double complex v, a, acc
    cdef const double complex* src
    cdef double complex* dst
    for i in range(n * n):
        out[i] = 0
    for i in range(n):
        dst = out + i * n
        # K rho, row i
        for p in range(indptr[i], indptr[i + 1]):
            v = kd[p]
            src = rho + indices[p] * n
            for j in range(n):
                dst[j] = dst[j] + v * src[j]
        # rho K^dag, row i: sum_k rho_ik conj(K_jk)
        src = rho + i * n
        for j in range(n):
            acc = 0
            for p in range(indptr[j], indptr[j + 1]):
                acc = acc + src[indices[p]] * conj(kd[p])
            dst[j] = dst[j] + acc
    # C rho C^dag
    for q in range(njump):
        for p in range(joff[q], joff[q + 1]):
            i = jrow[p]
            k = jcol[p]
            a = jval[p]
            for r in range(joff[q], joff[q + 1]):
                j = jrow[r]
                l = jcol[r]
                out[i * n + j] = out[i * n + j] + a * rho[k * n + l] * conj(jval[r])


def advance(double complex[:, :, ::1] rho,
            const int[::1] indptr, const int[::1] indices,
            const double complex[::1] base, const double complex[:, ::1] terms,
            const double complex[:, :, ::1] coef, double dt,
            const int[::1] jrow, const int[::1] jcol, const double complex[::1] jval,
            const int[::1] joff):
    """Advance every state in ``rho`` (shape ``(B, D, D)``) by ``coef.shape[0]`` steps, in place.

    ``coef[s, c, m]`` is the coefficient of ``terms[m]`` at the start (c=0),
    midpoint (c=1) and end (c=2) of step ``s``.
    """
    cdef Py_ssize_t nb = rho.shape[0], n = rho.shape[1]
    cdef Py_ssize_t nn = n * n
    cdef Py_ssize_t nsteps = coef.shape[0], nterm = terms.shape[0], nnz = base.shape[0]
    cdef Py_ssize_t njump = joff.shape[0] - 1
    cdef Py_ssize_t s, c, m, p, b, i
    cdef double complex w
    if nsteps == 0 or nb == 0:
        return

    work_np = np.empty((5, nn), dtype=np.complex128)
    kd_np = np.empty((3, nnz), dtype=np.complex128)
    cdef double complex[:, ::1] work = work_np
    cdef double complex[:, ::1] kdv = kd_np
    cdef double complex* k1 = &work[0, 0]
    cdef double complex* k2 = &work[1, 0]
    cdef double complex* k3 = &work[2, 0]
    cdef double complex* k4 = &work[3, 0]
    cdef double complex* tmp = &work[4, 0]
    cdef double complex* kd = &kdv[0, 0]
    cdef const double complex* tm = &terms[0, 0] if nterm > 0 else NULL
    cdef const int* ip = &indptr[0]
    cdef const int* ix = &indices[0] if nnz > 0 else NULL
    cdef const int* jr = &jrow[0] if jrow.shape[0] > 0 else NULL
    cdef const int* jc = &jcol[0] if jcol.shape[0] > 0 else NULL
    cdef const double complex* jv = &jval[0] if jval.shape[0] > 0 else NULL
    cdef const int* jo = &joff[0]
    cdef double complex* r
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0

    with nogil:
        for s in range(nsteps):
            for c in range(3):
                for p in range(nnz):
                    kd[c * nnz + p] = base[p]
                for m in range(nterm):
                    w = coef[s, c, m]
                    for p in range(nnz):
                        kd[c * nnz + p] = kd[c * nnz + p] + w * tm[m * nnz + p]
            for b in range(nb):
                r = &rho[b, 0, 0]
                _rhs(r, k1, ip, ix, kd, jr, jc, jv, jo, njump, n)
                for i in range(nn):
                    tmp[i] = r[i] + h2 * k1[i]
                _rhs(tmp, k2, ip, ix, kd + nnz, jr, jc, jv, jo, njump, n)
                for i in range(nn):
                    tmp[i] = r[i] + h2 * k2[i]
                _rhs(tmp, k3, ip, ix, kd + nnz, jr, jc, jv, jo, njump, n)
                for i in range(nn):
                    tmp[i] = r[i] + dt * k3[i]
                _rhs(tmp, k4, ip, ix, kd + 2 * nnz, jr, jc, jv, jo, njump, n)
                for i in range(nn):
                    r[i] = r[i] + h6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
