"""Pure-numpy RK4 loop with the same contract as the compiled ``_rk4.advance``."""

import numpy as np
import scipy.sparse as sp


def _dense_pattern(indptr, indices, data, n):
    return sp.csr_matrix((data, indices, indptr), shape=(n, n)).toarray()


def advance(rho, indptr, indices, base, terms, coef, dt, jrow, jcol, jval, joff):
    n = rho.shape[1]
    k0 = _dense_pattern(indptr, indices, np.asarray(base), n)
    tm = np.stack([_dense_pattern(indptr, indices, np.asarray(t), n) for t in terms]) if len(terms) else np.zeros((0, n, n), complex)
    jumps = []
    for q in range(len(joff) - 1):
        sl = slice(joff[q], joff[q + 1])
        jumps.append(sp.csr_matrix((jval[sl], (jrow[sl], jcol[sl])), shape=(n, n)).toarray())
    cj = np.stack(jumps) if jumps else np.zeros((0, n, n), complex)
    cjd = cj.conj().transpose(0, 2, 1)

    def rhs(r, k):
        out = k @ r
        out += r @ k.conj().T
        if len(cj):
            out += (cj[None] @ r[:, None] @ cjd[None]).sum(axis=1)
        return out

    for s in range(coef.shape[0]):
        ks = [k0 + np.tensordot(coef[s, c], tm, axes=1) for c in range(3)]
        r1 = rhs(rho, ks[0])
        r2 = rhs(rho + 0.5 * dt * r1, ks[1])
        r3 = rhs(rho + 0.5 * dt * r2, ks[1])
        r4 = rhs(rho + dt * r3, ks[2])
        rho += (dt / 6.0) * (r1 + 2 * r2 + 2 * r3 + r4)
