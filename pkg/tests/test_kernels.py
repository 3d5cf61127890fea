import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from cherenkov_causality import kernels
from cherenkov_causality.dynamics import KET_E, KET_G, _rotating_frame_generator, product_with_vacuum, propagate
from cherenkov_causality.model import PhysicalConfig

needs_extension = pytest.mark.skipif(not kernels.HAVE_EXTENSION, reason="compiled kernel not built")


def _batch(cfg):
    return np.stack([product_with_vacuum(np.outer(a, b), cfg)
                     for a, b in ((KET_E, KET_E), (KET_G, KET_G), (KET_E, KET_G))])


class TestBackendSelection:
    def test_unknown_backend(self):
        with pytest.raises(ValueError, match="backend"):
            kernels.get_advance("fortran")

    def test_python_always_available(self):
        assert "python" in kernels.BACKENDS

    def test_env_var_forces_fallback(self):
        env = dict(os.environ, CHERENKOV_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c", "from cherenkov_causality import kernels; print(kernels.DEFAULT_BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"

    @needs_extension
    def test_default_is_compiled(self):
        env = {k: v for k, v in os.environ.items() if k != "CHERENKOV_PURE_PYTHON"}
        out = subprocess.run([sys.executable, "-c", "from cherenkov_causality import kernels; print(kernels.DEFAULT_BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "compiled"


@needs_extension
class TestBackendAgreement:
    @pytest.mark.parametrize("kw", [dict(fock_cutoff=3), dict(n_modes=2, fock_cutoff=2, T2=5e-6)])
    def test_propagation(self, kw):
        cfg = PhysicalConfig(**kw)
        rho = _batch(cfg)
        times = np.linspace(0, 3e-8, 4)
        a = propagate(rho, cfg, times, backend="python", keep_full=True, check_trace=False)
        b = propagate(rho, cfg, times, backend="compiled", keep_full=True, check_trace=False)
        assert_allclose(a, b, atol=1e-13)

    def test_single_step_against_generator(self):
        # one RK4 step from both kernels against an explicit dense RK4 step
        cfg = PhysicalConfig(fock_cutoff=3, T2=5e-6)
        gen = _rotating_frame_generator(cfg)
        n = cfg.dim
        rng = np.random.default_rng(0)
        rho = rng.normal(size=(2, n, n)) + 1j * rng.normal(size=(2, n, n))
        dt = 1e-11
        coef = np.ascontiguousarray(gen.coefficients(np.array([[0.0, 0.5 * dt, dt]])))

        def dense(data):
            return sp.csr_matrix((data, gen.indices, gen.indptr), shape=(n, n)).toarray()

        jumps = [sp.csr_matrix((gen.jval[a:b], (gen.jrow[a:b], gen.jcol[a:b])), shape=(n, n)).toarray()
                 for a, b in zip(gen.joff[:-1], gen.joff[1:])]

        def rhs(r, c):
            k = dense(gen.base) + sum(cm * dense(tm) for cm, tm in zip(coef[0, c], gen.terms))
            return k @ r + r @ k.conj().T + sum(j @ r @ j.conj().T for j in jumps)

        expect = []
        for r in rho:
            k1 = rhs(r, 0)
            k2 = rhs(r + 0.5 * dt * k1, 1)
            k3 = rhs(r + 0.5 * dt * k2, 1)
            k4 = rhs(r + dt * k3, 2)
            expect.append(r + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        for name in ("python", "compiled"):
            out = rho.copy()
            kernels.BACKENDS[name](out, gen.indptr, gen.indices, gen.base, gen.terms, coef, dt,
                                   gen.jrow, gen.jcol, gen.jval, gen.joff)
            assert_allclose(out, np.array(expect), rtol=1e-12, atol=1e-12)

    def test_zero_steps_is_noop(self):
        cfg = PhysicalConfig(fock_cutoff=2)
        gen = _rotating_frame_generator(cfg)
        rho = _batch(cfg)
        before = rho.copy()
        kernels.BACKENDS["compiled"](rho, gen.indptr, gen.indices, gen.base, gen.terms,
                                     np.zeros((0, 3, gen.terms.shape[0]), complex), 1e-12,
                                     gen.jrow, gen.jcol, gen.jval, gen.joff)
        assert_allclose(rho, before)
