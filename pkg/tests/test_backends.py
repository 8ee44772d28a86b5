import os
import subprocess
import sys

import numpy as np
import pytest

from symvort import core, kernels
from symvort._jit import numba_available

pytestmark = pytest.mark.skipif(not numba_available(), reason="numba not installed")


@pytest.fixture(scope="module")
def backends():
    return kernels.get_backend("numpy"), kernels.get_backend("numba")


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 2, 5])
def test_kernel_parity(backends, m, n):
    sys = core.random_system(m, n, np.random.default_rng(m * 10 + n), strengths=np.linspace(-1.5, 2.0, n) + 0.1)
    z, gam = core.kernel_arrays(sys)
    c, a = core.energy_prefactor(m), core.force_prefactor(m)
    npy, nb = backends
    assert nb.hamiltonian(z, gam, m, c) == pytest.approx(npy.hamiltonian(z, gam, m, c), rel=1e-13, abs=1e-15)
    for name in ("gradient", "velocity", "hessian", "velocity_jacobian"):
        x, y = getattr(npy, name)(z, gam, m, a), getattr(nb, name)(z, gam, m, a)
        assert np.allclose(x, y, rtol=1e-12, atol=1e-14), name
    assert nb.min_separation2(z, n, m) == pytest.approx(npy.min_separation2(z, n, m))


@pytest.mark.parametrize("scheme", [kernels.MIDPOINT, kernels.RK4])
def test_stepper_parity(backends, scheme):
    sys = core.random_system(2, 3, np.random.default_rng(1), min_sep=0.5)
    z, gam = core.kernel_arrays(sys)
    a = core.force_prefactor(2)
    w = np.random.default_rng(2).standard_normal(z.size)
    outs = [be.run_tangent(z.copy(), w.copy(), gam, 2, a, 1e-2, scheme, 1e-13, 50, 1e-20, 100) for be in backends]
    (z0, w0, _, s0, d0), (z1, w1, _, s1, d1) = outs
    assert s0 == s1 == 0 and d0 == d1 == 100
    assert np.allclose(z0, z1, rtol=1e-11, atol=1e-12)
    assert np.allclose(w0, w1, rtol=1e-9, atol=1e-10)


def test_env_flag_selects_numpy():
    env = dict(os.environ, SYMVORT_DISABLE_NUMBA="1")
    code = "from symvort import kernels, HAS_NUMBA; print(kernels.active().name, HAS_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "False"]
