"""Hot kernels with a numba backend and a pure-numpy fallback.

The active backend is numba unless ``SYMVORT_DISABLE_NUMBA`` is set or numba
is missing. Both backends expose the same names; ``get_backend`` gives either
explicitly (used by the backend-parity tests and the benchmark).
"""
from types import SimpleNamespace

from .._jit import HAS_NUMBA, numba_available
from . import numpy_backend, steppers

_cache = {}


def _identity(f):
    return f


def get_backend(name):
    if name in _cache:
        return _cache[name]
    if name == "numba":
        if not numba_available():
            raise RuntimeError("numba backend requested but numba is not installed")
        from numba import njit

        from . import numba_backend as kern

        jit = njit(nogil=True)
    elif name == "numpy":
        kern = numpy_backend
        jit = _identity
    else:
        raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    ns = SimpleNamespace(
        name=name,
        hamiltonian=kern.hamiltonian,
        gradient=kern.gradient,
        velocity=kern.velocity,
        hessian=kern.hessian,
        velocity_jacobian=kern.velocity_jacobian,
        min_separation2=kern.min_separation2,
        **steppers.build(kern, jit),
    )
    _cache[name] = ns
    return ns


def active():
    return get_backend("numba" if HAS_NUMBA else "numpy")


MIDPOINT = steppers.MIDPOINT
RK4 = steppers.RK4
