"""Phase space, Hamiltonian and vector field of point vortices in R^{2m}.

Positions are stored flat and interleaved per vortex,
``(x_{j,1}, y_{j,1}, ..., x_{j,m}, y_{j,m})`` for ``j = 1..N``, so that the
complex structure acts on consecutive pairs.

The equations of motion are Hamilton's equations for the bracket weighted by
``1/Gamma_j``::

    Gamma_j dx_{j,a}/dt =  dH/dy_{j,a}
    Gamma_j dy_{j,a}/dt = -dH/dx_{j,a}

with the pair Hamiltonian

    H = 2 C(2m) sum_{j<k} G_j G_k |z_j - z_k|^{2-2m}       (m > 1)
    H = -1/(4 pi) sum_{j<k} G_j G_k ln |z_j - z_k|^2        (m = 1)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

COLLISION_EPS = 1e-10


class SingularConfigurationError(ValueError):
    """Two vortices are closer than the collision threshold."""

    def __init__(self, separation, eps=COLLISION_EPS):
        self.separation = separation
        self.eps = eps
        super().__init__(f"vortex separation {separation:.3e} below collision threshold {eps:.1e}")


@dataclass(frozen=True)
class KernelConstant:
    m: int
    value: float


def sphere_area(n):
    """Area of the unit sphere S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def kernel_constant(m):
    """Coefficient C(2m) of the fundamental solution C |z|^{2-2m} of the Laplacian on R^{2m}.

    Only defined for ``m >= 2``; the planar case uses the logarithmic kernel.
    """
    if int(m) != m or m < 2:
        raise ValueError(f"kernel_constant needs an integer m >= 2, got {m!r}")
    m = int(m)
    return KernelConstant(m, -1.0 / ((2 * m - 2) * sphere_area(2 * m)))


def energy_prefactor(m):
    """Prefactor ``c`` of the pair energy ``c * G_j G_k phi(|r|^2)``."""
    if m == 1:
        return -1.0 / (4.0 * math.pi)
    return 2.0 * kernel_constant(m).value


def force_prefactor(m):
    """``a`` such that ``d/ds [c phi(s)] = a s^{-m}`` with ``s = |r|^2``."""
    c = energy_prefactor(m)
    return c if m == 1 else c * (1 - m)


def radial_derivative(m, d):
    """d/dd of the unit-strength pair energy at separation ``d``."""
    return 2.0 * force_prefactor(m) * d ** (1 - 2 * m)


class ComplexStructure:
    """The standard complex structure J on R^{2m}: ``(x_a, y_a) -> (-y_a, x_a)``."""

    def __init__(self, m):
        self.m = int(m)

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        out = np.empty_like(v)
        out[..., 0::2] = -v[..., 1::2]
        out[..., 1::2] = v[..., 0::2]
        return out

    __call__ = apply

    def matrix(self):
        j = np.zeros((2 * self.m, 2 * self.m))
        for a in range(self.m):
            j[2 * a + 1, 2 * a] = 1.0
            j[2 * a, 2 * a + 1] = -1.0
        return j


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class VortexSystem:
    """A phase point: ``N`` vortices of strengths ``strengths`` in R^{2m}.

    ``positions`` may be given flat (length ``2mN``) or as an ``(N, 2m)``
    array; it is stored flat and read-only.
    """

    m: int
    strengths: np.ndarray
    positions: np.ndarray
    eps: float = field(default=COLLISION_EPS, compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        gam = _readonly(np.atleast_1d(self.strengths)).reshape(-1)
        if gam.size == 0:
            raise ValueError("need at least one vortex")
        if np.any(gam == 0) or not np.all(np.isfinite(gam)):
            raise ValueError("vortex strengths must be finite and nonzero")
        z = np.asarray(self.positions, dtype=float).reshape(-1)
        if z.size != 2 * self.m * gam.size:
            raise ValueError(
                f"expected {2 * self.m * gam.size} coordinates for N={gam.size}, m={self.m}; got {z.size}"
            )
        if not np.all(np.isfinite(z)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "strengths", gam)
        object.__setattr__(self, "positions", _readonly(z))
        sep = min_separation(self)
        if sep <= self.eps:
            raise SingularConfigurationError(sep, self.eps)

    @property
    def N(self):
        return self.strengths.size

    @property
    def dim(self):
        return 2 * self.m * self.N

    @property
    def points(self):
        """Positions as an ``(N, 2m)`` view."""
        return self.positions.reshape(self.N, 2 * self.m)

    @property
    def total_strength(self):
        return float(self.strengths.sum())

    def with_positions(self, positions):
        return VortexSystem(self.m, self.strengths, positions, eps=self.eps)


def kernel_arrays(sys):
    """Writable copies of (positions, strengths) for the compiled kernels."""
    return np.array(sys.positions), np.array(sys.strengths)


def min_separation(sys):
    if sys.N < 2:
        return math.inf
    return math.sqrt(kernels.active().min_separation2(kernel_arrays(sys)[0], sys.N, sys.m))


def hamiltonian(sys):
    return float(kernels.active().hamiltonian(*kernel_arrays(sys), sys.m, energy_prefactor(sys.m)))


def hamiltonian_gradient(sys):
    """Analytic gradient of the Hamiltonian, flat and interleaved like ``positions``."""
    return kernels.active().gradient(*kernel_arrays(sys), sys.m, force_prefactor(sys.m))


def hamiltonian_hessian(sys):
    return kernels.active().hessian(*kernel_arrays(sys), sys.m, force_prefactor(sys.m))


def velocities(sys):
    """Vortex velocities as an ``(N, 2m)`` array."""
    v = kernels.active().velocity(*kernel_arrays(sys), sys.m, force_prefactor(sys.m))
    return v.reshape(sys.N, 2 * sys.m)


def velocity_jacobian(sys):
    return kernels.active().velocity_jacobian(*kernel_arrays(sys), sys.m, force_prefactor(sys.m))


def random_system(m, n, rng, scale=1.0, strengths=None, strength_range=(0.5, 1.5), min_sep=0.1):
    """Gaussian positions of std ``scale``; resampled until all separations exceed ``min_sep*scale``."""
    if strengths is None:
        strengths = rng.uniform(*strength_range, size=n)
    for _ in range(1000):
        z = scale * rng.standard_normal(2 * m * n)
        p = z.reshape(n, 2 * m)
        d = np.linalg.norm(p[:, None] - p[None], axis=-1)
        d[np.diag_indices(n)] = np.inf
        if d.min() > min_sep * scale:
            return VortexSystem(m, strengths, z)
    raise RuntimeError("could not draw a well-separated configuration")
