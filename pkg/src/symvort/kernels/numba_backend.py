"""Loop kernels for the pairwise vortex interaction, compiled with numba.

All kernels take flat interleaved positions ``z`` of length ``2*m*N``, the
strengths ``gam`` and the two radial-profile constants:

* ``c``: prefactor of the pair energy, ``H = c * sum_{j<k} g_j g_k phi(s)``
  with ``s = |z_j - z_k|**2`` and ``phi = log(s)`` (m == 1) or ``s**(1-m)``.
* ``a``: derivative prefactor, ``d/ds (c*phi(s)) = a * s**(-m)``.
"""
import math

import numpy as np

from numba import njit

NAME = "numba"


@njit(cache=True, nogil=True)
def hamiltonian(z, gam, m, c):
    n = gam.shape[0]
    d = 2 * m
    h = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            s = 0.0
            for q in range(d):
                t = z[j * d + q] - z[k * d + q]
                s += t * t
            if m == 1:
                h += gam[j] * gam[k] * math.log(s)
            else:
                h += gam[j] * gam[k] * s ** (1 - m)
    return c * h


@njit(cache=True, nogil=True)
def gradient(z, gam, m, a):
    n = gam.shape[0]
    d = 2 * m
    g = np.zeros(z.shape[0])
    r = np.empty(d)
    for j in range(n):
        for k in range(j + 1, n):
            s = 0.0
            for q in range(d):
                r[q] = z[j * d + q] - z[k * d + q]
                s += r[q] * r[q]
            w = 2.0 * a * gam[j] * gam[k] * s ** (-m)
            for q in range(d):
                g[j * d + q] += w * r[q]
                g[k * d + q] -= w * r[q]
    return g


@njit(cache=True, nogil=True)
def velocity(z, gam, m, a):
    g = gradient(z, gam, m, a)
    n = gam.shape[0]
    v = np.empty_like(g)
    for j in range(n):
        inv = 1.0 / gam[j]
        for al in range(m):
            i = j * 2 * m + 2 * al
            v[i] = inv * g[i + 1]
            v[i + 1] = -inv * g[i]
    return v


@njit(cache=True, nogil=True)
def hessian(z, gam, m, a):
    n = gam.shape[0]
    d = 2 * m
    size = z.shape[0]
    hs = np.zeros((size, size))
    r = np.empty(d)
    for j in range(n):
        for k in range(j + 1, n):
            s = 0.0
            for q in range(d):
                r[q] = z[j * d + q] - z[k * d + q]
                s += r[q] * r[q]
            gg = gam[j] * gam[k]
            diag = 2.0 * a * gg * s ** (-m)
            outer = -4.0 * m * a * gg * s ** (-m - 1)
            for p in range(d):
                for q in range(d):
                    e = outer * r[p] * r[q]
                    if p == q:
                        e += diag
                    hs[j * d + p, j * d + q] += e
                    hs[k * d + p, k * d + q] += e
                    hs[j * d + p, k * d + q] -= e
                    hs[k * d + p, j * d + q] -= e
    return hs


@njit(cache=True, nogil=True)
def velocity_jacobian(z, gam, m, a):
    hs = hessian(z, gam, m, a)
    n = gam.shape[0]
    jac = np.empty_like(hs)
    for j in range(n):
        inv = 1.0 / gam[j]
        for al in range(m):
            i = j * 2 * m + 2 * al
            jac[i, :] = inv * hs[i + 1, :]
            jac[i + 1, :] = -inv * hs[i, :]
    return jac


@njit(cache=True, nogil=True)
def min_separation2(z, n, m):
    d = 2 * m
    best = np.inf
    for j in range(n):
        for k in range(j + 1, n):
            s = 0.0
            for q in range(d):
                t = z[j * d + q] - z[k * d + q]
                s += t * t
            if s < best:
                best = s
    return best
