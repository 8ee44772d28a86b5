"""Vectorised numpy versions of the pair kernels (same signatures as the numba ones)."""
import numpy as np

NAME = "numpy"


def _pairs(z, n, m):
    p = z.reshape(n, 2 * m)
    r = p[:, None, :] - p[None, :, :]
    s = np.einsum("jkq,jkq->jk", r, r)
    np.fill_diagonal(s, np.inf)
    return r, s


def hamiltonian(z, gam, m, c):
    n = gam.shape[0]
    if n < 2:
        return 0.0
    _, s = _pairs(z, n, m)
    iu = np.triu_indices(n, 1)
    gg = np.outer(gam, gam)[iu]
    phi = np.log(s[iu]) if m == 1 else s[iu] ** (1 - m)
    return float(c * np.sum(gg * phi))


def gradient(z, gam, m, a):
    n = gam.shape[0]
    r, s = _pairs(z, n, m)
    w = 2.0 * a * np.outer(gam, gam) * s ** (-m)
    return np.einsum("jk,jkq->jq", w, r).reshape(-1)


def _apply_structure(rows, gam, m):
    # rows indexed by flat coordinate; returns (1/g_j) * K applied blockwise
    n = gam.shape[0]
    g = rows.reshape((n, m, 2) + rows.shape[1:])
    out = np.empty_like(g)
    inv = (1.0 / gam).reshape((n, 1) + (1,) * (rows.ndim - 1))
    out[:, :, 0] = inv * g[:, :, 1]
    out[:, :, 1] = -inv * g[:, :, 0]
    return out.reshape(rows.shape)


def velocity(z, gam, m, a):
    return _apply_structure(gradient(z, gam, m, a), gam, m)


def hessian(z, gam, m, a):
    n = gam.shape[0]
    d = 2 * m
    r, s = _pairs(z, n, m)
    gg = np.outer(gam, gam)
    diag = 2.0 * a * gg * s ** (-m)
    outer = -4.0 * m * a * gg * s ** (-m - 1)
    blocks = outer[:, :, None, None] * r[:, :, :, None] * r[:, :, None, :]
    blocks += diag[:, :, None, None] * np.eye(d)
    hs = -blocks
    idx = np.arange(n)
    hs[idx, idx] = blocks.sum(axis=1)
    return hs.transpose(0, 2, 1, 3).reshape(n * d, n * d)


def velocity_jacobian(z, gam, m, a):
    return _apply_structure(hessian(z, gam, m, a), gam, m)


def min_separation2(z, n, m):
    if n < 2:
        return np.inf
    _, s = _pairs(z, n, m)
    return float(s.min())
