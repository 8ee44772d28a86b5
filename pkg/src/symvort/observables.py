"""Phase-space observables with analytic gradients and the weighted Poisson bracket.

An :class:`Observable` is a pair (value, gradient) of functions of a
:class:`~symvort.core.VortexSystem`. Sums, products and scalar multiples
assemble their gradients by the usual rules, so derived integrals such as
``Q**2 + P**2`` need no hand-written derivatives.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import core


@dataclass(frozen=True)
class Observable:
    name: str
    value: Callable
    gradient: Callable

    def __call__(self, sys):
        return self.value(sys)

    def __add__(self, other):
        other = _lift(other)
        return Observable(
            f"({self.name} + {other.name})",
            lambda s: self.value(s) + other.value(s),
            lambda s: self.gradient(s) + other.gradient(s),
        )

    __radd__ = __add__

    def __neg__(self):
        return Observable(f"-{self.name}", lambda s: -self.value(s), lambda s: -self.gradient(s))

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) + (-self)

    def __mul__(self, other):
        other = _lift(other)
        return Observable(
            f"{self.name}*{other.name}",
            lambda s: self.value(s) * other.value(s),
            lambda s: self.value(s) * other.gradient(s) + other.value(s) * self.gradient(s),
        )

    __rmul__ = __mul__

    def __pow__(self, k):
        if int(k) != k or k < 1:
            raise ValueError("only positive integer powers are supported")
        k = int(k)
        return Observable(
            f"{self.name}**{k}",
            lambda s: self.value(s) ** k,
            lambda s: k * self.value(s) ** (k - 1) * self.gradient(s),
        )


def constant(c):
    c = float(c)
    return Observable(repr(c), lambda s: c, lambda s: np.zeros(s.dim))


def _lift(x):
    return x if isinstance(x, Observable) else constant(x)


def _coords(sys):
    p = sys.points
    return p[:, 0::2], p[:, 1::2]


def _flat(gx, gy):
    n, m = gx.shape
    out = np.empty((n, 2 * m))
    out[:, 0::2] = gx
    out[:, 1::2] = gy
    return out.reshape(-1)


def linear_x(a):
    """Q_a = sum_j G_j x_{j,a}; ``a`` is zero-based."""

    def value(s):
        return float(s.strengths @ _coords(s)[0][:, a])

    def grad(s):
        gx = np.zeros((s.N, s.m))
        gx[:, a] = s.strengths
        return _flat(gx, np.zeros_like(gx))

    return Observable(f"Q{a + 1}", value, grad)


def linear_y(a):
    def value(s):
        return float(s.strengths @ _coords(s)[1][:, a])

    def grad(s):
        gy = np.zeros((s.N, s.m))
        gy[:, a] = s.strengths
        return _flat(np.zeros_like(gy), gy)

    return Observable(f"P{a + 1}", value, grad)


def f_plus(a, b):
    """F+_{ab} = sum_j G_j (x_a x_b + y_a y_b)."""

    def value(s):
        x, y = _coords(s)
        return float(s.strengths @ (x[:, a] * x[:, b] + y[:, a] * y[:, b]))

    def grad(s):
        x, y = _coords(s)
        g = s.strengths
        gx = np.zeros((s.N, s.m))
        gy = np.zeros((s.N, s.m))
        gx[:, a] += g * x[:, b]
        gx[:, b] += g * x[:, a]
        gy[:, a] += g * y[:, b]
        gy[:, b] += g * y[:, a]
        return _flat(gx, gy)

    return Observable(f"F+{a + 1}{b + 1}", value, grad)


def f_minus(a, b):
    """F-_{ab} = sum_j G_j (x_a y_b - x_b y_a)."""

    def value(s):
        x, y = _coords(s)
        return float(s.strengths @ (x[:, a] * y[:, b] - x[:, b] * y[:, a]))

    def grad(s):
        x, y = _coords(s)
        g = s.strengths
        gx = np.zeros((s.N, s.m))
        gy = np.zeros((s.N, s.m))
        gx[:, a] += g * y[:, b]
        gy[:, b] += g * x[:, a]
        gx[:, b] -= g * y[:, a]
        gy[:, a] -= g * x[:, b]
        return _flat(gx, gy)

    return Observable(f"F-{a + 1}{b + 1}", value, grad)


HAMILTONIAN = Observable("H", core.hamiltonian, core.hamiltonian_gradient)


@dataclass(frozen=True)
class InvariantSuite:
    m: int
    linear: list = field(default_factory=list)
    quadratic: list = field(default_factory=list)
    hamiltonian: Observable = HAMILTONIAN
    involutive: list = field(default_factory=list)

    @property
    def standard(self):
        """The m^2 + 2m integrals generating the unitary motions."""
        return self.linear + self.quadratic

    @property
    def members(self):
        return self.standard + [self.hamiltonian]

    @property
    def names(self):
        return [o.name for o in self.members]

    def values(self, sys):
        return np.array([o.value(sys) for o in self.members])


def standard_invariants(m):
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    qs = [linear_x(a) for a in range(m)]
    ps = [linear_y(a) for a in range(m)]
    linear = [o for pair in zip(qs, ps) for o in pair]
    quadratic = [f_plus(a, b) for a in range(m) for b in range(a, m)]
    quadratic += [f_minus(a, b) for a in range(m) for b in range(a + 1, m)]
    return InvariantSuite(m, linear, quadratic, HAMILTONIAN, involutive_family(m))


def involutive_family(m):
    """H, F+_{aa} and Q_a^2 + P_a^2: 2m+1 pairwise commuting integrals."""
    family = [HAMILTONIAN]
    family += [f_plus(a, a) for a in range(m)]
    for a in range(m):
        sq = linear_x(a) ** 2 + linear_y(a) ** 2
        family.append(Observable(f"Q{a + 1}^2+P{a + 1}^2", sq.value, sq.gradient))
    return family


def bracket_gradients(gf, gg, sys):
    """Weighted bracket from two flat gradients."""
    a = np.asarray(gf).reshape(sys.N, sys.m, 2)
    b = np.asarray(gg).reshape(sys.N, sys.m, 2)
    per_vortex = np.sum(a[:, :, 0] * b[:, :, 1] - a[:, :, 1] * b[:, :, 0], axis=1)
    return float(np.sum(per_vortex / sys.strengths))


def poisson_bracket(f, g, sys):
    return bracket_gradients(f.gradient(sys), g.gradient(sys), sys)


def bracket_table(suite, sys):
    """Antisymmetric matrix of brackets among ``suite.members`` (standard integrals, then H)."""
    grads = [o.gradient(sys) for o in suite.members]
    n = len(grads)
    table = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            table[i, j] = bracket_gradients(grads[i], grads[j], sys)
            table[j, i] = -table[i, j]
    return table


def coordinate(j, a, which, centered=False):
    """x_{j,a} (``which='x'``) or y_{j,a}; zero-based indices.

    With ``centered`` the coordinate is taken relative to the center of
    vorticity, ``x_{j,a} - Q_a / sum(G)``.
    """
    off = 0 if which == "x" else 1
    lin = linear_x(a) if which == "x" else linear_y(a)

    def value(s):
        v = s.points[j, 2 * a + off]
        if centered:
            v -= lin.value(s) / s.total_strength
        return float(v)

    def grad(s):
        g = np.zeros(s.dim)
        g[j * 2 * s.m + 2 * a + off] = 1.0
        if centered:
            g -= lin.gradient(s) / s.total_strength
        return g

    prefix = ("c" if centered else "") + which
    return Observable(f"{prefix}{j + 1}_{a + 1}", value, grad)


def separation2(j, k):
    """|z_j - z_k|^2."""

    def value(s):
        r = s.points[j] - s.points[k]
        return float(r @ r)

    def grad(s):
        r = s.points[j] - s.points[k]
        g = np.zeros((s.N, 2 * s.m))
        g[j] = 2 * r
        g[k] = -2 * r
        return g.reshape(-1)

    return Observable(f"s{j + 1}{k + 1}", value, grad)


_NAMED = re.compile(r"^(?:(c?)([xy])(\d+)_(\d+)|s(\d)(\d))$")


def named(name, m):
    """Observable from a config-file name.

    Accepts the suite names (``Q1``, ``P2``, ``F+12``, ``F-12``, ``H``),
    coordinates ``x{j}_{a}`` / ``y{j}_{a}``, centered coordinates
    ``cx{j}_{a}`` / ``cy{j}_{a}`` and squared separations ``s{j}{k}``
    (one-based indices).
    """
    for obs in standard_invariants(m).members:
        if obs.name == name:
            return obs
    match = _NAMED.match(name)
    if not match:
        raise KeyError(f"unknown observable {name!r}")
    c, which, j, a, sj, sk = match.groups()
    if which:
        if not 1 <= int(a) <= m:
            raise KeyError(f"coordinate index {a} out of range for m={m}")
        return coordinate(int(j) - 1, int(a) - 1, which, centered=bool(c))
    return separation2(int(sj) - 1, int(sk) - 1)
