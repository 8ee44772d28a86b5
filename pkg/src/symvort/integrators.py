"""Time stepping of the vortex ODE.

Two schemes: the implicit midpoint rule, which is symplectic for the
constant-coefficient form sum_j G_j dx_j ^ dy_j and preserves every quadratic
first integral, and classical RK4 as an explicit reference. Both come with
exact tangent maps for variational (Lyapunov) computations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core, kernels
from .kernels.steppers import COLLISION, NOT_CONVERGED, OK

SCHEMES = {"implicit_midpoint": kernels.MIDPOINT, "rk4": kernels.RK4}


class StepFailure(RuntimeError):
    """A step could not be completed (implicit solve stalled or vortices collided)."""

    def __init__(self, message, reason, time=None):
        super().__init__(message)
        self.reason = reason
        self.time = time


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "implicit_midpoint"
    dt: float = 1e-3
    implicit_tol: float = 1e-12
    implicit_max_iter: int = 50

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.implicit_tol > 0:
            raise ValueError("implicit_tol must be positive")
        if self.implicit_max_iter < 1:
            raise ValueError("implicit_max_iter must be >= 1")

    def kernel_args(self, sys, direction=1):
        return (
            core.force_prefactor(sys.m),
            direction * self.dt,
            SCHEMES[self.scheme],
            self.implicit_tol,
            self.implicit_max_iter,
            sys.eps**2,
        )


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray
    invariant_names: list
    invariant_series: np.ndarray
    step_iterations: np.ndarray
    m: int
    strengths: np.ndarray
    failed: bool = False
    failure: str | None = None

    def __len__(self):
        return len(self.times)

    def system(self, i=-1):
        return core.VortexSystem(self.m, self.strengths, self.states[i])

    def series(self, name):
        return self.invariant_series[:, self.invariant_names.index(name)]

    def drift(self, name, relative=True):
        """max_t |I(t) - I(0)|, divided by |I(0)| when ``relative``.

        An integral whose initial value vanishes (below 1e-12) has no useful
        relative scale; its absolute drift is returned instead.
        """
        s = self.series(name)
        d = np.max(np.abs(s - s[0]))
        if relative and abs(s[0]) > 1e-12:
            d /= abs(s[0])
        return float(d)

    def drift_summary(self):
        return {name: self.drift(name) for name in self.invariant_names}


def _raise_for(status, t):
    if status == NOT_CONVERGED:
        raise StepFailure(f"implicit solve did not converge at t={t:.6g}", "not_converged", t)
    if status == COLLISION:
        raise StepFailure(f"vortex collision at t={t:.6g}", "collision", t)


def step(sys, cfg, direction=1):
    """One step of ``cfg.scheme``; ``direction=-1`` steps backwards in time."""
    be = kernels.active()
    z1, _, status = be.step(*core.kernel_arrays(sys), sys.m, *cfg.kernel_args(sys, direction))
    _raise_for(status, direction * cfg.dt)
    return sys.with_positions(z1)


def step_with_tangent(sys, tangent, cfg, direction=1):
    be = kernels.active()
    w = np.asarray(tangent, dtype=float).reshape(-1)
    if w.size != sys.dim:
        raise ValueError(f"tangent has {w.size} entries, expected {sys.dim}")
    z1, w1, _, status = be.tangent_step(core.kernel_arrays(sys)[0], w.copy(), sys.strengths.copy(), sys.m, *cfg.kernel_args(sys, direction))
    _raise_for(status, direction * cfg.dt)
    return sys.with_positions(z1), w1


def advance(sys, cfg, nsteps, direction=1):
    """``nsteps`` steps in one compiled loop; raises :class:`StepFailure` on failure."""
    be = kernels.active()
    z, _, status, done = be.run(*core.kernel_arrays(sys), sys.m, *cfg.kernel_args(sys, direction), int(nsteps))
    _raise_for(status, (done + 1) * cfg.dt)
    return sys.with_positions(z)


def n_steps(horizon, dt):
    n = horizon / dt
    k = int(round(n))
    if abs(n - k) > 1e-9 * max(1.0, n):
        raise ValueError(f"horizon {horizon} is not a multiple of dt {dt}")
    return k


def integrate(sys, cfg, horizon, suite=None, record_every=1):
    """Integrate to ``horizon``, sampling state and invariants every ``record_every`` steps.

    On a failed step the partial record is returned with ``failed`` set and
    the reason in ``failure``; nothing is raised.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    from .observables import standard_invariants

    suite = suite if suite is not None else standard_invariants(sys.m)
    total = n_steps(horizon, cfg.dt)
    be = kernels.active()
    args = cfg.kernel_args(sys)

    times = [0.0]
    states = [sys.positions.copy()]
    values = [suite.values(sys)]
    iters = [0]
    z, gam = core.kernel_arrays(sys)
    done = 0
    failure = None
    while done < total:
        chunk = min(record_every, total - done)
        z, it, status, k = be.run(z, gam, sys.m, *args, chunk)
        done += k
        if status != OK:
            failure = "not_converged" if status == NOT_CONVERGED else "collision"
            failure = f"{failure} at t={(done + 1) * cfg.dt:.6g}"
            if k == 0:
                break
        current = sys.with_positions(z)
        times.append(done * cfg.dt)
        states.append(z.copy())
        values.append(suite.values(current))
        iters.append(it)
        if failure:
            break

    return TrajectoryRecord(
        times=np.array(times),
        states=np.array(states),
        invariant_names=suite.names,
        invariant_series=np.array(values),
        step_iterations=np.array(iters),
        m=sys.m,
        strengths=sys.strengths,
        failed=failure is not None,
        failure=failure,
    )
