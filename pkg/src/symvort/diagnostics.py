"""Integrability instruments: exact two-vortex motion, unitary symmetry,
coplanarity, Lyapunov exponents and Poincare sections."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import core, kernels
from .integrators import StepFailure, advance, n_steps
from .kernels.steppers import OK


# ---------------------------------------------------------------- two vortices


@dataclass(frozen=True)
class TwoVortexSolution:
    """Closed-form motion of a vortex pair.

    The relative vector ``r = z1 - z2`` rotates rigidly in the plane spanned
    by ``r0`` and ``J r0``: ``r(t) = cos(Wt) r0 + sin(Wt) J r0`` with
    ``W = angular_rate``. For nonzero total strength the center of vorticity
    stays fixed; for a dipole (zero total strength) both vortices translate
    with ``drift_velocity``.
    """

    m: int
    strengths: np.ndarray
    r0: np.ndarray
    invariant_plane: np.ndarray
    angular_rate: float
    center: np.ndarray | None
    drift_velocity: np.ndarray
    separation: float
    z0: np.ndarray

    def state_at(self, t):
        g1, g2 = self.strengths
        jr0 = core.ComplexStructure(self.m)(self.r0)
        if self.center is None:
            p = self.z0.reshape(2, -1) + t * self.drift_velocity
        else:
            wt = self.angular_rate * t
            r = math.cos(wt) * self.r0 + math.sin(wt) * jr0
            total = g1 + g2
            p = np.stack([self.center + (g2 / total) * r, self.center - (g1 / total) * r])
        return core.VortexSystem(self.m, self.strengths, p.reshape(-1))


def two_vortex_solution(sys):
    if sys.N != 2:
        raise ValueError(f"two-vortex solution needs N=2, got N={sys.N}")
    g1, g2 = sys.strengths
    p = sys.points
    r0 = p[0] - p[1]
    d = float(np.linalg.norm(r0))
    jr0 = core.ComplexStructure(sys.m)(r0)
    fprime = core.radial_derivative(sys.m, d)
    # dr/dt = -(g1 + g2) f'(d)/d * J r
    rate = -(g1 + g2) * fprime / d
    total = g1 + g2
    if total == 0:
        center = None
        drift = -g2 * fprime / d * jr0
    else:
        center = (g1 * p[0] + g2 * p[1]) / total
        drift = np.zeros_like(r0)
    return TwoVortexSolution(
        m=sys.m,
        strengths=np.array(sys.strengths),
        r0=r0.copy(),
        invariant_plane=np.stack([r0 / d, jr0 / d]),
        angular_rate=float(rate),
        center=center,
        drift_velocity=drift,
        separation=d,
        z0=np.array(sys.positions),
    )


def two_vortex_closed_form(sys, t):
    return two_vortex_solution(sys).state_at(t)


def oracle_error(sys, cfg, horizon, samples=100):
    """Max Euclidean distance between integrated and exact N=2 states over ``samples`` sample times."""
    sol = two_vortex_solution(sys)
    total = n_steps(horizon, cfg.dt)
    if total == 0:
        return 0.0
    every = max(1, total // samples)
    err = 0.0
    done = 0
    cur = sys
    while done < total:
        k = min(every, total - done)
        cur = advance(cur, cfg, k)
        done += k
        exact = sol.state_at(done * cfg.dt)
        err = max(err, float(np.linalg.norm(cur.positions - exact.positions)))
    return err


def plane_distance(sys, sol):
    """Distance of the current relative vector from the initial invariant plane."""
    r = sys.points[0] - sys.points[1]
    basis = sol.invariant_plane
    return float(np.linalg.norm(r - basis.T @ (basis @ r)))


# ---------------------------------------------------------------- unitary motions


def unitary_to_real(u):
    """Real 2m x 2m form of a complex m x m matrix acting on interleaved (x, y) pairs."""
    u = np.asarray(u, dtype=complex)
    m = u.shape[0]
    out = np.zeros((2 * m, 2 * m))
    out[0::2, 0::2] = u.real
    out[0::2, 1::2] = -u.imag
    out[1::2, 0::2] = u.imag
    out[1::2, 1::2] = u.real
    return out


def random_unitary(m, rng):
    """Haar-distributed U(m) element, in real interleaved form."""
    a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, r = np.linalg.qr(a)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return unitary_to_real(q)


def apply_motion(sys, unitary, shift=None, tol=1e-10):
    """Map every vortex by ``z -> U z + shift`` with ``U`` orthogonal and J-linear."""
    u = np.asarray(unitary, dtype=float)
    d = 2 * sys.m
    if u.shape != (d, d):
        raise ValueError(f"unitary must be {d}x{d}, got {u.shape}")
    if np.max(np.abs(u.T @ u - np.eye(d))) > tol:
        raise ValueError("matrix is not orthogonal")
    jm = core.ComplexStructure(sys.m).matrix()
    if np.max(np.abs(u @ jm - jm @ u)) > tol:
        raise ValueError("matrix does not commute with the complex structure")
    shift = np.zeros(d) if shift is None else np.asarray(shift, dtype=float).reshape(d)
    return sys.with_positions(sys.points @ u.T + shift)


def equivariance_error(sys, unitary, shift, cfg, horizon):
    """|Phi_t(g z) - g Phi_t(z)| at time ``horizon``."""
    moved_then_flowed = advance(apply_motion(sys, unitary, shift), cfg, n_steps(horizon, cfg.dt))
    flowed_then_moved = apply_motion(advance(sys, cfg, n_steps(horizon, cfg.dt)), unitary, shift)
    return float(np.linalg.norm(moved_then_flowed.positions - flowed_then_moved.positions))


# ---------------------------------------------------------------- coplanarity


def coplanarity_defect(sys):
    """Share of variance of {z_j} u {z_j + v_j} lying outside the best affine 2-plane.

    Zero iff positions and velocity endpoints are coplanar; invariant under scaling.
    """
    p = sys.points
    cloud = np.vstack([p, p + core.velocities(sys)])
    cloud = cloud - cloud.mean(axis=0)
    s2 = np.linalg.svd(cloud, compute_uv=False) ** 2
    total = s2.sum()
    if total == 0:
        return 0.0
    return float(s2[2:].sum() / total)


def coplanarity_search(m, n, samples, seed=0, scale=1.0):
    """Randomised search for a non-coplanar configuration. Returns (max defect, system, all defects)."""
    rng = np.random.default_rng(seed)
    best, best_sys, defects = -1.0, None, []
    for _ in range(samples):
        sys = core.random_system(m, n, rng, scale=scale)
        d = coplanarity_defect(sys)
        defects.append(d)
        if d > best:
            best, best_sys = d, sys
    return best, best_sys, np.array(defects)


# ---------------------------------------------------------------- Lyapunov


@dataclass
class ChaosReport:
    mle: float
    times: np.ndarray
    convergence_series: np.ndarray
    renorm_interval: float
    horizon: float
    burn_in: float
    failed: bool = False
    failure: str | None = None


def lyapunov_mle(sys, cfg, horizon, renorm_interval=1.0, burn_in=0.1, seed=0, tangent=None):
    """Largest Lyapunov exponent by tangent propagation with periodic renormalisation.

    Log growth factors of the first ``burn_in`` fraction of the horizon are
    discarded. The running estimate after each later renormalisation is kept
    in ``convergence_series``; ``mle`` is its last entry. A failed step ends
    the run early with ``failed`` set.
    """
    if renorm_interval <= 0 or horizon < 2 * renorm_interval:
        raise ValueError("need horizon >= 2 * renorm_interval > 0")
    be = kernels.active()
    per_block = n_steps(renorm_interval, cfg.dt)
    blocks = int(round(horizon / renorm_interval))
    skip = int(math.floor(burn_in * blocks))
    if skip >= blocks:
        raise ValueError("burn_in leaves no blocks to average")

    if tangent is None:
        tangent = np.random.default_rng(seed).standard_normal(sys.dim)
    w = np.array(tangent, dtype=float)
    w /= np.linalg.norm(w)
    z, gam = core.kernel_arrays(sys)
    args = cfg.kernel_args(sys)

    log_sum, elapsed = 0.0, 0.0
    times, series = [], []
    failure = None
    for b in range(blocks):
        z, w, _, status, done = be.run_tangent(z, w, gam, sys.m, *args, per_block)
        if status != OK:
            failure = f"{'collision' if status == 2 else 'not_converged'} in block {b}"
            break
        norm = float(np.linalg.norm(w))
        w /= norm
        if b >= skip:
            log_sum += math.log(norm)
            elapsed += per_block * cfg.dt
            times.append((b + 1) * per_block * cfg.dt)
            series.append(log_sum / elapsed)
    if not series:
        series, times = [float("nan")], [0.0]
    return ChaosReport(
        mle=series[-1],
        times=np.array(times),
        convergence_series=np.array(series),
        renorm_interval=renorm_interval,
        horizon=horizon,
        burn_in=burn_in,
        failed=failure is not None,
        failure=failure,
    )


def lyapunov_ensemble(systems, cfg, horizon, renorm_interval=1.0, burn_in=0.1, seed=0, workers=None):
    """MLE for each system; task ``i`` draws its tangent from ``default_rng([seed, i])``."""

    def task(i):
        tangent = np.random.default_rng([seed, i]).standard_normal(systems[i].dim)
        return lyapunov_mle(systems[i], cfg, horizon, renorm_interval, burn_in, tangent=tangent)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(len(systems))))


# ---------------------------------------------------------------- Poincare sections


@dataclass(frozen=True)
class SectionCrossing:
    time: float
    state: core.VortexSystem
    chart: tuple = field(default=())
    transversal: bool = True


def poincare_section(
    sys, cfg, section_observable, section_value, horizon, chart=(), direction=1, tol=1e-10
):
    """Crossings of ``section_observable == section_value`` along the flow.

    Each sign change between consecutive steps is refined by bisection on the
    straight segment joining the two states until the residual drops below
    ``tol``. ``direction`` selects upward (1), downward (-1) or both (0)
    crossings. ``chart`` is a sequence of observables evaluated at each
    crossing.
    """
    total = n_steps(horizon, cfg.dt)
    be = kernels.active()
    z, gam = core.kernel_arrays(sys)
    args = cfg.kernel_args(sys)
    f = section_observable.value
    s0 = f(sys) - section_value
    out = []
    for i in range(total):
        z1, _, status = be.step(z, gam, sys.m, *args)
        if status != OK:
            raise StepFailure(f"section run failed at t={(i + 1) * cfg.dt:.6g}", "step", (i + 1) * cfg.dt)
        cur = sys.with_positions(z1)
        s1 = f(cur) - section_value
        hit = (s0 < 0 <= s1 and direction >= 0) or (s0 > 0 >= s1 and direction <= 0)
        if hit:
            theta = _bisect(lambda th: f(sys.with_positions(z + th * (z1 - z))) - section_value, s0, s1, tol)
            state = sys.with_positions(z + theta * (z1 - z))
            g = section_observable.gradient(state)
            v = core.velocities(state).reshape(-1)
            rate = float(g @ v)
            transversal = abs(rate) > 1e-12 * max(np.linalg.norm(g) * np.linalg.norm(v), 1e-300)
            out.append(
                SectionCrossing(
                    time=(i + theta) * cfg.dt,
                    state=state,
                    chart=tuple(c.value(state) for c in chart),
                    transversal=transversal,
                )
            )
        z, s0 = z1, s1
    return out


def _bisect(fn, f_lo, f_hi, tol, max_iter=200):
    lo, hi = 0.0, 1.0
    if abs(f_hi) < tol:
        return 1.0
    mid = 0.5
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if abs(fm) < tol or hi - lo < 1e-16:
            break
        if (fm < 0) == (f_lo < 0):
            lo, f_lo = mid, fm
        else:
            hi = mid
    return mid


def curve_residual(points, k=8):
    """Median local straightness defect of a planar point cloud.

    For each point, the ``k`` nearest neighbours are fitted by a line (PCA);
    the score is sqrt(lambda_min / lambda_max). Points sampled from a smooth
    curve score near 0, area-filling scatter scores O(1).
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) <= k:
        raise ValueError(f"need more than k={k} points")
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    nn = np.argsort(d2, axis=1)[:, : k + 1]
    scores = []
    for idx in nn:
        local = pts[idx] - pts[idx].mean(axis=0)
        ev = np.linalg.eigvalsh(local.T @ local)
        scores.append(math.sqrt(max(ev[0], 0.0) / ev[-1]) if ev[-1] > 0 else 0.0)
    return float(np.median(scores))
