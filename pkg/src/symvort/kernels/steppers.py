"""One-step maps and step loops built on top of a kernel backend.

The same source is used for both backends: ``build`` closes over the backend's
kernels and optionally jit-compiles the closures. Status codes returned by the
loops: 0 ok, 1 implicit solve did not converge, 2 collision.
"""
import numpy as np

MIDPOINT = 0
RK4 = 1

OK = 0
NOT_CONVERGED = 1
COLLISION = 2


def build(kern, jit):
    velocity = kern.velocity
    velocity_jacobian = kern.velocity_jacobian
    min_separation2 = kern.min_separation2

    @jit
    def midpoint_solve(z0, gam, m, a, dt, tol, maxit):
        scale = max(1.0, np.max(np.abs(z0)))
        z1 = z0 + dt * velocity(z0, gam, m, a)
        prev = np.inf
        newton = False
        it = 0
        while it < maxit:
            it += 1
            zm = 0.5 * (z0 + z1)
            if not newton:
                znew = z0 + dt * velocity(zm, gam, m, a)
                delta = np.max(np.abs(znew - z1))
                z1 = znew
                if delta <= tol * scale:
                    return z1, it, OK
                # contraction stalled: switch to Newton
                if delta > 0.5 * prev:
                    newton = True
                prev = delta
            else:
                res = z1 - z0 - dt * velocity(zm, gam, m, a)
                jg = np.eye(z0.shape[0]) - 0.5 * dt * velocity_jacobian(zm, gam, m, a)
                dz = np.linalg.solve(jg, res)
                z1 = z1 - dz
                if np.max(np.abs(dz)) <= tol * scale:
                    return z1, it, OK
        return z1, it, NOT_CONVERGED

    @jit
    def rk4(z, gam, m, a, dt):
        k1 = velocity(z, gam, m, a)
        k2 = velocity(z + 0.5 * dt * k1, gam, m, a)
        k3 = velocity(z + 0.5 * dt * k2, gam, m, a)
        k4 = velocity(z + dt * k3, gam, m, a)
        return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    @jit
    def step(z, gam, m, a, dt, scheme, tol, maxit, eps2):
        if scheme == MIDPOINT:
            z1, it, status = midpoint_solve(z, gam, m, a, dt, tol, maxit)
        else:
            z1 = rk4(z, gam, m, a, dt)
            it = 0
            status = OK
        if status == OK and min_separation2(z1, gam.shape[0], m) < eps2:
            status = COLLISION
        return z1, it, status

    @jit
    def tangent_step(z, w, gam, m, a, dt, scheme, tol, maxit, eps2):
        if scheme == MIDPOINT:
            z1, it, status = midpoint_solve(z, gam, m, a, dt, tol, maxit)
            half = 0.5 * dt * velocity_jacobian(0.5 * (z + z1), gam, m, a)
            eye = np.eye(z.shape[0])
            w1 = np.linalg.solve(eye - half, w + half @ w)
        else:
            it = 0
            status = OK
            k1 = velocity(z, gam, m, a)
            d1 = velocity_jacobian(z, gam, m, a) @ w
            y2 = z + 0.5 * dt * k1
            k2 = velocity(y2, gam, m, a)
            d2 = velocity_jacobian(y2, gam, m, a) @ (w + 0.5 * dt * d1)
            y3 = z + 0.5 * dt * k2
            k3 = velocity(y3, gam, m, a)
            d3 = velocity_jacobian(y3, gam, m, a) @ (w + 0.5 * dt * d2)
            y4 = z + dt * k3
            k4 = velocity(y4, gam, m, a)
            d4 = velocity_jacobian(y4, gam, m, a) @ (w + dt * d3)
            z1 = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            w1 = w + (dt / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        if status == OK and min_separation2(z1, gam.shape[0], m) < eps2:
            status = COLLISION
        return z1, w1, it, status

    @jit
    def run(z, gam, m, a, dt, scheme, tol, maxit, eps2, nsteps):
        """Advance ``nsteps``; stops at the first failed step (state before it is returned)."""
        total = 0
        for i in range(nsteps):
            z1, it, status = step(z, gam, m, a, dt, scheme, tol, maxit, eps2)
            total += it
            if status != OK:
                return z, total, status, i
            z = z1
        return z, total, OK, nsteps

    @jit
    def run_tangent(z, w, gam, m, a, dt, scheme, tol, maxit, eps2, nsteps):
        total = 0
        for i in range(nsteps):
            z1, w1, it, status = tangent_step(z, w, gam, m, a, dt, scheme, tol, maxit, eps2)
            total += it
            if status != OK:
                return z, w, total, status, i
            z = z1
            w = w1
        return z, w, total, OK, nsteps

    return {
        "midpoint_solve": midpoint_solve,
        "rk4": rk4,
        "step": step,
        "tangent_step": tangent_step,
        "run": run,
        "run_tangent": run_tangent,
    }
