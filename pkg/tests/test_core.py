import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from symvort import core
from symvort.core import VortexSystem


@pytest.mark.parametrize("m", [2, 3])
def test_kernel_constant_matches_flux_oracle(m):
    c = core.kernel_constant(m).value
    flux = oracles.flux_through_unit_sphere(lambda p: c * np.sum(p * p, axis=1) ** (1 - m), 2 * m,
                                            polar_nodes=14, azimuth_nodes=16)
    assert flux == pytest.approx(1.0, rel=1e-8)


def test_kernel_constant_closed_forms():
    assert core.kernel_constant(2).value == pytest.approx(-1 / (4 * math.pi**2), rel=1e-14)
    assert core.kernel_constant(2).value == pytest.approx(-0.02533029591, abs=1e-11)
    assert core.kernel_constant(3).value == pytest.approx(-1 / (4 * math.pi**3), rel=1e-14)


@pytest.mark.parametrize("m", [0, 1, 1.5])
def test_kernel_constant_rejects_bad_m(m):
    with pytest.raises(ValueError):
        core.kernel_constant(m)


def test_sphere_area():
    assert core.sphere_area(2) == pytest.approx(2 * math.pi)
    assert core.sphere_area(3) == pytest.approx(4 * math.pi)
    assert core.sphere_area(4) == pytest.approx(2 * math.pi**2)


def test_hamiltonian_examples():
    pair = VortexSystem(1, [1.0, 1.0], [0, 0, 1, 0])
    assert core.hamiltonian(pair) == pytest.approx(0.0, abs=1e-15)
    for m in (1, 2, 3):
        assert core.hamiltonian(VortexSystem(m, [2.0], np.arange(2 * m))) == 0.0
    m2 = VortexSystem(2, [1.0, 1.0], [0, 0, 0, 0, 1, 0, 0, 0])
    assert core.hamiltonian(m2) == pytest.approx(-1 / (2 * math.pi**2), rel=1e-13)
    assert core.hamiltonian(m2) == pytest.approx(-0.05066, abs=1e-5)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("n", [2, 3, 5])
def test_hamiltonian_matches_direct_sum(m, n, rng):
    sys = core.random_system(m, n, rng)
    assert core.hamiltonian(sys) == pytest.approx(oracles.pair_energy(m, sys.strengths, sys.positions), rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("n", [2, 4])
def test_gradient_and_hessian_match_finite_differences(m, n, rng):
    sys = core.random_system(m, n, rng, min_sep=0.4)
    fd = oracles.fd_gradient(lambda z: core.hamiltonian(sys.with_positions(z)), sys.positions)
    g = core.hamiltonian_gradient(sys)
    assert np.max(np.abs(g - fd)) < 1e-7 * max(1.0, np.max(np.abs(g)))
    fd_h = oracles.fd_jacobian(lambda z: core.hamiltonian_gradient(sys.with_positions(z)), sys.positions)
    hess = core.hamiltonian_hessian(sys)
    assert np.allclose(hess, hess.T, atol=1e-12)
    assert np.max(np.abs(hess - fd_h)) < 1e-6 * max(1.0, np.max(np.abs(hess)))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_velocity_is_weighted_symplectic_gradient(m, rng):
    sys = core.random_system(m, 4, rng, strengths=[1.0, -0.7, 2.0, 0.4])
    g = core.hamiltonian_gradient(sys).reshape(sys.N, sys.m, 2)
    v = core.velocities(sys).reshape(sys.N, sys.m, 2)
    gam = sys.strengths[:, None]
    assert np.allclose(v[:, :, 0], g[:, :, 1] / gam, atol=1e-14)
    assert np.allclose(v[:, :, 1], -g[:, :, 0] / gam, atol=1e-14)
    jac = oracles.fd_jacobian(lambda z: core.velocities(sys.with_positions(z)).reshape(-1), sys.positions)
    assert np.max(np.abs(core.velocity_jacobian(sys) - jac)) < 1e-6 * max(1.0, np.max(np.abs(jac)))


def test_single_vortex_is_steady():
    for m in (1, 2, 3):
        sys = VortexSystem(m, [1.5], np.ones(2 * m))
        assert np.all(core.hamiltonian_gradient(sys) == 0)
        assert np.all(core.velocities(sys) == 0)


def test_planar_pair_velocity():
    sys = VortexSystem(1, [1.0, 1.0], [0, 0, 1, 0])
    v = core.velocities(sys)
    r = np.array([1.0, 0.0])
    for vj in v:
        assert np.linalg.norm(vj) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
        assert abs(vj @ r) < 1e-15
    # same rotational sense about the midpoint: opposite velocities
    assert np.allclose(v[0], -v[1])


@pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
def test_m2_pair_velocity(d):
    sys = VortexSystem(2, [1.0, 1.0], [0, 0, 0, 0, d, 0, 0, 0])
    v = core.velocities(sys)
    J = core.ComplexStructure(2)
    for j, k in ((0, 1), (1, 0)):
        # the derivative of 2C r^-2 gives 1/(pi^2 d^3); see the decisions ledger
        assert np.linalg.norm(v[j]) == pytest.approx(1 / (math.pi**2 * d**3), rel=1e-13)
        r = sys.points[j] - sys.points[k]
        jr = J(r)
        assert abs(v[j] @ jr) == pytest.approx(np.linalg.norm(v[j]) * np.linalg.norm(jr), rel=1e-13)


def test_radial_derivative_matches_pair_speed():
    for m in (1, 2, 3):
        for d in (0.7, 1.3):
            sys = VortexSystem(m, [1.0, 1.0], np.r_[np.zeros(2 * m), d, np.zeros(2 * m - 1)])
            speed = np.linalg.norm(core.velocities(sys)[0])
            assert speed == pytest.approx(abs(core.radial_derivative(m, d)), rel=1e-13)


def test_complex_structure():
    J = core.ComplexStructure(3)
    v = np.arange(6.0)
    assert np.allclose(J(J(v)), -v)
    assert np.allclose(J.matrix() @ v, J(v))
    assert np.allclose(J.matrix().T @ J.matrix(), np.eye(6))


def test_collision_rejected():
    with pytest.raises(core.SingularConfigurationError):
        VortexSystem(1, [1.0, 1.0], [0, 0, 0, 0])
    with pytest.raises(core.SingularConfigurationError):
        VortexSystem(2, [1.0, 1.0], [0, 0, 0, 0, 1e-3, 0, 0, 0], eps=1e-2)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(m=1, strengths=[1.0, 0.0], positions=[0, 0, 1, 0]),
        dict(m=1, strengths=[1.0], positions=[0, 0, 1]),
        dict(m=0, strengths=[1.0], positions=[]),
        dict(m=1, strengths=[1.0], positions=[np.nan, 0]),
        dict(m=1, strengths=[], positions=[]),
    ],
)
def test_invalid_systems(kwargs):
    with pytest.raises(ValueError):
        VortexSystem(**kwargs)


def test_system_is_immutable():
    sys = VortexSystem(1, [1.0, 2.0], [[0, 0], [1, 0]])
    assert sys.points.shape == (2, 2)
    with pytest.raises(ValueError):
        sys.positions[0] = 5.0


def test_random_system_respects_min_sep(rng):
    for _ in range(20):
        sys = core.random_system(2, 5, rng, scale=0.5, min_sep=0.4)
        assert core.min_separation(sys) > 0.2


coords = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 3), seed=st.integers(0, 2**31), shift=st.lists(coords, min_size=6, max_size=6),
       scale=st.floats(0.3, 3.0))
def test_symmetries_of_hamiltonian(m, seed, shift, scale):
    rng = np.random.default_rng(seed)
    sys = core.random_system(m, 3, rng, min_sep=0.3)
    h0 = core.hamiltonian(sys)
    pts = sys.points
    # translation
    moved = sys.with_positions(pts + np.asarray(shift[: 2 * m]))
    assert core.hamiltonian(moved) == pytest.approx(h0, rel=1e-9, abs=1e-11)
    # arbitrary orthogonal map (the energy is radial, so O(2m) suffices)
    q, _ = np.linalg.qr(rng.standard_normal((2 * m, 2 * m)))
    assert core.hamiltonian(sys.with_positions(pts @ q.T)) == pytest.approx(h0, rel=1e-9, abs=1e-11)
    # scaling: homogeneous of degree 2-2m, or shifted by a constant for m=1
    scaled = core.hamiltonian(sys.with_positions(pts * scale))
    if m == 1:
        g = sys.strengths
        pair_sum = (g.sum() ** 2 - (g**2).sum()) / 2
        expected = h0 - pair_sum * math.log(scale**2) / (4 * math.pi)
    else:
        expected = h0 * scale ** (2 - 2 * m)
    assert scaled == pytest.approx(expected, rel=1e-9, abs=1e-11)
