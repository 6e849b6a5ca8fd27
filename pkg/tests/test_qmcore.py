"""Exact algebra checks for states, spin components and rotations."""

import math

import numpy as np
import pytest

from errdisturb import qmcore

RNG = np.random.default_rng(101)


def random_axis(rng=RNG):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_state(rng=RNG):
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return z / np.linalg.norm(z)


# ---------------------------------------------------------------- Bloch map

def test_state_from_bloch_poles():
    assert np.allclose(qmcore.state_from_bloch([0, 0, 1]), [[1, 0], [0, 0]], atol=1e-15)
    assert np.allclose(qmcore.state_from_bloch([0, 0, 0]), 0.5 * np.eye(2), atol=1e-15)
    assert np.allclose(qmcore.state_from_bloch([1, 0, 0]), 0.5 * np.ones((2, 2)), atol=1e-15)


def test_state_from_bloch_properties():
    for _ in range(50):
        r = RNG.normal(size=3)
        r *= RNG.uniform(0, 1) / np.linalg.norm(r)
        rho = qmcore.state_from_bloch(r)
        assert np.allclose(rho, rho.conj().T, atol=1e-12)
        assert abs(np.trace(rho).real - 1.0) < 1e-12
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-12


def test_state_from_bloch_rejects_outside_ball():
    with pytest.raises(ValueError):
        qmcore.state_from_bloch([1.1, 0, 0])


def test_bloch_from_state_examples():
    assert np.allclose(qmcore.bloch_from_state([1, 0]), [0, 0, 1], atol=1e-15)
    plus_x = np.array([1, 1]) / math.sqrt(2)
    assert np.allclose(qmcore.bloch_from_state(plus_x), [1, 0, 0], atol=1e-15)
    # theta = pi/4, phi = pi/12 against the direct spherical components
    r = qmcore.bloch_from_state(qmcore.state_from_angles(math.pi / 4, math.pi / 12))
    expected = [
        math.sin(math.pi / 4) * math.cos(math.pi / 12),
        math.sin(math.pi / 4) * math.sin(math.pi / 12),
        math.cos(math.pi / 4),
    ]
    assert np.allclose(r, expected, atol=1e-12)
    assert abs(r[0] - 0.6830127018922193) < 1e-12


def test_bloch_from_state_rejects_unnormalized():
    with pytest.raises(ValueError):
        qmcore.bloch_from_state([1, 1])


def test_angle_round_trip():
    thetas = np.linspace(0, math.pi, 19)
    phis = np.linspace(0, 2 * math.pi, 25)
    for theta in thetas:
        for phi in phis:
            r = qmcore.bloch_from_state(qmcore.state_from_angles(theta, phi))
            assert np.allclose(r, qmcore.axis_from_angles(theta, phi), atol=1e-12)


def test_axis_angle_inverse():
    for _ in range(100):
        n = random_axis()
        theta, phi = qmcore.angles_from_axis(n)
        assert np.allclose(qmcore.axis_from_angles(theta, phi), n, atol=1e-12)


# ---------------------------------------------------------------- operators

def test_spin_operator_z_and_x():
    z = qmcore.spin_operator(qmcore.Z_AXIS)
    assert np.allclose(z.matrix, np.diag([1, -1]), atol=1e-15)
    assert np.allclose(z.projector_plus, np.diag([1, 0]), atol=1e-15)
    x = qmcore.spin_operator(qmcore.X_AXIS)
    assert np.allclose(x.matrix, [[0, 1], [1, 0]], atol=1e-15)


def test_spin_operator_oblique_axis():
    n = np.ones(3) / math.sqrt(3)
    ob = qmcore.spin_operator(n)
    for p in (ob.projector_plus, ob.projector_minus):
        assert np.allclose(p @ p, p, atol=1e-12)
    assert np.allclose(ob.projector_plus @ ob.projector_minus, 0, atol=1e-12)
    assert np.allclose(ob.projector_plus + ob.projector_minus, np.eye(2), atol=1e-12)
    assert np.allclose(ob.projector_plus - ob.projector_minus, ob.matrix, atol=1e-12)
    assert np.allclose(ob.matrix @ ob.eigenstate_plus, ob.eigenstate_plus, atol=1e-12)
    assert np.allclose(ob.matrix @ ob.eigenstate_minus, -ob.eigenstate_minus, atol=1e-12)


def test_pauli_square_identity():
    for _ in range(50):
        m = qmcore.pauli_dot(random_axis())
        assert np.allclose(m @ m, np.eye(2), atol=1e-12)


def test_unit_axis_rejects_non_unit():
    with pytest.raises(ValueError):
        qmcore.unit_axis([1, 1, 0])


def test_expectation_examples():
    plus_z = qmcore.state_from_angles(0, 0)
    assert qmcore.expectation(qmcore.PAULI_Z, plus_z) == pytest.approx(1.0, abs=1e-15)
    assert qmcore.expectation(qmcore.PAULI_X, plus_z) == pytest.approx(0.0, abs=1e-15)
    psi = qmcore.state_from_angles(math.pi / 4, math.pi / 12)
    assert qmcore.expectation(qmcore.PAULI_X, psi) == pytest.approx(
        0.6830127018922193, abs=1e-12
    )


def test_expectation_rejects_non_hermitian():
    non_herm = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(ValueError):
        qmcore.expectation(non_herm, np.array([1, 1j]) / math.sqrt(2))


# ---------------------------------------------------------------- rotations

def test_rotate_examples():
    plus_z = qmcore.state_from_angles(0, 0)
    # rotation axis along the state axis: Bloch vector fixed
    r = qmcore.bloch_from_state(qmcore.rotate(qmcore.Z_AXIS, 0.7, plus_z))
    assert np.allclose(r, [0, 0, 1], atol=1e-12)
    r = qmcore.bloch_from_state(qmcore.rotate(qmcore.X_AXIS, math.pi / 2, plus_z))
    assert np.allclose(r, [0, 0, -1], atol=1e-12)
    r = qmcore.bloch_from_state(qmcore.rotate(qmcore.X_AXIS, math.pi / 4, plus_z))
    assert np.allclose(r, [0, 1, 0], atol=1e-12)


def test_rotation_operator_unitary():
    for _ in range(20):
        u = qmcore.rotation_operator(random_axis(), RNG.uniform(0, 2 * math.pi))
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_rotate_preserves_norm_and_overlap():
    for _ in range(50):
        n = random_axis()
        alpha = RNG.uniform(0, 2 * math.pi)
        psi, chi = random_state(), random_state()
        rpsi = qmcore.rotate(n, alpha, psi)
        rchi = qmcore.rotate(n, alpha, chi)
        assert abs(np.linalg.norm(rpsi) - 1.0) < 1e-12
        assert abs(abs(chi.conj() @ psi) - abs(rchi.conj() @ rpsi)) < 1e-12


def test_rotate_composition():
    for _ in range(30):
        n = random_axis()
        a1, a2 = RNG.uniform(0, math.pi, size=2)
        psi = random_state()
        once = qmcore.bloch_from_state(qmcore.rotate(n, a1 + a2, psi))
        twice = qmcore.bloch_from_state(qmcore.rotate(n, a2, qmcore.rotate(n, a1, psi)))
        assert np.allclose(once, twice, atol=1e-12)


def test_rotate_keeps_axis_component():
    for _ in range(30):
        n = random_axis()
        psi = random_state()
        before = float(qmcore.bloch_from_state(psi) @ n)
        after = float(qmcore.bloch_from_state(qmcore.rotate(n, RNG.uniform(0, 7), psi)) @ n)
        assert abs(before - after) < 1e-12
