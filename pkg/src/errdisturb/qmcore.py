"""Exact linear algebra for a single spin-1/2.

States are length-2 complex vectors, observables are 2x2 Hermitian
matrices, and directions live on the unit sphere in R^3.  Everything
here is closed form; the tolerance constants below are shared by the
rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ALGEBRA_TOL = 1e-12    # closed-form algebraic identities
UNIT_TOL = 1e-9        # unit-norm inputs (states, axes, Bloch vectors)
HERMITIAN_TOL = 1e-10  # tolerated imaginary residue of real expectation values

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = np.stack([PAULI_X, PAULI_Y, PAULI_Z])

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


def unit_axis(v) -> np.ndarray:
    """Validate a direction on the unit sphere.

    Parameters
    ----------
    v : array_like, shape (3,)
        Cartesian components; the Euclidean norm must be 1 within 1e-9.

    Returns
    -------
    ndarray, shape (3,)
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"axis must have shape (3,), got {v.shape}")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > UNIT_TOL:
        raise ValueError(f"axis is not unit length: |v| = {n!r}")
    return v


def normalized(v) -> np.ndarray:
    """Scale a nonzero 3-vector to unit length."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def axis_from_angles(theta, phi) -> np.ndarray:
    """Unit axis at polar angle theta (from +z) and azimuth phi (from +x).

    Components are (cos(phi) sin(theta), sin(phi) sin(theta), cos(theta)).
    Broadcasts over array arguments; Cartesian components are stacked
    along the last dimension.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    x, y, z = np.broadcast_arrays(np.cos(phi) * st, np.sin(phi) * st, np.cos(theta))
    return np.stack([x, y, z], axis=-1)


def angles_from_axis(axis):
    """Polar and azimuthal angles (theta, phi) of a direction.

    Inverse of :func:`axis_from_angles` up to the 2*pi ambiguity in phi;
    broadcasts over a stack of directions.
    """
    axis = np.asarray(axis, dtype=float)
    theta = np.arccos(np.clip(axis[..., 2], -1.0, 1.0))
    phi = np.arctan2(axis[..., 1], axis[..., 0])
    return theta, phi


def as_state(psi) -> np.ndarray:
    """Validate a pure spin-1/2 state vector (unit norm within 1e-9)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValueError(f"state must have shape (2,), got {psi.shape}")
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > UNIT_TOL:
        raise ValueError(f"state is not normalized: <psi|psi> = {n * n!r}")
    return psi


def state_from_angles(theta: float, phi: float) -> np.ndarray:
    """Pure state whose Bloch vector points along (theta, phi).

    Returns the spinor (cos(theta/2), e^{i phi} sin(theta/2)).
    """
    theta = float(theta)
    phi = float(phi)
    return np.array(
        [math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)], dtype=complex
    )


def density_matrix(psi) -> np.ndarray:
    """Rank-one density matrix |psi><psi|."""
    psi = as_state(psi)
    return np.outer(psi, psi.conj())


def state_from_bloch(r) -> np.ndarray:
    """Density matrix (1 + r.sigma)/2 for a Bloch vector with |r| <= 1."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError(f"Bloch vector must have shape (3,), got {r.shape}")
    n = np.linalg.norm(r)
    if n > 1.0 + UNIT_TOL:
        raise ValueError(f"Bloch vector lies outside the unit ball: |r| = {n!r}")
    return 0.5 * (IDENTITY + pauli_dot(r))


def bloch_from_state(psi) -> np.ndarray:
    """Bloch vector (<sigma_x>, <sigma_y>, <sigma_z>) of a pure state."""
    psi = as_state(psi)
    return np.real(np.einsum("i,kij,j->k", psi.conj(), PAULI, psi))


def pauli_dot(n) -> np.ndarray:
    """n.sigma for one axis or a stack of axes (last dimension 3)."""
    n = np.asarray(n, dtype=float)
    return np.einsum("...k,kij->...ij", n, PAULI)


@dataclass(frozen=True)
class SpinObservable:
    """A spin component axis.sigma with its spectral pieces."""

    axis: np.ndarray
    matrix: np.ndarray
    projector_plus: np.ndarray
    projector_minus: np.ndarray
    eigenstate_plus: np.ndarray
    eigenstate_minus: np.ndarray


def spin_operator(n) -> SpinObservable:
    """Spectral decomposition of the spin component along n.

    Parameters
    ----------
    n : array_like, shape (3,)
        Unit axis.

    Returns
    -------
    SpinObservable
        Matrix n.sigma, the eigenprojectors (1 +- n.sigma)/2 and the
        +-1 eigenstates with the (theta, phi) phase convention of
        :func:`state_from_angles`.
    """
    n = unit_axis(n)
    m = pauli_dot(n)
    p_plus = 0.5 * (IDENTITY + m)
    p_minus = 0.5 * (IDENTITY - m)
    theta, phi = angles_from_axis(n)
    e_plus = state_from_angles(theta, phi)
    e_minus = np.array(
        [-np.exp(-1j * phi) * math.sin(theta / 2), math.cos(theta / 2)], dtype=complex
    )
    return SpinObservable(n, m, p_plus, p_minus, e_plus, e_minus)


def expectation(X, psi) -> float:
    """<psi|X|psi> as a real number.

    Raises if the value keeps an imaginary part above 1e-10, which means
    X was not Hermitian on the support of psi.
    """
    X = np.asarray(X, dtype=complex)
    psi = as_state(psi)
    val = complex(psi.conj() @ X @ psi)
    if abs(val.imag) > HERMITIAN_TOL:
        raise ValueError(
            f"expectation keeps imaginary residue {val.imag:.3e}; operator is not Hermitian"
        )
    return val.real


def rotation_operator(axis, alpha: float) -> np.ndarray:
    """Larmor rotation exp(+i alpha axis.sigma) in closed form.

    On the Bloch sphere this turns r by the angle 2*alpha about -axis in
    the right-hand sense: alpha = pi/4 about x takes +z to +y.
    """
    n = unit_axis(axis)
    return math.cos(alpha) * IDENTITY + 1j * math.sin(alpha) * pauli_dot(n)


def rotate(axis, alpha: float, psi) -> np.ndarray:
    """Apply the Larmor rotation exp(+i alpha axis.sigma) to a pure state."""
    psi = as_state(psi)
    return rotation_operator(axis, alpha) @ psi
