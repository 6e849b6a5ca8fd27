"""Error and disturbance from expectation values in three preparations.

For spin-1/2 and +-1 valued observables, the squared error of an
apparatus with output observable O_A = o_a.sigma, measuring A = a.sigma
on input psi, is an affine combination of <O_A> taken in three states:
psi itself, A psi (normalized) and (A+1) psi (normalized),

    eps^2 = 2 + <O_A>_psi + ||A psi||^2 <O_A>_{A psi}
              - ||(A+1) psi||^2 <O_A>_{(A+1) psi},

and the squared disturbance is the same combination with B and the
post-measurement observable O_B = sum_m M_m^dag B M_m.  The estimators
consume nothing but those scalar expectation values plus the two
preparation norms, so they apply equally to analytic inputs and to
measured count ratios.  The preparation norms are known analytically
from the prepared state (||A psi|| = 1 for unit spin components and
||(A+1) psi||^2 = 2 + 2<A>_psi), so only expectation values carry
statistical noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmcore
from .povm import RADICAND_TOL, InconsistentDataError

ZERO_NORM_TOL = 1e-12          # below this a preparation is treated as absent
EXPECTATION_RANGE_TOL = 1e-9   # slack on the [-1, 1] input window


@dataclass(frozen=True)
class ThreeStateSet:
    """The three preparations that feed one reconstruction.

    ``transformed`` is X psi normalized, ``shifted`` is (X+1) psi
    normalized; either is None when the corresponding norm vanishes
    (psi an eigenstate of X with the matching eigenvalue).
    ``success_probability`` is ||X psi||^2 / ||X||^2, the acceptance
    probability of preparing the transformed state by a filtering
    measurement.
    """

    base: np.ndarray
    transformed: np.ndarray | None
    shifted: np.ndarray | None
    norm_transformed: float
    norm_shifted: float
    success_probability: float


def auxiliary_states(obs, psi) -> ThreeStateSet:
    """Build psi, X psi and (X+1) psi (normalized) for an observable X.

    Parameters
    ----------
    obs : array_like, shape (2, 2)
        Hermitian, nonzero.
    psi : array_like, shape (2,)
        Normalized input state.
    """
    psi = qmcore.as_state(psi)
    obs = np.asarray(obs, dtype=complex)
    if not np.allclose(obs, obs.conj().T, atol=qmcore.HERMITIAN_TOL, rtol=0.0):
        raise ValueError("observable is not Hermitian")
    op_norm = float(np.max(np.abs(np.linalg.eigvalsh(obs))))
    if op_norm == 0.0:
        raise ValueError("observable is zero; auxiliary states are undefined")
    transformed_raw = obs @ psi
    shifted_raw = transformed_raw + psi
    norm_t = float(np.linalg.norm(transformed_raw))
    norm_s = float(np.linalg.norm(shifted_raw))
    return ThreeStateSet(
        base=psi,
        transformed=transformed_raw / norm_t if norm_t > ZERO_NORM_TOL else None,
        shifted=shifted_raw / norm_s if norm_s > ZERO_NORM_TOL else None,
        norm_transformed=norm_t if norm_t > ZERO_NORM_TOL else 0.0,
        norm_shifted=norm_s if norm_s > ZERO_NORM_TOL else 0.0,
        success_probability=(norm_t / op_norm) ** 2,
    )


def _reconstruct(base, transformed, shifted, norm_transformed, norm_shifted, what):
    base = np.asarray(base, dtype=float)
    transformed = np.asarray(transformed, dtype=float)
    shifted = np.asarray(shifted, dtype=float)
    w_t = np.asarray(norm_transformed, dtype=float) ** 2
    w_s = np.asarray(norm_shifted, dtype=float) ** 2
    # expectation values of a +-1 observable; entries tied to an absent
    # (zero-norm) preparation are ignored and may hold any placeholder
    used = [(base, np.True_), (transformed, w_t > 0), (shifted, w_s > 0)]
    for values, mask in used:
        if np.any(mask & (np.abs(values) > 1.0 + EXPECTATION_RANGE_TOL)):
            raise ValueError(f"{what} expectation values must lie in [-1, 1]")
    radicand = (
        2.0
        + base
        + w_t * np.where(w_t > 0, transformed, 0.0)
        - w_s * np.where(w_s > 0, shifted, 0.0)
    )
    n_bad = int(np.count_nonzero(radicand < -RADICAND_TOL))
    if n_bad:
        raise InconsistentDataError(
            f"squared {what} below -1e-10 at {n_bad} point(s) "
            f"(min {float(np.min(radicand))!r}); expectations are inconsistent"
        )
    result = np.sqrt(np.maximum(radicand, 0.0))
    return float(result) if result.ndim == 0 else result


def estimate_error(base, transformed, shifted, norm_transformed=1.0, norm_shifted=0.0):
    """Reconstruct the rms error from three <O_A> expectation values.

    Parameters
    ----------
    base, transformed, shifted : float or ndarray
        <O_A> in psi, in A psi / ||A psi|| and in (A+1) psi / ||(A+1) psi||.
    norm_transformed, norm_shifted : float or ndarray
        Preparation norms ||A psi|| and ||(A+1) psi||; a zero norm drops
        the corresponding term.

    Returns
    -------
    float or ndarray
        sqrt of 2 + base + norm_t^2 * transformed - norm_s^2 * shifted,
        with radicands in [-1e-10, 0) clamped to zero.  Radicands below
        the window raise InconsistentDataError.
    """
    return _reconstruct(base, transformed, shifted, norm_transformed, norm_shifted, "error")


def estimate_disturbance(base, transformed, shifted, norm_transformed=1.0, norm_shifted=0.0):
    """Reconstruct the rms disturbance from three <O_B> expectation values.

    Mirror of :func:`estimate_error` with B in place of A: the inputs are
    <O_B> taken in psi, B psi / ||B psi|| and (B+1) psi / ||(B+1) psi||.
    """
    return _reconstruct(
        base, transformed, shifted, norm_transformed, norm_shifted, "disturbance"
    )


def _expectations(op, states: ThreeStateSet):
    e_base = qmcore.expectation(op, states.base)
    e_t = qmcore.expectation(op, states.transformed) if states.transformed is not None else 0.0
    e_s = qmcore.expectation(op, states.shifted) if states.shifted is not None else 0.0
    return e_base, e_t, e_s


def error_from_operators(output_obs, measured_obs, psi) -> float:
    """Route exact expectations of O_A through the error estimator.

    The estimator never sees the apparatus direction, only the three
    scalars, so this checks the reconstruction identity end to end.
    """
    states = auxiliary_states(measured_obs, psi)
    e_base, e_t, e_s = _expectations(output_obs, states)
    return estimate_error(e_base, e_t, e_s, states.norm_transformed, states.norm_shifted)


def disturbance_from_operators(modified_obs, disturbed_obs, psi) -> float:
    """Route exact expectations of O_B through the disturbance estimator."""
    states = auxiliary_states(disturbed_obs, psi)
    e_base, e_t, e_s = _expectations(modified_obs, states)
    return estimate_disturbance(e_base, e_t, e_s, states.norm_transformed, states.norm_shifted)


def shifted_norm_from_expectation(mean_obs: float) -> float:
    """||(X+1) psi|| from the analytic identity ||(X+1) psi||^2 = 2 + 2 <X>_psi."""
    return math.sqrt(max(2.0 + 2.0 * float(mean_obs), 0.0))
