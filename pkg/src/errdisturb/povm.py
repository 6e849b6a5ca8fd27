"""Measurement models on finite-dimensional systems.

A measurement with real outcome labels m is a finite family of
measurement operators M_m, complete in the sense sum_m M_m^dag M_m = 1.
Selective state change is M_m psi / ||M_m psi||, outcome probabilities
are ||M_m psi||^2, and the root-mean-square noise and disturbance of the
family are expectation values of its output moment operators, so every
quantity here reduces to dense linear algebra.

Models can be given directly or compressed out of an indirect
description (probe state, coupling unitary, probe meter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmcore

COMPLETENESS_TOL = 1e-10  # sum_m M_m^dag M_m = identity
UNITARY_TOL = 1e-10
PSD_TOL = 1e-10
RADICAND_TOL = 1e-10      # squared error/disturbance clamp window
OK_TOL = 1e-9             # relation flags

MIN_BRANCH_PROBABILITY = 1e-14  # below this a selective post-state is undefined


class InconsistentDataError(ValueError):
    """A squared error or disturbance came out below the clamp window.

    Raised when a reconstruction radicand is smaller than -1e-10, which
    signals an inconsistent model or miscalibrated expectation values;
    values in [-1e-10, 0) are clamped to zero instead.
    """


def clamped_sqrt(value: float, what: str = "squared quantity") -> float:
    """sqrt with the shared clamp rule for tiny negative radicands."""
    if value < -RADICAND_TOL:
        raise InconsistentDataError(
            f"{what} = {value!r} is below -1e-10; inputs are inconsistent"
        )
    return math.sqrt(value) if value > 0.0 else 0.0


def _state(psi, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (dim,):
        raise ValueError(f"state must have shape ({dim},), got {psi.shape}")
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > qmcore.UNIT_TOL:
        raise ValueError(f"state is not normalized: <psi|psi> = {n * n!r}")
    return psi


def _hermitian(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.shape != (dim, dim):
        raise ValueError(f"operator must have shape ({dim}, {dim}), got {X.shape}")
    if not np.allclose(X, X.conj().T, atol=qmcore.HERMITIAN_TOL, rtol=0.0):
        raise ValueError("operator is not Hermitian")
    return X


def _expect(X, psi) -> float:
    # trusted-Hermitian fast path; public callers go through qmcore.expectation
    return float(np.real(psi.conj() @ X @ psi))


@dataclass(frozen=True)
class MeasurementModel:
    """Finite outcome-labeled family of measurement operators.

    Attributes
    ----------
    labels : tuple of float
        Outcome values, pairwise distinct.
    operators : ndarray, shape (k, d, d)
        One measurement operator per label; the family must satisfy
        sum_m M_m^dag M_m = identity within 1e-10.
    """

    labels: tuple
    operators: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValueError(f"operators must form a (k, d, d) stack, got {ops.shape}")
        labels = tuple(float(m) for m in self.labels)
        if len(labels) != ops.shape[0]:
            raise ValueError("need exactly one outcome label per operator")
        if len(set(labels)) != len(labels):
            raise ValueError("outcome labels must be pairwise distinct")
        total = np.einsum("kji,kjl->il", ops.conj(), ops)
        if not np.allclose(total, np.eye(ops.shape[1]), atol=COMPLETENESS_TOL, rtol=0.0):
            raise ValueError("operators are not complete: sum M^dag M != identity")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def povm_elements(self) -> np.ndarray:
        """The effects M_m^dag M_m, stacked in label order."""
        return np.einsum("kji,kjl->kil", self.operators.conj(), self.operators)


@dataclass(frozen=True)
class IndirectModel:
    """Probe-based description of a measurement.

    The joint space is system (x) probe in kron ordering.  The probe
    starts in ``probe_state``, ``interaction`` is the coupling unitary on
    the joint space, and ``meter`` is the Hermitian probe observable that
    is read out; its eigenvalues become the outcome labels.
    """

    probe_state: np.ndarray
    interaction: np.ndarray
    meter: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.probe_state, dtype=complex)
        if xi.ndim != 1:
            raise ValueError("probe state must be a vector")
        if abs(np.linalg.norm(xi) - 1.0) > qmcore.UNIT_TOL:
            raise ValueError("probe state is not normalized")
        d_p = xi.shape[0]
        meter = _hermitian(self.meter, d_p)
        evals = np.linalg.eigvalsh(meter)
        if d_p > 1 and np.min(np.diff(np.sort(evals))) < 1e-8:
            raise ValueError("meter eigenvalues are degenerate; outcomes would collide")
        u = np.asarray(self.interaction, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("interaction must be a square matrix")
        if u.shape[0] % d_p != 0:
            raise ValueError(
                f"joint dimension {u.shape[0]} is not a multiple of probe dimension {d_p}"
            )
        if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=UNITARY_TOL, rtol=0.0):
            raise ValueError("interaction is not unitary")
        object.__setattr__(self, "probe_state", xi)
        object.__setattr__(self, "interaction", u)
        object.__setattr__(self, "meter", meter)

    @property
    def probe_dim(self) -> int:
        return self.probe_state.shape[0]

    @property
    def system_dim(self) -> int:
        return self.interaction.shape[0] // self.probe_dim


def from_indirect(model: IndirectModel) -> MeasurementModel:
    """Compress an indirect model to its measurement-operator family.

    The operator for meter outcome m is the partial matrix element
    M_m = <m| U |xi> taken on the probe factor, which reproduces the
    joint-space outcome probabilities for every system input.
    """
    d_s, d_p = model.system_dim, model.probe_dim
    evals, evecs = np.linalg.eigh(model.meter)
    u = model.interaction.reshape(d_s, d_p, d_s, d_p)
    staged = np.einsum("ipjq,q->ipj", u, model.probe_state)
    ops = np.einsum("pm,ipj->mij", evecs.conj(), staged)
    return MeasurementModel(tuple(float(v) for v in evals), ops)


@dataclass(frozen=True)
class Branch:
    """One selective outcome: label, probability, normalized post-state.

    ``post_state`` is None when the branch probability is below 1e-14,
    where the selective state is undefined.
    """

    label: float
    probability: float
    post_state: np.ndarray | None


def apply(model: MeasurementModel, psi) -> list[Branch]:
    """Outcome probabilities and selective post-states for a pure input."""
    psi = _state(psi, model.dim)
    branches = []
    for label, op in zip(model.labels, model.operators):
        vec = op @ psi
        p = float(np.real(vec.conj() @ vec))
        post = vec / math.sqrt(p) if p > MIN_BRANCH_PROBABILITY else None
        branches.append(Branch(label, p, post))
    return branches


def nonselective(model: MeasurementModel, rho) -> np.ndarray:
    """Total (outcome-blind) state change sum_m M_m rho M_m^dag."""
    rho = np.asarray(rho, dtype=complex)
    d = model.dim
    _hermitian(rho, d)
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError("density input must have unit trace")
    if np.min(np.linalg.eigvalsh(rho)) < -PSD_TOL:
        raise ValueError("density input is not positive semidefinite")
    ops = model.operators
    return np.einsum("kij,jl,kml->im", ops, rho, ops.conj())


def moment_output_operator(model: MeasurementModel, order: int = 1) -> np.ndarray:
    """Output moment operator sum_m m^order M_m^dag M_m."""
    weights = np.asarray(model.labels, dtype=float) ** order
    return np.einsum("k,kji,kjl->il", weights, model.operators.conj(), model.operators)


def post_moment_operator(model: MeasurementModel, obs, order: int = 1) -> np.ndarray:
    """Post-measurement moment operator sum_m M_m^dag obs^order M_m."""
    obs = _hermitian(obs, model.dim)
    powered = np.linalg.matrix_power(obs, order)
    return np.einsum("kji,jl,kln->in", model.operators.conj(), powered, model.operators)


def rms_error(model: MeasurementModel, obs, psi) -> float:
    """Root-mean-square noise of the model read as a measurement of obs.

    Moment-operator form: with O1, O2 the first two output moment
    operators,

        eps(A)^2 = <psi| O2 - O1 A - A O1 + A^2 |psi>.

    For projective models this equals ||(O1 - A) psi||.
    """
    A = _hermitian(obs, model.dim)
    psi = _state(psi, model.dim)
    o1 = moment_output_operator(model, 1)
    o2 = moment_output_operator(model, 2)
    block = o2 - o1 @ A - A @ o1 + A @ A
    return clamped_sqrt(_expect(block, psi), "squared rms error")


def rms_error_branch_sum(model: MeasurementModel, obs, psi) -> float:
    """Same noise through the branch sum eps(A)^2 = sum_m ||M_m (m - A) psi||^2."""
    A = _hermitian(obs, model.dim)
    psi = _state(psi, model.dim)
    total = 0.0
    for label, op in zip(model.labels, model.operators):
        vec = op @ (label * psi - A @ psi)
        total += float(np.real(vec.conj() @ vec))
    return clamped_sqrt(total, "squared rms error")


def rms_disturbance(model: MeasurementModel, obs, psi) -> float:
    """Root-mean-square disturbance the model imprints on obs.

    Moment-operator form: with O1 = sum_m M_m^dag B M_m and
    O2 = sum_m M_m^dag B^2 M_m,

        eta(B)^2 = <psi| O2 - O1 B - B O1 + B^2 |psi>.
    """
    B = _hermitian(obs, model.dim)
    psi = _state(psi, model.dim)
    o1 = post_moment_operator(model, B, 1)
    o2 = post_moment_operator(model, B, 2)
    block = o2 - o1 @ B - B @ o1 + B @ B
    return clamped_sqrt(_expect(block, psi), "squared rms disturbance")


def rms_disturbance_commutator_sum(model: MeasurementModel, obs, psi) -> float:
    """Same disturbance through eta(B)^2 = sum_m ||[M_m, B] psi||^2."""
    B = _hermitian(obs, model.dim)
    psi = _state(psi, model.dim)
    total = 0.0
    for op in model.operators:
        vec = (op @ B - B @ op) @ psi
        total += float(np.real(vec.conj() @ vec))
    return clamped_sqrt(total, "squared rms disturbance")


@dataclass(frozen=True)
class UncertaintyReport:
    """Every term of the measurement uncertainty relations at one setting.

    ``robertson_bound`` and ``commutator_bound`` both carry the value
    (1/2)|<[A,B]>|; the first is compared against sigma_a*sigma_b, the
    second against the error-disturbance combinations.  The combined
    relation bounds (eps + sigma_a)(eta + sigma_b) by the full
    |<[A,B]>| = 2*commutator_bound.
    """

    error: float
    disturbance: float
    sigma_a: float
    sigma_b: float
    robertson_bound: float
    schroedinger_bound: float
    commutator_bound: float
    heisenberg_lhs: float
    ozawa_lhs: float
    combined_lhs: float
    heisenberg_ok: bool
    ozawa_ok: bool
    combined_ok: bool

    @classmethod
    def from_components(
        cls,
        error: float,
        disturbance: float,
        sigma_a: float,
        sigma_b: float,
        commutator_bound: float,
        schroedinger_bound: float,
    ) -> "UncertaintyReport":
        heis = error * disturbance
        ozawa = heis + error * sigma_b + sigma_a * disturbance
        combined = (error + sigma_a) * (disturbance + sigma_b)
        return cls(
            error=error,
            disturbance=disturbance,
            sigma_a=sigma_a,
            sigma_b=sigma_b,
            robertson_bound=commutator_bound,
            schroedinger_bound=schroedinger_bound,
            commutator_bound=commutator_bound,
            heisenberg_lhs=heis,
            ozawa_lhs=ozawa,
            combined_lhs=combined,
            heisenberg_ok=bool(heis >= commutator_bound - OK_TOL),
            ozawa_ok=bool(ozawa >= commutator_bound - OK_TOL),
            combined_ok=bool(combined >= 2.0 * commutator_bound - OK_TOL),
        )


def evaluate_relations(model: MeasurementModel, obs_a, obs_b, psi) -> UncertaintyReport:
    """Evaluate all uncertainty-relation terms for one model and pure state.

    Computes eps(A), eta(B), the spreads sigma(A), sigma(B), the
    commutator and Schroedinger lower bounds, the Heisenberg, Ozawa and
    combined left-hand sides, and the per-relation validity flags.
    Restricted to pure input states.
    """
    A = _hermitian(obs_a, model.dim)
    B = _hermitian(obs_b, model.dim)
    psi = _state(psi, model.dim)
    eps = rms_error(model, A, psi)
    eta = rms_disturbance(model, B, psi)
    ea, eb = _expect(A, psi), _expect(B, psi)
    sigma_a = math.sqrt(max(_expect(A @ A, psi) - ea * ea, 0.0))
    sigma_b = math.sqrt(max(_expect(B @ B, psi) - eb * eb, 0.0))
    commutator_bound = 0.5 * abs(complex(psi.conj() @ (A @ B - B @ A) @ psi))
    covariance = 0.5 * _expect(A @ B + B @ A, psi) - ea * eb
    schroedinger_bound = math.hypot(covariance, commutator_bound)
    return UncertaintyReport.from_components(
        eps, eta, sigma_a, sigma_b, commutator_bound, schroedinger_bound
    )


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform pure state."""
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian-ensemble Hermitian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (z + z.conj().T)


def random_indirect_model(
    system_dim: int, probe_dim: int, rng: np.random.Generator
) -> IndirectModel:
    """Random coupling with a computational-basis meter labeled 0..d_P-1."""
    u = haar_random_unitary(system_dim * probe_dim, rng)
    xi = random_state(probe_dim, rng)
    meter = np.diag(np.arange(probe_dim, dtype=float)).astype(complex)
    return IndirectModel(xi, u, meter)
