"""Four-port counting simulation of two successive spin measurements.

The first stage projects along the apparatus axis o_a, the second along
the target axis b, splitting the beam into four ports (+,+), (+,-),
(-,+), (-,-).  Port intensities reduce to the output expectation <O_A>
(first-stage marginal) and the post-measurement expectation <O_B>
(second-stage marginal).  Poisson counting noise, finite detector
efficiency (a multiplicative visibility) and Gaussian jitter on the
rotation angles that position each direction sit on top as the
imperfection model.

run_with_error_bars drives the full protocol: five four-port settings
feed the three-state reconstruction of error and disturbance, two
two-port settings measure the spreads, and replicate scatter gives the
error bars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmcore, threestate
from .povm import InconsistentDataError

PROBABILITY_TOL = 1e-9
DEFAULT_EXPOSURE = 600.0  # seconds per setting


@dataclass(frozen=True)
class PortProbabilities:
    """Exact intensities of the four beam ports, ordered (+,+), (+,-), (-,+), (-,-)."""

    pp: float
    pm: float
    mp: float
    mm: float

    def __post_init__(self):
        p = self.as_array()
        if np.any(p < -PROBABILITY_TOL) or abs(p.sum() - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"port probabilities must be a distribution, got {tuple(p)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.pp, self.pm, self.mp, self.mm], dtype=float)


@dataclass(frozen=True)
class ImperfectionModel:
    """Detector efficiency plus Gaussian angle jitter.

    ``efficiency`` in (0, 1] acts as a multiplicative visibility: the
    simulated port distribution is mixed toward uniform as
    eff*p + (1-eff)/n_ports, and reductions divide the recovered
    expectation by eff.  ``angle_jitter_sigma`` (radians) is the spread
    of independent zero-mean Gaussian errors applied to the polar and
    azimuthal positioning angles of the prepared state and of each
    analysis axis, drawn fresh for every setting.
    """

    efficiency: float = 0.96
    angle_jitter_sigma: float = math.radians(1.5)
    rng_seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency!r}")
        if self.angle_jitter_sigma < 0.0:
            raise ValueError("angle jitter sigma must be nonnegative")

    @classmethod
    def ideal(cls) -> "ImperfectionModel":
        return cls(efficiency=1.0, angle_jitter_sigma=0.0)


@dataclass(frozen=True)
class CountRecord:
    """Counts per port for one setting, with the exposure that produced them."""

    counts: np.ndarray
    exposure: float     # seconds
    mean_rate: float    # counts per second over all ports

    @property
    def total(self) -> int:
        return int(np.sum(self.counts))


def _resolve_rng(rng, imperfections: ImperfectionModel) -> np.random.Generator:
    if rng is None:
        return np.random.default_rng(imperfections.rng_seed)
    return rng


def port_probabilities(psi, o_a, b) -> PortProbabilities:
    """Exact four-port distribution ||P^b_n P^{o_a}_m psi||^2.

    First stage projects along o_a; the transmitted branch is
    renormalized and analyzed along b by the second stage.
    """
    psi = qmcore.as_state(psi)
    first = qmcore.spin_operator(o_a)
    second = qmcore.spin_operator(b)
    ports = []
    for proj in (first.projector_plus, first.projector_minus):
        branch = proj @ psi
        p1 = float(np.real(branch.conj() @ branch))
        if p1 < 1e-14:
            ports.extend([0.0, 0.0])
            continue
        collapsed = branch / math.sqrt(p1)
        p2 = float(np.real(collapsed.conj() @ second.projector_plus @ collapsed))
        ports.extend([p1 * p2, p1 * (1.0 - p2)])
    return PortProbabilities(*ports)


def perturb_direction(axis, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Tilt a direction by Gaussian errors on its polar and azimuthal angles."""
    if sigma == 0.0:
        return np.asarray(axis, dtype=float)
    theta, phi = qmcore.angles_from_axis(axis)
    return qmcore.axis_from_angles(
        theta + sigma * rng.standard_normal(), phi + sigma * rng.standard_normal()
    )


def _jittered_state(psi, sigma, rng):
    if sigma == 0.0:
        return psi
    direction = perturb_direction(qmcore.bloch_from_state(psi), sigma, rng)
    return qmcore.state_from_angles(*qmcore.angles_from_axis(direction))


def simulate_counts(
    probs, exposure: float, mean_rate: float, imperfections=None, rng=None
) -> CountRecord:
    """Draw per-port Poisson counts for one setting.

    The supplied distribution (already reflecting any angle jitter) is
    first pulled toward uniform by the detector efficiency, then each
    port count is drawn as Poisson(mean_rate * exposure * p_port).
    Deterministic for a given generator state.
    """
    if imperfections is None:
        imperfections = ImperfectionModel.ideal()
    rng = _resolve_rng(rng, imperfections)
    if exposure <= 0.0 or mean_rate <= 0.0:
        raise ValueError("exposure and mean_rate must be positive")
    p = probs.as_array() if isinstance(probs, PortProbabilities) else np.asarray(probs, float)
    if np.any(p < -PROBABILITY_TOL) or abs(p.sum() - 1.0) > PROBABILITY_TOL:
        raise ValueError("probs must form a probability distribution")
    eff = imperfections.efficiency
    mixed = eff * np.clip(p, 0.0, 1.0) + (1.0 - eff) / p.size
    counts = rng.poisson(mean_rate * exposure * mixed)
    return CountRecord(counts=counts, exposure=float(exposure), mean_rate=float(mean_rate))


def expectations_from_counts(record: CountRecord, imperfections=None):
    """Reduce four-port counts to the pair (<O_A>, <O_B>).

    ((I_pp + I_pm) - (I_mp + I_mm)) / total for the first stage and
    ((I_pp + I_mp) - (I_pm + I_mm)) / total for the second, each divided
    by the efficiency and clamped to [-1, 1].
    """
    if imperfections is None:
        imperfections = ImperfectionModel.ideal()
    c = np.asarray(record.counts, dtype=float)
    if c.shape != (4,):
        raise ValueError(f"expected four ports, got shape {c.shape}")
    total = c.sum()
    if total <= 0:
        raise ValueError("zero total counts; expectations are undefined")
    eff = imperfections.efficiency
    first = (c[0] + c[1] - c[2] - c[3]) / total / eff
    second = (c[0] + c[2] - c[1] - c[3]) / total / eff
    return float(np.clip(first, -1.0, 1.0)), float(np.clip(second, -1.0, 1.0))


def single_axis_expectation(psi, axis, which_apparatus: str = "first") -> float:
    """Exact <axis.sigma> from a single projective stage.

    ``which_apparatus`` names the hardware path ('first' or 'second',
    i.e. the other stage is switched off); both paths are ideal
    projective stages here, so the value does not depend on it.
    """
    if which_apparatus not in ("first", "second"):
        raise ValueError(f"which_apparatus must be 'first' or 'second', got {which_apparatus!r}")
    ob = qmcore.spin_operator(axis)
    return qmcore.expectation(ob.matrix, qmcore.as_state(psi))


def measure_setting(
    psi, o_a, b, exposure: float, mean_rate: float, imperfections=None, rng=None
) -> CountRecord:
    """One jittered four-port acquisition: perturb all three directions,
    compute the port distribution, then draw counts."""
    if imperfections is None:
        imperfections = ImperfectionModel.ideal()
    rng = _resolve_rng(rng, imperfections)
    sigma = imperfections.angle_jitter_sigma
    state = _jittered_state(psi, sigma, rng)
    probs = port_probabilities(
        state, perturb_direction(o_a, sigma, rng), perturb_direction(b, sigma, rng)
    )
    return simulate_counts(probs, exposure, mean_rate, imperfections, rng)


def _four_port_expectations(psi, o_a, b, exposure, mean_rate, imperfections, rng, ideal_statistics):
    sigma = imperfections.angle_jitter_sigma
    state = _jittered_state(psi, sigma, rng)
    probs = port_probabilities(
        state, perturb_direction(o_a, sigma, rng), perturb_direction(b, sigma, rng)
    )
    if ideal_statistics:
        # infinite-count limit: feed the mixed distribution straight back
        eff = imperfections.efficiency
        mixed = eff * probs.as_array() + (1.0 - eff) / 4.0
        record = CountRecord(mixed, exposure, mean_rate)
    else:
        record = simulate_counts(probs, exposure, mean_rate, imperfections, rng)
    return expectations_from_counts(record, imperfections)


def _two_port_expectation(psi, axis, exposure, mean_rate, imperfections, rng, ideal_statistics):
    sigma = imperfections.angle_jitter_sigma
    state = _jittered_state(psi, sigma, rng)
    analysis = qmcore.spin_operator(perturb_direction(axis, sigma, rng))
    p_plus = float(np.real(state.conj() @ analysis.projector_plus @ state))
    eff = imperfections.efficiency
    mixed = eff * np.array([p_plus, 1.0 - p_plus]) + (1.0 - eff) / 2.0
    if ideal_statistics:
        counts = mixed
    else:
        counts = rng.poisson(mean_rate * exposure * mixed)
    total = counts.sum()
    if total <= 0:
        raise ValueError("zero total counts; expectations are undefined")
    return float(np.clip((counts[0] - counts[1]) / total / eff, -1.0, 1.0))


@dataclass(frozen=True)
class MonteCarloReport:
    """Replicate means, replicate-spread uncertainties and failure counts.

    Uncertainties are the sample standard deviation over replicates
    (spread of a single run, not of the mean).  Replicates whose
    three-state radicand fell below the consistency window are tallied
    in ``failed_error`` / ``failed_disturbance`` and enter the estimate
    at the physical floor 0, the nearest point of the allowed domain;
    near a true zero of the error or disturbance roughly half the
    replicates land there, so a nonzero failure count is expected
    behavior, not a defect.
    """

    error: float
    error_sd: float
    disturbance: float
    disturbance_sd: float
    sigma_a: float
    sigma_a_sd: float
    sigma_b: float
    sigma_b_sd: float
    failed_error: int
    failed_disturbance: int
    replicates: int


def _mean_sd(values):
    if not values:
        return float("nan"), float("nan")
    arr = np.asarray(values, dtype=float)
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def run_with_error_bars(
    a,
    b,
    psi,
    o_a,
    replicates: int = 100,
    imperfections: ImperfectionModel | None = None,
    mean_counts_per_port: float = 4000.0,
    exposure: float = DEFAULT_EXPOSURE,
    rng: np.random.Generator | None = None,
    ideal_statistics: bool = False,
) -> MonteCarloReport:
    """Full counting experiment at one apparatus setting.

    Per replicate: five four-port settings measure <O_A> in the three
    error preparations and <O_B> in the three disturbance preparations
    (the base state is shared), two two-port settings measure <A> and
    <B> for the spreads, and the three-state reconstruction with
    analytic preparation norms turns the expectations into one error and
    one disturbance estimate.  ``mean_counts_per_port`` is the per-port
    expectation at uniform intensities, so each four-port setting
    collects 4*mean_counts_per_port expected counts.

    Replicates draw from independently seeded child streams of ``rng``,
    so results are reproducible for a fixed master seed.  With
    ``ideal_statistics`` the Poisson draws are replaced by the exact
    (jittered, efficiency-mixed) probabilities, emulating the
    infinite-count limit.
    """
    a = qmcore.unit_axis(a)
    b = qmcore.unit_axis(b)
    o_a = qmcore.unit_axis(o_a)
    psi = qmcore.as_state(psi)
    if imperfections is None:
        imperfections = ImperfectionModel.ideal()
    if replicates < 2:
        raise ValueError("need at least two replicates for a spread estimate")
    rng = _resolve_rng(rng, imperfections)

    obs_a = qmcore.pauli_dot(a)
    obs_b = qmcore.pauli_dot(b)
    error_set = threestate.auxiliary_states(obs_a, psi)
    dist_set = threestate.auxiliary_states(obs_b, psi)
    mean_rate = 4.0 * mean_counts_per_port / exposure

    error_vals, dist_vals, sa_vals, sb_vals = [], [], [], []
    failed_error = failed_disturbance = 0
    for child in rng.spawn(replicates):
        args = (exposure, mean_rate, imperfections, child, ideal_statistics)
        e_base, d_base = _four_port_expectations(psi, o_a, b, *args)
        e_t = (
            _four_port_expectations(error_set.transformed, o_a, b, *args)[0]
            if error_set.transformed is not None
            else 0.0
        )
        e_s = (
            _four_port_expectations(error_set.shifted, o_a, b, *args)[0]
            if error_set.shifted is not None
            else 0.0
        )
        d_t = (
            _four_port_expectations(dist_set.transformed, o_a, b, *args)[1]
            if dist_set.transformed is not None
            else 0.0
        )
        d_s = (
            _four_port_expectations(dist_set.shifted, o_a, b, *args)[1]
            if dist_set.shifted is not None
            else 0.0
        )
        try:
            error_vals.append(
                threestate.estimate_error(
                    e_base, e_t, e_s, error_set.norm_transformed, error_set.norm_shifted
                )
            )
        except InconsistentDataError:
            # radicand below the consistency window: the data are only
            # compatible with the boundary of the physical domain
            error_vals.append(0.0)
            failed_error += 1
        try:
            dist_vals.append(
                threestate.estimate_disturbance(
                    d_base, d_t, d_s, dist_set.norm_transformed, dist_set.norm_shifted
                )
            )
        except InconsistentDataError:
            dist_vals.append(0.0)
            failed_disturbance += 1
        mean_a = _two_port_expectation(psi, a, *args)
        mean_b = _two_port_expectation(psi, b, *args)
        sa_vals.append(math.sqrt(max(1.0 - mean_a * mean_a, 0.0)))
        sb_vals.append(math.sqrt(max(1.0 - mean_b * mean_b, 0.0)))

    error, error_sd = _mean_sd(error_vals)
    disturbance, disturbance_sd = _mean_sd(dist_vals)
    sigma_a, sigma_a_sd = _mean_sd(sa_vals)
    sigma_b, sigma_b_sd = _mean_sd(sb_vals)
    return MonteCarloReport(
        error=error,
        error_sd=error_sd,
        disturbance=disturbance,
        disturbance_sd=disturbance_sd,
        sigma_a=sigma_a,
        sigma_a_sd=sigma_a_sd,
        sigma_b=sigma_b,
        sigma_b_sd=sigma_b_sd,
        failed_error=failed_error,
        failed_disturbance=failed_disturbance,
        replicates=replicates,
    )
