"""Configuration sweeps over apparatus axes.

A scenario fixes the observable axes a, b and the pure state psi, then
traces the apparatus axis o_a along a path on the unit sphere: the
equator, a latitude circle, or an explicit list of axes.  Each sample
carries the exact relation report plus, per mode, a three-state
reconstruction from exact expectation values or a Monte Carlo counting
estimate with error bars.  Rows are mutually independent; their order is
fixed by the path, and Monte Carlo seeds derive from the master seed and
the row index, so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import beamline, qmcore, spin, threestate
from .povm import UncertaintyReport

MODES = ("exact", "three_state_exact", "monte_carlo")
QUANTITIES = ("error", "disturbance", "product", "ozawa_sum")
FAMILIES = ("standard", "phiB", "thetaB", "psi", "latitude", "custom")

DEFAULT_SAMPLES = 361
VIOLATION_RESOLUTION = 3601


@dataclass(frozen=True)
class SweepPath:
    """Path of apparatus axes: equator, latitude circle, or explicit axes."""

    kind: str = "equator"
    theta: float = math.pi / 2
    phi_start: float = 0.0
    phi_stop: float = 2 * math.pi
    axes: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("equator", "latitude", "custom"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if self.kind == "custom":
            if self.axes is None:
                raise ValueError("custom path needs explicit axes")
            axes = np.atleast_2d(np.asarray(self.axes, dtype=float))
            for ax in axes:
                qmcore.unit_axis(ax)
            object.__setattr__(self, "axes", axes)


def equator_path(phi_start: float = 0.0, phi_stop: float = 2 * math.pi) -> SweepPath:
    return SweepPath("equator", math.pi / 2, phi_start, phi_stop)


def latitude_path(theta: float, phi_start: float = 0.0, phi_stop: float = 2 * math.pi) -> SweepPath:
    return SweepPath("latitude", float(theta), phi_start, phi_stop)


def custom_path(axes) -> SweepPath:
    return SweepPath("custom", axes=axes)


def path_axes(path: SweepPath, samples: int):
    """Sampled axes along a path with their polar/azimuthal angles."""
    if path.kind == "custom":
        axes = path.axes
        thetas, phis = qmcore.angles_from_axis(axes)
        return axes, thetas, phis
    if samples < 2:
        raise ValueError("need at least two samples")
    phis = np.linspace(path.phi_start, path.phi_stop, samples)
    thetas = np.full(samples, path.theta)
    return qmcore.axis_from_angles(thetas, phis), thetas, phis


@dataclass(frozen=True)
class ScenarioConfig:
    """One sweep: observables, state, path, sampling and evaluation mode."""

    a: np.ndarray = field(default_factory=lambda: qmcore.X_AXIS.copy())
    b: np.ndarray = field(default_factory=lambda: qmcore.Y_AXIS.copy())
    psi: np.ndarray = field(default_factory=lambda: qmcore.state_from_angles(0.0, 0.0))
    path: SweepPath = field(default_factory=equator_path)
    samples: int = DEFAULT_SAMPLES
    mode: str = "exact"
    family: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "a", qmcore.unit_axis(self.a))
        object.__setattr__(self, "b", qmcore.unit_axis(self.b))
        object.__setattr__(self, "psi", qmcore.as_state(self.psi))
        if self.samples < 2:
            raise ValueError("need at least two samples")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")


def standard_scenario(samples: int = DEFAULT_SAMPLES, mode: str = "exact") -> ScenarioConfig:
    """a = x, b = y, psi = +z, equatorial apparatus path."""
    return ScenarioConfig(samples=samples, mode=mode, family="standard")


def phi_b_scenario(phi_b: float = math.pi / 3, samples: int = DEFAULT_SAMPLES,
                   mode: str = "exact") -> ScenarioConfig:
    """Second observable rotated to azimuth phi_b in the equatorial plane."""
    return ScenarioConfig(
        b=qmcore.axis_from_angles(math.pi / 2, phi_b),
        samples=samples, mode=mode, family="phiB",
    )


def theta_b_scenario(theta_b: float = math.pi / 3, latitude: bool = False,
                     samples: int = DEFAULT_SAMPLES, mode: str = "exact") -> ScenarioConfig:
    """Second observable tilted out of the equator: b = (0, sin(theta_b), cos(theta_b)).

    With ``latitude`` the apparatus path follows the latitude circle
    theta_oa = theta_b instead of the equator.
    """
    path = latitude_path(theta_b) if latitude else equator_path()
    return ScenarioConfig(
        b=qmcore.axis_from_angles(theta_b, math.pi / 2),
        path=path, samples=samples, mode=mode, family="thetaB",
    )


def psi_scenario(theta_psi: float = math.pi / 4, phi_psi: float = math.pi / 12,
                 samples: int = DEFAULT_SAMPLES, mode: str = "exact") -> ScenarioConfig:
    """Standard observables with a general pure state (theta_psi, phi_psi)."""
    return ScenarioConfig(
        psi=qmcore.state_from_angles(theta_psi, phi_psi),
        samples=samples, mode=mode, family="psi",
    )


def latitude_scenario(theta_oa: float = math.pi / 3, samples: int = DEFAULT_SAMPLES,
                      mode: str = "exact") -> ScenarioConfig:
    """Standard observables with the apparatus on the latitude circle theta_oa."""
    return ScenarioConfig(
        path=latitude_path(theta_oa), samples=samples, mode=mode, family="latitude",
    )


def theory_curves(config: ScenarioConfig, phi, theta):
    """Printed closed-form curves (eps, eta) for the named scenario families.

    Families without a compact printed form (thetaB, custom) fall back to
    the general closed forms, which the named curves also reproduce.
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if config.family in ("standard", "psi"):
        return 2.0 * np.abs(np.sin(phi / 2)), math.sqrt(2.0) * np.abs(np.cos(phi))
    if config.family == "phiB":
        phi_b = math.atan2(config.b[1], config.b[0])
        return 2.0 * np.abs(np.sin(phi / 2)), math.sqrt(2.0) * np.abs(np.sin(phi - phi_b))
    if config.family == "latitude":
        eps = np.sqrt(np.maximum(2.0 - 2.0 * np.cos(phi) * np.sin(theta), 0.0))
        eta = np.sqrt(np.maximum(2.0 - 2.0 * np.sin(phi) ** 2 * np.sin(theta) ** 2, 0.0))
        return eps, eta
    axes = qmcore.axis_from_angles(theta, phi)
    return spin.error_exact(config.a, axes), spin.disturbance_exact(config.b, axes)


@dataclass(frozen=True)
class SweepRow:
    """One apparatus setting: exact report, theory curve, optional estimates."""

    phi_oa: float
    theta_oa: float
    report: UncertaintyReport
    ports: beamline.PortProbabilities
    eps_theory: float
    eta_theory: float
    eps_est: float | None = None
    eps_est_sd: float | None = None
    eta_est: float | None = None
    eta_est_sd: float | None = None


def three_state_exact_estimates(a, b, psi, axes):
    """Vectorized three-state reconstruction from exact expectation values.

    For each apparatus axis the output observable O_A = o_a.sigma and the
    post-measurement observable O_B = P+ B P+ + P- B P- are built as
    matrices, their exact expectations in the three preparations for A
    (error) and for B (disturbance) are taken, and the scalar estimators
    do the rest.  Returns (eps, eta) arrays over the axes.
    """
    a = qmcore.unit_axis(a)
    b = qmcore.unit_axis(b)
    psi = qmcore.as_state(psi)
    axes = np.atleast_2d(np.asarray(axes, dtype=float))
    obs_a = qmcore.pauli_dot(a)
    obs_b = qmcore.pauli_dot(b)
    out_ops = qmcore.pauli_dot(axes)                      # (n, 2, 2)
    eye = np.eye(2, dtype=complex)
    proj_p = 0.5 * (eye + out_ops)
    proj_m = 0.5 * (eye - out_ops)
    mod_ops = proj_p @ obs_b @ proj_p + proj_m @ obs_b @ proj_m

    def batch_expect(ops, state):
        return np.real(np.einsum("i,nij,j->n", state.conj(), ops, state))

    def trio(ops, states: threestate.ThreeStateSet):
        e_base = batch_expect(ops, states.base)
        e_t = (
            batch_expect(ops, states.transformed)
            if states.transformed is not None
            else np.zeros(len(ops))
        )
        e_s = (
            batch_expect(ops, states.shifted)
            if states.shifted is not None
            else np.zeros(len(ops))
        )
        return e_base, e_t, e_s

    error_set = threestate.auxiliary_states(obs_a, psi)
    dist_set = threestate.auxiliary_states(obs_b, psi)
    eps = threestate.estimate_error(
        *trio(out_ops, error_set), error_set.norm_transformed, error_set.norm_shifted
    )
    eta = threestate.estimate_disturbance(
        *trio(mod_ops, dist_set), dist_set.norm_transformed, dist_set.norm_shifted
    )
    return np.atleast_1d(eps), np.atleast_1d(eta)


def run_scenario(
    config: ScenarioConfig,
    imperfections: beamline.ImperfectionModel | None = None,
    replicates: int = 100,
    mean_counts_per_port: float = 4000.0,
    seed: int | None = None,
) -> list[SweepRow]:
    """Evaluate a scenario along its path, one SweepRow per sample.

    ``imperfections``, ``replicates``, ``mean_counts_per_port`` and
    ``seed`` only matter in monte_carlo mode; each row gets its own child
    stream spawned from the master seed in row order.
    """
    axes, thetas, phis = path_axes(config.path, config.samples)
    r = qmcore.bloch_from_state(config.psi)
    eps_th, eta_th = theory_curves(config, phis, thetas)
    eps_th = np.atleast_1d(eps_th)
    eta_th = np.atleast_1d(eta_th)

    est = [None] * len(axes)
    if config.mode == "three_state_exact":
        eps_ts, eta_ts = three_state_exact_estimates(config.a, config.b, config.psi, axes)
        est = [(float(e), 0.0, float(d), 0.0) for e, d in zip(eps_ts, eta_ts)]
    elif config.mode == "monte_carlo":
        if imperfections is None:
            imperfections = beamline.ImperfectionModel()
        streams = np.random.default_rng(seed).spawn(len(axes))
        est = []
        for ax, stream in zip(axes, streams):
            mc = beamline.run_with_error_bars(
                config.a, config.b, config.psi, ax,
                replicates=replicates,
                imperfections=imperfections,
                mean_counts_per_port=mean_counts_per_port,
                rng=stream,
            )
            est.append((mc.error, mc.error_sd, mc.disturbance, mc.disturbance_sd))

    rows = []
    for i, ax in enumerate(axes):
        report = spin.exact_report(config.a, config.b, ax, r)
        ports = beamline.port_probabilities(config.psi, ax, config.b)
        fields = {}
        if est[i] is not None:
            fields = dict(
                eps_est=est[i][0], eps_est_sd=est[i][1],
                eta_est=est[i][2], eta_est_sd=est[i][3],
            )
        rows.append(
            SweepRow(
                phi_oa=float(phis[i]),
                theta_oa=float(thetas[i]),
                report=report,
                ports=ports,
                eps_theory=float(eps_th[i]),
                eta_theory=float(eta_th[i]),
                **fields,
            )
        )
    return rows


def bloch_scan(quantity: str, a, b, psi, shape=(181, 361)):
    """Map one relation quantity over the whole sphere of apparatus axes.

    theta runs over [0, pi] and phi over [0, 2*pi], both inclusive, in a
    theta-major grid.  Returns (thetas, phis, values) with values of
    shape ``shape``.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    a = qmcore.unit_axis(a)
    b = qmcore.unit_axis(b)
    psi = qmcore.as_state(psi)
    n_theta, n_phi = shape
    if n_theta < 2 or n_phi < 2:
        raise ValueError("need at least two samples in each grid direction")
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2 * math.pi, n_phi)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    axes = qmcore.axis_from_angles(tt, pp)
    eps = spin.error_exact(a, axes)
    eta = spin.disturbance_exact(b, axes)
    if quantity == "error":
        values = eps
    elif quantity == "disturbance":
        values = eta
    elif quantity == "product":
        values = eps * eta
    else:
        r = qmcore.bloch_from_state(psi)
        sigma_a = float(spin.std_dev(a, r))
        sigma_b = float(spin.std_dev(b, r))
        values = eps * eta + eps * sigma_b + sigma_a * eta
    return thetas, phis, values


@dataclass(frozen=True)
class ViolationReport:
    """Where on a latitude circle the Heisenberg product dips below the bound."""

    theta_oa: float
    min_margin: float
    phi_at_min: float
    fulfilled_everywhere: bool
    violated_intervals: tuple


def violation_analysis(a, b, psi, theta_oa: float,
                       resolution: int = VIOLATION_RESOLUTION) -> ViolationReport:
    """Scan eps*eta - commutator_bound around the latitude circle theta_oa.

    Violated intervals are reported as closed [phi_lo, phi_hi] ranges of
    consecutive grid points with negative margin.
    """
    a = qmcore.unit_axis(a)
    b = qmcore.unit_axis(b)
    r = qmcore.bloch_from_state(psi)
    phis = np.linspace(0.0, 2 * math.pi, resolution)
    axes = qmcore.axis_from_angles(np.full(resolution, float(theta_oa)), phis)
    margin = spin.error_exact(a, axes) * spin.disturbance_exact(b, axes)
    margin = margin - float(spin.bounds(a, b, r).commutator_bound)
    i_min = int(np.argmin(margin))
    mask = margin < 0.0
    intervals = []
    if mask.any():
        idx = np.flatnonzero(mask)
        for group in np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1):
            intervals.append((float(phis[group[0]]), float(phis[group[-1]])))
    return ViolationReport(
        theta_oa=float(theta_oa),
        min_margin=float(margin[i_min]),
        phi_at_min=float(phis[i_min]),
        fulfilled_everywhere=not mask.any(),
        violated_intervals=tuple(intervals),
    )


def violation_threshold(a, b, psi, tol: float = 1e-6,
                        resolution: int = VIOLATION_RESOLUTION) -> float:
    """Largest latitude theta_oa at which the Heisenberg product still
    holds all the way around the circle, located by bisection.

    Assumes the fulfilled region is an interval [0, theta*], which holds
    for the standard configuration where the minimum margin decreases
    with theta_oa on [0, pi/2].
    """

    def fulfilled(theta):
        return violation_analysis(a, b, psi, theta, resolution).fulfilled_everywhere

    lo, hi = 0.0, math.pi / 2
    if not fulfilled(lo):
        raise ValueError("product already violated at theta_oa = 0; no threshold to find")
    if fulfilled(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fulfilled(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scenario_with(config: ScenarioConfig, **changes) -> ScenarioConfig:
    """dataclasses.replace that revalidates the scenario."""
    return replace(config, **changes)
