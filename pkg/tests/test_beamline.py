"""Four-port counting simulation: probabilities, counts, reconstruction."""

import math

import numpy as np
import pytest

from errdisturb import beamline, povm, qmcore, spin, threestate

RNG = np.random.default_rng(505)

A, B = qmcore.X_AXIS, qmcore.Y_AXIS
PLUS_Z = qmcore.state_from_angles(0.0, 0.0)
IDEAL = beamline.ImperfectionModel.ideal()


def random_axis(rng=RNG):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def modified_observable(b, o_a):
    ob = qmcore.spin_operator(o_a)
    Bm = qmcore.pauli_dot(b)
    return ob.projector_plus @ Bm @ ob.projector_plus + ob.projector_minus @ Bm @ ob.projector_minus


# ---------------------------------------------------------------- ports

def test_port_probabilities_examples():
    p = beamline.port_probabilities(PLUS_Z, A, B)
    assert p.as_array() == pytest.approx([0.25, 0.25, 0.25, 0.25], abs=1e-12)
    plus_x = qmcore.spin_operator(A).eigenstate_plus
    p = beamline.port_probabilities(plus_x, A, B)
    assert p.as_array() == pytest.approx([0.5, 0.5, 0.0, 0.0], abs=1e-12)
    p = beamline.port_probabilities(PLUS_Z, qmcore.Z_AXIS, qmcore.Z_AXIS)
    assert p.as_array() == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=1e-12)


def test_port_probabilities_marginals():
    for _ in range(50):
        psi = povm.random_state(2, RNG)
        o_a, b = random_axis(), random_axis()
        p = beamline.port_probabilities(psi, o_a, b)
        arr = p.as_array()
        assert arr.sum() == pytest.approx(1.0, abs=1e-12)
        born_plus = qmcore.expectation(qmcore.spin_operator(o_a).projector_plus, psi)
        assert arr[0] + arr[1] == pytest.approx(born_plus, abs=1e-12)


def test_port_reductions_reproduce_operator_expectations():
    # exact probabilities fed through the count reduction recover <O_A>
    # and the post-measurement <O_B>
    for _ in range(50):
        psi = povm.random_state(2, RNG)
        o_a, b = random_axis(), random_axis()
        p = beamline.port_probabilities(psi, o_a, b)
        record = beamline.CountRecord(p.as_array(), 1.0, 1.0)
        mean_a, mean_b = beamline.expectations_from_counts(record, IDEAL)
        assert mean_a == pytest.approx(qmcore.expectation(qmcore.pauli_dot(o_a), psi), abs=1e-12)
        assert mean_b == pytest.approx(
            qmcore.expectation(modified_observable(b, o_a), psi), abs=1e-12
        )


def test_order_matters():
    # a detuned first stage changes what the second stage sees; psi must
    # lean into the equator or the swap is a symmetry of the standard state
    psi = qmcore.state_from_angles(1.0, 0.2)
    o_a = qmcore.axis_from_angles(math.pi / 2, 0.3)
    p = beamline.port_probabilities(psi, o_a, B)
    record = beamline.CountRecord(p.as_array(), 1.0, 1.0)
    _, mean_b = beamline.expectations_from_counts(record, IDEAL)
    direct = qmcore.expectation(qmcore.pauli_dot(B), psi)
    assert abs(mean_b - direct) > 1e-3
    # aligned stages leave the second expectation untouched
    p = beamline.port_probabilities(psi, B, B)
    record = beamline.CountRecord(p.as_array(), 1.0, 1.0)
    _, mean_b = beamline.expectations_from_counts(record, IDEAL)
    assert mean_b == pytest.approx(direct, abs=1e-12)


def test_port_probabilities_validation():
    with pytest.raises(ValueError):
        beamline.PortProbabilities(0.5, 0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        beamline.PortProbabilities(-0.1, 0.6, 0.3, 0.2)


# ---------------------------------------------------------------- counts

def test_simulate_counts_degenerate_distribution():
    rng = np.random.default_rng(1)
    record = beamline.simulate_counts((1.0, 0.0, 0.0, 0.0), 600.0, 4000.0 / 600.0, IDEAL, rng)
    assert record.counts[1] == record.counts[2] == record.counts[3] == 0
    assert abs(record.counts[0] - 4000) < 5 * math.sqrt(4000)


def test_simulate_counts_law_of_large_numbers():
    rng = np.random.default_rng(2)
    probs = np.full(4, 0.25)
    totals = np.zeros(4)
    n = 10_000
    for _ in range(n):
        totals += beamline.simulate_counts(probs, 1.0, 4000.0, IDEAL, rng).counts
    se = math.sqrt(1000.0 / n)
    assert np.all(np.abs(totals / n - 1000.0) < 5 * se)


def test_simulate_counts_deterministic():
    c1 = beamline.simulate_counts(np.full(4, 0.25), 600.0, 10.0, IDEAL, np.random.default_rng(9))
    c2 = beamline.simulate_counts(np.full(4, 0.25), 600.0, 10.0, IDEAL, np.random.default_rng(9))
    assert np.array_equal(c1.counts, c2.counts)


def test_simulate_counts_validation():
    with pytest.raises(ValueError):
        beamline.simulate_counts(np.full(4, 0.3), 600.0, 10.0, IDEAL, RNG)
    with pytest.raises(ValueError):
        beamline.simulate_counts(np.full(4, 0.25), 0.0, 10.0, IDEAL, RNG)


def test_imperfection_model_validation():
    with pytest.raises(ValueError):
        beamline.ImperfectionModel(efficiency=0.0)
    with pytest.raises(ValueError):
        beamline.ImperfectionModel(efficiency=1.2)
    with pytest.raises(ValueError):
        beamline.ImperfectionModel(angle_jitter_sigma=-0.1)


# ---------------------------------------------------------------- reductions

def test_expectations_from_counts_examples():
    record = beamline.CountRecord(np.array([300, 100, 100, 100]), 600.0, 1.0)
    mean_a, mean_b = beamline.expectations_from_counts(record, IDEAL)
    assert mean_a == pytest.approx(1 / 3, abs=1e-12)
    assert mean_b == pytest.approx(1 / 3, abs=1e-12)
    record = beamline.CountRecord(np.full(4, 2500.0), 600.0, 1.0)
    assert beamline.expectations_from_counts(record, IDEAL) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_efficiency_correction_is_unbiased():
    eff = beamline.ImperfectionModel(efficiency=0.96, angle_jitter_sigma=0.0)
    ideal_probs = np.array([0.75, 0.0, 0.25, 0.0])  # ideal <O_A> = 0.5
    mixed = 0.96 * ideal_probs + 0.04 / 4
    raw = mixed[0] + mixed[1] - mixed[2] - mixed[3]
    assert raw == pytest.approx(0.48, abs=1e-12)
    record = beamline.CountRecord(mixed, 1.0, 1.0)
    mean_a, _ = beamline.expectations_from_counts(record, eff)
    assert mean_a == pytest.approx(0.5, abs=1e-12)


def test_expectations_from_counts_zero_total():
    with pytest.raises(ValueError):
        beamline.expectations_from_counts(beamline.CountRecord(np.zeros(4), 600.0, 1.0), IDEAL)


def test_single_axis_expectation():
    assert beamline.single_axis_expectation(PLUS_Z, qmcore.Z_AXIS) == pytest.approx(1.0, abs=1e-12)
    assert beamline.single_axis_expectation(PLUS_Z, A) == pytest.approx(0.0, abs=1e-12)
    psi = qmcore.state_from_angles(math.pi / 4, math.pi / 12)
    assert beamline.single_axis_expectation(psi, A, "second") == pytest.approx(
        0.6830127018922193, abs=1e-12
    )
    with pytest.raises(ValueError):
        beamline.single_axis_expectation(PLUS_Z, A, "third")


def test_perturb_direction():
    axis = random_axis()
    assert np.array_equal(beamline.perturb_direction(axis, 0.0, RNG), axis)
    rng = np.random.default_rng(8)
    tilts = []
    for _ in range(500):
        p = beamline.perturb_direction(qmcore.Z_AXIS, math.radians(1.5), rng)
        assert abs(np.linalg.norm(p) - 1.0) < 1e-12
        tilts.append(math.acos(np.clip(p @ qmcore.Z_AXIS, -1, 1)))
    # polar jitter at the pole: tilt is folded Gaussian with sigma 1.5 deg
    assert np.std(tilts) < 3 * math.radians(1.5)
    assert np.mean(tilts) > 0.2 * math.radians(1.5)


# ---------------------------------------------------------------- protocol

def test_noiseless_limit_matches_closed_forms():
    for phi in (0.4, math.pi / 3, 2.5):
        o_a = qmcore.axis_from_angles(math.pi / 2, phi)
        rep = beamline.run_with_error_bars(
            A, B, PLUS_Z, o_a, replicates=3, imperfections=IDEAL,
            rng=np.random.default_rng(0), ideal_statistics=True,
        )
        assert rep.error == pytest.approx(float(spin.error_exact(A, o_a)), abs=1e-12)
        assert rep.disturbance == pytest.approx(float(spin.disturbance_exact(B, o_a)), abs=1e-12)
        assert rep.sigma_a == pytest.approx(1.0, abs=1e-12)
        assert rep.sigma_b == pytest.approx(1.0, abs=1e-12)
        # replicates are identical; the spread only carries mean-rounding noise
        assert rep.error_sd < 1e-12 and rep.disturbance_sd < 1e-12
        assert rep.failed_error == 0 and rep.failed_disturbance == 0


def test_noiseless_limit_with_efficiency():
    # the visibility mixing cancels exactly in the reduction
    eff = beamline.ImperfectionModel(efficiency=0.96, angle_jitter_sigma=0.0)
    o_a = qmcore.axis_from_angles(math.pi / 2, 0.9)
    rep = beamline.run_with_error_bars(
        A, B, PLUS_Z, o_a, replicates=3, imperfections=eff,
        rng=np.random.default_rng(0), ideal_statistics=True,
    )
    assert rep.error == pytest.approx(float(spin.error_exact(A, o_a)), abs=1e-12)
    assert rep.disturbance == pytest.approx(float(spin.disturbance_exact(B, o_a)), abs=1e-12)


def test_monte_carlo_self_consistency():
    o_a = qmcore.axis_from_angles(math.pi / 2, math.pi / 2)
    rep = beamline.run_with_error_bars(
        A, B, PLUS_Z, o_a, replicates=100,
        imperfections=beamline.ImperfectionModel(),
        rng=np.random.default_rng(42),
    )
    assert abs(rep.error - math.sqrt(2)) < 3 * rep.error_sd


def test_jitter_inflates_error_bars():
    o_a = qmcore.axis_from_angles(math.pi / 2, math.pi / 4)
    quiet = beamline.run_with_error_bars(
        A, B, PLUS_Z, o_a, replicates=200, imperfections=IDEAL,
        rng=np.random.default_rng(3),
    )
    jittered = beamline.run_with_error_bars(
        A, B, PLUS_Z, o_a, replicates=200,
        imperfections=beamline.ImperfectionModel(efficiency=1.0,
                                                 angle_jitter_sigma=math.radians(1.5)),
        rng=np.random.default_rng(3),
    )
    assert jittered.error_sd > quiet.error_sd
    assert jittered.disturbance_sd > quiet.disturbance_sd


def test_estimator_convergence_rate():
    # rms deviation from the closed form shrinks as counts^(-1/2)
    o_a = qmcore.axis_from_angles(math.pi / 2, math.pi / 4)
    eps_true = float(spin.error_exact(A, o_a))
    levels = [1e2, 1e3, 1e4, 1e5, 1e6]
    rms = []
    for counts in levels:
        rep = beamline.run_with_error_bars(
            A, B, PLUS_Z, o_a, replicates=100, imperfections=IDEAL,
            mean_counts_per_port=counts, rng=np.random.default_rng(7),
        )
        rms.append(math.hypot(rep.error - eps_true, rep.error_sd))
    slope = np.polyfit(np.log10(levels), np.log10(rms), 1)[0]
    assert abs(slope + 0.5) < 0.1
    assert rms[-1] < 1e-3


def test_run_deterministic():
    o_a = qmcore.axis_from_angles(math.pi / 2, 1.0)
    kwargs = dict(replicates=20, imperfections=beamline.ImperfectionModel())
    r1 = beamline.run_with_error_bars(A, B, PLUS_Z, o_a, rng=np.random.default_rng(5), **kwargs)
    r2 = beamline.run_with_error_bars(A, B, PLUS_Z, o_a, rng=np.random.default_rng(5), **kwargs)
    assert r1 == r2


def test_failed_replicates_counted_not_dropped():
    # at the error-free point the radicand dips below the window in a
    # large fraction of replicates; they are tallied and enter as zeros
    rep = beamline.run_with_error_bars(
        A, B, PLUS_Z, A, replicates=100,
        imperfections=beamline.ImperfectionModel(),
        rng=np.random.default_rng(42),
    )
    assert rep.failed_error > 0
    assert rep.replicates == 100
    assert abs(rep.error - 0.0) < 3 * rep.error_sd
    smooth = beamline.run_with_error_bars(
        A, B, PLUS_Z, qmcore.axis_from_angles(math.pi / 2, math.pi / 4),
        replicates=50, imperfections=beamline.ImperfectionModel(),
        rng=np.random.default_rng(42),
    )
    assert smooth.failed_error == 0 and smooth.failed_disturbance == 0


def test_run_with_error_bars_validation():
    with pytest.raises(ValueError):
        beamline.run_with_error_bars(A, B, PLUS_Z, A, replicates=1)
