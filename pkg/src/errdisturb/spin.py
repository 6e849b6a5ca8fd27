"""Closed forms for sharp spin-1/2 measurements.

For a measured component a.sigma, an apparatus axis o_a, a target
component b.sigma and a pure state with Bloch vector r, the error,
disturbance, spreads and lower bounds are elementary functions of dot
products among the four directions.  All functions broadcast over
stacked axes (last dimension 3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmcore
from .povm import MeasurementModel, UncertaintyReport


def _dot(u, v):
    return np.sum(np.asarray(u, dtype=float) * np.asarray(v, dtype=float), axis=-1)


def error_exact(a, o_a):
    """rms error sqrt(2 - 2 a.o_a) = 2|sin(detuning/2)|; range [0, 2]."""
    return np.sqrt(np.maximum(2.0 - 2.0 * _dot(a, o_a), 0.0))


def disturbance_exact(b, o_a):
    """rms disturbance sqrt(2 - 2 (b.o_a)^2); range [0, sqrt(2)]."""
    return np.sqrt(np.maximum(2.0 - 2.0 * _dot(b, o_a) ** 2, 0.0))


def std_dev(axis, r):
    """Spread sqrt(1 - (axis.r)^2) of axis.sigma in the state with Bloch vector r."""
    return np.sqrt(np.maximum(1.0 - _dot(axis, r) ** 2, 0.0))


@dataclass(frozen=True)
class SpinBounds:
    """Lower bounds for the pair (a.sigma, b.sigma) in the state r."""

    commutator_bound: float      # (1/2)|<[A,B]>| = |r.(a x b)|
    schroedinger_extra: float    # covariance term a.b - (a.r)(b.r)
    schroedinger_bound: float    # sqrt(extra^2 + commutator_bound^2)


def bounds(a, b, r) -> SpinBounds:
    """Commutator and Schroedinger bounds from the three directions.

    For pure states the Schroedinger bound is saturated:
    sigma(A) sigma(B) = schroedinger_bound exactly.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = np.asarray(r, dtype=float)
    comm = np.abs(_dot(r, np.cross(a, b)))
    extra = _dot(a, b) - _dot(a, r) * _dot(b, r)
    return SpinBounds(comm, extra, np.hypot(extra, comm))


def projective_apparatus(o_a) -> MeasurementModel:
    """Sharp two-outcome model projecting onto the +-1 eigenstates of o_a.sigma."""
    ob = qmcore.spin_operator(o_a)
    return MeasurementModel((1.0, -1.0), np.stack([ob.projector_plus, ob.projector_minus]))


def exact_report(a, b, o_a, r) -> UncertaintyReport:
    """Full relation report from the closed forms alone (no matrices)."""
    bb = bounds(a, b, r)
    return UncertaintyReport.from_components(
        error=float(error_exact(a, o_a)),
        disturbance=float(disturbance_exact(b, o_a)),
        sigma_a=float(std_dev(a, r)),
        sigma_b=float(std_dev(b, r)),
        commutator_bound=float(bb.commutator_bound),
        schroedinger_bound=float(bb.schroedinger_bound),
    )
