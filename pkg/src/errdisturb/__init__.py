"""Error-disturbance uncertainty relations for projective spin-1/2 measurements.

The package covers the full chain from exact operator algebra to a
simulated counting experiment:

- qmcore: states, Bloch vectors, spin components, Larmor rotations
- povm: measurement-operator families, indirect models, rms noise and
  disturbance, relation reports
- spin: closed forms for sharp spin measurements and their bounds
- threestate: error/disturbance reconstruction from expectation values
  in three preparations
- beamline: four-port counting simulation with Poisson noise, detector
  efficiency and angle jitter
- sweep: scenario sweeps, whole-sphere maps, violation analysis
- cli: command line front end (errdisturb verify | sweep | bloch-scan |
  simulate)
"""

from importlib import metadata

try:
    __version__ = metadata.version("artifact")
except metadata.PackageNotFoundError:  # running from a plain checkout
    __version__ = "0.1.0"

from . import beamline, config, povm, qmcore, spin, sweep, threestate
from .beamline import (
    CountRecord,
    ImperfectionModel,
    MonteCarloReport,
    PortProbabilities,
    expectations_from_counts,
    port_probabilities,
    run_with_error_bars,
    simulate_counts,
    single_axis_expectation,
)
from .povm import (
    Branch,
    InconsistentDataError,
    IndirectModel,
    MeasurementModel,
    UncertaintyReport,
    evaluate_relations,
    from_indirect,
    moment_output_operator,
    post_moment_operator,
    rms_disturbance,
    rms_error,
)
from .spin import SpinBounds, bounds, disturbance_exact, error_exact, exact_report, projective_apparatus, std_dev
from .sweep import (
    ScenarioConfig,
    SweepRow,
    ViolationReport,
    bloch_scan,
    run_scenario,
    violation_analysis,
    violation_threshold,
)
from .threestate import ThreeStateSet, auxiliary_states, estimate_disturbance, estimate_error

__all__ = [
    "__version__",
    "qmcore", "povm", "spin", "threestate", "beamline", "sweep", "config",
    "MeasurementModel", "IndirectModel", "UncertaintyReport", "Branch",
    "InconsistentDataError", "evaluate_relations", "from_indirect",
    "moment_output_operator", "post_moment_operator", "rms_error", "rms_disturbance",
    "SpinBounds", "bounds", "error_exact", "disturbance_exact", "std_dev",
    "exact_report", "projective_apparatus",
    "ThreeStateSet", "auxiliary_states", "estimate_error", "estimate_disturbance",
    "PortProbabilities", "ImperfectionModel", "CountRecord", "MonteCarloReport",
    "port_probabilities", "simulate_counts", "expectations_from_counts",
    "single_axis_expectation", "run_with_error_bars",
    "ScenarioConfig", "SweepRow", "ViolationReport", "run_scenario", "bloch_scan",
    "violation_analysis", "violation_threshold",
]
