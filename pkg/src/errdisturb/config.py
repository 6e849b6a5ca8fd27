"""Key-value run configuration.

Sections and keys::

    [observables]
    a = 1 0 0              # or a_theta / a_phi as angles
    b = 0 1 0              # or b_theta / b_phi
    [state]
    theta = 0 deg          # or bloch = x y z (unit vector)
    phi = 0 deg
    [path]
    kind = equator         # equator | latitude | custom
    theta_oa = 60 deg      # latitude only
    phi_start = 0 deg
    phi_stop = 360 deg
    samples = 361
    axes = 1 0 0; 0 1 0    # custom only, semicolon separated
    mode = exact           # exact | three_state_exact | monte_carlo
    [apparatus]
    efficiency = 0.96
    angle_jitter = 1.5 deg
    mean_counts_per_port = 4000
    replicates = 100
    [output]
    format = csv           # csv | json
    directory = .
    prefix = run

Angles always carry an explicit unit suffix, deg or rad.  Axis vectors
are normalized; a zero vector is an error.  '#' starts a comment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

import numpy as np

from . import beamline, qmcore, sweep

_SECTIONS = {
    "observables": {"a", "a_theta", "a_phi", "b", "b_theta", "b_phi"},
    "state": {"theta", "phi", "bloch"},
    "path": {"kind", "theta_oa", "phi_start", "phi_stop", "samples", "axes", "mode"},
    "apparatus": {"efficiency", "angle_jitter", "mean_counts_per_port", "replicates"},
    "output": {"format", "directory", "prefix"},
}

_ANGLE_RE = re.compile(r"^([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*(deg|rad)$")


class ConfigError(ValueError):
    """Configuration problem, anchored to the offending line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class RunSettings:
    """Everything a run needs: scenario, imperfections, counting, output."""

    scenario: sweep.ScenarioConfig
    imperfections: beamline.ImperfectionModel
    replicates: int = 100
    mean_counts_per_port: float = 4000.0
    output_format: str = "csv"
    output_dir: str = "."
    prefix: str = "run"


def _parse_angle(raw: str, line: int) -> float:
    m = _ANGLE_RE.match(raw.strip())
    if not m:
        raise ConfigError(line, f"angle {raw!r} needs a number with an explicit deg or rad suffix")
    try:
        value = float(m.group(1))
    except ValueError:
        raise ConfigError(line, f"bad angle value {raw!r}") from None
    return math.radians(value) if m.group(2) == "deg" else value


def _parse_vector(raw: str, line: int) -> np.ndarray:
    parts = raw.replace(",", " ").split()
    if len(parts) != 3:
        raise ConfigError(line, f"vector {raw!r} needs three components")
    try:
        v = np.array([float(x) for x in parts])
    except ValueError:
        raise ConfigError(line, f"bad vector {raw!r}") from None
    try:
        return qmcore.normalized(v)
    except ValueError:
        raise ConfigError(line, f"vector {raw!r} cannot be normalized") from None


def _parse_float(raw: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(line, f"bad number {raw!r}") from None


def _parse_int(raw: str, line: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(line, f"bad integer {raw!r}") from None


def _scan(text: str):
    """Yield (section, key, value, line) entries; syntax errors are line anchored."""
    section = None
    seen = set()
    for lineno, rawline in enumerate(text.splitlines(), 1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip().lower()
            if section not in _SECTIONS:
                raise ConfigError(lineno, f"unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(lineno, f"expected 'key = value', got {stripped!r}")
        if section is None:
            raise ConfigError(lineno, "key outside any [section]")
        key, _, value = stripped.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _SECTIONS[section]:
            raise ConfigError(lineno, f"unknown key {key!r} in section [{section}]")
        if (section, key) in seen:
            raise ConfigError(lineno, f"duplicate key {key!r} in section [{section}]")
        seen.add((section, key))
        yield section, key, value, lineno


def _axis_from_entries(entries, name, default, used_line):
    vec = entries.get((name,))
    theta = entries.get((f"{name}_theta",))
    phi = entries.get((f"{name}_phi",))
    if vec is not None and (theta is not None or phi is not None):
        raise ConfigError(
            used_line[(f"{name}_theta",)] if theta is not None else used_line[(f"{name}_phi",)],
            f"give either {name} or {name}_theta/{name}_phi, not both",
        )
    if vec is not None:
        return vec
    if theta is not None or phi is not None:
        if theta is None or phi is None:
            missing = f"{name}_theta" if theta is None else f"{name}_phi"
            present = f"{name}_phi" if theta is None else f"{name}_theta"
            raise ConfigError(used_line[(present,)], f"{missing} is missing")
        return qmcore.axis_from_angles(theta, phi)
    return default


def parse_config(text: str) -> RunSettings:
    """Parse configuration text into run settings.

    Unknown sections or keys, missing halves of paired angle keys,
    conflicting path specifications and malformed values all raise
    :class:`ConfigError` pointing at the offending line.  Omitted values
    fall back to the standard scenario with efficiency 0.96, angle
    jitter 1.5 deg and 361 samples.
    """
    obs: dict = {}
    obs_lines: dict = {}
    state: dict = {}
    state_lines: dict = {}
    path: dict = {}
    path_lines: dict = {}
    app: dict = {}
    out: dict = {}

    for section, key, value, line in _scan(text):
        if section == "observables":
            obs[(key,)] = (
                _parse_vector(value, line) if key in ("a", "b") else _parse_angle(value, line)
            )
            obs_lines[(key,)] = line
        elif section == "state":
            state[key] = _parse_vector(value, line) if key == "bloch" else _parse_angle(value, line)
            state_lines[key] = line
        elif section == "path":
            if key in ("theta_oa", "phi_start", "phi_stop"):
                path[key] = _parse_angle(value, line)
            elif key == "samples":
                path[key] = _parse_int(value, line)
            elif key == "axes":
                chunks = [c for c in value.split(";") if c.strip()]
                if not chunks:
                    raise ConfigError(line, "axes list is empty")
                path[key] = np.stack([_parse_vector(c, line) for c in chunks])
            else:
                path[key] = value.lower()
            path_lines[key] = line
        elif section == "apparatus":
            if key == "angle_jitter":
                app[key] = _parse_angle(value, line)
            elif key == "replicates":
                app[key] = _parse_int(value, line)
            else:
                app[key] = _parse_float(value, line)
        else:
            out[key] = value

    a = _axis_from_entries(obs, "a", qmcore.X_AXIS, obs_lines)
    b = _axis_from_entries(obs, "b", qmcore.Y_AXIS, obs_lines)

    if "bloch" in state and ("theta" in state or "phi" in state):
        key = "theta" if "theta" in state else "phi"
        raise ConfigError(state_lines[key], "give either bloch or theta/phi, not both")
    if "bloch" in state:
        theta_psi, phi_psi = qmcore.angles_from_axis(state["bloch"])
    else:
        theta_psi = state.get("theta", 0.0)
        phi_psi = state.get("phi", 0.0)
    psi = qmcore.state_from_angles(float(theta_psi), float(phi_psi))

    kind = path.get("kind", "equator")
    if kind not in ("equator", "latitude", "custom"):
        raise ConfigError(path_lines.get("kind", 0), f"unknown path kind {kind!r}")
    if kind != "latitude" and "theta_oa" in path:
        raise ConfigError(path_lines["theta_oa"], f"theta_oa conflicts with kind = {kind}")
    if kind != "custom" and "axes" in path:
        raise ConfigError(path_lines["axes"], f"axes conflicts with kind = {kind}")
    if kind == "latitude" and "theta_oa" not in path:
        raise ConfigError(path_lines.get("kind", 0), "latitude path needs theta_oa")
    if kind == "custom" and "axes" not in path:
        raise ConfigError(path_lines.get("kind", 0), "custom path needs axes")
    if kind == "custom" and ("phi_start" in path or "phi_stop" in path):
        key = "phi_start" if "phi_start" in path else "phi_stop"
        raise ConfigError(path_lines[key], f"{key} conflicts with kind = custom")

    phi_start = path.get("phi_start", 0.0)
    phi_stop = path.get("phi_stop", 2 * math.pi)
    if kind == "equator":
        sweep_path = sweep.equator_path(phi_start, phi_stop)
    elif kind == "latitude":
        sweep_path = sweep.latitude_path(path["theta_oa"], phi_start, phi_stop)
    else:
        sweep_path = sweep.custom_path(path["axes"])

    samples = path.get("samples", sweep.DEFAULT_SAMPLES)
    if samples < 2:
        raise ConfigError(path_lines.get("samples", 0), "need at least two samples")
    mode = path.get("mode", "exact")
    if mode not in sweep.MODES:
        raise ConfigError(path_lines.get("mode", 0), f"unknown mode {mode!r}")
    if kind == "custom":
        samples = len(sweep_path.axes)
        if samples < 2:
            raise ConfigError(path_lines["axes"], "need at least two axes")

    scenario = sweep.ScenarioConfig(
        a=a, b=b, psi=psi, path=sweep_path, samples=samples, mode=mode
    )
    imperfections = beamline.ImperfectionModel(
        efficiency=app.get("efficiency", 0.96),
        angle_jitter_sigma=app.get("angle_jitter", math.radians(1.5)),
    )
    fmt = out.get("format", "csv").lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(0, f"unknown output format {fmt!r}")
    return RunSettings(
        scenario=scenario,
        imperfections=imperfections,
        replicates=int(app.get("replicates", 100)),
        mean_counts_per_port=float(app.get("mean_counts_per_port", 4000.0)),
        output_format=fmt,
        output_dir=out.get("directory", "."),
        prefix=out.get("prefix", "run"),
    )


PRESETS = {
    "standard": """\
[observables]
a = 1 0 0
b = 0 1 0
[state]
theta = 0 deg
phi = 0 deg
[path]
kind = equator
samples = 361
[output]
prefix = standard
""",
    "phiB": """\
[observables]
a = 1 0 0
b_theta = 90 deg
b_phi = 60 deg
[state]
theta = 0 deg
phi = 0 deg
[path]
kind = equator
samples = 361
[output]
prefix = phi_b
""",
    "thetaB": """\
[observables]
a = 1 0 0
b_theta = 60 deg
b_phi = 90 deg
[state]
theta = 0 deg
phi = 0 deg
[path]
kind = equator
samples = 361
[output]
prefix = theta_b
""",
    "psi": """\
[observables]
a = 1 0 0
b = 0 1 0
[state]
theta = 45 deg
phi = 15 deg
[path]
kind = equator
samples = 361
[output]
prefix = psi
""",
    "latitude": """\
[observables]
a = 1 0 0
b = 0 1 0
[state]
theta = 0 deg
phi = 0 deg
[path]
kind = latitude
theta_oa = 60 deg
samples = 361
[output]
prefix = latitude
""",
}


def preset_settings(name: str) -> RunSettings:
    """Named run settings; the scenario family tags the theory curve."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {tuple(PRESETS)}")
    settings = parse_config(PRESETS[name])
    scenario = sweep.scenario_with(settings.scenario, family=name)
    return replace(settings, scenario=scenario)


def settings_to_dict(settings: RunSettings) -> dict:
    """JSON-ready echo of resolved run settings (for the run manifest)."""
    sc = settings.scenario
    theta_psi, phi_psi = qmcore.angles_from_axis(qmcore.bloch_from_state(sc.psi))
    payload = {
        "observables": {"a": list(map(float, sc.a)), "b": list(map(float, sc.b))},
        "state": {"theta_rad": float(theta_psi), "phi_rad": float(phi_psi)},
        "path": {
            "kind": sc.path.kind,
            "theta_rad": float(sc.path.theta),
            "phi_start_rad": float(sc.path.phi_start),
            "phi_stop_rad": float(sc.path.phi_stop),
            "samples": sc.samples,
            "mode": sc.mode,
            "family": sc.family,
        },
        "apparatus": {
            "efficiency": settings.imperfections.efficiency,
            "angle_jitter_rad": settings.imperfections.angle_jitter_sigma,
            "mean_counts_per_port": settings.mean_counts_per_port,
            "replicates": settings.replicates,
        },
        "output": {
            "format": settings.output_format,
            "directory": settings.output_dir,
            "prefix": settings.prefix,
        },
    }
    if sc.path.kind == "custom":
        payload["path"]["axes"] = [list(map(float, ax)) for ax in sc.path.axes]
    return payload
