"""Command line front end.

Subcommands: verify (self-check property suites), sweep (scenario
sweeps), bloch-scan (whole-sphere maps), simulate (Monte Carlo sweep
with error bars).  Exit codes: 0 success, 1 bad arguments or
configuration, 2 property-suite failure.

Numeric output is serialized with 17 significant digits; runs with the
same seed produce byte-identical CSV.  Every run writes a JSON manifest
(tool version, resolved settings, master seed, timestamp, output paths)
next to its data files, atomically.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone

import numpy as np

from . import beamline, config, povm, qmcore, spin, sweep

CSV_COLUMNS = (
    "phi_oa_rad", "theta_oa_rad", "eps_exact", "eta_exact", "sigma_a", "sigma_b",
    "bound", "heis_lhs", "ozawa_lhs", "combined_lhs",
    "eps_est", "eps_est_sd", "eta_est", "eta_est_sd",
    "p_pp", "p_pm", "p_mp", "p_mm",
)

GRID_COLUMNS = ("theta_rad", "phi_rad", "value")


def _version() -> str:
    from . import __version__

    return __version__


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def row_values(row: sweep.SweepRow) -> tuple:
    rep = row.report
    return (
        row.phi_oa, row.theta_oa, rep.error, rep.disturbance, rep.sigma_a,
        rep.sigma_b, rep.commutator_bound, rep.heisenberg_lhs, rep.ozawa_lhs,
        rep.combined_lhs, row.eps_est, row.eps_est_sd, row.eta_est, row.eta_est_sd,
        row.ports.pp, row.ports.pm, row.ports.mp, row.ports.mm,
    )


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row_values(row)))
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> str:
    payload = {
        "columns": list(CSV_COLUMNS),
        "rows": [
            [None if v is None else float(v) for v in row_values(row)] for row in rows
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def grid_to_csv(thetas, phis, values) -> str:
    lines = [",".join(GRID_COLUMNS)]
    for i, theta in enumerate(thetas):
        for j, phi in enumerate(phis):
            lines.append(f"{_fmt(theta)},{_fmt(phi)},{_fmt(values[i, j])}")
    return "\n".join(lines) + "\n"


def grid_to_json(quantity, thetas, phis, values) -> str:
    payload = {
        "quantity": quantity,
        "theta_rad": [float(t) for t in thetas],
        "phi_rad": [float(p) for p in phis],
        "values": [[float(v) for v in line] for line in values],
    }
    return json.dumps(payload, indent=2) + "\n"


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_manifest(directory, prefix, command, seed, settings_payload, outputs) -> str:
    payload = {
        "tool": "errdisturb",
        "version": _version(),
        "command": command,
        "master_seed": seed,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "settings": settings_payload,
        "outputs": [os.path.basename(p) for p in outputs],
    }
    path = os.path.join(directory, f"{prefix}_manifest.json")
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


class _Parser(argparse.ArgumentParser):
    # spec'd exit codes: bad flags are a validation problem, not a suite failure
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_settings(args) -> config.RunSettings:
    if getattr(args, "config", None) and getattr(args, "preset", None):
        raise ValueError("give either --preset or --config, not both")
    if getattr(args, "config", None):
        with open(args.config) as fh:
            settings = config.parse_config(fh.read())
    else:
        settings = config.preset_settings(getattr(args, "preset", None) or "standard")
    scenario = settings.scenario
    changes = {}
    if getattr(args, "samples", None):
        changes["samples"] = args.samples
    if getattr(args, "mode", None):
        changes["mode"] = args.mode
    if changes:
        scenario = sweep.scenario_with(scenario, **changes)
    replicates = args.replicates if getattr(args, "replicates", None) else settings.replicates
    fmt = args.format if getattr(args, "format", None) else settings.output_format
    out_dir = args.out if getattr(args, "out", None) else settings.output_dir
    prefix = args.prefix if getattr(args, "prefix", None) else settings.prefix
    return replace(
        settings,
        scenario=scenario,
        replicates=replicates,
        output_format=fmt,
        output_dir=out_dir,
        prefix=prefix,
    )


def _run_sweep(args, force_mode=None) -> int:
    settings = _resolve_settings(args)
    if force_mode:
        scenario = sweep.scenario_with(settings.scenario, mode=force_mode)
        settings = replace(settings, scenario=scenario)
    rows = sweep.run_scenario(
        settings.scenario,
        imperfections=settings.imperfections,
        replicates=settings.replicates,
        mean_counts_per_port=settings.mean_counts_per_port,
        seed=args.seed,
    )
    os.makedirs(settings.output_dir, exist_ok=True)
    ext = "csv" if settings.output_format == "csv" else "json"
    data_path = os.path.join(settings.output_dir, f"{settings.prefix}_sweep.{ext}")
    text = rows_to_csv(rows) if ext == "csv" else rows_to_json(rows)
    _write_atomic(data_path, text)
    manifest = write_manifest(
        settings.output_dir, settings.prefix, " ".join(sys.argv[:1] + list(args._raw)),
        args.seed, config.settings_to_dict(settings), [data_path],
    )
    print(f"wrote {data_path} ({len(rows)} rows) and {manifest}")
    return 0


def cmd_sweep(args) -> int:
    return _run_sweep(args)


def cmd_simulate(args) -> int:
    return _run_sweep(args, force_mode="monte_carlo")


def cmd_bloch_scan(args) -> int:
    settings = _resolve_settings(args)
    try:
        n_theta, n_phi = (int(x) for x in args.grid.lower().split("x"))
    except ValueError:
        raise ValueError(f"grid must look like 181x361, got {args.grid!r}") from None
    sc = settings.scenario
    thetas, phis, values = sweep.bloch_scan(
        args.quantity, sc.a, sc.b, sc.psi, shape=(n_theta, n_phi)
    )
    os.makedirs(settings.output_dir, exist_ok=True)
    ext = "csv" if settings.output_format == "csv" else "json"
    data_path = os.path.join(
        settings.output_dir, f"{settings.prefix}_bloch_{args.quantity}.{ext}"
    )
    text = (
        grid_to_csv(thetas, phis, values)
        if ext == "csv"
        else grid_to_json(args.quantity, thetas, phis, values)
    )
    _write_atomic(data_path, text)
    payload = config.settings_to_dict(settings)
    payload["bloch_scan"] = {"quantity": args.quantity, "grid": [n_theta, n_phi]}
    manifest = write_manifest(
        settings.output_dir, f"{settings.prefix}_bloch_{args.quantity}",
        " ".join(sys.argv[:1] + list(args._raw)), args.seed, payload, [data_path],
    )
    print(f"wrote {data_path} ({n_theta}x{n_phi} grid) and {manifest}")
    return 0


# ---------------------------------------------------------------- verify

def _random_directions(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _suite_oracle_equivalence(seed, n=2000):
    rng = np.random.default_rng(seed)
    axes_a = _random_directions(rng, n)
    axes_o = _random_directions(rng, n)
    axes_b = _random_directions(rng, n)
    worst = 0.0
    for a, o_a, b in zip(axes_a, axes_o, axes_b):
        psi = povm.random_state(2, rng)
        model = spin.projective_apparatus(o_a)
        obs_a = qmcore.pauli_dot(a)
        obs_b = qmcore.pauli_dot(b)
        eps = povm.rms_error(model, obs_a, psi)
        eta = povm.rms_disturbance(model, obs_b, psi)
        values = (
            abs(eps - povm.rms_error_branch_sum(model, obs_a, psi)),
            abs(eps - float(spin.error_exact(a, o_a))),
            abs(eta - povm.rms_disturbance_commutator_sum(model, obs_b, psi)),
            abs(eta - float(spin.disturbance_exact(b, o_a))),
        )
        worst = max(worst, *values)
    return worst <= 1e-12, f"{n} random configs, worst route disagreement {worst:.3e}"


def _family_configs():
    return [
        (name, config.preset_settings(name).scenario) for name in config.PRESETS
    ]


def _ozawa_margin_min(a, b, psi, n_theta=61, n_phi=121):
    tt, pp = np.meshgrid(
        np.linspace(0.0, math.pi, n_theta),
        np.linspace(0.0, 2 * math.pi, n_phi),
        indexing="ij",
    )
    axes = qmcore.axis_from_angles(tt, pp)
    r = qmcore.bloch_from_state(psi)
    eps = spin.error_exact(a, axes)
    eta = spin.disturbance_exact(b, axes)
    sigma_a = float(spin.std_dev(a, r))
    sigma_b = float(spin.std_dev(b, r))
    bound = float(spin.bounds(a, b, r).commutator_bound)
    return float(np.min(eps * eta + eps * sigma_b + sigma_a * eta) - bound)


def _suite_ozawa_grid(_seed):
    worst = math.inf
    for name, sc in _family_configs():
        worst = min(worst, _ozawa_margin_min(sc.a, sc.b, sc.psi))
    return worst >= -1e-9, f"5 scenario families, min sum-relation margin {worst:.3e}"


def _suite_random_indirect(seed, n=200):
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(n):
        d_s = int(rng.integers(2, 4))
        d_p = int(rng.integers(2, 4))
        model = povm.from_indirect(povm.random_indirect_model(d_s, d_p, rng))
        report = povm.evaluate_relations(
            model,
            povm.random_hermitian(d_s, rng),
            povm.random_hermitian(d_s, rng),
            povm.random_state(d_s, rng),
        )
        worst = min(worst, report.ozawa_lhs - report.commutator_bound)
        if not report.ozawa_ok:
            return False, f"sum relation violated by a random indirect model ({worst:.3e})"
    return worst >= -1e-9, f"{n} random indirect models, min margin {worst:.3e}"


def _suite_three_state_identity(_seed, n_theta=46, n_phi=91):
    sc = config.preset_settings("standard").scenario
    tt, pp = np.meshgrid(
        np.linspace(0.0, math.pi, n_theta),
        np.linspace(0.0, 2 * math.pi, n_phi),
        indexing="ij",
    )
    axes = qmcore.axis_from_angles(tt, pp).reshape(-1, 3)
    eps_ts, eta_ts = sweep.three_state_exact_estimates(sc.a, sc.b, sc.psi, axes)
    worst = max(
        float(np.max(np.abs(eps_ts - spin.error_exact(sc.a, axes)))),
        float(np.max(np.abs(eta_ts - spin.disturbance_exact(sc.b, axes)))),
    )
    return worst <= 1e-12, f"{n_theta}x{n_phi} grid, worst reconstruction gap {worst:.3e}"


SUITES = (
    ("oracle-equivalence", _suite_oracle_equivalence),
    ("ozawa-grid", _suite_ozawa_grid),
    ("random-indirect", _suite_random_indirect),
    ("three-state-identity", _suite_three_state_identity),
)


def cmd_verify(args) -> int:
    failures = 0
    for name, fn in SUITES:
        ok, detail = fn(args.seed)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} suite(s) failed")
        return 2
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="errdisturb",
        description="Error-disturbance uncertainty relations for projective spin-1/2 measurements.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_scenario=True):
        p.add_argument("--seed", type=int, default=0, help="master RNG seed")
        if with_scenario:
            p.add_argument("--preset", choices=sorted(config.PRESETS),
                           help="named scenario (default: standard)")
            p.add_argument("--config", help="configuration file")
            p.add_argument("--samples", type=int, help="samples along the path")
            p.add_argument("--replicates", type=int, help="Monte Carlo replicates per row")
            p.add_argument("--format", choices=("csv", "json"), help="output format")
            p.add_argument("--out", help="output directory")
            p.add_argument("--prefix", help="output file prefix")

    p_verify = sub.add_parser("verify", help="run the self-check property suites")
    add_common(p_verify, with_scenario=False)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="sweep the apparatus axis along a path")
    add_common(p_sweep)
    p_sweep.add_argument("--mode", choices=sweep.MODES, help="evaluation mode")
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="Monte Carlo counting sweep with error bars")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_bloch = sub.add_parser("bloch-scan", help="map a quantity over the whole sphere")
    add_common(p_bloch)
    p_bloch.add_argument("--quantity", choices=sweep.QUANTITIES, default="error")
    p_bloch.add_argument("--grid", default="181x361", help="n_theta x n_phi (default 181x361)")
    p_bloch.set_defaults(func=cmd_bloch_scan)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._raw = argv
    try:
        return args.func(args)
    except (config.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
