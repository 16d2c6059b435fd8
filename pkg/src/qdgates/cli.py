"""Command-line entry point: single runs, gradient sweeps and range tables.

Three modes, each consuming the same config format (see config module) and
emitting CSV plus a JSON run manifest:

* simulate: one trajectory; columns time_ns, P_up_q0..P_up_q{n-1},
  trace_error.
* sweep: P_up of every qubit at the flip time for every initial state
  across the gradient grid, one file per fixed-field row; columns
  gradient_T, initial_state, qubit_role, P_up, verdict.
* ranges: operating-range table with bisection-refined boundaries, one row
  per fixed field.

Output is deterministic: floats are formatted explicitly and results are
gathered and sorted before writing, so files are byte-identical across
runs at any worker count.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


from . import __version__, analysis, device
from .config import AUTO, ConfigError, RunSpec, parse_config, sweep_axis
from .device import CNOT, DeviceConfig
from .lindblad import evolve
from .noise import NoiseConfig, build_collapse_set
from .operators import basis_density


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def noise_from_spec(spec: RunSpec) -> NoiseConfig:
    kwargs = dict(
        delta_e_nuc=spec.delta_e_nuc,
        t_k=spec.t_k,
        t2_star=device.ns_to_time(spec.t2_star_ns),
        hyperfine=spec.enable_hyperfine,
        phonon=spec.enable_phonon,
        dephasing=spec.enable_dephasing,
        phonon_e_mode=spec.phonon_e_mode,
    )
    if spec.upsilon is not None:
        kwargs["upsilon"] = spec.upsilon
    if spec.phonon_p is not None:
        kwargs["phonon_p"] = spec.phonon_p
    return NoiseConfig(**kwargs)


def device_from_spec(spec: RunSpec) -> DeviceConfig:
    """Explicit-field device for simulate mode."""
    if spec.gate == CNOT:
        fields = (spec.b_control, spec.b_target)
        exchange = (spec.j,)
    else:
        fields = (spec.b_left, spec.b_center, spec.b_right)
        exchange = (spec.j12, spec.j23)
    return DeviceConfig(gate=spec.gate, b_fields=fields, b_ac=spec.b_ac,
                        exchange=exchange, g=spec.g,
                        drive_frequency=spec.drive_frequency)


def template_from_spec(spec: RunSpec, fixed_field: float) -> analysis.SweepTemplate:
    exchange = (spec.j,) if spec.gate == CNOT else (spec.j12, spec.j23)
    return analysis.SweepTemplate(gate=spec.gate, fixed_field=fixed_field,
                                  b_ac=spec.b_ac, exchange=exchange, g=spec.g)


def run_simulate(spec: RunSpec, out_dir: Path, extras: dict) -> list:
    cfg = device.resolve_drive(device_from_spec(spec))
    noise = noise_from_spec(spec)
    if spec.t_end_ns == AUTO:
        t_end = analysis.flip_time(cfg)
    else:
        t_end = device.ns_to_time(spec.t_end_ns)
    extras["resolved_drive_frequency_ueV"] = float(cfg.drive_frequency)
    extras["t_end_ns"] = device.time_to_ns(t_end)
    eig = device.static_eigensystem(cfg)
    zeeman = analysis._basis_zeeman(cfg) if noise.phonon_e_mode == "bare_zeeman" else None
    collapse = build_collapse_set(eig, noise, zeeman_energies=zeeman)
    h = device.build_hamiltonian_rwa(cfg)
    traj = evolve(h, collapse, basis_density(spec.initial_state), t_end,
                  samples=spec.samples)

    pops = [traj.population_up(q) for q in range(cfg.n_qubits)]
    trace_err = traj.trace_error()
    path = out_dir / "trajectory.csv"
    with path.open("w", encoding="utf-8") as fh:
        cols = ["time_ns"] + [f"P_up_q{q}" for q in range(cfg.n_qubits)] + ["trace_error"]
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(traj.times):
            row = [_fmt(device.time_to_ns(t))]
            row += [_fmt(p[i]) for p in pops]
            row.append(_fmt(trace_err[i]))
            fh.write(",".join(row) + "\n")
    return [path]


def _write_sweep_csv(path: Path, result: analysis.SweepResult, roles) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("gradient_T,initial_state,qubit_role,P_up,verdict\n")
        for point in result.points:
            for verdict in point.verdicts:
                for q, role in enumerate(roles):
                    fh.write(",".join([
                        _fmt(point.gradient),
                        verdict.initial_state,
                        role,
                        _fmt(verdict.p_up[q]),
                        "pass" if verdict.passed else "fail",
                    ]) + "\n")


def run_sweep_mode(spec: RunSpec, out_dir: Path, workers: int) -> list:
    noise = noise_from_spec(spec)
    thresholds = analysis.Thresholds(t_up=spec.t_up, t_down=spec.t_down)
    gradients = sweep_axis(spec)
    paths = []
    for row, fixed in enumerate(spec.fixed_fields):
        template = template_from_spec(spec, fixed)
        result = analysis.run_sweep(template, gradients, noise, thresholds,
                                    workers=workers)
        roles = template.config(gradients[0]).qubit_roles
        path = out_dir / f"sweep_row{row}.csv"
        _write_sweep_csv(path, result, roles)
        paths.append(path)
    return paths


def _role_of(template: analysis.SweepTemplate, limit) -> tuple:
    if limit is None:
        return "", ""
    state, qubit = limit
    roles = template.config(1.0).qubit_roles
    return state, roles[qubit]


def run_ranges(spec: RunSpec, out_dir: Path, workers: int) -> list:
    noise = noise_from_spec(spec)
    thresholds = analysis.Thresholds(t_up=spec.t_up, t_down=spec.t_down)
    gradients = sweep_axis(spec)
    path = out_dir / "ranges.csv"
    if spec.gate == CNOT:
        header = ("b_ac_T,j_ueV,b_target_T,status,"
                  "b_control_min_T,b_control_max_T,open_low,open_high,"
                  "limit_state_low,limit_qubit_low,limit_state_high,limit_qubit_high")
    else:
        header = ("b_ac_T,j12_ueV,j23_ueV,b_left_T,status,"
                  "b_center_min_T,b_center_max_T,b_right_min_T,b_right_max_T,"
                  "open_low,open_high,"
                  "limit_state_low,limit_qubit_low,limit_state_high,limit_qubit_high")
    rows = []
    for fixed in spec.fixed_fields:
        template = template_from_spec(spec, fixed)
        result = analysis.operating_range(template, gradients, noise, thresholds,
                                          workers=workers, refine=spec.sweep_refine)
        if result.empty:
            lo_grad = hi_grad = None
        else:
            lo_grad, hi_grad = result.range_gradients
            if result.refined_low is not None:
                lo_grad = result.refined_low
            if result.refined_high is not None:
                hi_grad = result.refined_high
        state_lo, role_lo = _role_of(template, result.limiting_low)
        state_hi, role_hi = _role_of(template, result.limiting_high)
        if spec.gate == CNOT:
            row = [_fmt(spec.b_ac), _fmt(spec.j), _fmt(fixed)]
            if lo_grad is None:
                row += ["empty", "", "", "", ""]
            else:
                row += ["ok", _fmt(fixed + lo_grad), _fmt(fixed + hi_grad),
                        "true" if result.open_low else "false",
                        "true" if result.open_high else "false"]
            row += [state_lo, role_lo, state_hi, role_hi]
        else:
            row = [_fmt(spec.b_ac), _fmt(spec.j12), _fmt(spec.j23), _fmt(fixed)]
            if lo_grad is None:
                row += ["empty", "", "", "", "", "", ""]
            else:
                row += ["ok",
                        _fmt(fixed + lo_grad), _fmt(fixed + hi_grad),
                        _fmt(fixed + 2 * lo_grad), _fmt(fixed + 2 * hi_grad),
                        "true" if result.open_low else "false",
                        "true" if result.open_high else "false"]
            row += [state_lo, role_lo, state_hi, role_hi]
        rows.append(",".join(row))
    with path.open("w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")
    return [path]


def write_manifest(spec: RunSpec, out_dir: Path, outputs: list,
                   workers: int, extras: dict) -> Path:
    noise = noise_from_spec(spec)
    manifest = {
        "tool": "qdgates",
        "version": __version__,
        "mode": spec.mode,
        "workers": workers,
        "outputs": [p.name for p in outputs],
        "parameters": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in vars(spec).items()},
        "resolved": extras,
        "noise_constants": {
            "upsilon": noise.upsilon,
            "phonon_p": noise.phonon_p,
            "delta_e_nuc": noise.delta_e_nuc,
            "t_k": noise.t_k,
            "t2_star_model_units": noise.t2_star,
        },
    }
    path = out_dir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def run(spec: RunSpec, out_dir: Path, workers: int = None) -> list:
    """Execute a validated RunSpec; returns the list of written files."""
    workers = spec.workers if workers is None else workers
    out_dir.mkdir(parents=True, exist_ok=True)
    extras = {}
    if spec.mode == "simulate":
        outputs = run_simulate(spec, out_dir, extras)
    elif spec.mode == "sweep":
        outputs = run_sweep_mode(spec, out_dir, workers)
    else:
        outputs = run_ranges(spec, out_dir, workers)
    outputs.append(write_manifest(spec, out_dir, outputs, workers, extras))
    return outputs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdgates",
        description="Quantum-dot spin-qubit gate simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep", "ranges"):
        p = sub.add_parser(name, help=f"run in {name} mode")
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="parallel worker count")
        p.add_argument("--seed", default=None,
                       help="accepted for interface compatibility; runs are "
                            "deterministic and the value is ignored")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        spec = parse_config(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if spec.mode != args.command:
        print(f"error: config mode {spec.mode!r} does not match "
              f"subcommand {args.command!r}", file=sys.stderr)
        return 1
    out_dir = Path(args.out) if args.out else Path(spec.output_dir)
    try:
        outputs = run(spec, out_dir, workers=args.workers)
    except Exception as exc:  # propagate any solver/model failure as exit code
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
