"""Command-line entry point: ``qdrive {simulate,sweep,figures,export-lattice,selftest}``.

Every flag can also be given in a flat ``key = value`` config file passed with
``--config``; keys are flag names with dashes or underscores, ``#`` starts a
comment and booleans take ``true``/``false``. Flags on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, harness, lattice, protocols
from .adiabatic import ground_state
from .core import KET0, KET1, NonConvergenceError, QDriveError
from .propagator import SAMPLE_RULES, PropagatorConfig, propagate, time_reversed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGED = 3
EXIT_FAILED = 4

KINDS = sorted(protocols.BUILDERS)
TRAJECTORY_COLUMNS = ("tau", "t", "gamma", "omega", "omega_y", "re_c0", "im_c0", "re_c1", "im_c1", "fidelity")

DEFAULTS = {
    "simulate": {"steps": 4096, "sample_rule": "magnus4", "convergence_check": True, "stride": 1},
    "sweep": {
        "experiment": "custom-sweep",
        "steps": 4096,
        "sample_rule": "magnus4",
        "convergence_check": True,
        "workers": 1,
        "timestamp": False,
    },
    "figures": {
        "out_dir": "results",
        "steps": 4096,
        "sample_rule": "magnus4",
        "convergence_check": True,
        "workers": 1,
        "timestamp": False,
    },
    "export-lattice": {
        "samples": lattice.DEFAULT_SAMPLES,
        "recoil_frequency": lattice.DEFAULT_RECOIL_FREQUENCY,
        "slew_duration": 0.0,
    },
    "selftest": {},
}


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _protocol_flags(p: argparse.ArgumentParser):
    p.add_argument("--kind", choices=KINDS, help="protocol kind")
    p.add_argument("--omega", type=float, help="coupling in recoil units")
    p.add_argument("--T", dest="T", type=float, help="duration in units of 1/omega_rec")
    p.add_argument("--epsilon", type=float, help="Roland-Cerf adiabaticity (instead of --T)")
    p.add_argument("--gamma-m", dest="gamma_m", type=float, help="composite pulse: finite impulse height")


def _propagator_flags(p: argparse.ArgumentParser):
    p.add_argument("--steps", type=int, help="propagator steps (default 4096)")
    p.add_argument("--sample-rule", dest="sample_rule", choices=SAMPLE_RULES)
    p.add_argument(
        "--convergence-check",
        dest="convergence_check",
        action=argparse.BooleanOptionalAction,
        help="rerun at twice the steps and fail if the final fidelity moves (default on)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdrive", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qdrive {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help):
        p = sub.add_parser(name, help=help, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="flat key = value file; command-line flags override it")
        return p

    p = add("simulate", "propagate one protocol and write its trajectory")
    _protocol_flags(p)
    _propagator_flags(p)
    p.add_argument("--stride", type=int, help="keep every n-th trajectory point")
    p.add_argument("--out", help="trajectory CSV (default: stdout)")

    p = add("sweep", "run an experiment grid")
    p.add_argument("--experiment", choices=harness.EXPERIMENTS)
    p.add_argument("--kind", dest="kinds", type=_names, help="comma-separated protocol kinds")
    p.add_argument("--omega", dest="omegas", type=_floats, help="comma-separated couplings")
    p.add_argument("--T", dest="durations", type=_floats, help="comma-separated durations")
    p.add_argument("--deviation", dest="deviations", type=_floats, help="comma-separated relative deviations")
    p.add_argument("--axis", choices=("duration", "coupling"))
    p.add_argument("--target-fidelity", dest="target_fidelity", type=float)
    p.add_argument("--tau-stride", dest="tau_stride", type=int)
    _propagator_flags(p)
    p.add_argument("--workers", type=int)
    p.add_argument("--timestamp", action=argparse.BooleanOptionalAction)
    p.add_argument("--out", help="result CSV (default: stdout)")

    p = add("figures", "run every built-in experiment")
    p.add_argument("--out-dir", dest="out_dir")
    _propagator_flags(p)
    p.add_argument("--workers", type=int)
    p.add_argument("--timestamp", action=argparse.BooleanOptionalAction)

    p = add("export-lattice", "write lattice depth/quasimomentum/displacement waveforms")
    _protocol_flags(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--recoil-frequency", dest="recoil_frequency", type=float, help="rad/s")
    p.add_argument("--slew-duration", dest="slew_duration", type=float, help="impulse slew time (1/omega_rec)")
    p.add_argument("--out", help="waveform CSV")
    p.add_argument("--json", help="metadata sidecar (default: CSV path with .json)")

    add("selftest", "check the simulator invariants")
    return parser


def read_config(path) -> list[str]:
    """Turn a flat ``key = value`` file into the equivalent command-line tokens."""
    tokens = []
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        key, value = key.strip().replace("_", "-"), value.strip()
        if not key:
            raise QDriveError(f"{path}:{n}: missing key")
        flag = "--T" if key.lower() == "t" else f"--{key}"
        low = value.lower()
        if low in ("true", "yes", "on"):
            tokens.append(flag)
        elif low in ("false", "no", "off"):
            tokens.append(f"--no-{key}")
        else:
            tokens += [flag, value]
    return tokens


def parse(argv) -> tuple[str, dict]:
    """Merge defaults, config file and flags into one option dict."""
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    opts = dict(DEFAULTS[command])
    flags = vars(args)
    config = flags.pop("config", None)
    if config:
        sub = parser._subparsers._group_actions[0].choices[command]
        try:
            tokens = read_config(config)
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        from_file = vars(sub.parse_args(tokens))
        from_file.pop("config", None)
        opts.update(from_file)
    opts.update(flags)
    opts.pop("command", None)
    return command, opts


def _schedule(opts):
    kind = opts.get("kind")
    if kind is None:
        raise QDriveError("--kind is required")
    params = {k: opts[k] for k in ("omega", "T", "epsilon") if opts.get(k) is not None}
    if opts.get("gamma_m") is not None:
        params.update(Gamma_M=opts["gamma_m"], ideal=False)
    if kind == "roland_cerf" and "epsilon" in params:
        params.pop("T", None)
    return protocols.build(kind, **params)


def cmd_simulate(opts) -> int:
    schedule = _schedule(opts)
    config = PropagatorConfig(
        steps=opts["steps"],
        sample_rule=opts["sample_rule"],
        convergence_check=opts["convergence_check"],
        raise_on_nonconvergence=True,
    )
    ref = schedule.fidelity_reference
    traj = propagate(schedule, ground_state(ref.gamma(0.0), ref.omega(0.0)), config)
    stride = max(1, opts["stride"])
    idx = list(range(0, len(traj), stride))
    if idx[-1] != len(traj) - 1:
        idx.append(len(traj) - 1)
    taus = traj.taus[idx]
    oy = schedule.omega_y
    out = open(opts["out"], "w", newline="") if opts.get("out") else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for k, tau in zip(idx, taus):
            c0, c1 = traj.states[k]
            row = (
                tau,
                tau * schedule.T,
                schedule.gamma(tau),
                schedule.omega(tau),
                0.0 if oy is None else oy(tau),
                c0.real,
                c0.imag,
                c1.real,
                c1.imag,
                traj.fidelities[k],
            )
            writer.writerow([repr(float(x)) for x in row])
    finally:
        if out is not sys.stdout:
            out.close()
    print(
        f"{schedule.kind}: T={schedule.T:.6g} F_final={traj.final_fidelity:.12f}"
        + ("" if traj.convergence_delta is None else f" (doubling steps moves it by {traj.convergence_delta:.2e})"),
        file=sys.stderr,
    )
    for w in schedule.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _nonconverged(rows) -> list[dict]:
    return [r for r in rows if r.get("converged") is False]


def _report_nonconverged(bad, where) -> int:
    for r in bad[:10]:
        print(
            f"non-converged: {where} series={r.get('series')} omega={r.get('omega')} T={r.get('T')}",
            file=sys.stderr,
        )
    print(f"{len(bad)} grid point(s) changed by more than the tolerance when doubling steps", file=sys.stderr)
    return EXIT_NONCONVERGED


def cmd_sweep(opts) -> int:
    name = opts.pop("experiment")
    out = opts.pop("out", None)
    fields = {k: v for k, v in opts.items() if k in harness.ExperimentSpec.__dataclass_fields__}
    if name == "custom-sweep":
        spec = harness.ExperimentSpec(name=name, **fields)
    else:
        spec = harness.builtin_spec(name, **fields)
    if spec.name == "custom-sweep" and spec.target_fidelity is None and not spec.durations:
        raise QDriveError("custom sweep needs --T values or a --target-fidelity")
    result = harness.run_experiment(spec)
    text = result.to_csv()
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    errors = [r for r in result.rows if str(r.get("status", "")).startswith("error")]
    for r in errors:
        print(f"flagged: series={r.get('series')} omega={r.get('omega')} T={r.get('T')}: {r['status']}", file=sys.stderr)
    bad = _nonconverged(result.rows)
    return _report_nonconverged(bad, spec.name) if bad else EXIT_OK


def cmd_figures(opts) -> int:
    out_dir = Path(opts.pop("out_dir"))
    workers = opts.pop("workers")
    paths = harness.run_all(out_dir, workers=workers, **opts)
    status = EXIT_OK
    for name, path in paths.items():
        _, rows = harness.read_result_csv(path)
        print(f"{name}: {len(rows)} rows -> {path}", file=sys.stderr)
        bad = [r for r in rows if r.get("converged") == "false"]
        if bad:
            status = _report_nonconverged(bad, name)
    return status


def cmd_export_lattice(opts) -> int:
    if not opts.get("out"):
        raise QDriveError("--out is required")
    schedule = _schedule(opts)
    controls = lattice.to_lattice_controls(
        schedule, opts["samples"], opts["recoil_frequency"], opts["slew_duration"]
    )
    csv_path, json_path = lattice.write_waveform(controls, opts["out"], opts.get("json"))
    print(f"wrote {csv_path} and {json_path}", file=sys.stderr)
    return EXIT_OK


def selftest_checks() -> list[tuple[str, bool, str]]:
    """Fast invariant checks; each entry is ``(name, passed, detail)``."""
    checks = []
    rng = np.random.default_rng(7)

    disp = lattice.displacement_unitary_check()
    checks.append(("lattice displacement basis", disp["passed"], f"max error {max(disp['errors'].values()):.1e}"))

    s = protocols.superadiabatic_tangent(0.5, 5.9)
    psi0 = ground_state(s.fidelity_reference.gamma(0.0), s.fidelity_reference.omega(0.0))
    traj = propagate(s, psi0, PropagatorConfig(steps=1024))
    norm_err = float(np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1.0)))
    checks.append(("norm preserved", norm_err <= 1e-12, f"max |1 - |psi|| = {norm_err:.1e}"))

    back = propagate(time_reversed(s), traj.final_state.conj(), PropagatorConfig(steps=1024, record_trajectory=False))
    rec = abs(np.vdot(psi0.conj(), back.final_state)) ** 2
    checks.append(("time reversal", rec >= 1 - 1e-9, f"recovery {rec:.15f}"))

    qsl = analysis.quantum_speed_limit(KET0, KET1, 0.5)
    f_comp = analysis.final_fidelity(protocols.composite_pulse(0.5))
    checks.append(("speed limit, orthogonal states", abs(qsl.t_qs - math.pi) < 1e-12, f"T_qs = {qsl.t_qs:.15f}"))
    checks.append(("ideal composite pulse", f_comp >= 1 - 1e-6, f"F = {f_comp:.12f}"))

    lz = protocols.lz_linear(0.55, 2.0)
    sa = protocols.superadiabatic_transform(lz)
    taus = rng.uniform(0.0, 1.0, 16)
    expected = [math.sqrt(0.55**2 + (protocols._alpha(lz, t)) ** 2) for t in taus]
    err = max(abs(sa.omega(t) - e) for t, e in zip(taus, expected))
    checks.append(("transformed coupling", err <= 1e-12, f"max error {err:.1e}"))

    worst = 1.0
    for T in (0.5, 5.0):
        s = protocols.superadiabatic_linear(0.55, T)
        ref = s.fidelity_reference
        f = propagate(s, ground_state(ref.gamma(0.0), ref.omega(0.0)), PropagatorConfig(steps=2048)).fidelities
        worst = min(worst, float(f.min()))
    checks.append(("transitionless following", worst >= 0.9999, f"min F(tau) = {worst:.8f}"))
    return checks


def cmd_selftest(opts) -> int:
    ok = True
    for name, passed, detail in selftest_checks():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "figures": cmd_figures,
    "export-lattice": cmd_export_lattice,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    try:
        command, opts = parse(sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    except QDriveError as exc:
        print(f"qdrive: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[command](opts)
    except NonConvergenceError as exc:
        print(f"qdrive: not converged: {exc} (steps: {exc.coarse!r}, doubled: {exc.fine!r})", file=sys.stderr)
        return EXIT_NONCONVERGED
    except QDriveError as exc:
        print(f"qdrive: error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
