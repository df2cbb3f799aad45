"""Experiment runner: parameter grids in, deterministic CSV tables out.

Each built-in spec reproduces the data series behind one figure. Grid points
are independent tasks; they run in a process pool when more than one worker
is requested and the rows are always emitted in input order.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, analysis, protocols
from .adiabatic import ground_state
from .core import QDriveError
from .propagator import PropagatorConfig, propagate

EXPERIMENTS = ("fig2d", "fig2e", "fig3c", "fig3d", "fig4a", "fig4b", "custom-sweep")
BUILTIN = EXPERIMENTS[:-1]
COLUMNS = (
    "experiment",
    "series",
    "omega",
    "T",
    "epsilon",
    "axis",
    "deviation",
    "tau",
    "fidelity",
    "time",
    "omega_star",
    "target_fidelity",
    "steps",
    "sample_rule",
    "converged",
    "status",
)
WORKERS_ENV = "QDRIVE_WORKERS"


@dataclass
class ExperimentSpec:
    name: str
    omegas: list = field(default_factory=list)
    durations: list = field(default_factory=list)
    deviations: list = field(default_factory=list)
    kinds: list = field(default_factory=list)
    target_fidelity: Optional[float] = None
    axis: Optional[str] = None
    tau_stride: int = 64
    steps: int = 4096
    sample_rule: str = "magnus4"
    convergence_check: bool = True
    workers: int = 1
    output: Optional[str] = None
    timestamp: bool = False

    def validate(self):
        if self.name not in EXPERIMENTS:
            raise QDriveError(f"unknown experiment {self.name!r}; choose from {EXPERIMENTS}")
        if not self.kinds:
            raise QDriveError(f"{self.name}: no protocol kinds selected")
        grids = {
            "fig2d": ("omegas",),
            "fig2e": ("omegas", "durations"),
            "fig3c": ("omegas", "durations"),
            "fig3d": ("omegas", "durations"),
            "fig4a": ("omegas", "durations", "deviations"),
            "fig4b": ("omegas",),
        }.get(self.name, ("omegas",) if self.target_fidelity is not None else ("omegas", "durations"))
        for g in grids:
            if not getattr(self, g):
                raise QDriveError(f"{self.name}: grid {g!r} is empty")
        PropagatorConfig(steps=self.steps, sample_rule=self.sample_rule)
        return self

    def config(self, convergence: bool | None = None) -> PropagatorConfig:
        return PropagatorConfig(
            steps=self.steps,
            sample_rule=self.sample_rule,
            record_trajectory=False,
            convergence_check=self.convergence_check if convergence is None else convergence,
        )

    def digest(self) -> str:
        d = asdict(self)
        d.pop("output"), d.pop("workers"), d.pop("timestamp")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list
    metadata: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata, sort_keys=True) + "\n")
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _fmt(row.get(k)) for k in COLUMNS})
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path

    def column(self, name, series=None):
        return [r.get(name) for r in self.rows if series is None or r.get("series") == series]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(float(v)) if math.isfinite(v) else "nan"
    return str(v)


def builtin_spec(name: str, **overrides) -> ExperimentSpec:
    """Default grids; ``omega = 0.5`` for fig2d/fig2e, ``0.55`` for fig3c/fig3d, ``(0.5, 5.9)`` for fig4a."""
    defaults = {
        "fig2d": dict(
            omegas=[float(round(x, 2)) for x in np.arange(0.2, 1.01, 0.1)],
            kinds=["composite", "roland_cerf", "lz_linear"],
            target_fidelity=0.9,
        ),
        "fig2e": dict(
            omegas=[0.5],
            durations=[float(round(x, 2)) for x in np.arange(0.5, 20.01, 0.5)],
            kinds=["composite", "roland_cerf", "lz_linear"],
        ),
        "fig3c": dict(
            omegas=[0.55],
            durations=[float(round(x, 2)) for x in np.arange(0.5, 20.01, 0.5)],
            kinds=["superadiabatic_linear", "lz_linear", "lz_omega_only"],
        ),
        "fig3d": dict(
            omegas=[0.55],
            durations=[3.0],
            kinds=["superadiabatic_linear", "superadiabatic_tangent", "lz_linear"],
        ),
        "fig4a": dict(
            omegas=[0.5],
            durations=[5.9],
            deviations=[float(round(x, 3)) for x in np.linspace(-0.5, 1.0, 31)],
            kinds=["superadiabatic_tangent"],
        ),
        "fig4b": dict(
            omegas=[float(round(x, 2)) for x in np.arange(0.1, 1.01, 0.1)],
            kinds=["superadiabatic_tangent", "composite", "roland_cerf", "lz_linear"],
            target_fidelity=0.9,
        ),
    }
    if name not in defaults:
        raise QDriveError(f"no built-in spec named {name!r}")
    return ExperimentSpec(name=name, **{**defaults[name], **overrides})


# --------------------------------------------------------------------------
# grid-point tasks (module level so they pickle)


def _base_row(spec: dict, **kw) -> dict:
    row = {
        "experiment": spec["name"],
        "steps": spec["steps"],
        "sample_rule": spec["sample_rule"],
        "status": "ok",
    }
    row.update(kw)
    return row


def _config(spec: dict, convergence=None) -> PropagatorConfig:
    return PropagatorConfig(
        steps=spec["steps"],
        sample_rule=spec["sample_rule"],
        record_trajectory=False,
        convergence_check=spec["convergence_check"] if convergence is None else convergence,
    )


def _final(spec: dict, schedule) -> tuple[float, Optional[bool]]:
    ref = schedule.fidelity_reference
    traj = propagate(schedule, ground_state(ref.gamma(0.0), ref.omega(0.0)), _config(spec))
    return traj.final_fidelity, traj.converged


def _params(kind, omega, T):
    if kind == "roland_cerf":
        return {"omega": omega, "epsilon": protocols.roland_cerf_epsilon(omega, T)}
    return {"omega": omega, "T": T}


def task_final_fidelity(spec: dict, kind: str, omega: float, T: float) -> list:
    row = _base_row(spec, series=kind, omega=omega, T=T)
    try:
        params = _params(kind, omega, T)
        if kind == "roland_cerf":
            row["epsilon"] = params["epsilon"]
        f, conv = _final(spec, protocols.build(kind, **params))
        row.update(fidelity=f, converged=conv)
    except QDriveError as exc:
        row.update(status=f"error: {exc}")
    return [row]


def task_time(spec: dict, kind: str, omega: float) -> list:
    target = spec["target_fidelity"]
    row = _base_row(spec, series=kind, omega=omega, target_fidelity=target)
    try:
        if kind == "composite":
            s = protocols.composite_pulse(omega)
            f, conv = _final(spec, s)
            row.update(time=s.T, T=s.T, fidelity=f, converged=conv, target_fidelity=None)
        elif kind == "superadiabatic_tangent":
            T_min, w_star = analysis.min_time_at_coupling(omega)
            s = protocols.superadiabatic_tangent(w_star, T_min)
            f, conv = _final(spec, s)
            row.update(time=T_min, T=T_min, omega_star=w_star, fidelity=f, converged=conv, target_fidelity=None)
        else:
            T = analysis.time_to_fidelity(kind, omega, target, _config(spec, convergence=False))
            params = _params(kind, omega, T)
            if kind == "roland_cerf":
                row["epsilon"] = params["epsilon"]
            f, conv = _final(spec, protocols.build(kind, **params))
            row.update(time=T, T=T, fidelity=f, converged=conv)
    except QDriveError as exc:
        row.update(status=f"error: {exc}")
    return [row]


def task_designed(spec: dict, kind: str, omega: float) -> list:
    (row,) = task_time({**spec, "target_fidelity": None}, kind, omega)
    row["series"] = f"{kind}:designed"
    return [row]


def task_trajectory(spec: dict, kind: str, omega: float, T: float) -> list:
    s = protocols.build(kind, **_params(kind, omega, T))
    ref = s.fidelity_reference
    cfg = PropagatorConfig(
        steps=spec["steps"], sample_rule=spec["sample_rule"], convergence_check=spec["convergence_check"]
    )
    traj = propagate(s, ground_state(ref.gamma(0.0), ref.omega(0.0)), cfg)
    stride = max(1, int(spec["tau_stride"]))
    return [
        _base_row(spec, series=kind, omega=omega, T=T, tau=float(tau), fidelity=float(f), converged=traj.converged)
        for tau, f in zip(traj.taus[::stride], traj.fidelities[::stride])
    ]


def task_robustness(spec: dict, kind: str, omega: float, T: float, axis: str) -> list:
    scan = analysis.robustness_scan(kind, {"omega": omega, "T": T}, axis, spec["deviations"], config=_config(spec, False))
    rows = []
    for d, f, skip in zip(scan.deviations, scan.fidelities, scan.skipped):
        rows.append(
            _base_row(
                spec,
                series=f"{kind}:{axis}",
                omega=omega,
                T=T,
                axis=axis,
                deviation=float(d),
                fidelity=None if skip else float(f),
                status="skipped: non-positive parameter" if skip else "ok",
            )
        )
    return rows


def _tasks(spec: ExperimentSpec):
    s = asdict(spec)
    name = spec.name
    if name in ("fig2d", "fig4b") or (name == "custom-sweep" and spec.target_fidelity is not None):
        return [(task_time, (s, k, w)) for w in spec.omegas for k in spec.kinds]
    if name == "fig3d":
        return [(task_trajectory, (s, k, w, T)) for w in spec.omegas for T in spec.durations for k in spec.kinds]
    if name == "fig4a":
        axes = [spec.axis] if spec.axis else ["duration", "coupling"]
        return [
            (task_robustness, (s, k, w, T, ax))
            for w in spec.omegas
            for T in spec.durations
            for k in spec.kinds
            for ax in axes
        ]
    if name == "custom-sweep" and spec.deviations:
        return [
            (task_robustness, (s, k, w, T, spec.axis or "duration"))
            for w in spec.omegas
            for T in spec.durations
            for k in spec.kinds
        ]
    tasks = [(task_final_fidelity, (s, k, w, T)) for k in spec.kinds for w in spec.omegas for T in spec.durations]
    if name == "fig2e" and "composite" in spec.kinds:
        # the composite pulse's own duration is generally off the T grid
        tasks += [(task_designed, (s, "composite", w)) for w in spec.omegas]
    return tasks


def _call(task):
    fn, args = task
    return fn(*args)


def resolve_workers(requested: int | None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise QDriveError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return max(1, int(requested or 1))


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Execute every grid point of ``spec``.

    Failing grid points produce rows whose ``status`` starts with ``error:``;
    the run continues.
    """
    spec.validate()
    tasks = _tasks(spec)
    workers = resolve_workers(spec.workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(min(workers, len(tasks))) as pool:
            chunks = list(pool.map(_call, tasks))
    else:
        chunks = [_call(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    meta = {
        "artifact": "qdrive",
        "version": __version__,
        "experiment": spec.name,
        "config_hash": spec.digest(),
        "spec": {k: v for k, v in asdict(spec).items() if k not in ("output", "workers", "timestamp")},
    }
    if spec.timestamp:
        from datetime import datetime, timezone

        meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    result = ExperimentResult(spec, rows, meta)
    if spec.output:
        result.write(spec.output)
    return result


def run_all(out_dir, workers: int = 1, **overrides) -> dict[str, Path]:
    """Run every built-in spec and write one CSV per figure into ``out_dir``."""
    out = Path(out_dir)
    paths = {}
    for name in BUILTIN:
        spec = builtin_spec(name, workers=workers, **overrides)
        spec.output = str(out / f"{name}.csv")
        run_experiment(spec)
        paths[name] = Path(spec.output)
    return paths


def read_result_csv(path) -> tuple[dict, list[dict]]:
    """Parse a CSV written by :meth:`ExperimentResult.write`."""
    text = Path(path).read_text().splitlines()
    meta = json.loads(text[0][2:])
    rows = list(csv.DictReader(text[1:]))
    return meta, rows
