"""Run orchestration and bit-stable data export.

Outputs per run directory:

* ``config.txt``          -- fully resolved config echo (dotted-key format)
* ``trajectory.csv``      -- time series, columns
    t, re_a, im_a, abs_a, re_b, im_b, abs_b, trace, purity, coherent_overlap
* ``revival_report.json`` -- collapse/revival report plus integration quality
* ``wigner_t<...>.dat``   -- self-describing grid text files (snapshot runs)

All numeric output is rendered with ``%.9e`` (JSON floats are rounded to the
same precision) so repeated runs of one config are byte-identical.  Runs in
combined mode report the single mode in the ``a`` columns and zeros in the
``b`` columns.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import (
    COMBINED_KERR,
    RunConfig,
    SweepSpec,
    config_to_flat,
    format_config_text,
    sweep_to_flat,
)
from .evolve import EvolveOptions, TimeGrid, Trajectory, evolve
from .liouvillian import Superoperator, combined_kerr_liouvillian, liouvillian
from .revival import RevivalReport, detect_revivals
from .states import DensityMatrix, coherent_ket, partial_trace, product_dm, vacuum_ket
from .wigner import WignerField, wigner


def build_problem(config: RunConfig) -> tuple[Superoperator, DensityMatrix]:
    """Assemble the generator and initial state described by a config."""
    config.validate()
    if config.mode == COMBINED_KERR:
        n = config.dims[0]
        return (
            combined_kerr_liouvillian(config.params, n),
            product_dm([coherent_ket(config.alpha, n)]),
        )
    superop = liouvillian(config.params, config.dims)
    kets = [
        coherent_ket(config.alpha, d) if mode == config.storage_mode else vacuum_ket(d)
        for mode, d in enumerate(config.dims)
    ]
    return superop, product_dm(kets)


def simulate(config: RunConfig) -> tuple[Trajectory, RevivalReport]:
    """Evolve one configuration and detect its collapse/revival structure."""
    superop, rho0 = build_problem(config)
    grid = TimeGrid(np.linspace(0.0, config.resolved_horizon(), config.n_samples))
    opts = EvolveOptions(
        rtol=config.rtol,
        atol=config.atol,
        snapshot_times=tuple(config.snapshot_times),
        overlap_alpha=config.alpha,
        overlap_mode=config.analysis_mode(),
    )
    traj = evolve(rho0, superop, grid, opts)
    report = detect_revivals(traj, config.analysis_mode(), config.predicted_revival_time())
    return traj, report


# ---------------------------------------------------------------------------
# writers

def _f(x: float) -> str:
    return f"{x:.9e}"


def _round9(x: float) -> float:
    return float(f"{x:.9e}")


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    a = traj.amplitude_optical
    b = traj.amplitude_mech
    ovl = traj.coherent_overlap
    lines = ["t,re_a,im_a,abs_a,re_b,im_b,abs_b,trace,purity,coherent_overlap"]
    for i, t in enumerate(traj.times):
        cells = [
            _f(t),
            _f(a[i].real), _f(a[i].imag), _f(abs(a[i])),
            _f(b[i].real), _f(b[i].imag), _f(abs(b[i])),
            _f(traj.trace[i]), _f(traj.purity[i]),
            _f(ovl[i]) if ovl is not None else _f(0.0),
        ]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path: Path) -> dict[str, np.ndarray]:
    rows = path.read_text().strip().splitlines()
    header = rows[0].split(",")
    data = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    return {name: data[:, i] for i, name in enumerate(header)}


def report_payload(report: RevivalReport, traj: Trajectory) -> dict:
    payload = report.to_dict()
    payload["quality"] = {
        "max_trace_drift": traj.max_trace_drift,
        "max_hermiticity_error": traj.max_hermiticity_error,
        "n_steps": traj.n_steps,
        "n_rejected": traj.n_rejected,
    }
    return _round_floats(payload)


def _round_floats(obj):
    if isinstance(obj, float):
        return _round9(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_report_json(path: Path, report: RevivalReport, traj: Trajectory) -> None:
    path.write_text(json.dumps(report_payload(report, traj), indent=2, sort_keys=True) + "\n")


def write_wigner_field(path: Path, field: WignerField) -> None:
    g = field.grid
    lines = [
        f"{_f(g.x_min)} {_f(g.x_max)} {g.nx}",
        f"{_f(g.p_min)} {_f(g.p_max)} {g.np}",
    ]
    # one row per p sample, nx columns per row
    for j in range(g.np):
        lines.append(" ".join(_f(v) for v in field.values[:, j]))
    path.write_text("\n".join(lines) + "\n")


def read_wigner_field(path: Path) -> WignerField:
    from .wigner import PhaseSpaceGrid

    lines = path.read_text().strip().splitlines()
    x_min, x_max, nx = lines[0].split()
    p_min, p_max, np_ = lines[1].split()
    grid = PhaseSpaceGrid(
        float(x_min), float(x_max), float(p_min), float(p_max), int(nx), int(np_)
    )
    rows = np.array([[float(v) for v in line.split()] for line in lines[2:]])
    if rows.shape != (grid.np, grid.nx):
        raise ValueError(f"grid file body {rows.shape} does not match header")
    return WignerField(grid, rows.T)


def write_config_echo(path: Path, config: RunConfig) -> None:
    flat = config_to_flat(config)
    flat["time.horizon"] = config.resolved_horizon()
    path.write_text(format_config_text(flat, header="resolved run configuration"))


# ---------------------------------------------------------------------------
# top-level run entry points

def run_single(config: RunConfig, out_dir: Path) -> tuple[Trajectory, RevivalReport]:
    """Simulate one config and write config echo, CSV and JSON report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config_echo(out_dir / "config.txt", config)
    traj, report = simulate(config)
    write_trajectory_csv(out_dir / "trajectory.csv", traj)
    write_report_json(out_dir / "revival_report.json", report, traj)
    return traj, report


def reduced_snapshot(config: RunConfig, state: DensityMatrix) -> DensityMatrix:
    """Reduce a snapshot to the mode selected for phase-space rendering."""
    if config.mode == COMBINED_KERR:
        return state
    return partial_trace(state, config.resolved_wigner_mode())


def run_snapshots(config: RunConfig, out_dir: Path) -> list[Path]:
    """Evolve one config and export a Wigner grid file per snapshot time."""
    if not config.snapshot_times:
        raise ValueError("config has no snapshot times")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config_echo(out_dir / "config.txt", config)
    traj, _ = simulate(config)
    mode = config.resolved_wigner_mode()
    paths = []
    for t, state in traj.snapshots:
        field = wigner(reduced_snapshot(config, state), config.wigner_grid)
        path = out_dir / f"wigner_t{t:.3f}_mode{mode}.dat"
        write_wigner_field(path, field)
        paths.append(path)
    return paths


def _sweep_point(args) -> tuple[float, dict]:
    spec, value, out_dir = args
    config = spec.point_config(value)
    point_dir = Path(out_dir) / f"{spec.axis}_{value:.6g}"
    traj, report = run_single(config, point_dir)
    return value, report_payload(report, traj)


def run_sweep(spec: SweepSpec, out_dir: Path, threads: int = 1) -> list[dict]:
    """Run every sweep point, write per-point artifacts and a summary CSV.

    Points execute as an unordered pool when ``threads > 1``; the summary is
    always aggregated in parameter order, so outputs are identical for any
    thread count.
    """
    spec.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    flat = sweep_to_flat(spec)
    (out_dir / "config.txt").write_text(
        format_config_text(flat, header="resolved sweep configuration")
    )

    jobs = [(spec, value, out_dir) for value in spec.values]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(job) for job in jobs]

    rows = []
    for value, payload in sorted(results, key=lambda item: item[0]):
        rows.append(
            {
                "parameter": value,
                "first_revival_ratio": payload["first_revival_ratio"],
                "n_peaks": payload["n_peaks"],
                "classification": payload["classification"],
            }
        )
    lines = ["parameter,first_revival_ratio,n_peaks,classification"]
    for row in rows:
        lines.append(
            f"{_f(row['parameter'])},{_f(row['first_revival_ratio'])},"
            f"{row['n_peaks']},{row['classification']}"
        )
    (out_dir / "sweep_summary.csv").write_text("\n".join(lines) + "\n")
    return rows
