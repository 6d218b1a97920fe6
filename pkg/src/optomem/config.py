"""Run configuration, presets, and the flat dotted-key config file format.

Config files are plain text, one ``key = value`` assignment per line with
``#`` comments.  Values parse as int, float, complex (``1.5+0.5j``), bool
(``true``/``false``), ``none``, ``auto``, comma-separated tuples of the
above, or bare strings.  The same dotted keys are accepted by the CLI's
``--override key=value`` flag.  There is no environment-variable
configuration; a run is fully described by its config echo.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from .liouvillian import SystemParams
from .revival import revival_time
from .wigner import PhaseSpaceGrid

TWO_MODE = "two_mode"
COMBINED_KERR = "combined_kerr"

# Reference parameter set, in atomic units (frequencies quoted as angular).
OMEGA_C_DEFAULT = 2.0 * math.pi * 0.056233
OMEGA_M_DEFAULT = 2.0 * math.pi * 0.151983e-8
G0_DEFAULT = 0.20472e-2
K_DEFAULT = 0.01
GAMMA_DEFAULT = 1e-5

# Default full-state snapshot times for the replication timeline.
DEFAULT_SNAPSHOT_TIMES = (
    0.0, 10.0, 30.0, 50.0, 79.0, 100.0, 125.0, 150.0, 157.0,
    237.0, 314.0, 395.0, 471.0, 553.0, 627.0,
)

SWEEP_AXES = ("gamma", "nonlinearity", "bath_temp", "alpha")


def default_params(**overrides) -> SystemParams:
    base = dict(
        omega_c=OMEGA_C_DEFAULT,
        omega_m=OMEGA_M_DEFAULT,
        k_c=K_DEFAULT,
        k_m=K_DEFAULT,
        g0=G0_DEFAULT,
        gamma_c=GAMMA_DEFAULT,
        gamma_m=GAMMA_DEFAULT,
        bath_temp=0.0,
    )
    base.update(overrides)
    return SystemParams(**base)


@dataclass
class RunConfig:
    """Fully deterministic description of a single simulation run."""

    mode: str = TWO_MODE
    params: SystemParams = field(default_factory=default_params)
    dims: tuple[int, ...] = (10, 10)
    storage_mode: int = 1
    alpha: complex = 1.5 + 0.0j
    horizon: float | None = None  # None resolves to twice the revival period
    n_samples: int = 2000
    snapshot_times: tuple[float, ...] = DEFAULT_SNAPSHOT_TIMES
    wigner_grid: PhaseSpaceGrid = field(
        default_factory=lambda: PhaseSpaceGrid(-5.0, 5.0, -5.0, 5.0, 201, 201)
    )
    wigner_mode: int | str = "storage"
    rtol: float = 1e-8
    atol: float = 1e-10

    def validate(self) -> None:
        if self.mode not in (TWO_MODE, COMBINED_KERR):
            raise ValueError(f"unknown mode {self.mode!r}")
        want_modes = 2 if self.mode == TWO_MODE else 1
        if len(self.dims) != want_modes:
            raise ValueError(
                f"mode {self.mode!r} needs {want_modes} mode dimension(s), got {self.dims}"
            )
        if not 0 <= self.storage_mode < len(self.dims):
            raise ValueError(f"storage_mode {self.storage_mode} out of range")
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise ValueError("alpha must be finite")
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.n_samples < 100:
            raise ValueError(f"n_samples must be >= 100, got {self.n_samples}")
        if isinstance(self.wigner_mode, int) and not 0 <= self.wigner_mode < len(self.dims):
            raise ValueError(f"wigner.mode {self.wigner_mode} out of range")
        horizon = self.resolved_horizon()
        bad = [t for t in self.snapshot_times if t < 0 or t > horizon]
        if bad:
            raise ValueError(f"snapshot times outside [0, {horizon:g}]: {bad}")

    def resolved_horizon(self) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        total_k = self.params.k_c + self.params.k_m
        if total_k <= 0:
            raise ValueError(
                "horizon cannot be derived in the harmonic limit (k_c + k_m = 0); "
                "set time.horizon explicitly"
            )
        return 2.0 * revival_time(self.params.k_c, self.params.k_m)

    def analysis_mode(self) -> int:
        """Mode whose amplitude carries the stored signal."""
        return 0 if self.mode == COMBINED_KERR else self.storage_mode

    def resolved_wigner_mode(self) -> int:
        if self.wigner_mode == "storage":
            return self.analysis_mode()
        return int(self.wigner_mode)

    def predicted_revival_time(self) -> float | None:
        total_k = self.params.k_c + self.params.k_m
        return None if total_k <= 0 else revival_time(self.params.k_c, self.params.k_m)


@dataclass
class SweepSpec:
    """One swept axis over a base run configuration."""

    axis: str
    values: tuple[float, ...]
    base: RunConfig

    def validate(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; choose from {SWEEP_AXES}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError("sweep values must be distinct")
        self.base.validate()

    def point_config(self, value: float) -> RunConfig:
        cfg = replace(self.base)
        if self.axis == "gamma":
            cfg.params = replace(cfg.params, gamma_c=value, gamma_m=value)
        elif self.axis == "nonlinearity":
            cfg.params = replace(cfg.params, k_c=value, k_m=value)
        elif self.axis == "bath_temp":
            cfg.params = replace(cfg.params, bath_temp=value)
        elif self.axis == "alpha":
            cfg.alpha = complex(value)
        else:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        return cfg


# ---------------------------------------------------------------------------
# flat dotted-key representation

_CONFIG_KEYS = (
    "mode",
    "dims",
    "storage_mode",
    "initial.alpha",
    "params.omega_c",
    "params.omega_m",
    "params.k_c",
    "params.k_m",
    "params.g0",
    "params.gamma_c",
    "params.gamma_m",
    "params.bath_temp",
    "time.horizon",
    "time.n_samples",
    "snapshots",
    "wigner.x_min",
    "wigner.x_max",
    "wigner.p_min",
    "wigner.p_max",
    "wigner.nx",
    "wigner.np",
    "wigner.mode",
    "integrator.rtol",
    "integrator.atol",
)

_INT_RE = re.compile(r"^[+-]?\d+$")


def parse_scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    if low == "none":
        return None
    if low == "auto":
        return "auto"
    if _INT_RE.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        pass
    return text


def parse_value(text: str):
    text = text.strip()
    if "," in text:
        return tuple(parse_scalar(part) for part in text.split(",") if part.strip())
    return parse_scalar(text)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, tuple):
        if not value:
            return "none"
        if len(value) == 1:
            return f"{format_value(value[0])},"
        return ", ".join(format_value(v) for v in value)
    if isinstance(value, complex):
        return str(value).strip("()")
    return repr(value) if isinstance(value, float) else str(value)


def config_to_flat(cfg: RunConfig) -> dict:
    p = cfg.params
    g = cfg.wigner_grid
    return {
        "mode": cfg.mode,
        "dims": tuple(cfg.dims),
        "storage_mode": cfg.storage_mode,
        "initial.alpha": cfg.alpha,
        "params.omega_c": p.omega_c,
        "params.omega_m": p.omega_m,
        "params.k_c": p.k_c,
        "params.k_m": p.k_m,
        "params.g0": p.g0,
        "params.gamma_c": p.gamma_c,
        "params.gamma_m": p.gamma_m,
        "params.bath_temp": p.bath_temp,
        "time.horizon": "auto" if cfg.horizon is None else cfg.horizon,
        "time.n_samples": cfg.n_samples,
        "snapshots": tuple(cfg.snapshot_times) if cfg.snapshot_times else None,
        "wigner.x_min": g.x_min,
        "wigner.x_max": g.x_max,
        "wigner.p_min": g.p_min,
        "wigner.p_max": g.p_max,
        "wigner.nx": g.nx,
        "wigner.np": g.np,
        "wigner.mode": cfg.wigner_mode,
        "integrator.rtol": cfg.rtol,
        "integrator.atol": cfg.atol,
    }


def _as_float_tuple(value, key: str) -> tuple[float, ...]:
    if value is None:
        return ()
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, tuple):
        return tuple(float(v) for v in value)
    raise ValueError(f"{key} must be a number or a comma-separated list, got {value!r}")


def config_from_flat(flat: dict) -> RunConfig:
    flat = dict(flat)
    sweep_keys = [k for k in flat if k.startswith("sweep.")]
    if sweep_keys:
        raise ValueError(
            f"config contains sweep keys {sweep_keys}; parse it with sweep_from_flat"
        )
    unknown = sorted(set(flat) - set(_CONFIG_KEYS))
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    base = config_to_flat(RunConfig())
    base.update(flat)

    dims = base["dims"]
    if isinstance(dims, int):
        dims = (dims,)
    horizon = base["time.horizon"]
    horizon = None if horizon in ("auto", None) else float(horizon)
    alpha = base["initial.alpha"]

    params = SystemParams(
        omega_c=float(base["params.omega_c"]),
        omega_m=float(base["params.omega_m"]),
        k_c=float(base["params.k_c"]),
        k_m=float(base["params.k_m"]),
        g0=float(base["params.g0"]),
        gamma_c=float(base["params.gamma_c"]),
        gamma_m=float(base["params.gamma_m"]),
        bath_temp=float(base["params.bath_temp"]),
    )
    grid = PhaseSpaceGrid(
        x_min=float(base["wigner.x_min"]),
        x_max=float(base["wigner.x_max"]),
        p_min=float(base["wigner.p_min"]),
        p_max=float(base["wigner.p_max"]),
        nx=int(base["wigner.nx"]),
        np=int(base["wigner.np"]),
    )
    cfg = RunConfig(
        mode=str(base["mode"]),
        params=params,
        dims=tuple(int(d) for d in dims),
        storage_mode=int(base["storage_mode"]),
        alpha=complex(alpha),
        horizon=horizon,
        n_samples=int(base["time.n_samples"]),
        snapshot_times=_as_float_tuple(base["snapshots"], "snapshots"),
        wigner_grid=grid,
        wigner_mode=base["wigner.mode"],
        rtol=float(base["integrator.rtol"]),
        atol=float(base["integrator.atol"]),
    )
    cfg.validate()
    return cfg


def sweep_to_flat(spec: SweepSpec) -> dict:
    flat = config_to_flat(spec.base)
    flat["sweep.axis"] = spec.axis
    flat["sweep.values"] = tuple(spec.values)
    return flat


def sweep_from_flat(flat: dict) -> SweepSpec:
    flat = dict(flat)
    axis = flat.pop("sweep.axis", None)
    values = flat.pop("sweep.values", None)
    if axis is None or values is None:
        raise ValueError("sweep config needs sweep.axis and sweep.values")
    spec = SweepSpec(
        axis=str(axis),
        values=_as_float_tuple(values, "sweep.values"),
        base=config_from_flat(flat),
    )
    spec.validate()
    return spec


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into a flat dict."""
    flat: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in flat:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        flat[key] = parse_value(value)
    return flat


def format_config_text(flat: dict, header: str = "") -> str:
    lines = [f"# {header}"] if header else []
    ordered = [k for k in _CONFIG_KEYS if k in flat]
    ordered += sorted(k for k in flat if k not in _CONFIG_KEYS)
    for key in ordered:
        lines.append(f"{key} = {format_value(flat[key])}")
    return "\n".join(lines) + "\n"


def load_object(flat: dict):
    """Build a RunConfig or SweepSpec from a flat dict, keyed on sweep.*."""
    if any(k.startswith("sweep.") for k in flat):
        return sweep_from_flat(flat)
    return config_from_flat(flat)


# ---------------------------------------------------------------------------
# presets

def _combined_base(**params_overrides) -> RunConfig:
    return RunConfig(
        mode=COMBINED_KERR,
        params=default_params(**params_overrides),
        dims=(30,),
        storage_mode=0,
        alpha=1.5 + 0.0j,
        horizon=None,
        snapshot_times=(),
    )


def _build_presets() -> dict:
    fig2 = _combined_base()
    fig2.snapshot_times = DEFAULT_SNAPSHOT_TIMES

    fig4 = RunConfig(
        mode=TWO_MODE,
        params=default_params(),
        dims=(10, 10),
        storage_mode=1,
        alpha=1.5 + 0.0j,
        horizon=None,
        snapshot_times=(),
    )

    harmonic = RunConfig(
        mode=TWO_MODE,
        params=default_params(k_c=0.0, k_m=0.0, gamma_c=0.0, gamma_m=0.0),
        dims=(10, 10),
        storage_mode=1,
        alpha=1.5 + 0.0j,
        horizon=628.3185307179587,
        snapshot_times=(),
    )

    return {
        "fig2-combined": fig2,
        "fig4": fig4,
        "harmonic-check": harmonic,
        "fig5": SweepSpec("gamma", (1e-5, 1e-4, 1e-3, 1e-2), _combined_base()),
        "fig6": SweepSpec("nonlinearity", (0.5, 0.05, 0.005, 0.0005), _combined_base()),
        "fig7": SweepSpec("bath_temp", (30e-6, 30e-3, 0.3, 3.0), _combined_base()),
        "fig8": SweepSpec("alpha", (0.1, 0.5, 1.0, 2.0), _combined_base()),
    }


PRESET_NAMES = ("fig2-combined", "fig4", "fig5", "fig6", "fig7", "fig8", "harmonic-check")

PRESET_SUMMARIES = {
    "fig2-combined": "combined-Kerr timeline run with full-state snapshots",
    "fig4": "two-mode amplitude run, storage in the mechanical mode",
    "fig5": "dissipation sweep (gamma = 1e-5 .. 1e-2, combined mode)",
    "fig6": "nonlinearity sweep (k = 0.5 .. 0.0005, combined mode)",
    "fig7": "bath-temperature sweep (30 uK .. 3 K, combined mode)",
    "fig8": "initial-amplitude sweep (alpha = 0.1 .. 2.0, combined mode)",
    "harmonic-check": "harmonic limit: no nonlinearity, no damping",
}


def preset(name: str):
    """Return a fresh RunConfig or SweepSpec for a named preset."""
    presets = _build_presets()
    if name not in presets:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(presets))}"
        )
    return presets[name]
