"""Command-line front end: single-point coefficients, maps, traces, presets.

Configuration can come from a JSON file (``--config-file``) whose nested
sections mirror the flags; explicit flags always override file values.
Results are written atomically (temp file + rename) as CSV or JSON with
full double precision, so repeated runs of the same configuration are
byte-identical apart from the metadata timestamp.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import StepControlError, relative_decay
from .greens import (
    CouplingSet,
    Geometry,
    PositivityError,
    coupling_set,
)
from .media import (
    GOLD,
    NIOBIUM,
    Drude,
    FreeSpace,
    PerfectConductor,
    Superconductor,
    SurfaceModel,
)
from .numerics import QuadratureError, QuadratureSpec
from .sweeps import (
    BracketError,
    SweepSpec,
    concurrence_trace,
    decay_map,
    find_optimal_z,
)

__all__ = ["main", "build_parser", "RunConfig", "ConfigError"]

THREADS_ENV = "CP_ENTANGLE_THREADS"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class ConfigError(ValueError):
    """Invalid command line, config file, or parameter combination."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; route through ConfigError so
    # every configuration problem reports the same way with exit code 1
    def error(self, message):
        raise ConfigError(message)


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one invocation; round-trips through a dict."""

    subcommand: str
    surface: str = "free"
    plasma_frequency: float = GOLD.plasma_frequency
    loss_rate: float = GOLD.loss_rate
    critical_temperature: float = NIOBIUM.critical_temperature
    temperature: float = NIOBIUM.temperature
    london_length: float = NIOBIUM.london_length_zero
    conductivity: float = NIOBIUM.conductivity
    dipole_config: str | float = "xx"
    x: float = 1.0
    z: float = 0.2
    wavelength_nm: float = 737.0
    x_min: float = 0.05
    x_max: float = 3.0
    x_count: int = 60
    z_min: float = 0.05
    z_max: float = 1.5
    z_count: int = 60
    t_max: float = 30.0
    samples: int = 301
    z_tolerance: float = 1e-3
    relative_tolerance: float = 1e-10
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 200
    evanescent_cutoff_scale: float = 40.0
    output: str | None = None
    format: str = "csv"
    figure: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)

    def surface_model(self) -> SurfaceModel:
        if self.surface == "free":
            return FreeSpace()
        if self.surface == "perfect":
            return PerfectConductor()
        if self.surface == "drude":
            return Drude(self.plasma_frequency, self.loss_rate)
        if self.surface == "superconductor":
            return Superconductor(
                self.critical_temperature,
                self.temperature,
                self.london_length,
                self.conductivity,
            )
        raise ConfigError(f"unknown surface {self.surface!r}")

    def quadrature(self) -> QuadratureSpec:
        try:
            return QuadratureSpec(
                relative_tolerance=self.relative_tolerance,
                absolute_tolerance=self.absolute_tolerance,
                max_subdivisions=self.max_subdivisions,
                evanescent_cutoff_scale=self.evanescent_cutoff_scale,
            )
        except ValueError as exc:
            raise ConfigError(f"invalid quadrature settings: {exc}") from exc

    @property
    def wavelength(self) -> float:
        return self.wavelength_nm * 1e-9


# config-file keys (section, key) -> argparse dest
_FILE_KEYS = {
    ("surface", "kind"): "surface",
    ("surface", "plasma_frequency"): "plasma_frequency",
    ("surface", "loss_rate"): "loss_rate",
    ("surface", "critical_temperature"): "critical_temperature",
    ("surface", "temperature"): "temperature",
    ("surface", "london_length"): "london_length",
    ("surface", "conductivity"): "conductivity",
    ("geometry", "x"): "x",
    ("geometry", "z"): "z",
    ("geometry", "config"): "dipole_config",
    ("geometry", "wavelength_nm"): "wavelength_nm",
    ("sweep", "x_min"): "x_min",
    ("sweep", "x_max"): "x_max",
    ("sweep", "x_count"): "x_count",
    ("sweep", "z_min"): "z_min",
    ("sweep", "z_max"): "z_max",
    ("sweep", "z_count"): "z_count",
    ("trace", "t_max"): "t_max",
    ("trace", "samples"): "samples",
    ("quadrature", "relative_tolerance"): "relative_tolerance",
    ("quadrature", "absolute_tolerance"): "absolute_tolerance",
    ("quadrature", "max_subdivisions"): "max_subdivisions",
    ("quadrature", "evanescent_cutoff_scale"): "evanescent_cutoff_scale",
    ("output", "path"): "output",
    ("output", "format"): "format",
}


def parse_config_file(text: str) -> dict:
    """Parse a JSON config file into {argparse dest: value}."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config file: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    overrides = {}
    for section, entries in raw.items():
        if not isinstance(entries, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        for key, value in entries.items():
            dest = _FILE_KEYS.get((section, key))
            if dest is None:
                raise ConfigError(f"unknown config entry {section}.{key}")
            overrides[dest] = value
    return overrides


def _add_common(parser: argparse.ArgumentParser, geometry_point: bool):
    parser.add_argument("--config-file", type=Path, default=None,
                        help="JSON file with defaults; flags override")
    parser.add_argument("--surface", choices=("free", "perfect", "drude", "superconductor"),
                        default=None, help="half-space model (default free)")
    parser.add_argument("--plasma-frequency", dest="plasma_frequency", type=float,
                        default=None, help="Drude plasma frequency [rad/s]")
    parser.add_argument("--loss-rate", dest="loss_rate", type=float, default=None,
                        help="Drude loss rate [rad/s]")
    parser.add_argument("--critical-temperature", dest="critical_temperature",
                        type=float, default=None, help="superconductor Tc [K]")
    parser.add_argument("--temperature", type=float, default=None,
                        help="superconductor temperature [K]")
    parser.add_argument("--london-length", dest="london_length", type=float,
                        default=None, help="zero-temperature London length [m]")
    parser.add_argument("--conductivity", type=float, default=None,
                        help="superconductor conductivity [S/m]")
    parser.add_argument("--config", dest="dipole_config", default=None,
                        help="dipole configuration: xx, zz, or tilt angle in radians")
    parser.add_argument("--wavelength-nm", dest="wavelength_nm", type=float,
                        default=None, help="transition wavelength [nm]")
    if geometry_point:
        parser.add_argument("--x", type=float, default=None,
                            help="scaled lateral separation k0*x")
        parser.add_argument("--z", type=float, default=None,
                            help="scaled height k0*z")
    for flag, dest in (
        ("--rtol", "relative_tolerance"),
        ("--atol", "absolute_tolerance"),
    ):
        parser.add_argument(flag, dest=dest, type=float, default=None,
                            help="quadrature tolerance override")
    parser.add_argument("--max-subdivisions", dest="max_subdivisions", type=int,
                        default=None, help="quadrature bisection budget")
    parser.add_argument("--evanescent-cutoff", dest="evanescent_cutoff_scale",
                        type=float, default=None,
                        help="evanescent tail truncation scale")
    parser.add_argument("--output", "-o", default=None, help="output file path")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default csv)")


def _add_grid(parser: argparse.ArgumentParser):
    for flag, typ in (("x-min", float), ("x-max", float), ("x-count", int),
                      ("z-min", float), ("z-max", float), ("z-count", int)):
        parser.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=typ,
                            default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="cp-entangle",
                     description="Surface-modified collective decay and "
                                 "steady-state entanglement of two emitters")
    sub = parser.add_subparsers(dest="subcommand", required=True,
                               parser_class=_Parser)

    p = sub.add_parser("coeffs",
                       help="decay and coupling coefficients at one point")
    _add_common(p, geometry_point=True)

    p = sub.add_parser("decay-map",
                       help="relative-decay map over an (x, z) grid")
    _add_common(p, geometry_point=False)
    _add_grid(p)

    p = sub.add_parser("trace",
                       help="concurrence time series for the |eg> start")
    _add_common(p, geometry_point=True)
    p.add_argument("--tmax", dest="t_max", type=float, default=None,
                   help="final scaled time Gamma0*t")
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("optimal-z",
                       help="height minimizing the relative decay")
    _add_common(p, geometry_point=True)
    p.add_argument("--z-min", dest="z_min", type=float, default=None)
    p.add_argument("--z-max", dest="z_max", type=float, default=None)
    p.add_argument("--ztol", dest="z_tolerance", type=float, default=None)

    p = sub.add_parser("reproduce",
                       help="canned data products for the standard figures")
    p.add_argument("figure", choices=sorted(PRESETS),
                   help="preset identifier")
    _add_common(p, geometry_point=False)
    _add_grid(p)
    p.add_argument("--samples", type=int, default=None)

    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    if getattr(args, "config_file", None) is not None:
        try:
            text = Path(args.config_file).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        overrides = parse_config_file(text)
    merged = {}
    defaults = RunConfig(subcommand=args.subcommand)
    for field_name in RunConfig.__dataclass_fields__:
        if field_name == "subcommand":
            continue
        flag_value = getattr(args, field_name, None)
        if flag_value is not None:
            merged[field_name] = flag_value
        elif field_name in overrides:
            merged[field_name] = overrides[field_name]
        else:
            merged[field_name] = getattr(defaults, field_name)
    config = RunConfig(subcommand=args.subcommand, **merged)
    if isinstance(config.dipole_config, str) and config.dipole_config not in ("xx", "zz"):
        try:
            angle = float(config.dipole_config)
        except ValueError as exc:
            raise ConfigError(
                f"dipole config must be xx, zz or an angle, got {config.dipole_config!r}"
            ) from exc
        config = RunConfig(**{**config.to_dict(), "dipole_config": angle})
    return config


def _workers() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, value)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: Sequence[str], rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: Path, payload: dict):
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _couplings_payload(couplings: CouplingSet) -> dict:
    d = relative_decay(couplings)
    return {
        "gamma_self": couplings.gamma_self,
        "gamma_self_scattering": couplings.gamma_self_scattering,
        "gamma_cross": couplings.gamma_cross,
        "gamma_cross_free": couplings.gamma_cross_free,
        "gamma_cross_scattering": couplings.gamma_cross_scattering,
        "omega_cross": couplings.omega_cross,
        "omega_cross_free": couplings.omega_cross_free,
        "omega_cross_scattering": couplings.omega_cross_scattering,
        "relative_decay": d.total,
        "relative_decay_free": d.free,
        "relative_decay_scattering": d.scattering,
    }


def _cmd_coeffs(config: RunConfig) -> int:
    geometry = Geometry(config.x, config.z, config.dipole_config, config.wavelength)
    couplings = coupling_set(geometry, config.surface_model(), config.quadrature())
    payload = _couplings_payload(couplings)
    for key in ("gamma_self", "gamma_cross", "omega_cross", "relative_decay"):
        print(f"{key} = {_fmt(payload[key])}")
    print(f"relative_decay_free = {_fmt(payload['relative_decay_free'])}")
    print(f"relative_decay_scattering = {_fmt(payload['relative_decay_scattering'])}")
    if config.output:
        write_json(Path(config.output), payload)
    return EXIT_OK


def _sweep_spec(config: RunConfig) -> SweepSpec:
    try:
        return SweepSpec(
            model=config.surface_model(),
            dipole_config=config.dipole_config,
            x_range=(config.x_min, config.x_max, config.x_count),
            z_range=(config.z_min, config.z_max, config.z_count),
            wavelength=config.wavelength,
            observable="relative_decay",
            quadrature=config.quadrature(),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_map(config: RunConfig, result, path: Path):
    if config.format == "json":
        write_json(path, {
            "x_axis": result.x_axis.tolist(),
            "z_axis": result.z_axis.tolist(),
            "values": result.values.tolist(),
            "metadata": result.metadata,
        })
    else:
        rows = (
            (x, z, result.values[i, j])
            for i, z in enumerate(result.z_axis)
            for j, x in enumerate(result.x_axis)
        )
        write_csv(path, ("x", "z", "relative_decay"), rows)


def _cmd_decay_map(config: RunConfig) -> int:
    if config.output is None:
        raise ConfigError("decay-map requires --output")
    result = decay_map(_sweep_spec(config), max_workers=_workers())
    _write_map(config, result, Path(config.output))
    print(f"wrote {config.z_count}x{config.x_count} map to {config.output}")
    return EXIT_OK


TRACE_HEADER = ("t_gamma0", "concurrence", "rho22", "rho33", "rho44",
                "re_rho23", "im_rho23")


def _cmd_trace(config: RunConfig) -> int:
    if config.output is None:
        raise ConfigError("trace requires --output")
    geometry = Geometry(config.x, config.z, config.dipole_config, config.wavelength)
    trace = concurrence_trace(
        geometry, config.surface_model(), config.t_max, config.samples,
        config.quadrature(),
    )
    rows = [
        (t, c, s.rho22, s.rho33, s.rho44, s.rho23.real, s.rho23.imag)
        for t, c, s in zip(trace.times, trace.concurrence, trace.states)
    ]
    path = Path(config.output)
    if config.format == "json":
        write_json(path, {
            "header": list(TRACE_HEADER),
            "rows": [[float(v) for v in row] for row in rows],
            "couplings": _couplings_payload(trace.couplings),
        })
    else:
        write_csv(path, TRACE_HEADER, rows)
    print(f"wrote {len(rows)} samples to {config.output}")
    return EXIT_OK


def _cmd_optimal_z(config: RunConfig) -> int:
    result = find_optimal_z(
        config.surface_model(),
        config.dipole_config,
        config.x,
        (config.z_min, config.z_max),
        tolerance=config.z_tolerance,
        wavelength=config.wavelength,
        spec=config.quadrature(),
    )
    print(f"z_opt = {_fmt(result.z_scaled)}")
    print(f"relative_decay = {_fmt(result.relative_decay)}")
    print(f"at_boundary = {result.at_boundary}")
    if config.output:
        write_json(Path(config.output), {
            "z_opt": result.z_scaled,
            "relative_decay": result.relative_decay,
            "at_boundary": result.at_boundary,
        })
    return EXIT_OK


# ---------------------------------------------------------------------------
# figure presets: pure functions of (figure id, grid overrides)
# ---------------------------------------------------------------------------


def _line_values(model, dipole_config, xs, z, wavelength, quadrature):
    out = []
    for x in xs:
        geometry = Geometry(x, z, dipole_config, wavelength)
        out.append(relative_decay(coupling_set(geometry, model, quadrature)).total)
    return out


def _preset_decay_lines(config: RunConfig, base: Path):
    """D(x) for both dipole configurations, free space and perfect conductor."""
    xs = np.linspace(config.x_min, config.x_max, config.x_count)
    quad = config.quadrature()
    cols = {
        "d_free_xx": _line_values(FreeSpace(), "xx", xs, config.z, config.wavelength, quad),
        "d_free_zz": _line_values(FreeSpace(), "zz", xs, config.z, config.wavelength, quad),
        "d_perfect_xx": _line_values(PerfectConductor(), "xx", xs, config.z, config.wavelength, quad),
        "d_perfect_zz": _line_values(PerfectConductor(), "zz", xs, config.z, config.wavelength, quad),
    }
    rows = zip(xs, *cols.values())
    write_csv(base, ("x", *cols.keys()), rows)
    return [base]


def _preset_map(config: RunConfig, base: Path, model):
    spec = SweepSpec(
        model=model,
        dipole_config=config.dipole_config,
        x_range=(config.x_min, config.x_max, config.x_count),
        z_range=(config.z_min, config.z_max, config.z_count),
        wavelength=config.wavelength,
        observable="relative_decay",
        quadrature=config.quadrature(),
    )
    result = decay_map(spec, max_workers=_workers())
    _write_map(config, result, base)
    return [base]


def _preset_traces(config: RunConfig, base: Path, cases):
    quad = config.quadrature()
    times = None
    columns = []
    for label, model, geometry in cases:
        trace = concurrence_trace(geometry, model, config.t_max, config.samples, quad)
        times = trace.times
        columns.append((label, trace.concurrence))
    rows = zip(times, *(c for _, c in columns))
    write_csv(base, ("t_gamma0", *(label for label, _ in columns)), rows)
    return [base]


def _with_suffix(base: Path, tag: str) -> Path:
    return base.with_name(base.stem + f"_{tag}" + (base.suffix or ".csv"))


def _run_preset(config: RunConfig) -> list[Path]:
    base = Path(config.output)
    figure = config.figure
    wavelength = config.wavelength
    quad = config.quadrature()

    if figure == "fig2a":
        cfg = RunConfig(**{**config.to_dict(), "z": 0.2, "x_count": config.x_count})
        return _preset_decay_lines(cfg, base)

    if figure == "fig3a":
        return _preset_map(config, base, NIOBIUM)
    if figure == "fig3b":
        return _preset_map(config, base, GOLD)

    if figure == "fig3c":
        point = dict(x=1.0, z=0.2)
        cases = [
            ("concurrence_free", FreeSpace(), Geometry(point["x"], point["z"], "xx", wavelength)),
            ("concurrence_perfect", PerfectConductor(), Geometry(point["x"], point["z"], "xx", wavelength)),
            ("concurrence_superconductor", NIOBIUM, Geometry(point["x"], point["z"], "xx", wavelength)),
            ("concurrence_gold", GOLD, Geometry(point["x"], point["z"], "xx", wavelength)),
        ]
        return _preset_traces(config, base, cases)

    if figure == "sm-fig1":
        zs = np.linspace(max(config.z_min, 0.01), config.z_max, config.z_count)
        pc = PerfectConductor()
        from .greens import gamma_self

        rows_a = []
        for z in zs:
            gx = gamma_self(Geometry(0.0, z, "xx", wavelength), pc, quad).total
            gz = gamma_self(Geometry(0.0, z, "zz", wavelength), pc, quad).total
            rows_a.append((z, gx, gz))
        path_a = _with_suffix(base, "a")
        write_csv(path_a, ("z", "gamma_xx", "gamma_zz"), rows_a)

        xs = np.linspace(config.x_min, config.x_max, config.x_count)
        rows_b = zip(
            xs,
            _line_values(pc, "xx", xs, 0.01, wavelength, quad),
            _line_values(pc, "zz", xs, 0.01, wavelength, quad),
        )
        path_b = _with_suffix(base, "b")
        write_csv(path_b, ("x", "d_xx", "d_zz"), rows_b)
        return [path_a, path_b]

    if figure == "sm-fig3":
        xs = np.linspace(config.x_min, config.x_max, config.x_count)
        heights = (0.5, 1.0, 1.5)
        cols = [
            _line_values(GOLD, config.dipole_config, xs, z, wavelength, quad)
            for z in heights
        ]
        rows = zip(xs, *cols)
        write_csv(base, ("x", *(f"d_z{z}" for z in heights)), rows)
        return [base]

    if figure == "sm-fig4":
        heights = (0.2, 0.4, 1.0)
        cases = [
            (f"c_z{z}", GOLD, Geometry(1.0, z, "xx", wavelength)) for z in heights
        ]
        return _preset_traces(config, base, cases)

    if figure == "sm-fig5":
        written = []
        for tag, t_over_tc in (("a", 0.1), ("b", 0.01)):
            model = Superconductor(
                NIOBIUM.critical_temperature,
                t_over_tc * NIOBIUM.critical_temperature,
                NIOBIUM.london_length_zero,
                NIOBIUM.conductivity,
            )
            written.extend(_preset_map(config, _with_suffix(base, tag), model))
        return written

    raise ConfigError(f"unknown figure preset {figure!r}")


PRESETS = (
    "fig2a",
    "fig3a",
    "fig3b",
    "fig3c",
    "sm-fig1",
    "sm-fig3",
    "sm-fig4",
    "sm-fig5",
)


def _cmd_reproduce(config: RunConfig) -> int:
    if config.output is None:
        raise ConfigError("reproduce requires --output")
    written = _run_preset(config)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "coeffs": _cmd_coeffs,
    "decay-map": _cmd_decay_map,
    "trace": _cmd_trace,
    "optimal-z": _cmd_optimal_z,
    "reproduce": _cmd_reproduce,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _resolve(args)
        if args.subcommand == "reproduce":
            config = RunConfig(**{**config.to_dict(), "figure": args.figure})
        return _COMMANDS[args.subcommand](config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, PositivityError, StepControlError, BracketError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
