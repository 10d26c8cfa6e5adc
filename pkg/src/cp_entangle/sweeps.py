"""Batch evaluation: decay maps, concurrence traces, optimal-height search.

Every grid cell is an independent pure evaluation, so sweeps are
deterministic regardless of scheduling; the optional thread pool only
changes wall time, never values or ordering.  The single-emitter rate
depends on the height alone and is computed once per grid row.
"""

from __future__ import annotations

import datetime as _dt
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from . import __version__
from .dynamics import concurrence, evolve_analytical, relative_decay
from .greens import (
    Coupling,
    CouplingSet,
    Geometry,
    MIN_SCALED_HEIGHT,
    gamma_self,
    pair_coupling,
)
from .media import FreeSpace, SurfaceModel
from .numerics import DEFAULT_QUADRATURE, QuadratureError, QuadratureSpec

__all__ = [
    "ConcurrenceAt",
    "SweepSpec",
    "SweepResult",
    "TraceResult",
    "OptimalHeight",
    "BracketError",
    "decay_map",
    "sweep_grid",
    "concurrence_trace",
    "find_optimal_z",
]


@dataclass(frozen=True)
class ConcurrenceAt:
    """Observable: concurrence of the |eg>-evolved state at a fixed scaled time."""

    t_scaled: float

    def __post_init__(self):
        if self.t_scaled < 0:
            raise ValueError("t_scaled must be non-negative")


Observable = Union[str, ConcurrenceAt]

_SCALAR_OBSERVABLES = ("relative_decay", "gamma_self", "gamma_pair", "omega_pair")


@dataclass(frozen=True)
class SweepSpec:
    """Grid description for a map over (x_scaled, z_scaled)."""

    model: SurfaceModel
    dipole_config: Union[str, float] = "xx"
    x_range: tuple[float, float, int] = (0.05, 3.0, 60)
    z_range: tuple[float, float, int] = (0.05, 1.5, 60)
    wavelength: float = 737e-9
    observable: Observable = "relative_decay"
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE

    def __post_init__(self):
        for name, (lo, hi, count) in ("x_range", self.x_range), ("z_range", self.z_range):
            if count < 1:
                raise ValueError(f"{name} count must be >= 1")
            if count > 1 and not lo < hi:
                raise ValueError(f"{name} bounds must increase")
            if lo < 0:
                raise ValueError(f"{name} must be non-negative")
        if not isinstance(self.model, FreeSpace) and self.z_range[0] < MIN_SCALED_HEIGHT:
            raise ValueError(
                f"z_range must stay above {MIN_SCALED_HEIGHT} for surface models"
            )
        if isinstance(self.observable, str) and self.observable not in _SCALAR_OBSERVABLES:
            raise ValueError(
                f"unknown observable {self.observable!r}; expected one of "
                f"{_SCALAR_OBSERVABLES} or ConcurrenceAt"
            )

    def axis(self, which: str) -> np.ndarray:
        lo, hi, count = self.x_range if which == "x" else self.z_range
        return np.linspace(lo, hi, count) if count > 1 else np.array([lo])


@dataclass(frozen=True)
class SweepResult:
    """Grid axes, observable matrix (rows follow z, columns follow x), metadata."""

    x_axis: np.ndarray
    z_axis: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.z_axis), len(self.x_axis)):
            raise ValueError("values shape must be (len(z_axis), len(x_axis))")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sweep produced non-finite cells")


def _cell_value(spec: SweepSpec, self_rate: Coupling, x: float, z: float) -> float:
    geometry = Geometry(x, z, spec.dipole_config, spec.wavelength)
    if spec.observable == "gamma_self":
        return self_rate.total
    g12, o12 = pair_coupling(geometry, spec.model, spec.quadrature)
    if spec.observable == "gamma_pair":
        return g12.total
    if spec.observable == "omega_pair":
        return o12.total
    couplings = CouplingSet(
        gamma_self=self_rate.total,
        gamma_cross=g12.total,
        omega_cross=o12.total,
        gamma_self_scattering=self_rate.scattering,
        gamma_cross_free=g12.free,
        gamma_cross_scattering=g12.scattering,
        omega_cross_free=o12.free,
        omega_cross_scattering=o12.scattering,
    )
    if spec.observable == "relative_decay":
        return relative_decay(couplings).total
    return concurrence(evolve_analytical(couplings, spec.observable.t_scaled))


def _row(spec: SweepSpec, z: float, x_axis: np.ndarray) -> np.ndarray:
    probe = Geometry(0.0, z, spec.dipole_config, spec.wavelength)
    self_rate = gamma_self(probe, spec.model, spec.quadrature)
    row = np.empty(len(x_axis))
    for j, x in enumerate(x_axis):
        try:
            row[j] = _cell_value(spec, self_rate, x, z)
        except QuadratureError as exc:
            raise QuadratureError(
                f"sweep cell (x={x}, z={z}) failed: {exc}",
                estimate=exc.estimate,
                error=exc.error,
            ) from exc
    return row


def sweep_grid(spec: SweepSpec, max_workers: int | None = None) -> SweepResult:
    """Evaluate the observable on the full grid.

    ``max_workers`` > 1 distributes rows over a thread pool; results are
    assembled in grid order either way.
    """
    x_axis = spec.axis("x")
    z_axis = spec.axis("z")
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda z: _row(spec, z, x_axis), z_axis))
    else:
        rows = [_row(spec, z, x_axis) for z in z_axis]
    metadata = {
        "model": repr(spec.model),
        "dipole_config": spec.dipole_config,
        "observable": repr(spec.observable),
        "wavelength": spec.wavelength,
        "quadrature": repr(spec.quadrature),
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    return SweepResult(x_axis, z_axis, np.vstack(rows), metadata)


def decay_map(spec: SweepSpec, max_workers: int | None = None) -> SweepResult:
    """Relative-decay map D(x, z)/Gamma0 over the grid."""
    if spec.observable != "relative_decay":
        raise ValueError("decay_map requires observable='relative_decay'")
    return sweep_grid(spec, max_workers=max_workers)


class TraceResult(NamedTuple):
    """Concurrence time series for the |eg> initial state."""

    times: np.ndarray
    concurrence: np.ndarray
    states: list
    couplings: CouplingSet


def concurrence_trace(
    geometry: Geometry,
    model: SurfaceModel,
    t_max: float,
    samples: int,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> TraceResult:
    """Concurrence on a uniform scaled-time grid via the closed-form solution."""
    if samples < 2:
        raise ValueError("samples must be at least 2")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    from .greens import coupling_set  # local import to keep module load light

    couplings = coupling_set(geometry, model, spec)
    times = np.linspace(0.0, t_max, samples)
    states = [evolve_analytical(couplings, t) for t in times]
    values = np.array([concurrence(s) for s in states])
    return TraceResult(times, values, states, couplings)


class BracketError(RuntimeError):
    """The scan found no single minimum to bracket; carries the samples."""

    def __init__(self, message: str, samples: list[tuple[float, float]]):
        super().__init__(message)
        self.samples = samples


class OptimalHeight(NamedTuple):
    z_scaled: float
    relative_decay: float
    at_boundary: bool


_SCAN_POINTS = 32
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def find_optimal_z(
    model: SurfaceModel,
    dipole_config: Union[str, float],
    x_scaled: float,
    z_bounds: tuple[float, float],
    tolerance: float = 1e-3,
    wavelength: float = 737e-9,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> OptimalHeight:
    """Height minimizing the relative decay at fixed lateral separation.

    A coarse scan brackets the minimum, then golden-section search shrinks
    the bracket to ``tolerance``.  A minimum at a scan boundary is a valid
    outcome (monotone D) and is returned with ``at_boundary=True``.

    Raises
    ------
    BracketError
        If the coarse scan shows several interior minima (non-unimodal
        interval); the samples travel with the exception.
    """
    lo, hi = z_bounds
    if not lo < hi:
        raise ValueError("z_bounds must increase")
    if lo < MIN_SCALED_HEIGHT and not isinstance(model, FreeSpace):
        raise ValueError(f"z_bounds must stay above {MIN_SCALED_HEIGHT}")

    def d_of(z: float) -> float:
        geometry = Geometry(x_scaled, z, dipole_config, wavelength)
        from .greens import coupling_set

        return relative_decay(coupling_set(geometry, model, spec)).total

    zs = np.linspace(lo, hi, _SCAN_POINTS)
    ds = np.array([d_of(z) for z in zs])
    samples = list(zip(zs.tolist(), ds.tolist()))

    interior_minima = [
        i
        for i in range(1, _SCAN_POINTS - 1)
        if ds[i] < ds[i - 1] and ds[i] < ds[i + 1]
    ]
    if len(interior_minima) > 1:
        raise BracketError(
            f"found {len(interior_minima)} interior minima in [{lo}, {hi}]",
            samples,
        )

    i_min = int(np.argmin(ds))
    if i_min in (0, _SCAN_POINTS - 1):
        return OptimalHeight(float(zs[i_min]), float(ds[i_min]), True)

    a, b = zs[i_min - 1], zs[i_min + 1]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = d_of(c), d_of(d)
    while b - a > tolerance:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = d_of(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = d_of(d)
    z_best = 0.5 * (a + b)
    return OptimalHeight(float(z_best), d_of(z_best), False)
