"""Dyadic Green's tensors for two emitters above a planar half-space.

Everything is expressed in scaled coordinates (positions in units of
1/k0 = c/omega) and rates in units of the free-space spontaneous emission
rate Gamma0, which removes dipole magnitudes and fundamental constants
from the interface.  Internally the tensors are handled in the
dimensionless form g = (6 pi / k0) * G, whose imaginary part is exactly 1
per transverse component at coincidence; decay and coherent-coupling
coefficients are then

    Gamma_ij / Gamma0 =  Im[d1 . g . d2]
    Omega_ij / Gamma0 = -Re[d1 . g . d2] / 2

for unit dipole directions d1, d2.

The scattering tensor is a lateral-wavenumber integral weighted by the
Fresnel coefficients, split into a propagating branch (integrated over the
incidence angle, which removes the branch-point derivative singularity)
and an evanescent branch (exponentially cut off by the height).  Both
dipoles sit at the same scaled height z; their lateral separation is x,
along the x-axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .media import (
    C_LIGHT,
    FreeSpace,
    SurfaceModel,
    fresnel,
    surface_mode_wavenumber,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureError,
    QuadratureSpec,
    bessel_j0_j2,
    integrate_evanescent,
    integrate_finite,
)

__all__ = [
    "MIN_SCALED_HEIGHT",
    "Geometry",
    "Coupling",
    "CouplingSet",
    "PositivityError",
    "greens_free",
    "greens_scattering",
    "gamma_self",
    "gamma_pair",
    "omega_pair",
    "pair_coupling",
    "coupling_set",
]

# below this height the macroscopic surface response is not meaningful and
# the near-field quadratures grow without bound
MIN_SCALED_HEIGHT = 1e-3

DipoleConfig = Union[str, float]


@dataclass(frozen=True)
class Geometry:
    """Two-emitter arrangement in scaled coordinates.

    Attributes
    ----------
    x_scaled : float
        Lateral separation k0 * x >= 0 along the x-axis.
    z_scaled : float
        Common height k0 * z > 0 above the surface.
    dipole_config : 'xx', 'zz' or float
        Both dipoles parallel to the surface ('xx'), perpendicular ('zz'),
        or tilted by an angle (radians) from the x-axis in the x-z plane.
    wavelength : float
        Transition wavelength in meters; fixes k0 = 2 pi / wavelength.
    """

    x_scaled: float
    z_scaled: float
    dipole_config: DipoleConfig = "xx"
    wavelength: float = 737e-9

    def __post_init__(self):
        if self.x_scaled < 0:
            raise ValueError("x_scaled must be non-negative")
        if self.z_scaled <= 0:
            raise ValueError("z_scaled must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if isinstance(self.dipole_config, str):
            if self.dipole_config not in ("xx", "zz"):
                raise ValueError("dipole_config must be 'xx', 'zz' or an angle")
        else:
            float(self.dipole_config)

    @property
    def k0(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def omega0(self) -> float:
        return C_LIGHT * self.k0

    @property
    def tilt_angle(self) -> float:
        if self.dipole_config == "xx":
            return 0.0
        if self.dipole_config == "zz":
            return 0.5 * math.pi
        return float(self.dipole_config)

    @property
    def dipole(self) -> np.ndarray:
        """Unit dipole direction (cos theta, 0, sin theta), shared by both emitters."""
        theta = self.tilt_angle
        return np.array([math.cos(theta), 0.0, math.sin(theta)])


class Coupling(NamedTuple):
    """A rate-like coefficient in Gamma0 units with its free/scattering split."""

    total: float
    free: float
    scattering: float


class PositivityError(ValueError):
    """|Gamma_12| exceeds Gamma beyond tolerance: the dissipation matrix of
    the reduced dynamics would not be positive, which signals a quadrature
    failure rather than physics."""


@dataclass(frozen=True)
class CouplingSet:
    """Reduced-dynamics input coefficients in Gamma0 units.

    gamma_self is the single-emitter decay rate Gamma, gamma_cross the
    dissipative coupling Gamma_12 and omega_cross the coherent dipole-dipole
    coupling Omega_12; each carries its free-space/scattering decomposition.
    """

    gamma_self: float
    gamma_cross: float
    omega_cross: float
    gamma_self_scattering: float = 0.0
    gamma_cross_free: float = 0.0
    gamma_cross_scattering: float = 0.0
    omega_cross_free: float = 0.0
    omega_cross_scattering: float = 0.0

    @classmethod
    def from_rates(cls, gamma_self, gamma_cross, omega_cross) -> "CouplingSet":
        """Synthetic coupling set (e.g. for propagator tests); the scattering
        parts absorb whatever is not the free-space baseline."""
        return cls(
            gamma_self=gamma_self,
            gamma_cross=gamma_cross,
            omega_cross=omega_cross,
            gamma_self_scattering=gamma_self - 1.0,
            gamma_cross_free=gamma_cross,
            gamma_cross_scattering=0.0,
            omega_cross_free=omega_cross,
            omega_cross_scattering=0.0,
        )


# ---------------------------------------------------------------------------
# free-space tensor
# ---------------------------------------------------------------------------


def _free_tensor_scaled(separation: np.ndarray) -> np.ndarray:
    """(6 pi / k0) * G_free for a scaled separation vector (|r| in 1/k0 units)."""
    rho = float(np.linalg.norm(separation))
    if rho <= 0:
        raise ValueError("free-space tensor needs a non-zero separation")
    n = separation / rho
    a = 1.0 + 1j / rho - 1.0 / rho**2
    b = -1.0 - 3j / rho + 3.0 / rho**2
    pref = 1.5 * np.exp(1j * rho) / rho
    return pref * (a * np.eye(3) + b * np.outer(n, n))


def greens_free(x_scaled: float, omega: float) -> np.ndarray:
    """Homogeneous-space dyadic Green's tensor for separation x along x.

    Returns the 3x3 complex tensor in physical units (1/m).  The
    coincidence limit of the imaginary part, omega/(6 pi c) per component,
    is excluded here and enters only through the Gamma0 normalization.
    """
    if x_scaled <= 0:
        raise ValueError("x_scaled must be positive")
    if omega <= 0:
        raise ValueError("omega must be positive")
    k0 = omega / C_LIGHT
    return (k0 / (6.0 * math.pi)) * _free_tensor_scaled(
        np.array([x_scaled, 0.0, 0.0])
    )


def _free_projection(x_scaled: float, d1: np.ndarray, d2: np.ndarray) -> complex:
    """d1 . g_free . d2 for separation x along the x-axis."""
    g = _free_tensor_scaled(np.array([x_scaled, 0.0, 0.0]))
    return complex(d1 @ g @ d2)


# ---------------------------------------------------------------------------
# scattering tensor
# ---------------------------------------------------------------------------


def _pole_breakpoints(model: SurfaceModel, omega: float, k_max: float):
    """Panel seeds around the bound-surface-mode pole of r_p, if present."""
    kappa = surface_mode_wavenumber(model, omega)
    if kappa is None:
        return []
    center, width = kappa.real, max(kappa.imag, 1e-14)
    # geometric ladder of panel edges zooming into the Lorentzian so the
    # bisection budget is spent on the smooth background instead
    ladder = [0.0]
    step = 1.0
    while step * width < 0.3 * center and len(ladder) < 90:
        ladder.extend((step, -step))
        step *= 2.0
    pts = []
    for offset in ladder:
        p = center + offset * width
        if 0.0 < p < k_max:
            pts.append(p)
    return pts


_MAX_OSCILLATION_SEEDS = 4096


def _oscillation_breakpoints(x_scaled: float, z_scaled: float, k_max: float):
    """Half-period lattice of the Bessel factor J(x * sqrt(1 + kappa^2)).

    Beyond a couple of dozen oscillations the bisection budget is better
    spent elsewhere, so panels are pre-aligned with the oscillation where
    the exp(-2 kappa z) envelope still matters.
    """
    if x_scaled <= 0:
        return []
    half_period = math.pi / x_scaled
    if k_max * x_scaled / math.pi <= 24:
        return []
    # cull the lattice where the integrand envelope kappa^2 exp(-2 kappa z)
    # has dropped 13 orders below its peak at kappa = 1/z
    log_cut = 2.0 * math.log(1.0 / z_scaled) - 2.0 + math.log(1e-13)
    pts = []
    for j in range(1, _MAX_OSCILLATION_SEEDS + 1):
        s = j * half_period
        if s <= 1.0:
            continue
        kappa = math.sqrt(s * s - 1.0)
        if kappa >= k_max:
            break
        if kappa > 1.0 and 2.0 * math.log(kappa) - 2.0 * z_scaled * kappa < log_cut:
            break
        pts.append(kappa)
    return pts


def _reflection_projection(
    x_scaled: float,
    z_scaled: float,
    d1: np.ndarray,
    d2: np.ndarray,
    model: SurfaceModel,
    omega: float,
    spec: QuadratureSpec,
) -> complex:
    """d1 . g_sc . d2 via the two-branch wavenumber integral.

    The propagating branch runs over the incidence angle phi with
    k_par = k0 sin(phi); the evanescent branch over kappa = |k_perp|/k0
    with k_par = k0 sqrt(1 + kappa^2).
    """
    k0 = omega / C_LIGHT
    pxx = d1[0] * d2[0]
    pyy = d1[1] * d2[1]
    pzz = d1[2] * d2[2]
    pcross = d1[2] * d2[0] - d1[0] * d2[2]  # zx minus xz weight

    def contracted(s, u, r_s, r_p):
        # s, u: scaled lateral / normal wavenumbers (u complex on the
        # evanescent branch); Bessel arguments are always real
        arg = x_scaled * np.asarray(s, dtype=float)
        j0, j2 = bessel_j0_j2(arg)
        w_s = (j0 + j2) * pxx + (j0 - j2) * pyy
        w_p = (
            -u * u * ((j0 - j2) * pxx + (j0 + j2) * pyy)
            + 2.0 * s * s * j0 * pzz
            + 2j * s * u * j0 * pcross
        )
        return r_s * w_s + r_p * w_p

    def propagating(phi):
        s = np.sin(phi)
        u = np.cos(phi)
        r_s, r_p = fresnel(model, omega, k0 * s)
        return s * np.exp(2j * z_scaled * u) * contracted(s, u, r_s, r_p)

    def evanescent(kappa):
        s = np.sqrt(1.0 + kappa**2)
        u = 1j * kappa
        r_s, r_p = fresnel(model, omega, k0 * s)
        return np.exp(-2.0 * z_scaled * kappa) * contracted(s, u, r_s, r_p)

    try:
        prop = integrate_finite(propagating, 0.0, 0.5 * math.pi, spec)
    except QuadratureError as exc:
        raise QuadratureError(
            f"propagating branch failed at (x={x_scaled}, z={z_scaled}): {exc}",
            estimate=exc.estimate,
            error=exc.error,
        ) from exc
    k_max = spec.evanescent_cutoff_scale / (2.0 * z_scaled)
    seeds = _pole_breakpoints(model, omega, k_max) + _oscillation_breakpoints(
        x_scaled, z_scaled, k_max
    )
    try:
        evan = integrate_evanescent(
            evanescent, 2.0 * z_scaled, spec, breakpoints=seeds
        )
    except QuadratureError as exc:
        raise QuadratureError(
            f"evanescent branch failed at (x={x_scaled}, z={z_scaled}): {exc}",
            estimate=exc.estimate,
            error=exc.error,
        ) from exc

    return 0.75j * prop.value + 0.75 * evan.value


_E_X = np.array([1.0, 0.0, 0.0])
_E_Y = np.array([0.0, 1.0, 0.0])
_E_Z = np.array([0.0, 0.0, 1.0])


def _require_surface_height(geometry: Geometry, model: SurfaceModel):
    if isinstance(model, FreeSpace):
        return
    if geometry.z_scaled < MIN_SCALED_HEIGHT:
        raise ValueError(
            f"z_scaled = {geometry.z_scaled} below the validity floor "
            f"{MIN_SCALED_HEIGHT} for surface calculations"
        )


def greens_scattering(
    geometry: Geometry,
    model: SurfaceModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """Surface-reflected dyadic Green's tensor between the two emitters.

    Returns the 3x3 complex tensor in physical units (1/m) for source at
    emitter 2 and observation at emitter 1 (separation +x).  Only xx, yy,
    zz and the antisymmetric xz/zx pair are non-zero.
    """
    if isinstance(model, FreeSpace):
        raise ValueError("the scattering tensor vanishes in free space")
    _require_surface_height(geometry, model)
    x, z = geometry.x_scaled, geometry.z_scaled
    omega = geometry.omega0

    g = np.zeros((3, 3), dtype=complex)
    for (i, j), (da, db) in {
        (0, 0): (_E_X, _E_X),
        (1, 1): (_E_Y, _E_Y),
        (2, 2): (_E_Z, _E_Z),
        (0, 2): (_E_X, _E_Z),
    }.items():
        try:
            g[i, j] = _reflection_projection(x, z, da, db, model, omega, spec)
        except QuadratureError as exc:
            raise QuadratureError(
                f"component ({'xyz'[i]}{'xyz'[j]}) of the scattering tensor: {exc}",
                estimate=exc.estimate,
                error=exc.error,
            ) from exc
    g[2, 0] = -g[0, 2]
    return (geometry.k0 / (6.0 * math.pi)) * g


# ---------------------------------------------------------------------------
# coupling coefficients
# ---------------------------------------------------------------------------


def gamma_self(
    geometry: Geometry,
    model: SurfaceModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> Coupling:
    """Single-emitter decay rate Gamma/Gamma0 at height z above the surface."""
    if isinstance(model, FreeSpace):
        return Coupling(1.0, 1.0, 0.0)
    _require_surface_height(geometry, model)
    d = geometry.dipole
    val = _reflection_projection(
        0.0, geometry.z_scaled, d, d, model, geometry.omega0, spec
    )
    sc = float(val.imag)
    return Coupling(1.0 + sc, 1.0, sc)


def pair_coupling(
    geometry: Geometry,
    model: SurfaceModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> tuple[Coupling, Coupling]:
    """Cross coefficients (Gamma_12, Omega_12) in Gamma0 units.

    Both come from one complex tensor contraction per branch: the
    dissipative part from the imaginary part of d1.G.d2, the coherent part
    from -1/2 the real part.
    """
    if geometry.x_scaled <= 0:
        raise ValueError("pair coefficients need x_scaled > 0")
    d = geometry.dipole
    free = _free_projection(geometry.x_scaled, d, d)
    if isinstance(model, FreeSpace):
        sc = 0.0 + 0.0j
    else:
        _require_surface_height(geometry, model)
        sc = _reflection_projection(
            geometry.x_scaled, geometry.z_scaled, d, d, model, geometry.omega0, spec
        )
    gamma = Coupling(float(free.imag + sc.imag), float(free.imag), float(sc.imag))
    omega = Coupling(
        -0.5 * float(free.real + sc.real),
        -0.5 * float(free.real),
        -0.5 * float(sc.real),
    )
    return gamma, omega


def gamma_pair(
    geometry: Geometry,
    model: SurfaceModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> Coupling:
    """Dissipative cross coupling Gamma_12/Gamma0."""
    return pair_coupling(geometry, model, spec)[0]


def omega_pair(
    geometry: Geometry,
    model: SurfaceModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> Coupling:
    """Coherent dipole-dipole coupling Omega_12/Gamma0 (near-field 1/x^3 retained)."""
    return pair_coupling(geometry, model, spec)[1]


POSITIVITY_TOLERANCE = 1e-6


def coupling_set(
    geometry: Geometry,
    model: SurfaceModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> CouplingSet:
    """All reduced-dynamics coefficients for one arrangement.

    Raises
    ------
    PositivityError
        If |Gamma_12| > Gamma beyond tolerance; values are never clipped
        because a violation indicates a quadrature failure.
    """
    g_self = gamma_self(geometry, model, spec)
    g12, o12 = pair_coupling(geometry, model, spec)
    if abs(g12.total) > g_self.total + POSITIVITY_TOLERANCE:
        raise PositivityError(
            f"|Gamma_12| = {abs(g12.total):.6e} exceeds Gamma = "
            f"{g_self.total:.6e} at (x={geometry.x_scaled}, z={geometry.z_scaled})"
        )
    return CouplingSet(
        gamma_self=g_self.total,
        gamma_cross=g12.total,
        omega_cross=o12.total,
        gamma_self_scattering=g_self.scattering,
        gamma_cross_free=g12.free,
        gamma_cross_scattering=g12.scattering,
        omega_cross_free=o12.free,
        omega_cross_scattering=o12.scattering,
    )
