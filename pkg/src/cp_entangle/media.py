"""Half-space medium models: dispersion and Fresnel reflection.

Supported media are vacuum (no interface), an idealized perfect conductor,
a Drude metal and a two-fluid London superconductor.  All media are
non-magnetic and local; the superconductor response is only ever needed at
the real transition frequency of the emitters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

__all__ = [
    "C_LIGHT",
    "MU_0",
    "FreeSpace",
    "PerfectConductor",
    "Drude",
    "Superconductor",
    "SurfaceModel",
    "FresnelPair",
    "GOLD",
    "NIOBIUM",
    "permittivity",
    "fresnel",
    "fresnel_nonretarded_superconductor",
    "surface_mode_wavenumber",
]

C_LIGHT = 299792458.0  # m/s
MU_0 = 1.25663706212e-6  # N/A^2


@dataclass(frozen=True)
class FreeSpace:
    """No interface; the scattering contribution vanishes."""


@dataclass(frozen=True)
class PerfectConductor:
    """Ideal mirror: r_s = -1, r_p = +1 for every angle and frequency."""


@dataclass(frozen=True)
class Drude:
    """Metal with permittivity 1 - wp^2 / (w^2 + i*w*g).

    Parameters are angular frequencies in rad/s.
    """

    plasma_frequency: float
    loss_rate: float = 0.0

    def __post_init__(self):
        if self.plasma_frequency <= 0:
            raise ValueError("plasma_frequency must be positive")
        if self.loss_rate < 0:
            raise ValueError("loss_rate must be non-negative")


@dataclass(frozen=True)
class Superconductor:
    """Two-fluid London superconductor below its critical temperature.

    The temperature enters through the London length
    lambda_L^2(T) = lambda_L^2(0) / (1 - (T/Tc)^4) and the skin depth
    delta_L^2(T) = 2 / (w * mu0 * sigma * (T/Tc)^4).
    """

    critical_temperature: float  # K
    temperature: float  # K
    london_length_zero: float  # m
    conductivity: float  # S/m

    def __post_init__(self):
        if self.critical_temperature <= 0:
            raise ValueError("critical_temperature must be positive")
        if not 0 < self.temperature < self.critical_temperature:
            raise ValueError("temperature must satisfy 0 < T < Tc")
        if self.london_length_zero <= 0:
            raise ValueError("london_length_zero must be positive")
        if self.conductivity <= 0:
            raise ValueError("conductivity must be positive")

    @property
    def reduced_temperature(self) -> float:
        return self.temperature / self.critical_temperature


SurfaceModel = Union[FreeSpace, PerfectConductor, Drude, Superconductor]

# parameter sets used throughout the data products
GOLD = Drude(plasma_frequency=1.37e16, loss_rate=5.31e13)
NIOBIUM = Superconductor(
    critical_temperature=8.31,
    temperature=0.01 * 8.31,
    london_length_zero=35e-9,
    conductivity=2e9,
)


class FresnelPair(NamedTuple):
    """Amplitude reflection coefficients for s- and p-polarized waves."""

    r_s: complex
    r_p: complex


def permittivity(model: SurfaceModel, omega: float) -> complex:
    """Relative permittivity of a dispersive half-space at angular frequency omega.

    Only the dispersive media carry a permittivity; the perfect conductor
    and free space are handled directly at the Fresnel level.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if isinstance(model, Drude):
        wp, g = model.plasma_frequency, model.loss_rate
        return 1.0 - wp**2 / (omega**2 + 1j * omega * g)
    if isinstance(model, Superconductor):
        t4 = model.reduced_temperature**4
        lambda_sq = model.london_length_zero**2 / (1.0 - t4)
        delta_sq = 2.0 / (omega * MU_0 * model.conductivity * t4)
        return (
            1.0
            - C_LIGHT**2 / (omega**2 * lambda_sq)
            + 2j * C_LIGHT**2 / (omega**2 * delta_sq)
        )
    raise TypeError(f"no permittivity for surface model {type(model).__name__}")


def _perp_wavenumber(eps_times_k0sq, k_par_sq):
    """sqrt(eps * w^2/c^2 - k_par^2) on the decaying branch (Im >= 0)."""
    kz = np.sqrt(np.asarray(eps_times_k0sq - k_par_sq, dtype=complex))
    return np.where(kz.imag < 0, -kz, kz)


def fresnel(model: SurfaceModel, omega: float, k_par) -> FresnelPair:
    """Fresnel coefficients at angular frequency omega and lateral wavenumber k_par.

    ``k_par`` may be a scalar or an array (rad/m, >= 0); values beyond the
    light line w/c give the evanescent-branch coefficients.  Branches are
    fixed by Im k_perp >= 0 in both half-spaces, so reflected and
    transmitted waves decay away from the interface.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    k_par = np.asarray(k_par, dtype=float)
    if np.any(k_par < 0):
        raise ValueError("k_par must be non-negative")

    if isinstance(model, FreeSpace):
        zero = np.zeros_like(k_par, dtype=complex)
        return FresnelPair(zero + 0.0, zero + 0.0)
    if isinstance(model, PerfectConductor):
        one = np.ones_like(k_par, dtype=complex)
        return FresnelPair(-one, one)

    eps = permittivity(model, omega)
    k0_sq = (omega / C_LIGHT) ** 2
    k_par_sq = k_par**2
    kz0 = _perp_wavenumber(k0_sq, k_par_sq)
    kz1 = _perp_wavenumber(eps * k0_sq, k_par_sq)
    r_s = (kz0 - kz1) / (kz0 + kz1)
    r_p = (eps * kz0 - kz1) / (eps * kz0 + kz1)
    return FresnelPair(r_s, r_p)


def fresnel_nonretarded_superconductor(
    model: Superconductor, omega: float
) -> FresnelPair:
    """Closed-form near-field (k_par >> w/c) limit for a superconductor.

    Cross-check limit of :func:`fresnel`; not used in the main pipeline.
    Returns (0, r_p) with the p-coefficient expressed through the London
    length and skin depth.
    """
    if not isinstance(model, Superconductor):
        raise TypeError("fresnel_nonretarded_superconductor needs a Superconductor")
    if omega <= 0:
        raise ValueError("omega must be positive")
    t4 = model.reduced_temperature**4
    lambda_sq = model.london_length_zero**2 / (1.0 - t4)
    delta_sq = 2.0 / (omega * MU_0 * model.conductivity * t4)
    numerator = delta_sq - 2j * lambda_sq
    r_p = numerator / (numerator - 2 * omega**2 * delta_sq * lambda_sq / C_LIGHT**2)
    return FresnelPair(0.0, r_p)


def surface_mode_wavenumber(model: SurfaceModel, omega: float):
    """Scaled wavenumber kappa* of the bound p-polarized surface mode, if any.

    The reflection coefficient r_p has a pole on the evanescent branch at
    kappa*^2 = -1/(eps + 1) (kappa = k_perp magnitude in units of w/c).
    For weakly lossy media with Re eps < -1 this sits close to the real
    axis and dominates the evanescent integrals.  Returns the complex
    kappa* (Im > 0 for passive media), or None when the medium supports no
    such mode (free space, perfect conductor, or eps outside the bound-mode
    range).
    """
    if isinstance(model, (FreeSpace, PerfectConductor)):
        return None
    eps = permittivity(model, omega)
    kappa_sq = -1.0 / (eps + 1.0)
    if kappa_sq.real <= 0:
        return None
    kappa = complex(np.sqrt(kappa_sq))
    if kappa.real < 0:
        kappa = -kappa
    # heavily damped "modes" are broad humps the quadrature sees unaided
    if abs(kappa.imag) > 0.5 * kappa.real:
        return None
    return kappa
