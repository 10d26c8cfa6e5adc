"""Two-emitter open-system dynamics and entanglement measures.

The reduced density matrix lives in the ordered basis
(|ee>, |eg>, |ge>, |gg>).  For the initial states of interest the dynamics
closes on the six elements rho11, rho22, rho33, rho23, rho32, rho44;
coherences outside this sector decay independently and are not propagated.
Time is measured in units of 1/Gamma0 and all rates in Gamma0.

Equal single-emitter Casimir-Polder level shifts commute with everything
in this sector, so they never enter the observable populations and
coherences and are deliberately left out of the propagators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .greens import CouplingSet

__all__ = [
    "TwoQubitState",
    "SymmetricAntisymmetricView",
    "RelativeDecay",
    "StepControlError",
    "evolve_analytical",
    "evolve_numerical",
    "concurrence",
    "relative_decay",
    "steady_state",
    "STEADY_THRESHOLD",
]

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
SECTOR_TOL = 1e-12

# Richardson step-halving acceptance, per unit scaled time.  Kept three
# orders below the positivity floor so trajectories starting on the
# boundary of the state space (pure states) stay valid at every sample.
STEP_ERROR_RATE = 1e-12

STEADY_THRESHOLD = 1e-6

BASIS_LABELS = ("ee", "eg", "ge", "gg")


class SymmetricAntisymmetricView(NamedTuple):
    """Population/coherence combinations that diagonalize the dissipator.

    phi_plus = rho22 + rho33, phi_minus = rho22 - rho33,
    psi_plus = rho23 + rho32, psi_minus = rho23 - rho32.
    """

    phi_plus: complex
    phi_minus: complex
    psi_plus: complex
    psi_minus: complex


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Validated 4x4 density matrix in the (|ee>, |eg>, |ge>, |gg>) basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError("density matrix must be 4x4")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(m.trace() - 1.0) > TRACE_TOL:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(m).min() < -POSITIVITY_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def excited_ground(cls) -> "TwoQubitState":
        """|eg><eg|: first emitter excited, second in the ground state."""
        m = np.zeros((4, 4), dtype=complex)
        m[1, 1] = 1.0
        return cls(m)

    @classmethod
    def ground(cls) -> "TwoQubitState":
        m = np.zeros((4, 4), dtype=complex)
        m[3, 3] = 1.0
        return cls(m)

    @classmethod
    def subradiant(cls) -> "TwoQubitState":
        """(|eg> - |ge>)/sqrt(2) as a pure state."""
        v = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
        return cls(np.outer(v, v))

    @property
    def rho11(self) -> float:
        return self.matrix[0, 0].real

    @property
    def rho22(self) -> float:
        return self.matrix[1, 1].real

    @property
    def rho33(self) -> float:
        return self.matrix[2, 2].real

    @property
    def rho44(self) -> float:
        return self.matrix[3, 3].real

    @property
    def rho23(self) -> complex:
        return complex(self.matrix[1, 2])

    @property
    def rho32(self) -> complex:
        return complex(self.matrix[2, 1])

    def symmetric_antisymmetric_view(self) -> SymmetricAntisymmetricView:
        return SymmetricAntisymmetricView(
            phi_plus=self.rho22 + self.rho33,
            phi_minus=self.rho22 - self.rho33,
            psi_plus=self.rho23 + self.rho32,
            psi_minus=self.rho23 - self.rho32,
        )


def _sector_matrix(r11, r22, r33, r23, r44) -> TwoQubitState:
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = r11
    m[1, 1] = r22
    m[2, 2] = r33
    m[3, 3] = r44
    m[1, 2] = r23
    m[2, 1] = np.conj(r23)
    return TwoQubitState(m)


def evolve_analytical(couplings: CouplingSet, t_scaled: float) -> TwoQubitState:
    """Closed-form state at scaled time t for the |eg> initial state.

    Only the relative-decay combination Gamma -+ Gamma_12 and the coherent
    coupling Omega_12 enter:

        rho11 = 0
        rho44 = 1 - (e^{-(G-G12)t} + e^{-(G+G12)t}) / 2
        phi+  =     (e^{-(G-G12)t} + e^{-(G+G12)t}) / 2
        phi-  = cos(2 O12 t) e^{-G t}
        psi+  =   - (e^{-(G-G12)t} - e^{-(G+G12)t}) / 2
        psi-  = i sin(2 O12 t) e^{-G t}
    """
    if t_scaled < 0:
        raise ValueError("t_scaled must be non-negative")
    g = couplings.gamma_self
    g12 = couplings.gamma_cross
    o12 = couplings.omega_cross

    slow = math.exp(-(g - g12) * t_scaled)
    fast = math.exp(-(g + g12) * t_scaled)
    env = math.exp(-g * t_scaled)

    phi_plus = 0.5 * (slow + fast)
    phi_minus = math.cos(2.0 * o12 * t_scaled) * env
    psi_plus = -0.5 * (slow - fast)
    psi_minus = 1j * math.sin(2.0 * o12 * t_scaled) * env

    r22 = 0.5 * (phi_plus + phi_minus)
    r33 = 0.5 * (phi_plus - phi_minus)
    r23 = 0.5 * (psi_plus + psi_minus)
    r44 = 1.0 - phi_plus
    return _sector_matrix(0.0, r22, r33, r23, r44)


class StepControlError(RuntimeError):
    """Step halving failed to reach the error target."""


def _sector_components(state: TwoQubitState) -> np.ndarray:
    m = state.matrix
    outside = max(
        abs(m[0, 1]), abs(m[0, 2]), abs(m[0, 3]), abs(m[1, 3]), abs(m[2, 3])
    )
    if outside > SECTOR_TOL:
        raise ValueError(
            "initial state has coherences outside the propagated sector "
            f"(|ee>-row / |gg>-column elements up to {outside:.2e})"
        )
    return np.array(
        [state.rho11, state.rho22, state.rho33, state.rho23.real,
         state.rho23.imag, state.rho44]
    )


def _rhs_matrix(g: float, g12: float, o12: float) -> np.ndarray:
    # y = (r11, r22, r33, Re r23, Im r23, r44)
    return np.array(
        [
            [-2 * g, 0, 0, 0, 0, 0],
            [g, -g, 0, -g12, -2 * o12, 0],
            [g, 0, -g, -g12, 2 * o12, 0],
            [g12, -g12 / 2, -g12 / 2, -g, 0, 0],
            [0, o12, -o12, 0, -g, 0],
            [0, g, g, 2 * g12, 0, 0],
        ]
    )


def _rk4(matrix: np.ndarray, y0: np.ndarray, t_grid: np.ndarray, h: float):
    """Classical fixed-step RK4, landing exactly on every grid time.

    The equations are linear and autonomous, so one RK4 step is the fixed
    matrix I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24 and a segment of n
    steps is its n-th power.
    """
    out = [y0.copy()]
    y = y0.copy()
    t = t_grid[0]
    eye = np.eye(matrix.shape[0])
    for t_next in t_grid[1:]:
        span = t_next - t
        steps = max(1, math.ceil(span / h))
        dt = span / steps
        a = dt * matrix
        step_map = eye + a @ (eye + a @ (eye + a @ (eye + a / 4.0) / 3.0) / 2.0)
        y = np.linalg.matrix_power(step_map, steps) @ y
        out.append(y.copy())
        t = t_next
    return np.array(out)


def evolve_numerical(
    couplings: CouplingSet,
    initial: TwoQubitState,
    t_grid: Sequence[float],
) -> list[TwoQubitState]:
    """Propagate an initial state of the closed sector over a time grid.

    The six coupled equations of motion are integrated with a classical
    fourth-order stepper; the step is accepted once halving it changes no
    output component by more than STEP_ERROR_RATE per unit time.

    Parameters
    ----------
    couplings : CouplingSet
    initial : TwoQubitState
        Any state whose only coherences are rho23/rho32 (populations are
        free); anything else is rejected.
    t_grid : sequence of float
        Strictly increasing scaled times starting at 0.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 1:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if t[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if len(t) > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")

    y0 = _sector_components(initial)
    g, g12, o12 = couplings.gamma_self, couplings.gamma_cross, couplings.omega_cross
    matrix = _rhs_matrix(g, g12, o12)

    rate = max(abs(g + g12), 2.0 * abs(o12), 1e-12)
    h = min(0.01, 0.1 / rate)
    t_span = max(t[-1], 1.0)

    coarse = _rk4(matrix, y0, t, h)
    for _ in range(24):
        fine = _rk4(matrix, y0, t, h / 2.0)
        if np.max(np.abs(fine - coarse)) <= STEP_ERROR_RATE * t_span:
            break
        coarse = fine
        h /= 2.0
    else:
        raise StepControlError(
            f"step control failed to reach {STEP_ERROR_RATE} per unit time"
        )

    return [
        _sector_matrix(y[0], y[1], y[2], y[3] + 1j * y[4], y[5]) for y in fine
    ]


_SPIN_FLIP = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=float,
)  # sigma_y (x) sigma_y


def concurrence(state: TwoQubitState) -> float:
    """Wootters concurrence of a two-qubit state, in [0, 1]."""
    rho = state.matrix
    flipped = _SPIN_FLIP @ rho.conj() @ _SPIN_FLIP
    eigenvalues = np.linalg.eigvals(rho @ flipped)
    # tiny negative/imaginary parts are numerical noise on a PSD spectrum
    lam = np.sqrt(np.clip(eigenvalues.real, 0.0, None))
    lam.sort()
    return float(max(0.0, lam[3] - lam[2] - lam[1] - lam[0]))


class RelativeDecay(NamedTuple):
    """D = Gamma - Gamma_12 in Gamma0 units, with its free/scattering split."""

    total: float
    free: float
    scattering: float


def relative_decay(couplings: CouplingSet) -> RelativeDecay:
    """Decay-rate imbalance of the subradiant channel.

    D -> 0 is the condition for the entangled steady state to survive;
    D = D_free + D_sc separates the vacuum and surface contributions.
    """
    total = couplings.gamma_self - couplings.gamma_cross
    free = 1.0 - couplings.gamma_cross_free
    scattering = couplings.gamma_self_scattering - couplings.gamma_cross_scattering
    return RelativeDecay(total, free, scattering)


SteadyFlag = Literal["entangled-steady", "trivial-ground"]


def steady_state(
    couplings: CouplingSet, threshold: float = STEADY_THRESHOLD
) -> tuple[TwoQubitState, SteadyFlag]:
    """Long-time state for the |eg> initial condition.

    When |D| <= threshold the subradiant channel is frozen on any
    practical timescale and the state is the half/half mixture of the
    subradiant Bell state and the ground state (concurrence 1/2);
    otherwise everything decays to |gg>.
    """
    d = relative_decay(couplings).total
    if abs(d) <= threshold:
        m = np.zeros((4, 4), dtype=complex)
        m[1, 1] = m[2, 2] = 0.25
        m[1, 2] = m[2, 1] = -0.25
        m[3, 3] = 0.5
        return TwoQubitState(m), "entangled-steady"
    return TwoQubitState.ground(), "trivial-ground"
