"""Time propagators for the Schrodinger, square-root and Klein-Gordon equations.

All three share the relativistic mode frequency
``omega_k = c * sqrt(mu^2 + k^2)`` (see :func:`mode_frequencies`), which is
also the angular frequency of the square-root Schrodinger propagator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, TypeVar

import numpy as np

from .spectral import (
    ComplexField,
    GridMismatchError,
    GridSpec,
    PhysicalConstants,
    RealField,
    forward_transform,
    inner_product,
    wavenumbers,
)

__all__ = [
    "UnsupportedConfigurationError",
    "SchrodingerState",
    "KleinGordonState",
    "EvolutionParams",
    "mode_frequencies",
    "evolve_schrodinger",
    "evolve_sqrt_schrodinger",
    "evolve_klein_gordon",
    "kg_energy_density",
    "kg_energy",
    "nonrel_reduce",
    "nonrel_frequency_residual",
    "pt_reality_residual",
    "snapshots",
]


class UnsupportedConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class SchrodingerState:
    psi: ComplexField
    time: float = 0.0

    @property
    def grid(self) -> GridSpec:
        return self.psi.grid


@dataclass(frozen=True)
class KleinGordonState:
    """Real field ``phi`` and its time derivative ``phi_dot`` at ``time``."""

    phi: RealField
    phi_dot: RealField
    time: float = 0.0

    def __post_init__(self):
        if self.phi.grid != self.phi_dot.grid:
            raise GridMismatchError("phi and phi_dot must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.phi.grid

    def __add__(self, other: "KleinGordonState") -> "KleinGordonState":
        return KleinGordonState(self.phi + other.phi, self.phi_dot + other.phi_dot, self.time)

    def __mul__(self, scalar: float) -> "KleinGordonState":
        return KleinGordonState(self.phi * scalar, self.phi_dot * scalar, self.time)

    __rmul__ = __mul__


@dataclass(frozen=True)
class EvolutionParams:
    dt: float
    steps: int
    constants: PhysicalConstants = PhysicalConstants()
    potential: Optional[RealField] = None

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError(f"steps must be a non-negative integer, got {self.steps!r}")

    @property
    def duration(self) -> float:
        return self.steps * self.dt


def mode_frequencies(grid: GridSpec, constants: PhysicalConstants) -> np.ndarray:
    """``omega_k = c * sqrt(mu^2 + k^2)`` on the grid's wavenumbers (FFT order)."""
    k = wavenumbers(grid)
    return constants.c * np.sqrt(constants.mu**2 + k**2)


def evolve_schrodinger(state: SchrodingerState, params: EvolutionParams) -> SchrodingerState:
    """Strang split-step for ``i hbar psi_t = -hbar^2/(2m) psi_xx + V psi``.

    Without a potential the kinetic phase is applied once for the whole
    interval, which is exact for any ``dt``.
    """
    grid = state.grid
    const = params.constants
    if const.mass <= 0:
        raise UnsupportedConfigurationError("nonrelativistic evolution needs mass > 0")
    if params.steps == 0:
        return state
    k = wavenumbers(grid)
    kinetic = const.hbar * k**2 / (2 * const.mass)
    psi = state.psi.values

    if params.potential is None:
        coeffs = np.fft.fft(psi, norm="ortho") * np.exp(-1j * kinetic * params.duration)
        psi = np.fft.ifft(coeffs, norm="ortho")
    else:
        if params.potential.grid != grid:
            raise GridMismatchError("potential grid does not match the state grid")
        half_kick = np.exp(-0.5j * params.potential.values * params.dt / const.hbar)
        drift = np.exp(-1j * kinetic * params.dt)
        for _ in range(params.steps):
            psi = half_kick * psi
            psi = np.fft.ifft(drift * np.fft.fft(psi, norm="ortho"), norm="ortho")
            psi = half_kick * psi

    return SchrodingerState(ComplexField(grid, psi), state.time + params.duration)


def evolve_sqrt_schrodinger(state: SchrodingerState, params: EvolutionParams) -> SchrodingerState:
    """Free ``i hbar psi_t = c sqrt(m^2 c^2 - hbar^2 laplacian) psi``, exact per mode."""
    if params.potential is not None:
        raise UnsupportedConfigurationError(
            "the square-root propagator supports the free particle only (no potential)"
        )
    if params.steps == 0:
        return state
    omega = mode_frequencies(state.grid, params.constants)
    coeffs = forward_transform(state.psi) * np.exp(-1j * omega * params.duration)
    psi = np.fft.ifft(coeffs, norm="ortho")
    return SchrodingerState(ComplexField(state.grid, psi), state.time + params.duration)


def _rotate_modes(phi_hat, phi_dot_hat, omega, span):
    cos = np.cos(omega * span)
    # sin(w t)/w, with the w -> 0 limit t for a massless zero mode
    safe = np.where(omega > 0, omega, 1.0)
    sinc = np.where(omega > 0, np.sin(omega * span) / safe, span)
    new_phi = phi_hat * cos + phi_dot_hat * sinc
    new_phi_dot = -(omega**2) * phi_hat * sinc + phi_dot_hat * cos
    return new_phi, new_phi_dot


def evolve_klein_gordon(state: KleinGordonState, params: EvolutionParams) -> KleinGordonState:
    """Exact mode rotation for ``phi_tt = c^2 (laplacian - mu^2) phi``."""
    if params.steps == 0:
        return state
    grid = state.grid
    omega = mode_frequencies(grid, params.constants)
    phi_hat, phi_dot_hat = _rotate_modes(
        forward_transform(state.phi),
        forward_transform(state.phi_dot),
        omega,
        params.duration,
    )
    phi = np.fft.ifft(phi_hat, norm="ortho")
    phi_dot = np.fft.ifft(phi_dot_hat, norm="ortho")
    return KleinGordonState(
        RealField(grid, phi.real), RealField(grid, phi_dot.real), state.time + params.duration
    )


def kg_energy_density(state: KleinGordonState, constants: PhysicalConstants) -> np.ndarray:
    """Pointwise ``(phi_dot/c)^2 + (sqrt(mu^2 - laplacian) phi)^2``."""
    # local import: equivalence builds on this module
    from .equivalence import psi_from_phi

    psi = psi_from_phi(state, constants).values
    return psi.real**2 + psi.imag**2


def kg_energy(state: KleinGordonState, constants: PhysicalConstants) -> float:
    return float(np.sum(kg_energy_density(state, constants)) * state.grid.spacing)


def nonrel_reduce(state: SchrodingerState, constants: PhysicalConstants) -> ComplexField:
    """Strip the rest-energy phase: ``chi = exp(+i m c^2 t / hbar) psi``.

    The sign is the one that cancels the ``exp(-i m c^2 t / hbar)`` carried by
    positive-frequency solutions.
    """
    phase = np.exp(1j * constants.rest_energy * state.time / constants.hbar)
    return ComplexField(state.grid, phase * state.psi.values)


def nonrel_frequency_residual(
    constants: PhysicalConstants, mode: int = 1, t: float = 1.0, grid: Optional[GridSpec] = None
) -> float:
    """Angular-frequency gap between the reduced relativistic and the
    nonrelativistic evolution of the plane wave with index ``mode``.

    Both evolutions are run numerically; the returned value is the phase of
    the overlap ``<chi_nonrel(t), chi_rel(t)>`` divided by ``t``.
    """
    if grid is None:
        grid = GridSpec(64, 2 * np.pi)
    k = 2 * np.pi * mode / grid.length
    psi0 = SchrodingerState(ComplexField(grid, np.exp(1j * k * grid.x)), 0.0)
    params = EvolutionParams(dt=t, steps=1, constants=constants)
    chi_rel = nonrel_reduce(evolve_sqrt_schrodinger(psi0, params), constants)
    chi_nonrel = evolve_schrodinger(psi0, params).psi
    phase = np.angle(np.vdot(chi_nonrel.values, chi_rel.values))
    return abs(phase) / t


def pt_reality_residual(states: Sequence[SchrodingerState], hbar: float = 1.0) -> float:
    """``max |Im <psi, i hbar d_t psi>| / <psi, psi>`` over interior snapshots.

    ``d_t psi`` comes from central differences, so the result is
    ``O(dt^2)`` for solutions of an equation with a hermitian generator and
    of order ``hbar`` when the norm is not conserved.
    """
    if len(states) < 3:
        raise ValueError("need at least 3 snapshots")
    times = np.array([s.time for s in states], dtype=float)
    steps = np.diff(times)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-9, atol=0):
        raise ValueError("snapshots must be equally spaced in increasing time")
    worst = 0.0
    for prev, cur, nxt in zip(states, states[1:], states[2:]):
        dpsi = ComplexField(cur.grid, (nxt.psi.values - prev.psi.values) / (2 * dt))
        mean_pt = inner_product(cur.psi, dpsi) * 1j * hbar
        mass = inner_product(cur.psi, cur.psi).real
        if mass > 0:
            worst = max(worst, abs(mean_pt.imag) / mass)
    return worst


S = TypeVar("S", SchrodingerState, KleinGordonState)


def snapshots(
    evolve: Callable[[S, EvolutionParams], S], state: S, params: EvolutionParams, stride: int = 1
) -> Iterator[S]:
    """Yield ``state`` and then every ``stride``-th step of ``params.steps``."""
    if stride <= 0 or params.steps % stride:
        raise ValueError(f"stride {stride} must divide steps {params.steps}")
    chunk = EvolutionParams(params.dt, stride, params.constants, params.potential)
    yield state
    for _ in range(params.steps // stride):
        state = evolve(state, chunk)
        yield state
