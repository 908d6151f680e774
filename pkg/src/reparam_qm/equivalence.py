"""Maps between the real Klein-Gordon field and the square-root wave function.

Forward: ``psi = -sqrt(mu^2 - laplacian) phi - i phi_dot / c``.
Backward: ``phi(t) = k(x) - c * int_0^t Im psi(s) ds`` where ``k`` solves
``sqrt(mu^2 - laplacian) k = -Re psi(0)``.  The time integral is done per
Fourier mode in closed form using the free propagator.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .evolution import (
    EvolutionParams,
    KleinGordonState,
    SchrodingerState,
    evolve_klein_gordon,
    evolve_sqrt_schrodinger,
    mode_frequencies,
)
from .spectral import (
    ComplexField,
    PhysicalConstants,
    RealField,
    apply_multiplier,
    forward_transform,
    norm,
    sqrt_kg_multiplier,
    wavenumbers,
)

__all__ = [
    "MasslessModeError",
    "EquivalenceReport",
    "psi_from_phi",
    "k_profile",
    "phi_from_psi",
    "density_from_phi",
    "sqrt_schrodinger_residual",
    "kg_equation_residual",
    "verify_equivalence",
]

# relative size below which a zero-mode coefficient counts as absent
_ZERO_MODE_TOL = 1e-12


class MasslessModeError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class EquivalenceReport:
    schrodinger_residual: float
    kg_residual: float
    roundtrip_residual: float
    density_residual: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{f.name} must be finite and non-negative, got {value!r}")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def worst(self) -> float:
        return max(self.as_dict().values())


def psi_from_phi(state: KleinGordonState, constants: PhysicalConstants) -> ComplexField:
    root_phi = apply_multiplier(state.phi, sqrt_kg_multiplier(constants)).values
    return ComplexField(state.grid, -root_phi - 1j * state.phi_dot.values / constants.c)


def k_profile(psi1_at_0: RealField, constants: PhysicalConstants) -> RealField:
    """Solve ``sqrt(mu^2 - laplacian) k = -psi1_at_0`` spectrally."""
    grid = psi1_at_0.grid
    coeffs = forward_transform(psi1_at_0)
    root = np.sqrt(constants.mu**2 + wavenumbers(grid) ** 2)
    if root[0] == 0.0:
        scale = max(np.max(np.abs(coeffs)), np.finfo(float).tiny)
        if abs(coeffs[0]) > _ZERO_MODE_TOL * scale:
            raise MasslessModeError(
                "k profile undefined: mu = 0 and the k = 0 mode of Re psi(0) is "
                f"{coeffs[0]:.3e}, nonzero"
            )
        coeffs[0] = 0.0
        root[0] = 1.0
    k_hat = -coeffs / root
    return RealField(grid, np.fft.ifft(k_hat, norm="ortho").real)


def _integrated_psi(psi0: ComplexField, t: float, constants: PhysicalConstants) -> np.ndarray:
    """``int_0^t psi(s) ds`` for the free square-root evolution of ``psi0``."""
    omega = mode_frequencies(psi0.grid, constants)
    safe = np.where(omega > 0, omega, 1.0)
    # (1 - exp(-i w t)) / (i w), with the w -> 0 limit t
    kernel = np.where(omega > 0, (1 - np.exp(-1j * omega * t)) / (1j * safe), t)
    return np.fft.ifft(forward_transform(psi0) * kernel, norm="ortho")


def phi_from_psi(psi0: ComplexField, t: float, constants: PhysicalConstants) -> KleinGordonState:
    """Klein-Gordon state at time ``t`` built from the square-root datum ``psi0``."""
    grid = psi0.grid
    k = k_profile(psi0.real, constants)
    phi = k.values - constants.c * _integrated_psi(psi0, t, constants).imag
    phi_dot = -constants.c * _free_psi(psi0, t, constants).values.imag
    return KleinGordonState(RealField(grid, phi), RealField(grid, phi_dot), t)


def _free_psi(psi0: ComplexField, t: float, constants: PhysicalConstants) -> ComplexField:
    if t == 0:
        return psi0
    omega = mode_frequencies(psi0.grid, constants)
    return ComplexField(
        psi0.grid, np.fft.ifft(forward_transform(psi0) * np.exp(-1j * omega * t), norm="ortho")
    )


def density_from_phi(state: KleinGordonState, constants: PhysicalConstants) -> RealField:
    """``(phi_dot/c)^2 + (sqrt(mu^2 - laplacian) phi)^2`` pointwise."""
    root_phi = apply_multiplier(state.phi, sqrt_kg_multiplier(constants)).values
    return RealField(state.grid, (state.phi_dot.values / constants.c) ** 2 + root_phi**2)


def _relative(err: float, scale: float) -> float:
    return err / scale if scale > 0 else err


def sqrt_schrodinger_residual(state: KleinGordonState, constants: PhysicalConstants) -> float:
    """Per-mode residual of ``[i d_t/c - sqrt(mu^2 - laplacian)] psi`` with
    ``psi = psi_from_phi(state)``.

    ``d_t psi = -sqrt(.) phi_dot - i phi_ddot / c`` where ``phi_ddot`` comes
    from the Klein-Gordon equation of motion.  The result is the max modal
    error relative to the largest modal amplitude of ``psi``.
    """
    c = constants.c
    root = np.sqrt(constants.mu**2 + wavenumbers(state.grid) ** 2)
    phi_hat = forward_transform(state.phi)
    phi_dot_hat = forward_transform(state.phi_dot)
    phi_ddot_hat = -(c**2) * root**2 * phi_hat
    psi_hat = -root * phi_hat - 1j * phi_dot_hat / c
    dpsi_hat = -root * phi_dot_hat - 1j * phi_ddot_hat / c
    err = np.max(np.abs(1j * dpsi_hat / c - root * psi_hat))
    return _relative(float(err), float(np.max(np.abs(psi_hat))))


def kg_equation_residual(psi0: ComplexField, t: float, constants: PhysicalConstants) -> float:
    """Residual of ``phi_tt/c^2 - laplacian phi + mu^2 phi`` for
    ``phi = phi_from_psi(psi0, t)``, relative to the largest modal amplitude
    of ``mu^2 phi - laplacian phi``.

    ``phi_tt = -c d_t Im psi`` with ``d_t psi`` taken analytically per mode.
    """
    c = constants.c
    state = phi_from_psi(psi0, t, constants)
    omega = mode_frequencies(psi0.grid, constants)
    psi_t_hat = forward_transform(_free_psi(psi0, t, constants))
    dpsi = np.fft.ifft(-1j * omega * psi_t_hat, norm="ortho")
    phi_ddot_hat = forward_transform(RealField(psi0.grid, -c * dpsi.imag))
    spatial_hat = (omega / c) ** 2 * forward_transform(state.phi)
    err = np.max(np.abs(phi_ddot_hat / c**2 + spatial_hat))
    return _relative(float(err), float(np.max(np.abs(spatial_hat))))


def verify_equivalence(
    phi0: KleinGordonState, T: float, params: EvolutionParams
) -> EquivalenceReport:
    """Measure both directions of the field/wave-function equivalence.

    * ``schrodinger_residual``: the mapped KG solution at ``T`` against the
      square-root equation (per mode) and against the square-root propagator
      applied to the mapped initial datum; the larger relative error.
    * ``kg_residual``: ``phi_from_psi`` at ``T`` against the KG equation and
      against the directly evolved field; the larger relative error.
    * ``roundtrip_residual``: ``psi -> phi -> psi`` at ``T``, relative norm.
    * ``density_residual``: max pointwise ``||psi|^2 - density_from_phi|``.
    """
    const = params.constants
    steps = T / params.dt
    if T < 0 or abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        raise ValueError(f"T={T} is not a non-negative integer multiple of dt={params.dt}")
    steps = int(round(steps))
    run = EvolutionParams(params.dt, steps, const)

    phi_T = evolve_klein_gordon(phi0, run)
    psi_T = psi_from_phi(phi_T, const)
    psi0 = psi_from_phi(phi0, const)
    psi_T_direct = evolve_sqrt_schrodinger(SchrodingerState(psi0, phi0.time), run).psi
    psi_scale = norm(psi_T)
    schrodinger = max(
        sqrt_schrodinger_residual(phi_T, const),
        _relative(norm(psi_T - psi_T_direct), psi_scale),
    )

    phi_B = phi_from_psi(psi0, T, const)
    phi_scale = np.hypot(norm(phi_T.phi), norm(phi_T.phi_dot) / const.c)
    mismatch = np.hypot(norm(phi_B.phi - phi_T.phi), norm(phi_B.phi_dot - phi_T.phi_dot) / const.c)
    kg = max(kg_equation_residual(psi0, T, const), _relative(mismatch, phi_scale))

    psi_back = psi_from_phi(phi_B, const)
    roundtrip = _relative(norm(psi_back - psi_T_direct), norm(psi_T_direct))

    density = np.max(np.abs(np.abs(psi_T.values) ** 2 - density_from_phi(phi_T, const).values))

    return EquivalenceReport(float(schrodinger), float(kg), float(roundtrip), float(density))
