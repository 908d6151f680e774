"""
Three propagators and one dispersion relation
==============================================

The nonrelativistic split-step solver, the square-root equation and the
Klein-Gordon mode rotation, run side by side.
"""

import numpy as np

from reparam_qm import (
    ComplexField,
    EvolutionParams,
    GridSpec,
    KleinGordonState,
    PhysicalConstants,
    RealField,
    SchrodingerState,
    evolve_klein_gordon,
    evolve_schrodinger,
    evolve_sqrt_schrodinger,
    kg_energy,
    norm,
)

# A free Gaussian spreads as sigma(t)^2 = sigma^2 + (hbar t / 2 m sigma)^2.
grid = GridSpec(512, 40.0)
x = grid.x - grid.length / 2
psi = ComplexField(grid, np.exp(-(x**2) / 4))
psi = psi * (1 / norm(psi))
const = PhysicalConstants()


def span(t):
    # zero steps is the identity
    return EvolutionParams(t, 1, const) if t > 0 else EvolutionParams(1.0, 0, const)


for t in (0.0, 1.0, 2.0, 4.0):
    out = evolve_schrodinger(SchrodingerState(psi), span(t)).psi
    rho = np.abs(out.values) ** 2 * grid.spacing
    mean = np.sum(rho * x)
    width = np.sqrt(np.sum(rho * (x - mean) ** 2))
    print(f"t={t:3.1f}  width={width:.10f}  analytic={np.sqrt(1 + t**2 / 4):.10f}")

# In a harmonic trap the split-step scheme is second order: halving dt cuts
# the error by four.
V = RealField(grid, 0.5 * x**2)
shifted = ComplexField(grid, np.exp(-((x - 1) ** 2) / 2))
shifted = SchrodingerState(shifted * (1 / norm(shifted)))


def trapped(dt):
    return evolve_schrodinger(shifted, EvolutionParams(dt, int(round(1 / dt)), const, V)).psi


errors = [norm(trapped(dt) - trapped(dt / 2)) for dt in (0.1, 0.05, 0.025)]
print("split-step error ratios:", [round(a / b, 3) for a, b in zip(errors, errors[1:])])

# The square-root equation rotates each plane wave by exp(-i c sqrt(mu^2+k^2) t).
box = GridSpec(64, 2 * np.pi)
wave = ComplexField(box, np.exp(1j * box.x))
out = evolve_sqrt_schrodinger(SchrodingerState(wave), EvolutionParams(3.0, 1, const)).psi
print(f"phase after t=3: {np.angle(out.values[0]):+.6f}, expected {np.angle(np.exp(-3j * np.sqrt(2))):+.6f}")

# Klein-Gordon: a cosine launched with phi_dot = omega sin travels to the right,
# and the field energy stays fixed.
omega = np.sqrt(2.0)
state = KleinGordonState(RealField(box, np.cos(box.x)), RealField(box, omega * np.sin(box.x)))
for t in (0.0, 1.0, 5.0):
    out = evolve_klein_gordon(state, span(t))
    err = np.max(np.abs(out.phi.values - np.cos(box.x - omega * t)))
    print(f"t={t}: traveling-wave error {err:.1e}, energy {kg_energy(out, const):.12f}")
